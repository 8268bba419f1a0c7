//! Plain-text rendering of a [`RunReport`].

use std::fmt::Write;

use crate::report::*;

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn list(values: &[f64]) -> String {
    let items: Vec<_> = values.iter().map(|v| format!("{v}")).collect();
    format!("[{}]", items.join(", "))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

pub fn render(report: &RunReport) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "{} ({}, seed {})", report.command.name(), report.schema_version, report.seed);
    for warning in &report.warnings {
        let _ = writeln!(w, "warning: {warning}");
    }
    if let Some(s) = &report.validate {
        validate(w, s);
    }
    if let Some(s) = &report.fixed_points {
        fixed_points(w, s);
    }
    if let Some(s) = &report.operators {
        operators(w, s);
    }
    if let Some(s) = &report.sequential {
        sequential(w, s);
    }
    if let Some(s) = &report.evolve {
        evolve(w, s);
    }
    if let Some(s) = &report.chsh {
        chsh(w, s);
    }
    let _ = writeln!(w, "\noverall: {}", verdict(report.pass));
    out
}

fn validate(w: &mut String, s: &ValidateSection) {
    let _ = writeln!(w, "\nsystem: M = {}", s.space_size);
    for o in &s.observables {
        let _ = writeln!(w, "  observable {:<8} outcomes {} multiplicities {:?}", o.name, list(&o.outcomes), o.multiplicities);
    }
    for k in &s.kernels {
        let _ = writeln!(
            w,
            "  kernel {:<8} {:<9} {:<8} leakage {:.3e} block rows {:.3e}",
            k.observable,
            format!("{:?}", k.kind).to_lowercase(),
            format!("{:?}", k.source).to_lowercase(),
            k.max_leakage,
            k.max_block_row_deviation
        );
    }
    if let Some(d) = &s.dynamics {
        let _ = writeln!(w, "  dynamics {:?} dt {}", d.kind, d.dt);
    }
    let _ = writeln!(w, "  state {} ({:?})", list(&s.state.probs), s.state.source);
    if let Some(b) = &s.bell {
        let _ = writeln!(w, "  bell {:?}, {} hidden states, {} grid points", b.model, b.size, b.grid_points);
    }
    let _ = writeln!(w, "  config valid");
}

fn fixed_points(w: &mut String, s: &FixedPointsSection) {
    let _ = writeln!(w, "\nfixed points (tol {:e})", s.tolerance);
    for k in &s.kernels {
        let _ = writeln!(
            w,
            "  {:<8} {:<9} residuals {:<40} {}",
            k.observable,
            format!("{:?}", k.kind).to_lowercase(),
            list(&k.residuals),
            verdict(k.pass)
        );
    }
}

fn operators(w: &mut String, s: &OperatorsSection) {
    let _ = writeln!(w, "\noperators");
    for o in &s.observables {
        let _ = writeln!(w, "  {} in {}: {}", o.observable, o.basis, verdict(o.pass));
        let _ = writeln!(w, "    T = I          defect {:.3e}  {}", o.transfer_identity_defect, verdict(o.transfer_pass));
        let _ = writeln!(
            w,
            "    eigenvalues    {}  vs outcomes {}  error {}  {}",
            o.eigenvalues.as_deref().map_or_else(|| "-".to_string(), list),
            list(&o.outcomes),
            opt(o.spectrum_error),
            verdict(o.eigen_pass)
        );
        if let Some(c) = &o.complex {
            let _ = writeln!(
                w,
                "    {:<14} hermiticity {:.3e} spectrum {:.3e}  {}",
                c.basis,
                c.hermiticity_defect,
                c.spectrum_error,
                verdict(c.pass)
            );
        }
        if let Some(t) = &o.trace_rule {
            let _ = writeln!(
                w,
                "    Tr(rho A) = {}  classical {}  diff {:.3e}  {}",
                t.trace,
                t.classical,
                t.difference,
                verdict(t.pass)
            );
        }
        for e in &o.errors {
            let _ = writeln!(w, "    error: {e}");
        }
    }
    if !s.commutators.is_empty() {
        let _ = writeln!(w, "  commutators");
        for c in &s.commutators {
            let _ = writeln!(w, "    ||[{}, {}]||_F = {:.12} in {}", c.first, c.second, c.frobenius_norm, c.basis);
        }
    }
}

fn sequential(w: &mut String, s: &SequentialSection) {
    let _ = writeln!(w, "\nsequential measurements, state {}", list(&s.state));
    for r in &s.repeatability {
        let _ = writeln!(
            w,
            "  repeat {:<8} ({}) off-diagonal {:.3e}  {}",
            r.observable,
            r.protocol,
            r.max_off_diagonal,
            verdict(r.pass)
        );
    }
    for p in &s.pairs {
        let _ = writeln!(
            w,
            "  {} then {}: order gap {:.12} ({}), non-fragile gap {:.3e}  {}",
            p.first,
            p.second,
            p.with_kernels.order_gap,
            p.with_kernels.protocol,
            p.non_fragile.order_gap,
            verdict(p.non_fragile.pass == Some(true))
        );
    }
}

fn evolve(w: &mut String, s: &EvolveSection) {
    let _ = writeln!(w, "\nevolution in {} (dt {})", s.basis, s.dt);
    let _ = writeln!(w, "  U^T U = I        defect {:.3e}  {}", s.unitarity_defect, verdict(s.unitarity_pass));
    if let Some(g) = &s.generator {
        let _ = writeln!(
            w,
            "  generator        round trip {:.3e} hermiticity {:.3e}  {}",
            g.round_trip_error,
            g.hermiticity_defect,
            verdict(g.pass)
        );
    }
    if let Some(t) = &s.transport {
        let _ = writeln!(w, "  diagonal transport error {:.3e} purity {} -> {}  {}", t.max_error, t.purity_before, t.purity_after, verdict(t.pass));
    }
    for p in &s.outcome_propagators {
        let _ = writeln!(w, "  {} propagator unitarity defect {:.3e} (reported)", p.basis, p.unitarity_defect);
    }
    for e in &s.errors {
        let _ = writeln!(w, "  error: {e}");
    }
}

fn chsh(w: &mut String, s: &ChshSection) {
    let _ = writeln!(w, "\nchsh ({:?}, {})", s.model, if s.local { "local" } else { "non-local" });
    let _ = writeln!(
        w,
        "  local strategies: max |S| = {} over {}  {}",
        s.oracle.max_abs_s,
        s.oracle.strategies_visited,
        verdict(s.oracle.pass)
    );
    let r = &s.result;
    let _ = writeln!(w, "  settings {}", list(&r.settings));
    let _ = writeln!(w, "  correlations {}", list(&r.correlations));
    let _ = writeln!(w, "  |S| = {:.10}  violation = {}", r.abs_s, r.violation);
    if let Some(e) = s.singlet_identity_error {
        let _ = writeln!(w, "  singlet identity error {e:.3e}");
    }
    if let Some(g) = &s.grid {
        let _ = writeln!(w, "  grid: {} points, max |S| = {:.10}", g.points, g.max_abs_s);
        for e in &g.top {
            let _ = writeln!(w, "    {}  |S| = {:.10}", list(&e.settings), e.abs_s);
        }
    }
    let _ = writeln!(w, "  {}", verdict(s.pass));
}
