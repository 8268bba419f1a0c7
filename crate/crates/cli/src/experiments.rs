//! The verification experiments behind each subcommand.

use fragile_core::bell::{local_strategy_oracle, LOCAL_BOUND, VIOLATION_TOL};
use fragile_core::kernels::Admissibility;
use fragile_core::prelude::*;
use nalgebra::DMatrix;

use crate::config::{BellEntry, System};
use crate::report::*;

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn protocol_name(p: Protocol) -> String {
    match p {
        Protocol::Fragile => "fragile",
        Protocol::NonFragile => "non-fragile",
    }
    .to_string()
}

pub fn validate(sys: &System) -> ValidateSection {
    let observables = sys
        .observables
        .iter()
        .map(|o| ObservableSummary {
            name: o.name().to_string(),
            outcomes: o.outcomes().to_vec(),
            multiplicities: o.multiplicities(),
        })
        .collect();
    let kernels = sys
        .kernels
        .iter()
        .map(|k| {
            let obs = &sys.observables[k.observable];
            let Admissibility {
                max_leakage,
                max_block_row_deviation,
            } = k.kernel.admissibility(obs).expect("sizes checked on load");
            KernelSummary {
                observable: obs.name().to_string(),
                kind: k.kind,
                source: k.source,
                seed: k.seed,
                num_perms: k.num_perms,
                max_leakage,
                max_block_row_deviation,
            }
        })
        .collect();
    ValidateSection {
        space_size: sys.space.size(),
        labels: sys.space.labels().map(<[String]>::to_vec),
        observables,
        kernels,
        dynamics: sys.dynamics.as_ref().map(|d| DynamicsSummary {
            kind: d.kind,
            dt: d.dt,
            map: d.kernel.map().map(<[usize]>::to_vec),
        }),
        state: StateSummary {
            source: sys.state_source,
            probs: sys.state.probs().to_vec(),
            sharp: sys.state.is_sharp(),
        },
        bell: sys.bell.as_ref().map(|b| BellSummary {
            model: b.kind,
            seed: b.seed,
            size: b.model.size(),
            grid_points: b.grid.as_ref().map_or(0, |g| g.len()),
        }),
    }
}

pub fn fixed_points(sys: &System) -> FixedPointsSection {
    let tol = sys.tolerances.fixed_point;
    let kernels: Vec<_> = sys
        .kernels
        .iter()
        .map(|k| {
            let obs = &sys.observables[k.observable];
            let r = check_fixed_points(&k.kernel, obs, tol).expect("sizes checked on load");
            FixedPointEntry {
                observable: obs.name().to_string(),
                kind: k.kind,
                source: k.source,
                pass: r.all_pass(),
                max_residual: r.max_residual(),
                outcomes: r.outcomes,
                residuals: r.residuals,
                passes: r.passes,
            }
        })
        .collect();
    FixedPointsSection {
        tolerance: tol,
        pass: kernels.iter().all(|k| k.pass),
        kernels,
    }
}

pub fn operators(sys: &System) -> OperatorsSection {
    let observables: Vec<_> = (0..sys.observables.len()).map(|i| operator_entry(sys, i)).collect();

    let mut commutators = Vec::new();
    for (i, x) in sys.observables.iter().enumerate() {
        let basis = build_basis(x, BasisMode::Outcome);
        let op_x = build_observable_operator(x, &sys.primary_kernel(i).kernel, &basis).expect("sizes checked");
        for (j, y) in sys.observables.iter().enumerate().skip(i + 1) {
            let op_y = build_observable_operator(y, &sys.primary_kernel(j).kernel, &basis).expect("sizes checked");
            let c = commutator(&op_x, &op_y).expect("same basis");
            commutators.push(CommutatorEntry {
                first: x.name().to_string(),
                second: y.name().to_string(),
                basis: basis.tag().to_string(),
                frobenius_norm: c.frobenius_norm,
            });
        }
    }
    OperatorsSection {
        pass: observables.iter().all(|o| o.pass),
        observables,
        commutators,
    }
}

fn operator_entry(sys: &System, i: usize) -> OperatorEntry {
    let tol = sys.tolerances;
    let obs = &sys.observables[i];
    let entry = sys.primary_kernel(i);
    let basis = build_basis(obs, BasisMode::Outcome);
    let transfer = build_transfer(&entry.kernel, &basis).expect("sizes checked");
    let op = build_observable_operator(obs, &entry.kernel, &basis).expect("sizes checked");
    let n = basis.dim();
    let target = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(obs.outcomes()));
    let diagonal_error = (&op.entries - target).amax();
    let transfer_identity_defect = transfer.identity_defect();
    let mut errors = Vec::new();

    let eig = eigensolve(&op).map_err(|e| errors.push(format!("eigensolve: {e}"))).ok();
    let (eigenvalues, max_eigen_residual, spectrum_error) = match &eig {
        Some(eig) => (
            Some(eig.eigenvalues.clone()),
            Some(eig.residuals(&op).into_iter().fold(0.0, f64::max)),
            Some(max_abs_diff(&eig.eigenvalues, obs.outcomes())),
        ),
        None => (None, None, None),
    };
    let eigen_pass = diagonal_error <= tol.equality
        && max_eigen_residual.is_some_and(|r| r <= tol.spectrum)
        && spectrum_error.is_some_and(|e| e <= tol.equality);

    let psi = ComplexBasisChange::fourier(n);
    let complex = to_complex(&op, &psi)
        .and_then(|x| {
            let values = eigensolve(&x)?.eigenvalues;
            let t = to_complex(&transfer, &psi)?;
            Ok((x, values, t))
        })
        .map_err(|e| errors.push(format!("complex basis: {e}")))
        .ok()
        .map(|(x, values, t)| {
            let hermiticity_defect = x.hermiticity_defect();
            let spectrum_error = eigenvalues.as_deref().map_or(f64::INFINITY, |v| max_abs_diff(&values, v));
            ComplexEntry {
                basis: x.basis.to_string(),
                hermiticity_defect,
                spectrum_error,
                transfer_unitarity_defect: t.unitarity_defect(),
                pass: hermiticity_defect <= tol.equality && spectrum_error <= tol.spectrum,
            }
        });

    let trace_rule = eig.as_ref().and_then(|eig| {
        let dist = outcome_distribution(obs, &sys.state).expect("sizes checked");
        let built = build_density(eig, dist.probs())
            .and_then(|rho| Ok((trace_expectation(&rho, &op)?, rho.checks()?)));
        match built {
            Ok((trace, checks)) => {
                let classical = classical_expectation(obs, &sys.state).expect("sizes checked");
                let difference = (trace - classical).abs();
                Some(TraceRuleEntry {
                    outcome_probs: dist.probs().to_vec(),
                    trace,
                    classical,
                    difference,
                    density_hermiticity_defect: checks.hermiticity_defect,
                    density_trace: checks.trace,
                    density_min_eigenvalue: checks.min_eigenvalue,
                    purity: checks.purity,
                    pass: difference <= tol.trace && checks.valid(tol.trace),
                })
            }
            Err(e) => {
                errors.push(format!("density: {e}"));
                None
            }
        }
    });

    let transfer_pass = transfer_identity_defect <= tol.equality;
    let pass = errors.is_empty()
        && transfer_pass
        && eigen_pass
        && complex.as_ref().is_some_and(|c| c.pass)
        && trace_rule.as_ref().is_some_and(|t| t.pass);
    OperatorEntry {
        observable: obs.name().to_string(),
        basis: basis.tag().to_string(),
        kernel: entry.kind,
        outcomes: obs.outcomes().to_vec(),
        transfer_identity_defect,
        transfer_pass,
        matrix: rows(&op.entries),
        diagonal_error,
        eigenvalues,
        max_eigen_residual,
        spectrum_error,
        eigen_pass,
        complex,
        trace_rule,
        errors,
        pass,
    }
}

fn comparison(
    first: (&Observable, &MeasurementKernel),
    second: (&Observable, &MeasurementKernel),
    state: &KnowledgeState,
) -> JointComparison {
    let forward = sequential_joint(first, second, state).expect("sizes checked");
    let reverse = sequential_joint(second, first, state).expect("sizes checked");
    JointComparison {
        protocol: protocol_name(forward.protocol),
        order_gap: forward.total_variation(&reverse.transpose()).expect("shapes agree"),
        forward: forward.probs,
        reverse: reverse.probs,
        pass: None,
    }
}

pub fn sequential(sys: &System) -> SequentialSection {
    let tol = sys.tolerances.equality;
    let identity = identity_kernel(&sys.space);
    let repeatability: Vec<_> = sys
        .observables
        .iter()
        .enumerate()
        .map(|(i, obs)| {
            let k = &sys.primary_kernel(i).kernel;
            let joint = sequential_joint((obs, k), (obs, k), &sys.state).expect("sizes checked");
            let max_off_diagonal = joint.max_off_diagonal();
            RepeatabilityEntry {
                observable: obs.name().to_string(),
                protocol: protocol_name(joint.protocol),
                max_off_diagonal,
                pass: max_off_diagonal <= tol,
            }
        })
        .collect();

    let mut pairs = Vec::new();
    for (i, x) in sys.observables.iter().enumerate() {
        for (j, y) in sys.observables.iter().enumerate().skip(i + 1) {
            let with_kernels = comparison(
                (x, &sys.primary_kernel(i).kernel),
                (y, &sys.primary_kernel(j).kernel),
                &sys.state,
            );
            let mut non_fragile = comparison((x, &identity), (y, &identity), &sys.state);
            non_fragile.pass = Some(non_fragile.order_gap <= tol);
            pairs.push(PairEntry {
                first: x.name().to_string(),
                second: y.name().to_string(),
                with_kernels,
                non_fragile,
            });
        }
    }
    SequentialSection {
        state_source: sys.state_source,
        state: sys.state.probs().to_vec(),
        pass: repeatability.iter().all(|r| r.pass) && pairs.iter().all(|p| p.non_fragile.pass == Some(true)),
        repeatability,
        pairs,
    }
}

pub fn evolve(sys: &System) -> Option<EvolveSection> {
    let dynamics = sys.dynamics.as_ref()?;
    let tol = sys.tolerances;
    let lambda = sys.space.maximal_observable();
    let full = build_basis(&lambda, BasisMode::Full);
    let u = build_propagator(&dynamics.kernel, &full).expect("sizes checked");
    let unitarity_pass = u.unitarity_defect <= tol.unitarity;
    let mut errors = Vec::new();

    let generator = extract_generator(&u.operator, dynamics.dt)
        .map_err(|e| errors.push(format!("generator: {e}")))
        .ok()
        .map(|g| {
            let mut eigenphases = g.eigenphases.clone();
            eigenphases.sort_by(f64::total_cmp);
            let hermiticity_defect = g.hermiticity_defect();
            let round_trip_error = g.round_trip_error(&u.operator);
            GeneratorEntry {
                eigenphases,
                hermiticity_defect,
                round_trip_error,
                pass: hermiticity_defect <= tol.equality && round_trip_error <= tol.generator,
            }
        });

    let transport = (|| -> fragile_core::Result<TransportEntry> {
        let position = build_observable_operator(&lambda, &identity_kernel(&sys.space), &full)?;
        let rho = build_density(&eigensolve(&position)?, sys.state.probs())?;
        let evolved = evolve_density(&rho, &u.operator)?;
        let moved = apply_kernel(&sys.state, &dynamics.kernel)?;
        let evolved_diagonal = evolved.diagonal();
        let max_error = max_abs_diff(&evolved_diagonal, moved.probs());
        let (purity_before, purity_after) = (rho.purity(), evolved.purity());
        Ok(TransportEntry {
            initial: sys.state.probs().to_vec(),
            pass: max_error <= tol.trace
                && (purity_after - purity_before).abs() <= tol.trace
                && evolved.checks()?.valid(tol.trace),
            evolved_diagonal,
            kernel_evolved: moved.probs().to_vec(),
            max_error,
            purity_before,
            purity_after,
        })
    })()
    .map_err(|e| errors.push(format!("transport: {e}")))
    .ok();

    let outcome_propagators = sys
        .observables
        .iter()
        .map(|obs| {
            let basis = build_basis(obs, BasisMode::Outcome);
            let p = build_propagator(&dynamics.kernel, &basis).expect("sizes checked");
            OutcomePropagatorEntry {
                observable: obs.name().to_string(),
                basis: basis.tag().to_string(),
                unitarity_defect: p.unitarity_defect,
            }
        })
        .collect();

    let pass = errors.is_empty()
        && unitarity_pass
        && generator.as_ref().is_some_and(|g| g.pass)
        && transport.as_ref().is_some_and(|t| t.pass);
    Some(EvolveSection {
        kind: dynamics.kind,
        dt: dynamics.dt,
        basis: full.tag().to_string(),
        map: dynamics.kernel.map().map(<[usize]>::to_vec),
        unitarity_defect: u.unitarity_defect,
        unitarity_pass,
        generator,
        transport,
        outcome_propagators,
        errors,
        pass,
    })
}

fn chsh_entry(r: &ChshResult) -> ChshEntry {
    ChshEntry {
        settings: r.settings.as_array(),
        correlations: r.correlations,
        s: r.s,
        abs_s: r.s.abs(),
        violation: r.violation,
    }
}

pub fn chsh_experiment(sys: &System) -> Option<ChshSection> {
    let BellEntry {
        kind,
        model,
        seed,
        settings,
        grid,
        top,
    } = sys.bell.as_ref()?;
    let local = model.is_local();
    let bound = local_strategy_oracle();
    let oracle = OracleEntry {
        max_abs_s: bound.max_abs_s,
        strategies_visited: bound.strategies_visited,
        pass: bound.max_abs_s == LOCAL_BOUND && bound.strategies_visited == 16,
    };
    let r = chsh(model.as_ref(), *settings);
    let singlet_identity_error = (*kind == crate::config::BellModelType::Singlet).then(|| {
        let [a, a_prime, b, b_prime] = settings.as_array();
        [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)]
            .iter()
            .zip(r.correlations)
            .map(|(&(x, y), e)| (e + (x - y).cos()).abs())
            .fold(0.0, f64::max)
    });
    let grid = grid.as_ref().map(|g| {
        let results = chsh_scan(model.as_ref(), g).expect("grid checked on load");
        GridEntry {
            points: results.len(),
            max_abs_s: results.first().map_or(0.0, |r| r.s.abs()),
            top: results.iter().take(*top).map(chsh_entry).collect(),
        }
    });
    // A local model may never violate; a non-local one is only held to |S| ≤ 4.
    let within_bounds = |entry: &ChshEntry| entry.abs_s <= 4.0 && !(local && entry.violation);
    let result = chsh_entry(&r);
    let pass = oracle.pass
        && within_bounds(&result)
        && grid
            .as_ref()
            .is_none_or(|g| g.max_abs_s <= 4.0 && !(local && g.max_abs_s > LOCAL_BOUND + VIOLATION_TOL))
        && singlet_identity_error.is_none_or(|e| e <= sys.tolerances.equality);
    Some(ChshSection {
        model: *kind,
        local,
        seed: *seed,
        oracle,
        result,
        singlet_identity_error,
        grid,
        pass,
    })
}
