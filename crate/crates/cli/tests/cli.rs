use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn fragile(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fragile")).args(args).output().unwrap()
}

fn json_run(sub: &str, cfg: &Path, extra: &[&str]) -> (i32, Value) {
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--output", "json"];
    args.extend_from_slice(extra);
    let out = fragile(&args);
    let report = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    });
    (out.status.code().unwrap(), report)
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn fixed_points_on_sys3() {
    let (code, report) = json_run("fixed-points", &config("sys3.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(report["schema_version"], "fragile-report/1");
    assert_eq!(report["pass"], true);
    let kernels = report["fixed_points"]["kernels"].as_array().unwrap();
    assert_eq!(kernels.len(), 2);
    for k in kernels {
        for r in k["residuals"].as_array().unwrap() {
            assert_eq!(r.as_f64().unwrap(), 0.0);
        }
    }
    assert!(report.get("operators").is_none());
}

#[test]
fn chsh_on_singlet() {
    let (code, report) = json_run("chsh", &config("singlet.json"), &[]);
    assert_eq!(code, 0);
    let result = &report["chsh"]["result"];
    assert!((result["abs_s"].as_f64().unwrap() - 2.8284271247461903).abs() < 1e-12);
    assert_eq!(result["violation"], true);
    assert_eq!(report["chsh"]["local"], false);

    let table = fragile(&["chsh", "--config", config("singlet.json").to_str().unwrap()]);
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("|S| = 2.8284271"), "{text}");
    assert!(text.contains("violation = true"), "{text}");
}

#[test]
fn state_not_normalized_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        &dir,
        r#"{"schema_version": 1, "space": {"size": 3},
            "observables": [{"name": "A", "values": [1, 1, 2]}],
            "state": {"probs": [0.5, 0.3, 0.1]}}"#,
    );
    let out = fragile(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("state.probs"));
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(fragile(&["frobnicate", "--config", "x"]).status.code(), Some(2));
    assert_eq!(fragile(&["report"]).status.code(), Some(2));
    let missing = fragile(&["report", "--config", "/definitely/not/here.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--config"));
    let sys3 = config("sys3.json");
    let bad_tol = fragile(&["report", "--config", sys3.to_str().unwrap(), "--tol=0"]);
    assert_eq!(bad_tol.status.code(), Some(2));
    let no_bell = fragile(&["chsh", "--config", sys3.to_str().unwrap()]);
    assert_eq!(no_bell.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&no_bell.stderr).contains("`bell`"));
    assert_eq!(fragile(&["--help"]).status.code(), Some(0));
}

#[test]
fn injected_fixed_point_failure_exits_one() {
    let (code, report) = json_run("report", &config("fragile-violation.json"), &[]);
    assert_eq!(code, 1);
    assert_eq!(report["pass"], false);
    let k = &report["fixed_points"]["kernels"][0];
    assert_eq!(k["passes"], serde_json::json!([true, false]));
    assert_eq!(k["residuals"][1].as_f64().unwrap(), 1.0);
}

#[test]
fn full_report_on_sys4() {
    let (code, report) = json_run("report", &config("sys4.json"), &[]);
    assert_eq!(code, 0);
    for section in ["validate", "fixed_points", "operators", "sequential", "evolve", "chsh"] {
        assert!(report.get(section).is_some(), "missing {section}");
    }
    let evolve = &report["evolve"];
    assert_eq!(evolve["basis"], "full:4");
    assert_eq!(evolve["unitarity_defect"].as_f64().unwrap(), 0.0);
    let phases: Vec<f64> = evolve["generator"]["eigenphases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let expected = [-std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI];
    for (p, e) in phases.iter().zip(expected) {
        assert!((p - e).abs() < 1e-9, "{phases:?}");
    }
    // Coarse-grained propagators are reported, not required to be orthogonal.
    assert_eq!(evolve["outcome_propagators"][0]["unitarity_defect"].as_f64().unwrap(), 1.0);
    assert!((report["chsh"]["grid"]["max_abs_s"].as_f64().unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
}

#[test]
fn commutator_and_order_gap_on_sys3() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        &dir,
        r#"{"schema_version": 1, "space": {"size": 3},
            "observables": [{"name": "A", "values": [1, 1, 2]}, {"name": "B", "values": [1, 2, 2]}],
            "state": {"probs": [0.5, 0.5, 0]}}"#,
    );
    let (code, report) = json_run("report", &path, &[]);
    assert_eq!(code, 0);
    let norm = report["operators"]["commutators"][0]["frobenius_norm"].as_f64().unwrap();
    assert!((norm - 1.0).abs() < 1e-12);
    let pair = &report["sequential"]["pairs"][0];
    assert!((pair["with_kernels"]["order_gap"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(pair["with_kernels"]["protocol"], "fragile");
    assert_eq!(pair["non_fragile"]["pass"], true);
    assert_eq!(report["validate"]["kernels"][0]["source"], "default");
}

#[test]
fn sharp_state_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        &dir,
        r#"{"schema_version": 1, "space": {"size": 2},
            "observables": [{"name": "A", "values": [0, 1]}],
            "state": {"probs": [1, 0]}}"#,
    );
    let (code, report) = json_run("validate", &path, &[]);
    assert_eq!(code, 0);
    assert!(report["warnings"][0].as_str().unwrap().starts_with("state.probs"));
}

#[test]
fn seed_flag_feeds_unseeded_entries() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        &dir,
        r#"{"schema_version": 1, "space": {"size": 6},
            "observables": [{"name": "A", "values": [0, 0, 0, 1, 1, 1]}],
            "kernels": [{"observable": "A", "type": "birkhoff", "num_perms": 2}]}"#,
    );
    for seed in [1u64, 2] {
        let (code, report) = json_run("report", &path, &["--seed", &seed.to_string()]);
        assert_eq!(code, 0);
        assert_eq!(report["seed"].as_u64().unwrap(), seed);
        assert_eq!(report["validate"]["kernels"][0]["seed"].as_u64().unwrap(), seed);
        // Admissible kernels leave A = diag(outcomes) whatever the seed.
        let m = &report["operators"]["observables"][0]["matrix"];
        assert!((m[1][1].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m[0][1].as_f64().unwrap(), 0.0);
    }

    let (_, a) = json_run("sequential", &path, &["--seed", "1"]);
    let (_, b) = json_run("sequential", &path, &["--seed", "1"]);
    assert_eq!(a, b);
}

#[test]
fn tol_flag_replaces_all_tolerances() {
    let (code, report) = json_run("fixed-points", &config("sys3.json"), &["--tol", "1e-6"]);
    assert_eq!(code, 0);
    for (_, v) in report["tolerances"].as_object().unwrap() {
        assert_eq!(v.as_f64().unwrap(), 1e-6);
    }
    assert_eq!(report["fixed_points"]["tolerance"].as_f64().unwrap(), 1e-6);
}

#[test]
fn local_models_stay_within_the_bound() {
    let (code, report) = json_run("chsh", &config("local-random.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(report["chsh"]["local"], true);
    assert!(report["chsh"]["grid"]["max_abs_s"].as_f64().unwrap() <= 2.0 + 1e-12);
    assert_eq!(report["chsh"]["grid"]["points"], 4096);
}

#[test]
fn every_example_config_is_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let out = fragile(&["validate", "--config", path.to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0), "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
