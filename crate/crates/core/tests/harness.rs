use std::fs;
use std::path::{Path, PathBuf};

use memwave::coupled::{FieldState, SurfaceSpec};
use memwave::halfline::ZGrid;
use memwave::harness::*;
use memwave::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn dppc() -> PhysicalParams {
    PhysicalParams {
        rho_memb: 1e-6,
        rho_bulk: 1e3,
        mu: 1e-3,
        kappa: 1e-2,
    }
}

#[test]
fn dppc_parameters_give_eps_ten() {
    assert_eq!(nondimensionalize(&dppc()).unwrap().eps, 10.0);
}

#[test]
fn scaling_identities_hold_for_random_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let mut draw = || 10f64.powf(rng.random_range(-6.0..4.0));
        let p = PhysicalParams {
            rho_memb: draw(),
            rho_bulk: draw(),
            mu: draw(),
            kappa: draw(),
        };
        let r = nondimensionalize(&p).unwrap();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(p.kappa * r.a * r.a / (p.rho_memb * r.b * r.b), 1.0) < 1e-12);
        assert!(rel(p.mu * r.c / (p.rho_memb * r.b), 1.0) < 1e-12);
        assert!(rel(p.mu * r.c * r.c / (p.rho_bulk * r.b), 1.0) < 1e-12);
        assert!(rel(r.a / r.c, r.eps) < 1e-12);
        assert!(rel(r.l_thick / r.l_trav, r.eps) < 1e-12);
        assert!(rel(r.l_diff * r.l_diff / (r.l_thick * r.l_trav), r.eps) < 1e-12);
        assert!(rel(r.l_diff, r.l_thick) < 1e-12);
    }
}

#[test]
fn zero_data_has_zero_gaps() {
    let spec = SurfaceSpec::new(2.0 * std::f64::consts::PI, 2).unwrap();
    let grid = ZGrid::new(10.0, 100).unwrap();
    let w0 = FieldState::zero(&spec, &grid);
    let report = convergence_study(&spec, &grid, &w0, &[0.2, 0.1], 0.01, 0.5).unwrap();
    assert!(report.errors.iter().all(|&e| e == 0.0));
    assert!(report.fitted_slope.is_none());
    assert!(report.bound_margins.iter().all(|&m| m == 0.0));
}

#[test]
fn eps_list_is_validated() {
    let spec = SurfaceSpec::new(1.0, 2).unwrap();
    let grid = ZGrid::new(10.0, 100).unwrap();
    let w0 = FieldState::zero(&spec, &grid);
    for bad in [&[0.1][..], &[0.1, 0.2], &[0.1, 0.1], &[0.1, -0.05]] {
        assert!(matches!(
            convergence_study(&spec, &grid, &w0, bad, 0.01, 0.5),
            Err(Error::Domain(_))
        ));
    }
}

#[test]
fn coarse_discretization_fails_precheck() {
    let spec = SurfaceSpec::new(2.0 * std::f64::consts::PI, 2).unwrap();
    let grid = ZGrid::new(10.0, 20).unwrap();
    let c = |x| Complex64::new(x, 0.0);
    let w0 = FieldState::from_amplitudes(&spec, &grid, &[c(0.0), c(1.0)], &[c(0.0), c(0.0)]).unwrap();
    let err = convergence_study(&spec, &grid, &w0, &[0.2, 0.1], 0.1, 1.0).unwrap_err();
    assert!(matches!(err, Error::Validity(_)));
    assert_eq!(HarnessError::from(err).exit_code(), 3);
}

#[test]
fn errors_decrease_with_eps() {
    let spec = SurfaceSpec::new(2.0 * std::f64::consts::PI, 2).unwrap();
    let grid = ZGrid::new(10.0, 800).unwrap();
    let c = |x| Complex64::new(x, 0.0);
    let w0 = FieldState::from_amplitudes(&spec, &grid, &[c(0.0), c(1.0)], &[c(0.0), c(0.0)]).unwrap();
    let r = convergence_study(&spec, &grid, &w0, &[0.2, 0.1, 0.05], 2e-3, 1.0).unwrap();
    assert!(r.errors.windows(2).all(|w| w[1] < w[0]));
    assert!(r.bound_margins.iter().all(|&m| m <= 1.1));
    assert_eq!(r.gap_series.len(), 3);
    assert_eq!(r.gap_series[0].len(), r.times.len());
}

fn run_config(name: &str, out: &Path) -> ExperimentOutcome {
    run_experiment(&config_dir().join(name), Some(out)).unwrap()
}

#[test]
fn converge_config_reports_slope() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_config("converge.json", dir.path());
    let slope = outcome.summary["result"]["fitted_slope"].as_f64().unwrap();
    assert!(slope.is_finite());
    let text = fs::read_to_string(outcome.csv.unwrap()).unwrap();
    assert!(text.starts_with("t,gap_eps_0.2,"));
    assert!(!text.contains('\r'));
}

#[test]
fn nondim_config_reports_eps_ten() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_config("nondim.json", dir.path());
    assert!(outcome.csv.is_none());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&outcome.json).unwrap()).unwrap();
    assert_eq!(json["result"]["scaling"]["eps"].as_f64(), Some(10.0));
}

#[test]
fn dispersion_sweep_lists_admissible_roots() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_config("dispersion.json", dir.path());
    let mut reader = csv::Reader::from_path(outcome.csv.unwrap()).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[..3], ["k", "eps", "mu_re"]);
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() >= 3 * 61);
    assert!(rows.iter().all(|r| r[2] <= 1e-12 * (1.0 + r[2].hypot(r[3]))));
    assert_eq!(outcome.summary["result"]["residuals_ok"], true);
}

#[test]
fn every_config_runs_and_reproduces() {
    for name in [
        "simulate_coupled.json",
        "simulate_fractional.json",
        "energy_audit.json",
        "dispersion.json",
        "nondim.json",
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (x, y) = (run_config(name, a.path()), run_config(name, b.path()));
        assert_eq!(fs::read(&x.json).unwrap(), fs::read(&y.json).unwrap(), "{name}");
        if let (Some(p), Some(q)) = (&x.csv, &y.csv) {
            let text = fs::read_to_string(p).unwrap();
            assert_eq!(text.as_bytes(), fs::read(q).unwrap().as_slice(), "{name}");
            if name != "dispersion.json" {
                assert!(text.starts_with("t,"), "{name}");
            }
        }
    }
}

#[test]
fn audits_pass_on_shipped_configs() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_config("energy_audit.json", dir.path());
    let result = &outcome.summary["result"];
    for entry in result["coupled"].as_array().unwrap() {
        assert_eq!(entry["lyapunov_ok"], true);
    }
    assert_eq!(result["fractional"]["energy_nonincreasing"], true);
}

#[test]
fn config_errors_have_distinct_codes() {
    let bad = ExperimentConfig::from_json("{\"experiment\": 3}").unwrap_err();
    assert_eq!(bad.exit_code(), 2);
    let typo = ExperimentConfig::from_json("{\"experimnt\": \"nondim\"}").unwrap_err();
    assert_eq!(typo.exit_code(), 2);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, "{\"experiment\": \"warp\"}").unwrap();
    assert_eq!(run_experiment(&path, Some(dir.path())).unwrap_err().exit_code(), 4);

    fs::write(&path, "{\"experiment\": \"converge\"}").unwrap();
    assert_eq!(run_experiment(&path, Some(dir.path())).unwrap_err().exit_code(), 2);

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let err = run_experiment(&config_dir().join("nondim.json"), Some(&blocker.join("out"))).unwrap_err();
    assert_eq!(err.exit_code(), 5);
}

#[test]
fn nonzero_initial_velocity_is_a_config_error_for_the_fractional_model() {
    let cfg = ExperimentConfig::from_json(
        r#"{"surface": {"ell": 1.0, "n_modes": 2}, "time": {"dt": 0.01, "T": 0.1},
            "initial": {"displacement": [0, 1], "velocity": [0, 0.5]}}"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = run_with(Experiment::SimulateFractional, &cfg, dir.path()).unwrap_err();
    assert!(matches!(err, HarnessError::Numerical(Error::Precondition(_))));
    assert_eq!(err.exit_code(), 2);
}
