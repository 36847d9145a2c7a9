//! End-to-end behaviour of the study drivers on small configurations.

use stochwave::error::Error;
use stochwave::harness::config::NoiseFamily;
use stochwave::harness::stats::fit_slope;
use stochwave::harness::studies::{energy_study, exp_moment_study, simulate, spatial_convergence, temporal_convergence};
use stochwave::harness::ExperimentConfig;

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::reference_model();
    cfg.model.horizon = 0.5;
    cfg.scheme.h = Some(1.0 / 32.0);
    cfg.scheme.n = Some(6);
    cfg.scheme.n_list = Some(vec![3, 6]);
    cfg.scheme.n_ref = Some(12);
    cfg.scheme.h_list = Some(vec![0.125, 0.0625]);
    cfg.scheme.h_ref = Some(1.0 / 64.0);
    cfg.mc.trajectories = 8;
    cfg.mc.seed = 9;
    cfg
}

#[test]
fn zero_noise_energy_is_flat() {
    let mut cfg = small();
    cfg.noise.family = NoiseFamily::Zero;
    let s = energy_study(&cfg).unwrap();
    assert_eq!(s.trace, 0.0);
    assert!(s.fit.slope.abs() < 1e-8, "{}", s.fit.slope);
    for r in &s.rows {
        assert!((r.mean_v1 - s.initial_v1).abs() < 1e-9);
        assert_eq!(r.stderr, 0.0);
    }
}

#[test]
fn energy_study_reports_theory_line() {
    let s = energy_study(&small()).unwrap();
    let csv = s.to_csv();
    assert!(csv.starts_with("t,mean_V1,stderr,theory\n"));
    assert_eq!(csv.lines().count(), 1 + 17);
    assert!((s.theory_slope - 0.5 * s.trace).abs() < 1e-15);
    let last = s.rows.last().unwrap();
    assert!((last.theory - (s.initial_v1 + s.theory_slope * 0.5)).abs() < 1e-14);
}

#[test]
fn convergence_tables_end_with_reference_anchor() {
    let cfg = small();
    let sp = spatial_convergence(&cfg).unwrap();
    let anchor = sp.rows.last().unwrap();
    assert_eq!((anchor.param, anchor.error, anchor.stderr), (12.0, 0.0, 0.0));
    assert!(sp.compared().iter().all(|r| r.error > 0.0));
    assert!(sp.to_csv().lines().nth(3).unwrap().starts_with("12,"));

    let tm = temporal_convergence(&cfg).unwrap();
    let anchor = tm.rows.last().unwrap();
    assert_eq!((anchor.param, anchor.error), (1.0 / 64.0, 0.0));
    assert!(tm.compared()[0].error > tm.compared()[1].error);
}

#[test]
fn h_list_must_be_coarser_than_reference() {
    let mut cfg = small();
    cfg.scheme.h_list = Some(vec![1.0 / 64.0]);
    assert!(temporal_convergence(&cfg).is_err());
}

#[test]
fn invalid_study_parameters() {
    let mut cfg = small();
    cfg.scheme.h_list = Some(vec![0.1]);
    assert!(temporal_convergence(&cfg).is_err());
    let mut cfg = small();
    cfg.scheme.n_list = Some(vec![12]);
    assert!(spatial_convergence(&cfg).is_err());
    let mut cfg = small();
    cfg.scheme.h = None;
    assert!(energy_study(&cfg).is_err());
    let mut cfg = small();
    cfg.noise.max_path_bytes = 16;
    match temporal_convergence(&cfg) {
        Err(Error::Trajectory { source, .. }) => assert!(matches!(*source, Error::PathTooLarge { .. })),
        other => panic!("expected a path-size error, got {other:?}"),
    }
}

#[test]
fn solver_failure_names_trajectory_and_step() {
    let mut cfg = small();
    cfg.scheme.h = Some(0.25);
    cfg.scheme.max_iter = 1;
    cfg.model.v0 = stochwave::harness::config::InitialData::Constant(30.0);
    match simulate(&cfg) {
        Err(Error::Trajectory { trajectory, source }) => {
            assert_eq!(trajectory, 0);
            assert!(matches!(*source, Error::Step { step: 0, .. }), "{source:?}");
        }
        other => panic!("expected a trajectory error, got {other:?}"),
    }
}

#[test]
fn exp_moments_grow_with_horizon_and_c() {
    let mut cfg = small();
    cfg.mc.exp_c = vec![0.0, 0.5, 1.0];
    cfg.mc.exp_horizons = vec![0.25, 0.5];
    let s = exp_moment_study(&cfg).unwrap();
    assert_eq!(s.rows.len(), 6);
    assert_eq!((s.rows[0].estimate, s.rows[0].stderr), (1.0, 0.0));
    assert!(s.rows[2].estimate >= s.rows[1].estimate);
    assert!(s.rows[5].estimate >= s.rows[2].estimate);
    assert_eq!(s.to_csv().lines().count(), 4);
}

#[test]
fn worker_count_does_not_change_results() {
    let mut cfg = small();
    let one = simulate(&cfg).unwrap().to_csv();
    cfg.mc.workers = 4;
    assert_eq!(simulate(&cfg).unwrap().to_csv(), one);
}

#[test]
fn slope_fit_on_noisy_power_law() {
    let xs: Vec<f64> = (0..6).map(|i| 2f64.powi(i)).collect();
    // Fixed ±1% perturbations.
    let noise = [1.01, 0.99, 1.004, 0.993, 1.008, 0.996];
    let ys: Vec<f64> = xs.iter().zip(noise).map(|(x, e)| x.powf(1.5) * e).collect();
    let f = fit_slope(&xs, &ys).unwrap();
    assert!((f.slope - 1.5).abs() < 0.1);
    let f = fit_slope(&[1.0, 2.0, 4.0], &[3.0, 12.0, 48.0]).unwrap();
    assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ExperimentConfig::from_path(&path).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 4);
}
