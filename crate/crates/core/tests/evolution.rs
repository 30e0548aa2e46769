//! Time stepping, run drivers and termination causes.

use membrane_lab::error::Error;
use membrane_lab::evolution::{
    check_containment, evolve, evolve_with, step, EvolveConfig, InitialData, Status,
};
use membrane_lab::functionals::plumbing_energy;
use membrane_lab::grid::Grid;
use membrane_lab::initial_data::{realize, DataSpec};
use membrane_lab::kinematics::{FieldState, DEFAULT_DELTA_MIN};
use membrane_lab::oracle::bessel_j0;

fn run(spec: &DataSpec, cfg: &EvolveConfig) -> membrane_lab::evolution::Trajectory {
    evolve(&realize(spec, &cfg.grid().unwrap()).unwrap(), cfg).unwrap()
}

#[test]
fn vacuum_step_is_vacuum() {
    let grid = Grid::new(10.0, 100).unwrap();
    let s = step(
        &FieldState::vacuum(0.0, &grid),
        0.04,
        &grid,
        DEFAULT_DELTA_MIN,
    )
    .unwrap();
    assert!(s.phi.iter().chain(&s.psi).all(|v| *v == 0.0));
    assert!((s.t - 0.04).abs() < 1e-15);
}

#[test]
fn zero_data_stay_zero() {
    let cfg = EvolveConfig {
        t_final: 2.0,
        r_max: 10.0,
        n: 100,
        ..Default::default()
    };
    let traj = run(&DataSpec::gaussian(0.0, 1.0), &cfg);
    assert_eq!(traj.status, Status::Completed);
    assert!(traj.snapshots.iter().all(|s| s
        .state
        .phi
        .iter()
        .chain(&s.state.psi)
        .all(|v| *v == 0.0)));
}

#[test]
fn linear_in_time_field_is_an_exact_solution() {
    let (a, b) = (0.1, 0.3);
    let cfg = EvolveConfig {
        t_final: 2.0,
        r_max: 20.0,
        n: 400,
        save_stride: 10,
        ..Default::default()
    };
    let traj = run(&DataSpec::linear_time(a, b), &cfg);
    assert!(traj.status.is_completed());
    for s in &traj.snapshots {
        let t = s.state.t;
        let err = s
            .state
            .phi
            .iter()
            .fold(0.0_f64, |m, p| m.max((p - (a + b * t)).abs()));
        assert!(err <= 1e-12 * a + 1e-12, "t = {t}: {err}");
    }
}

#[test]
fn schedule_lands_exactly_on_the_final_time() {
    let cfg = EvolveConfig {
        t_final: 3.3,
        r_max: 12.0,
        n: 120,
        save_stride: 7,
        ..Default::default()
    };
    let (steps, dt) = cfg.schedule().unwrap();
    assert_eq!(steps % 7, 0);
    assert!(dt <= cfg.cfl * 0.1);
    assert!((steps as f64 * dt - 3.3).abs() < 1e-12);
    let traj = run(&DataSpec::gaussian(0.0, 1.0), &cfg);
    assert!((traj.snapshots.last().unwrap().state.t - 3.3).abs() < 1e-12);
    assert_eq!(traj.snapshots.len(), steps / 7 + 1);
}

#[test]
fn invalid_schedules_are_rejected() {
    let base = EvolveConfig::default();
    for cfg in [
        EvolveConfig {
            cfl: 1.5,
            ..base.clone()
        },
        EvolveConfig {
            cfl: 0.0,
            ..base.clone()
        },
        EvolveConfig {
            save_stride: 0,
            ..base.clone()
        },
        EvolveConfig {
            t_final: -1.0,
            ..base.clone()
        },
        EvolveConfig {
            t_final: f64::NAN,
            ..base.clone()
        },
        EvolveConfig {
            delta_min: 0.0,
            ..base.clone()
        },
    ] {
        assert!(matches!(cfg.schedule(), Err(Error::Config(_))), "{cfg:?}");
    }
}

#[test]
fn containment_is_enforced() {
    let cfg = EvolveConfig {
        t_final: 20.0,
        r_max: 20.0,
        n: 400,
        ..Default::default()
    };
    assert!(matches!(
        check_containment(Some(6.5), &cfg),
        Err(Error::Config(_))
    ));
    assert!(check_containment(None, &cfg).is_ok());
    let grid = cfg.grid().unwrap();
    let err = evolve(
        &realize(&DataSpec::gaussian(0.01, 1.0), &grid).unwrap(),
        &cfg,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn runs_are_deterministic() {
    let cfg = EvolveConfig {
        t_final: 3.0,
        r_max: 12.0,
        n: 200,
        ..Default::default()
    };
    let a = run(&DataSpec::gaussian(0.05, 1.0), &cfg);
    let b = run(&DataSpec::gaussian(0.05, 1.0), &cfg);
    assert_eq!(a, b);
}

#[test]
fn space_like_initial_velocity_breaks_down_immediately() {
    let cfg = EvolveConfig {
        t_final: 1.0,
        r_max: 10.0,
        n: 100,
        ..Default::default()
    };
    let grid = cfg.grid().unwrap();
    let init = InitialData {
        phi0: vec![0.0; grid.len()],
        phi1: vec![1.1; grid.len()],
        support: None,
    };
    let summary = evolve_with(&init, &cfg, |_| Ok(())).unwrap();
    match summary.status {
        Status::Breakdown { t, delta, .. } => {
            assert_eq!(t, 0.0);
            assert!(delta < 0.0);
        }
        other => panic!("expected a breakdown, got {other:?}"),
    }
}

#[test]
fn large_data_break_down_with_a_record() {
    let cfg = EvolveConfig {
        t_final: 10.0,
        r_max: 20.0,
        n: 800,
        ..Default::default()
    };
    let traj = run(&DataSpec::gaussian(2.0, 1.0), &cfg);
    match traj.status {
        Status::Breakdown { t, node, delta } => {
            assert!(t > 0.0 && t < 10.0);
            assert!(node < 800);
            assert!(delta < DEFAULT_DELTA_MIN || delta.is_nan());
        }
        other => panic!("expected a breakdown, got {other:?}"),
    }
}

#[test]
fn observer_errors_stop_the_run() {
    let cfg = EvolveConfig {
        t_final: 1.0,
        r_max: 10.0,
        n: 100,
        ..Default::default()
    };
    let grid = cfg.grid().unwrap();
    let init = realize(&DataSpec::gaussian(0.0, 1.0), &grid).unwrap();
    let mut seen = 0;
    let err = evolve_with(&init, &cfg, |_| {
        seen += 1;
        if seen == 3 {
            Err(Error::Contract("stop".into()))
        } else {
            Ok(())
        }
    })
    .unwrap_err();
    assert!(matches!(err, Error::Contract(_)));
    assert_eq!(seen, 3);
}

#[test]
fn bessel_oracle_error_shrinks_at_fourth_order() {
    let (a, k) = (1e-4, 2.0);
    let errors: Vec<(Vec<f64>, Grid)> = [400, 800]
        .iter()
        .map(|&n| {
            let cfg = EvolveConfig {
                t_final: 5.0,
                r_max: 20.0,
                n,
                save_stride: 1000,
                ..Default::default()
            };
            let grid = cfg.grid().unwrap();
            let traj = run(&DataSpec::bessel_oracle(a, k), &cfg);
            (traj.snapshots.last().unwrap().state.phi.clone(), grid)
        })
        .collect();
    let (coarse, fine) = (&errors[0], &errors[1]);
    let diff = |i: usize| (coarse.0[i] - fine.0[2 * i]).abs();
    let window = coarse.1.even_index_at_or_above(10.0);
    let self_diff = (0..=window).map(diff).fold(0.0_f64, f64::max);
    let oracle = (0..=window)
        .map(|i| {
            (coarse.0[i] - a * bessel_j0(k * coarse.1.r()[i]).unwrap() * (k * 5.0).cos()).abs()
        })
        .fold(0.0_f64, f64::max);
    assert!(self_diff < 1e-9, "{self_diff}");
    assert!(oracle < 1e-8, "{oracle}");
}

#[test]
fn energy_drift_shrinks_at_fourth_order() {
    let drift = |n: usize| {
        let cfg = EvolveConfig {
            t_final: 10.0,
            r_max: 20.0,
            n,
            save_stride: 25,
            ..Default::default()
        };
        let grid = cfg.grid().unwrap();
        let traj = run(&DataSpec::gaussian(0.01, 1.0), &cfg);
        let h0 = plumbing_energy(&traj.snapshots[0].state, &grid).unwrap();
        traj.snapshots
            .iter()
            .map(|s| ((plumbing_energy(&s.state, &grid).unwrap() - h0) / h0).abs())
            .fold(0.0_f64, f64::max)
    };
    let (coarse, fine) = (drift(800), drift(1600));
    assert!(coarse / fine > 12.0, "{coarse} {fine}");
    assert!(fine < 2e-8, "{fine}");
}

#[test]
fn small_gaussian_completes_a_long_run() {
    let cfg = EvolveConfig {
        t_final: 200.0,
        r_max: 210.0,
        n: 1680,
        save_stride: 200,
        ..Default::default()
    };
    let grid = cfg.grid().unwrap();
    let summary = evolve_with(
        &realize(&DataSpec::gaussian(0.005, 1.0), &grid).unwrap(),
        &cfg,
        |_| Ok(()),
    )
    .unwrap();
    assert_eq!(summary.status, Status::Completed);
    assert!(summary.delta_min_seen.1 > 0.99);
}
