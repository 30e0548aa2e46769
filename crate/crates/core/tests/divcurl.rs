//! Pairing lemma quantities and the determinant cross-check.

use membrane_lab::divcurl::{
    crosscheck_domain, eta_xi_zeta_gamma_crosscheck, pair, pair_report, Domain, Pairing,
};
use membrane_lab::error::Error;
use membrane_lab::evolution::{evolve, EvolveConfig, RunSummary, Snapshot, Status, Trajectory};
use membrane_lab::grid::Grid;
use membrane_lab::initial_data::{realize, DataSpec};
use membrane_lab::jet::AnalyticField;
use membrane_lab::kinematics::{DerivBundle, FieldState};
use membrane_lab::laws::{BalanceLaw, LawId};
use membrane_lab::oracle::ManufacturedField;

fn run(a: f64) -> (Trajectory, Grid) {
    let cfg = EvolveConfig {
        t_final: 4.0,
        r_max: 12.0,
        n: 800,
        save_stride: 5,
        ..Default::default()
    };
    let grid = cfg.grid().unwrap();
    (
        evolve(&realize(&DataSpec::gaussian(a, 1.0), &grid).unwrap(), &cfg).unwrap(),
        grid,
    )
}

fn manufactured_trajectory(
    field: &impl AnalyticField,
    grid: &Grid,
    t_end: f64,
    steps: usize,
) -> Trajectory {
    let snapshots = (0..=steps)
        .map(|s| {
            let t = t_end * s as f64 / steps as f64;
            let jets: Vec<_> = grid.r().iter().map(|&r| field.jet(t, r)).collect();
            let phi = grid
                .r()
                .iter()
                .map(|&r| field.partial(0, 0, t, r))
                .collect();
            let psi = jets.iter().map(|j| j.pt).collect();
            Snapshot {
                state: FieldState::new(t, phi, psi, grid).unwrap(),
                bundle: DerivBundle::from_jets(t, &jets),
            }
        })
        .collect();
    let dt = t_end / steps as f64;
    let summary = RunSummary {
        status: Status::Completed,
        dt,
        dt_snapshot: dt,
        steps,
        delta_min_seen: (0.0, 1.0),
        axis_velocity_max: 0.0,
        initial_axis_velocity: 0.0,
    };
    Trajectory {
        snapshots,
        status: Status::Completed,
        summary,
    }
}

#[test]
fn pairing_names_and_laws() {
    for p in Pairing::ALL {
        assert_eq!(Pairing::from_name(&p.name().to_lowercase()), Some(p));
        let (top, bottom) = p.laws();
        assert_eq!(Pairing::of(top, bottom), Some(p));
    }
    assert_eq!(
        Pairing::A.laws(),
        (BalanceLaw::new(LawId::Ph1), BalanceLaw::new(LawId::Ph5))
    );
    assert_eq!(Pairing::D.accumulator(), "gamma2");
    assert_eq!(
        Pairing::of(BalanceLaw::new(LawId::Ph5), BalanceLaw::new(LawId::Ph1)),
        None
    );
}

#[test]
fn vacuum_reports_vanish() {
    let (traj, grid) = run(0.0);
    for p in Pairing::ALL {
        let (top, bottom) = p.laws();
        let r = pair(top, bottom, &traj, 4.0, &grid).unwrap();
        for v in [
            r.lhs,
            r.a1,
            r.a2,
            r.a3,
            r.gap,
            r.bound_rhs,
            r.axis_f12,
            r.peak_f12,
        ] {
            assert_eq!(v, 0.0, "{}", p.name());
        }
        assert!(r.admissible);
    }
    for row in eta_xi_zeta_gamma_crosscheck(&traj, &grid) {
        assert_eq!(row.gap, 0.0);
    }
}

#[test]
fn axis_flux_decides_admissibility() {
    let (traj, grid) = run(0.01);
    for p in Pairing::ALL {
        let (top, bottom) = p.laws();
        let r = pair_report(top, bottom, &traj, 4.0, &grid).unwrap();
        let expect = matches!(p, Pairing::B | Pairing::D);
        assert_eq!(
            r.admissible,
            expect,
            "{}: axis {} peak {}",
            p.name(),
            r.axis_f12,
            r.peak_f12
        );
        if !expect {
            assert!(matches!(
                pair(top, bottom, &traj, 4.0, &grid),
                Err(Error::InadmissiblePair { .. })
            ));
        }
    }
}

#[test]
fn admissible_gaps_are_small_and_shrink() {
    let gaps: Vec<Vec<f64>> = [200, 400]
        .iter()
        .map(|&n| {
            let cfg = EvolveConfig {
                t_final: 4.0,
                r_max: 12.0,
                n,
                save_stride: 5,
                ..Default::default()
            };
            let grid = cfg.grid().unwrap();
            let traj = evolve(
                &realize(&DataSpec::gaussian(0.01, 1.0), &grid).unwrap(),
                &cfg,
            )
            .unwrap();
            [Pairing::B, Pairing::D]
                .iter()
                .map(|p| {
                    let (top, bottom) = p.laws();
                    let r = pair_report(top, bottom, &traj, 4.0, &grid).unwrap();
                    assert!(r.gap.abs() <= 1e-3 * r.lhs.abs().max(1.0));
                    assert!(r.observed_constant().is_finite());
                    r.gap.abs()
                })
                .collect()
        })
        .collect();
    for k in 0..2 {
        assert!(gaps[0][k] >= 3.0 * gaps[1][k], "{:?}", gaps);
    }
}

#[test]
fn window_needs_two_snapshots() {
    let (traj, grid) = run(0.0);
    let (top, bottom) = Pairing::B.laws();
    assert!(matches!(
        pair_report(top, bottom, &traj, -1.0, &grid),
        Err(Error::Contract(_))
    ));
}

#[test]
fn small_data_crosscheck_agrees() {
    let (traj, grid) = run(0.01);
    let rows = eta_xi_zeta_gamma_crosscheck(&traj, &grid);
    assert_eq!(
        rows.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(),
        ["eta2", "xi2", "zeta2", "gamma2"]
    );
    for row in &rows {
        assert!(row.gap <= 1e-6, "{}: {}", row.name, row.gap);
        assert!(row.via_det.is_finite());
    }
    for (p, row) in Pairing::ALL.iter().zip(&rows) {
        assert!(matches!(
            crosscheck_domain(*p, &traj, &grid),
            Domain::Annulus { .. }
        ));
        assert_eq!(row.domain, crosscheck_domain(*p, &traj, &grid));
    }
    let (vacuum, grid) = run(0.0);
    assert_eq!(crosscheck_domain(Pairing::A, &vacuum, &grid), Domain::Full);
}

#[test]
fn manufactured_crosscheck_agrees() {
    let grid = Grid::new(8.0, 400).unwrap();
    let traj = manufactured_trajectory(&ManufacturedField::r2gauss_sin(), &grid, 2.0, 100);
    for row in eta_xi_zeta_gamma_crosscheck(&traj, &grid) {
        assert_eq!(row.domain, Domain::Full);
        assert!(row.gap <= 1e-6, "{}: {}", row.name, row.gap);
    }
}
