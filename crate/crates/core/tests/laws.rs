//! Weighted balance laws: exact identities, expanded alternatives and discrete residuals.

use membrane_lab::evolution::{evolve, EvolveConfig};
use membrane_lab::grid::{Grid, Parity};
use membrane_lab::initial_data::{realize, DataSpec};
use membrane_lab::jet::AnalyticField;
use membrane_lab::laws::{
    alternate_identity_gaps, exact_identity_gap, multiplier_identity_gap, residual, BalanceLaw,
    EqDerivative, LawId,
};
use membrane_lab::oracle::{richardson_order, ManufacturedField, Trig};

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn fields() -> Vec<ManufacturedField> {
    vec![
        ManufacturedField::gaussian_cos(),
        ManufacturedField::r2gauss_sin(),
        ManufacturedField::custom(vec![0.15, 0.0, 0.05], Trig::Cos, 1.5),
    ]
}

const POINTS: [(f64, f64); 5] = [(0.2, 0.3), (0.7, 0.8), (1.1, 1.4), (2.3, 2.0), (3.0, 0.55)];

#[test]
fn names_and_parities() {
    let odd = [LawId::Ph1, LawId::Ph3, LawId::Ph7];
    for law in BalanceLaw::ALL {
        assert_eq!(BalanceLaw::from_name(&law.name().to_lowercase()), Some(law));
        let expect = if odd.contains(&law.id) {
            Parity::Odd
        } else {
            Parity::Even
        };
        assert_eq!(law.density_parity(), expect);
        assert_eq!(law.flux_parity(), expect.flip());
    }
    assert_eq!(BalanceLaw::from_name("PH4"), None);
    assert_eq!(
        BalanceLaw::new(LawId::Ph6).eq_derivative(),
        EqDerivative::Space
    );
    assert_eq!(BalanceLaw::new(LawId::Ph7).eq_order(), 2);
}

#[test]
fn every_law_is_an_exact_identity_on_manufactured_fields() {
    for law in BalanceLaw::ALL {
        for field in fields() {
            for (t, r) in POINTS {
                let gap = exact_identity_gap(law, &field, t, r);
                let scale =
                    law.multiplier_term(&field, t, r).abs() + law.remainder(&field.jet(t, r)).abs();
                assert!(
                    gap.abs() <= 1e-11 * (1.0 + scale),
                    "{} on {} at ({t}, {r}): {gap}",
                    law.name(),
                    field.tag
                );
            }
        }
    }
}

#[test]
fn intermediate_form_of_the_third_law_remainder_is_exact() {
    let law = BalanceLaw::new(LawId::Ph3);
    for field in fields() {
        for (t, r) in POINTS {
            let gaps = alternate_identity_gaps(law, &field, t, r);
            let (name, gap) = gaps[0];
            assert_eq!(name, "W1_intermediate");
            assert!(gap.abs() < 1e-13, "{} at ({t}, {r}): {gap}", field.tag);
        }
    }
}

#[test]
fn collapsed_form_of_the_third_law_remainder_misses_a_closed_form_term() {
    let law = BalanceLaw::new(LawId::Ph3);
    let mut largest = 0.0_f64;
    for field in fields() {
        for (t, r) in POINTS {
            let gap = alternate_identity_gaps(law, &field, t, r)[1].1;
            let j = field.jet(t, r);
            let (pt, pr, ptt, ptr) = (j.pt, j.pr, j.ptt, j.ptr);
            let missing = -3.0
                * r
                * (pr * ptr - pt * ptt)
                * (pr * pr * ptt * ptt - 2.0 * pr * pt * ptr * ptt + pt * pt * ptr * ptr
                    - ptr * ptr
                    + ptt * ptt)
                / (2.0 * j.delta_pow(2.5));
            assert!(
                (gap - missing).abs() < 1e-13 * (1.0 + missing.abs()),
                "{gap} vs {missing}"
            );
            largest = largest.max(gap.abs());
        }
    }
    assert!(largest > 1e-6, "{largest}");
}

#[test]
fn expanded_spatial_and_second_time_remainders_are_not_identities() {
    for (id, label) in [(LawId::Ph6, "P2_expanded"), (LawId::Ph7, "T1_second")] {
        let law = BalanceLaw::new(id);
        let mut largest = 0.0_f64;
        for field in fields() {
            for (t, r) in POINTS {
                let gaps = alternate_identity_gaps(law, &field, t, r);
                assert_eq!(gaps[0].0, label);
                largest = largest.max(gaps[0].1.abs());
            }
        }
        assert!(largest > 1e-6, "{label}: {largest}");
    }
}

#[test]
fn laws_without_expanded_alternatives_return_none() {
    let j = ManufacturedField::gaussian_cos().jet(0.3, 0.5);
    for id in [LawId::Ph1, LawId::Ph2, LawId::Ph5] {
        assert!(BalanceLaw::new(id).alternate_remainders(&j).is_empty());
    }
}

#[test]
fn first_law_flux_vanishes_on_the_axis_for_axis_regular_fields() {
    let law = BalanceLaw::new(LawId::Ph1);
    let field = ManufacturedField::r2gauss_sin();
    let values: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&r| law.flux(&field.jet(0.4, r)).abs())
        .collect();
    assert!(values[2] < 1e-6);
    assert!(values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn grid_identity_gap_converges_at_second_order() {
    let field = ManufacturedField::r2gauss_sin();
    for law in BalanceLaw::ALL {
        let gaps: Vec<f64> = [200, 400, 800]
            .iter()
            .map(|&n| {
                let grid = Grid::new(8.0, n).unwrap();
                let dt = 0.4 * grid.h();
                sup(&multiplier_identity_gap(law, &field, 0.7, dt, &grid).unwrap())
            })
            .collect();
        let order = richardson_order(&gaps, 2.0).unwrap().order.unwrap();
        assert!(order >= 1.8, "{}: {order} from {gaps:?}", law.name());
    }
}

#[test]
fn grid_identity_gap_rejects_a_nonpositive_step() {
    let grid = Grid::new(8.0, 100).unwrap();
    let law = BalanceLaw::new(LawId::Ph1);
    assert!(
        multiplier_identity_gap(law, &ManufacturedField::gaussian_cos(), 0.0, 0.0, &grid).is_err()
    );
}

#[test]
fn vacuum_trajectory_has_zero_residuals() {
    let cfg = EvolveConfig {
        t_final: 1.0,
        r_max: 10.0,
        n: 100,
        save_stride: 2,
        ..Default::default()
    };
    let grid = cfg.grid().unwrap();
    let traj = evolve(
        &realize(&DataSpec::gaussian(0.0, 1.0), &grid).unwrap(),
        &cfg,
    )
    .unwrap();
    for law in BalanceLaw::ALL {
        for k in 1..traj.snapshots.len() - 1 {
            assert_eq!(
                sup(&residual(law, &traj, k, &grid).unwrap()),
                0.0,
                "{}",
                law.name()
            );
        }
    }
}

#[test]
fn linear_in_time_trajectory_has_zero_first_law_residual() {
    let cfg = EvolveConfig {
        t_final: 1.0,
        r_max: 10.0,
        n: 100,
        save_stride: 2,
        ..Default::default()
    };
    let grid = cfg.grid().unwrap();
    let traj = evolve(
        &realize(&DataSpec::linear_time(0.1, 0.3), &grid).unwrap(),
        &cfg,
    )
    .unwrap();
    let law = BalanceLaw::new(LawId::Ph1);
    for k in 1..traj.snapshots.len() - 1 {
        assert!(sup(&residual(law, &traj, k, &grid).unwrap()) < 1e-12);
    }
}

#[test]
fn residual_needs_temporal_neighbours() {
    let cfg = EvolveConfig {
        t_final: 0.5,
        r_max: 10.0,
        n: 100,
        save_stride: 2,
        ..Default::default()
    };
    let grid = cfg.grid().unwrap();
    let traj = evolve(
        &realize(&DataSpec::gaussian(0.0, 1.0), &grid).unwrap(),
        &cfg,
    )
    .unwrap();
    let law = BalanceLaw::new(LawId::Ph3);
    assert!(residual(law, &traj, 0, &grid).is_err());
    assert!(residual(law, &traj, traj.snapshots.len() - 1, &grid).is_err());
}

#[test]
fn small_data_residuals_of_axis_regular_laws_converge() {
    let spec = DataSpec::gaussian(0.01, 1.0);
    let runs: Vec<_> = [200, 400, 800]
        .iter()
        .map(|&n| {
            let cfg = EvolveConfig {
                t_final: 1.0,
                r_max: 12.0,
                n,
                save_stride: 2,
                ..Default::default()
            };
            let grid = cfg.grid().unwrap();
            (evolve(&realize(&spec, &grid).unwrap(), &cfg).unwrap(), grid)
        })
        .collect();
    for id in [LawId::Ph3, LawId::Ph6, LawId::Ph7] {
        let sups: Vec<f64> = runs
            .iter()
            .map(|(traj, grid)| {
                let k = traj.snapshots.len() / 2;
                sup(&residual(BalanceLaw::new(id), traj, k, grid).unwrap())
            })
            .collect();
        let order = richardson_order(&sups, 2.0).unwrap().order.unwrap();
        assert!(order >= 1.8, "{id:?}: {order} from {sups:?}");
    }
}
