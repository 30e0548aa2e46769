//! Closed-form initial data and the data norm.

use approx::assert_relative_eq;
use membrane_lab::error::Error;
use membrane_lab::grid::Grid;
use membrane_lab::initial_data::{hnorm, hnorm2, realize, DataSpec, Family};

#[test]
fn family_names_round_trip() {
    for f in [
        Family::Gaussian,
        Family::Bump,
        Family::BesselOracle,
        Family::LinearTime,
    ] {
        assert_eq!(Family::from_name(f.name()), Some(f));
    }
    assert_eq!(Family::from_name("square"), None);
}

#[test]
fn zero_amplitude_gives_zero_data() {
    let grid = Grid::new(10.0, 200).unwrap();
    let data = realize(&DataSpec::gaussian(0.0, 1.0), &grid).unwrap();
    assert!(data.phi0.iter().chain(&data.phi1).all(|&v| v == 0.0));
    assert_eq!(hnorm2(&data.phi0, &data.phi1, &grid).unwrap(), 0.0);
}

#[test]
fn gaussian_norm_matches_closed_form() {
    let grid = Grid::new(12.0, 1200).unwrap();
    let data = realize(&DataSpec::gaussian(0.01, 1.0), &grid).unwrap();
    assert_relative_eq!(
        hnorm(&data.phi0, &data.phi1, &grid).unwrap(),
        0.01 * std::f64::consts::SQRT_2,
        max_relative = 1e-7
    );
    let norm = 0.02;
    let data = realize(&DataSpec::gaussian_with_norm(norm), &grid).unwrap();
    assert_relative_eq!(
        hnorm(&data.phi0, &data.phi1, &grid).unwrap(),
        norm,
        max_relative = 1e-7
    );
}

#[test]
fn gaussian_velocity_adds_its_own_norm() {
    let grid = Grid::new(12.0, 1200).unwrap();
    let spec = DataSpec {
        velocity: 0.2,
        ..DataSpec::gaussian(0.1, 1.0)
    };
    let data = realize(&spec, &grid).unwrap();
    assert_eq!(data.phi1[0], 0.0);
    assert_relative_eq!(
        hnorm2(&data.phi0, &data.phi1, &grid).unwrap(),
        2.0 * 0.01 + 3.0 * 0.04 / 8.0,
        max_relative = 1e-7
    );
}

#[test]
fn bump_norm_matches_closed_form() {
    let grid = Grid::new(4.0, 1600).unwrap();
    let data = realize(&DataSpec::bump(0.1, 1.0), &grid).unwrap();
    assert_relative_eq!(
        hnorm2(&data.phi0, &data.phi1, &grid).unwrap(),
        9.6 * 0.01,
        max_relative = 1e-4
    );
    assert_eq!(DataSpec::bump(0.1, 1.5).support_radius(), Some(1.5));
    assert!(data
        .phi0
        .iter()
        .zip(grid.r())
        .filter(|(_, &r)| r >= 1.0)
        .all(|(&v, _)| v == 0.0));
}

#[test]
fn norm_is_homogeneous() {
    let grid = Grid::new(12.0, 600).unwrap();
    let base = realize(&DataSpec::gaussian(0.01, 1.3), &grid).unwrap();
    let scaled = realize(&DataSpec::gaussian(0.03, 1.3), &grid).unwrap();
    assert_relative_eq!(
        hnorm(&scaled.phi0, &scaled.phi1, &grid).unwrap(),
        3.0 * hnorm(&base.phi0, &base.phi1, &grid).unwrap(),
        max_relative = 1e-12
    );
}

#[test]
fn gaussian_is_even_and_at_rest() {
    let spec = DataSpec::gaussian(0.5, 2.0);
    for r in [0.1, 0.7, 3.0] {
        assert_eq!(spec.eval(r).unwrap(), spec.eval(-r).unwrap());
    }
    assert_eq!(spec.eval(0.0).unwrap(), (0.5, 0.0));
    assert_eq!(spec.support_radius(), Some(13.0));
}

#[test]
fn linear_time_data_are_constant() {
    let grid = Grid::new(5.0, 100).unwrap();
    let data = realize(&DataSpec::linear_time(0.2, -0.4), &grid).unwrap();
    assert!(data.phi0.iter().all(|&v| v == 0.2));
    assert!(data.phi1.iter().all(|&v| v == -0.4));
    assert_eq!(data.support, None);
}

#[test]
fn light_like_drift_is_rejected() {
    let grid = Grid::new(5.0, 100).unwrap();
    for b in [1.0, -1.5] {
        assert!(matches!(
            realize(&DataSpec::linear_time(0.0, b), &grid),
            Err(Error::TimeLike { .. })
        ));
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let grid = Grid::new(5.0, 100).unwrap();
    for spec in [
        DataSpec::gaussian(f64::NAN, 1.0),
        DataSpec::gaussian(0.1, 0.0),
        DataSpec::bessel_oracle(0.1, -1.0),
    ] {
        assert!(matches!(realize(&spec, &grid), Err(Error::Config(_))));
    }
}

#[test]
fn bessel_profile_beyond_evaluator_range_is_rejected() {
    let grid = Grid::new(50.0, 100).unwrap();
    assert!(matches!(
        realize(&DataSpec::bessel_oracle(0.1, 5.0), &grid),
        Err(Error::Domain(_))
    ));
    let data = realize(&DataSpec::bessel_oracle(0.1, 1.0), &grid).unwrap();
    assert_eq!(data.phi0[0], 0.1);
}
