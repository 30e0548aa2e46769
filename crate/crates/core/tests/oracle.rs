//! Reference evaluators: Bessel functions, dense quadrature, manufactured fields and
//! observed orders.

use approx::assert_abs_diff_eq;
use membrane_lab::grid::{Grid, Weight};
use membrane_lab::jet::AnalyticField;
use membrane_lab::oracle::{
    bessel_j0, bessel_j0_derivative, bessel_j1, dense_quadrature, richardson_order, BesselWave,
    ManufacturedField,
};
use proptest::prelude::*;

#[test]
fn bessel_at_origin() {
    assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    assert_eq!(bessel_j1(0.0).unwrap(), 0.0);
}

#[test]
fn bessel_first_zero() {
    assert!(bessel_j0(2.404825557695773).unwrap().abs() < 1e-12);
}

#[test]
fn bessel_large_argument_matches_tabulated_values() {
    assert_abs_diff_eq!(
        bessel_j0(10.0).unwrap(),
        -0.245_935_764_451_348_3,
        epsilon = 1e-13
    );
    assert_abs_diff_eq!(
        bessel_j0(50.0).unwrap(),
        0.055_812_327_669_251_86,
        epsilon = 1e-13
    );
}

#[test]
fn bessel_domain_is_enforced() {
    assert!(bessel_j0(-0.1).is_err());
    assert!(bessel_j0(200.5).is_err());
}

proptest! {
    #[test]
    fn bessel_ode_residual_vanishes(x in 0.1..150.0f64) {
        let d2 = bessel_j0_derivative(2, x).unwrap();
        let d1 = bessel_j0_derivative(1, x).unwrap();
        prop_assert!((d2 + d1 / x + bessel_j0(x).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn manufactured_mixed_partials_commute(t in -3.0..3.0f64, r in 0.0..4.0f64) {
        for field in [ManufacturedField::gaussian_cos(), ManufacturedField::r2gauss_sin()] {
            let h = 1e-5;
            let fd = (field.partial(1, 0, t, r + h) - field.partial(1, 0, t, r - h)) / (2.0 * h);
            let fd_other = (field.partial(0, 1, t + h, r) - field.partial(0, 1, t - h, r)) / (2.0 * h);
            let exact = field.partial(1, 1, t, r);
            prop_assert!((fd - exact).abs() < 1e-8);
            prop_assert!((fd_other - exact).abs() < 1e-8);
        }
    }
}

#[test]
fn bessel_derivative_matches_minus_j1() {
    for x in [0.5, 3.0, 12.0, 80.0] {
        assert_abs_diff_eq!(
            bessel_j0_derivative(1, x).unwrap(),
            -bessel_j1(x).unwrap(),
            epsilon = 1e-14
        );
    }
}

#[test]
fn bessel_wave_solves_the_linear_wave_equation() {
    let w = BesselWave { a: 1.0, k: 2.0 };
    for (t, r) in [(0.3, 0.7), (1.1, 2.5), (2.0, 5.0)] {
        let lhs = w.partial(2, 0, t, r);
        let rhs = w.partial(0, 2, t, r) + w.partial(0, 1, t, r) / r;
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }
}

#[test]
fn dense_quadrature_of_gaussian_moment() {
    let a = 0.7;
    let grid = Grid::new(12.0, 120).unwrap();
    let v = dense_quadrature(
        |r| 4.0 * a * a * r * (-2.0 * r * r).exp(),
        Weight::One,
        &grid,
    )
    .unwrap();
    assert_abs_diff_eq!(v, a * a, epsilon = 1e-12);
}

#[test]
fn dense_quadrature_of_trivial_integrands() {
    let grid = Grid::new(3.0, 30).unwrap();
    assert_eq!(dense_quadrature(|_| 0.0, Weight::R, &grid).unwrap(), 0.0);
    assert_abs_diff_eq!(
        dense_quadrature(|_| 1.0, Weight::R, &grid).unwrap(),
        4.5,
        epsilon = 1e-13
    );
}

#[test]
fn richardson_fourth_order() {
    let o = richardson_order(&[1.0, 1.0 / 16.0], 2.0).unwrap();
    assert_abs_diff_eq!(o.order.unwrap(), 4.0, epsilon = 1e-12);
}

#[test]
fn richardson_third_order() {
    let o = richardson_order(&[1.0, 1.0 / 8.0, 1.0 / 64.0], 2.0).unwrap();
    assert_abs_diff_eq!(o.order.unwrap(), 3.0, epsilon = 1e-12);
    assert!(o.monotone);
}

#[test]
fn richardson_exact_and_invalid_inputs() {
    let o = richardson_order(&[0.0, 0.0, 0.0], 2.0).unwrap();
    assert!(o.exact);
    assert!(o.order.is_none());
    assert!(richardson_order(&[1.0], 2.0).is_err());
    assert!(richardson_order(&[1.0, 0.5], 1.0).is_err());
    assert!(richardson_order(&[1.0, 2.0], 2.0).unwrap().order.is_none());
}
