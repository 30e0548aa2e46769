//! Stencil derivatives and quadrature on the radial mesh.

use approx::assert_abs_diff_eq;
use membrane_lab::error::Error;
use membrane_lab::grid::{cumulative, deriv_r, integrate, Grid, Parity, Weight};
use proptest::prelude::*;

fn sample(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    grid.r().iter().map(|&r| f(r)).collect()
}

fn max_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn derivative_of_constant_vanishes() {
    let grid = Grid::new(5.0, 100).unwrap();
    for order in 1..=3 {
        let d = deriv_r(&vec![3.5; grid.len()], order, Parity::Even, &grid).unwrap();
        let worst = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(
            worst < 1e-13 / grid.h().powi(order as i32),
            "order {order}: {worst}"
        );
    }
}

#[test]
fn derivative_of_r_squared_is_two_r() {
    let grid = Grid::new(3.0, 60).unwrap();
    let d = deriv_r(&sample(&grid, |r| r * r), 1, Parity::Even, &grid).unwrap();
    let exact = sample(&grid, |r| 2.0 * r);
    assert!(max_error(&d, &exact) < 1e-12);
    let d2 = deriv_r(&sample(&grid, |r| r * r), 2, Parity::Even, &grid).unwrap();
    assert!(d2.iter().all(|v| (v - 2.0).abs() < 1e-10));
}

#[test]
fn derivative_of_sine_converges_at_fourth_order() {
    let err = |n: usize| {
        let grid = Grid::new(4.0, n).unwrap();
        let d = deriv_r(&sample(&grid, f64::sin), 1, Parity::Odd, &grid).unwrap();
        max_error(&d, &sample(&grid, f64::cos))
    };
    let (coarse, fine) = (err(40), err(80));
    assert!(coarse / fine >= 14.0, "ratio {}", coarse / fine);
}

#[test]
fn second_and_third_derivatives_of_gaussian_converge() {
    let err = |n: usize, order: u8| {
        let grid = Grid::new(6.0, n).unwrap();
        let d = deriv_r(
            &sample(&grid, |r| (-r * r).exp()),
            order,
            Parity::Even,
            &grid,
        )
        .unwrap();
        let exact = sample(&grid, |r| match order {
            2 => (4.0 * r * r - 2.0) * (-r * r).exp(),
            _ => (12.0 * r - 8.0 * r * r * r) * (-r * r).exp(),
        });
        max_error(&d, &exact)
    };
    for order in [2, 3] {
        assert!(err(120, order) / err(240, order) >= 14.0, "order {order}");
    }
}

#[test]
fn unsupported_derivative_order_is_a_contract_error() {
    let grid = Grid::new(1.0, 16).unwrap();
    assert!(matches!(
        deriv_r(&[0.0; 17], 4, Parity::Even, &grid),
        Err(Error::Contract(_))
    ));
}

#[test]
fn wrong_length_or_non_finite_samples_are_rejected() {
    let grid = Grid::new(1.0, 16).unwrap();
    assert!(deriv_r(&[0.0; 5], 1, Parity::Even, &grid).is_err());
    let mut v = vec![0.0; 17];
    v[3] = f64::NAN;
    assert!(matches!(
        integrate(&v, Weight::One, &grid),
        Err(Error::NonFinite { index: 3 })
    ));
}

#[test]
fn invalid_meshes_are_rejected() {
    assert!(Grid::new(1.0, 7).is_err());
    assert!(Grid::new(-1.0, 8).is_err());
    assert!(Grid::new(1.0, 2).is_err());
}

#[test]
fn integral_of_r_on_unit_interval() {
    let grid = Grid::new(1.0, 16).unwrap();
    assert_abs_diff_eq!(
        integrate(&sample(&grid, |r| r), Weight::One, &grid).unwrap(),
        0.5,
        epsilon = 1e-15
    );
}

#[test]
fn weight_r_of_one_on_three() {
    let grid = Grid::new(3.0, 30).unwrap();
    assert_abs_diff_eq!(
        integrate(&vec![1.0; grid.len()], Weight::R, &grid).unwrap(),
        4.5,
        epsilon = 1e-13
    );
}

#[test]
fn gaussian_moment_integral() {
    let a = 0.3;
    let grid = Grid::new(10.0, 2000).unwrap();
    let f = sample(&grid, |r| 4.0 * a * a * r * (-2.0 * r * r).exp());
    let v = integrate(&f, Weight::One, &grid).unwrap();
    assert_abs_diff_eq!(v, a * a, epsilon = 1e-10);
}

#[test]
fn inverse_r_weight_of_r_squared() {
    let grid = Grid::new(2.0, 40).unwrap();
    assert_abs_diff_eq!(
        integrate(&sample(&grid, |r| r * r), Weight::InvR, &grid).unwrap(),
        2.0,
        epsilon = 1e-12
    );
}

#[test]
fn inverse_r_weight_requires_a_vanishing_axis_value() {
    let grid = Grid::new(2.0, 40).unwrap();
    let err = integrate(&sample(&grid, |r| 1.0 + r), Weight::InvR, &grid).unwrap_err();
    assert!(matches!(err, Error::AxisSingular { .. }));
}

#[test]
fn running_integral_matches_closed_form_at_every_node() {
    let grid = Grid::new(4.0, 200).unwrap();
    let c = cumulative(&sample(&grid, f64::cos), &grid);
    let exact = sample(&grid, f64::sin);
    assert!(max_error(&c, &exact) < 1e-9);
}

proptest! {
    #[test]
    fn derivative_is_linear(alpha in -3.0..3.0f64, beta in -3.0..3.0f64, k in 0.5..2.0f64) {
        let grid = Grid::new(5.0, 100).unwrap();
        let f = sample(&grid, |r| (k * r).cos());
        let g = sample(&grid, |r| (-r * r / k).exp());
        let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| alpha * x + beta * y).collect();
        for order in 1..=3 {
            let df = deriv_r(&f, order, Parity::Even, &grid).unwrap();
            let dg = deriv_r(&g, order, Parity::Even, &grid).unwrap();
            let dm = deriv_r(&mix, order, Parity::Even, &grid).unwrap();
            for i in 0..grid.len() {
                let expect = alpha * df[i] + beta * dg[i];
                prop_assert!((dm[i] - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn derivative_flips_parity(k in 0.5..2.0f64) {
        let grid = Grid::new(5.0, 100).unwrap();
        let d = deriv_r(&sample(&grid, |r| (k * r).cos()), 1, Parity::Even, &grid).unwrap();
        prop_assert!(d[0].abs() < 1e-12);
        let d2 = deriv_r(&sample(&grid, |r| (k * r).sin()), 2, Parity::Odd, &grid).unwrap();
        prop_assert!(d2[0].abs() < 1e-12);
    }
}
