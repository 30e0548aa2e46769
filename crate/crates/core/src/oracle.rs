//! Reference evaluators for tests and studies: manufactured fields with exact partial
//! derivatives, dense Gauss–Legendre quadrature, Bessel functions of the first kind and
//! observed-order estimation.
//!
//! Nothing here calls the stencils or the Simpson rule of [`crate::grid`].

use crate::error::{Error, Result};
use crate::grid::{Grid, Weight};
use crate::jet::AnalyticField;

/// Refinement factor of [`dense_quadrature`] relative to the base grid.
pub const DENSE_REFINEMENT: usize = 8;

/// Time factor of a manufactured field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    /// `cos(ωt)`.
    Cos,
    /// `sin(ωt)`.
    Sin,
}

/// A closed-form field `P(r)·e^{−r²}·T(ωt)` with polynomial `P`.
///
/// Such fields are not solutions; they exercise identities that hold for any smooth field.
#[derive(Clone, Debug, PartialEq)]
pub struct ManufacturedField {
    /// Coefficients of `P`, lowest degree first.
    pub coeffs: Vec<f64>,
    /// Time factor.
    pub trig: Trig,
    /// Angular frequency.
    pub omega: f64,
    /// Tag used in reports.
    pub tag: String,
}

impl ManufacturedField {
    /// `0.1·e^{−r²}·cos t`.
    pub fn gaussian_cos() -> Self {
        ManufacturedField {
            coeffs: vec![0.1],
            trig: Trig::Cos,
            omega: 1.0,
            tag: "gaussian_cos".into(),
        }
    }

    /// `0.05·r²e^{−r²}·sin 2t`.
    pub fn r2gauss_sin() -> Self {
        ManufacturedField {
            coeffs: vec![0.0, 0.0, 0.05],
            trig: Trig::Sin,
            omega: 2.0,
            tag: "r2gauss_sin".into(),
        }
    }

    /// Custom coefficients; only even powers keep the field regular on the axis.
    pub fn custom(coeffs: Vec<f64>, trig: Trig, omega: f64) -> Self {
        ManufacturedField {
            coeffs,
            trig,
            omega,
            tag: "custom".into(),
        }
    }

    fn radial(&self, j: usize, r: f64) -> f64 {
        let mut p = self.coeffs.clone();
        for _ in 0..j {
            let mut q = vec![0.0; p.len() + 1];
            for (k, &a) in p.iter().enumerate() {
                if k > 0 {
                    q[k - 1] += k as f64 * a;
                }
                q[k + 1] -= 2.0 * a;
            }
            p = q;
        }
        let poly = p.iter().rev().fold(0.0, |acc, &a| acc * r + a);
        poly * (-r * r).exp()
    }

    fn temporal(&self, i: usize, t: f64) -> f64 {
        let (s, c) = (self.omega * t).sin_cos();
        let w = self.omega.powi(i as i32);
        let shifted = match self.trig {
            Trig::Cos => i,
            Trig::Sin => i + 3,
        };
        w * match shifted % 4 {
            0 => c,
            1 => -s,
            2 => -c,
            _ => s,
        }
    }
}

impl AnalyticField for ManufacturedField {
    fn partial(&self, i: usize, j: usize, t: f64, r: f64) -> f64 {
        self.temporal(i, t) * self.radial(j, r)
    }
}

/// The linear standing wave `a·J₀(kr)·cos(kt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselWave {
    /// Amplitude.
    pub a: f64,
    /// Wavenumber.
    pub k: f64,
}

impl AnalyticField for BesselWave {
    fn partial(&self, i: usize, j: usize, t: f64, r: f64) -> f64 {
        let (s, c) = (self.k * t).sin_cos();
        let time = match i % 4 {
            0 => c,
            1 => -s,
            2 => -c,
            _ => s,
        } * self.k.powi(i as i32);
        let space = bessel_j0_derivative(j, self.k * r).unwrap_or(f64::NAN) * self.k.powi(j as i32);
        self.a * time * space
    }
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// `∫₀^R f(r)·w(r) dr` by five-point Gauss–Legendre on each cell of a mesh
/// [`DENSE_REFINEMENT`] times finer than `grid`.
///
/// The nodes never touch `r = 0`, so the `1/r` weight needs no axis limit; the axis value
/// of `f` must still vanish for the integral to exist.
pub fn dense_quadrature(f: impl Fn(f64) -> f64, weight: Weight, grid: &Grid) -> Result<f64> {
    if weight == Weight::InvR {
        let scale = f(grid.h()).abs().max(f(grid.r_max() * 0.5).abs());
        let axis = f(0.0);
        if axis.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::AxisSingular { value: axis });
        }
    }
    let cells = grid.n() * DENSE_REFINEMENT;
    let h = grid.r_max() / cells as f64;
    let mut acc = 0.0;
    for cell in 0..cells {
        let mid = (cell as f64 + 0.5) * h;
        let mut s = 0.0;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            let r = mid + 0.5 * h * x;
            let m = match weight {
                Weight::One => 1.0,
                Weight::R => r,
                Weight::InvR => 1.0 / r,
            };
            s += w * f(r) * m;
        }
        acc += 0.5 * h * s;
    }
    Ok(acc)
}

/// `∫_{t0}^{t1} ∫₀^R f(t, r)·w(r) dr dt`, Gauss–Legendre in both directions, with `cells_t`
/// time cells.
pub fn dense_quadrature_2d(
    f: impl Fn(f64, f64) -> f64,
    weight: Weight,
    grid: &Grid,
    t0: f64,
    t1: f64,
    cells_t: usize,
) -> Result<f64> {
    if cells_t == 0 {
        return Err(Error::Contract("at least one time cell is required".into()));
    }
    let ht = (t1 - t0) / cells_t as f64;
    let mut acc = 0.0;
    for cell in 0..cells_t {
        let mid = t0 + (cell as f64 + 0.5) * ht;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            let t = mid + 0.5 * ht * x;
            acc += 0.5 * ht * w * dense_quadrature(|r| f(t, r), weight, grid)?;
        }
    }
    Ok(acc)
}

/// Largest argument accepted by the Bessel evaluators.
pub const BESSEL_X_MAX: f64 = 200.0;

fn check_bessel_arg(x: f64) -> Result<()> {
    if !(0.0..=BESSEL_X_MAX).contains(&x) {
        return Err(Error::Domain(format!(
            "Bessel argument must lie in [0, {BESSEL_X_MAX}], got {x}"
        )));
    }
    Ok(())
}

/// `J_n(x)` for `0 ≤ x ≤ 200`: power series below 8, Miller's backward recurrence above.
pub fn bessel_jn(n: usize, x: f64) -> Result<f64> {
    check_bessel_arg(x)?;
    if x < 8.0 {
        let q = -0.25 * x * x;
        let mut term = (0..n).fold(1.0, |acc, k| acc * 0.5 * x / (k + 1) as f64);
        let mut sum = term;
        for k in 1..200 {
            term *= q / (k as f64 * (k + n) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        return Ok(sum);
    }
    let start = {
        let m = (x + 40.0 + 10.0 * x.sqrt()) as usize + n;
        m + m % 2
    };
    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if k - 1 == n {
            wanted = j_cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += j_cur;
    Ok(wanted / norm)
}

/// `J₀(x)`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    bessel_jn(0, x)
}

/// `J₁(x)`.
pub fn bessel_j1(x: f64) -> Result<f64> {
    bessel_jn(1, x)
}

/// `d^m J₀/dx^m = 2^{−m} Σ_k (−1)^k C(m, k) J_{2k−m}` with `J_{−n} = (−1)^n J_n`.
pub fn bessel_j0_derivative(m: usize, x: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut binom = 1.0;
    for k in 0..=m {
        let order = 2 * k as i64 - m as i64;
        let jn = bessel_jn(order.unsigned_abs() as usize, x)?;
        let reflect = if order < 0 && order % 2 != 0 {
            -1.0
        } else {
            1.0
        };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * reflect * jn;
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    Ok(sum / 2f64.powi(m as i32))
}

/// Observed convergence order from successive errors.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedOrder {
    /// Pairwise orders `log(e_i/e_{i+1})/log ρ`.
    pub pairwise: Vec<f64>,
    /// Mean of the pairwise orders, `None` when undefined.
    pub order: Option<f64>,
    /// True when every error is zero.
    pub exact: bool,
    /// True when the errors decrease strictly.
    pub monotone: bool,
}

/// Observed order of successive errors at a fixed refinement ratio.
pub fn richardson_order(errors: &[f64], ratio: f64) -> Result<ObservedOrder> {
    if errors.len() < 2 {
        return Err(Error::Contract("at least two errors are required".into()));
    }
    if !(ratio > 1.0) {
        return Err(Error::Contract(format!(
            "refinement ratio must exceed 1, got {ratio}"
        )));
    }
    if errors.iter().all(|e| *e == 0.0) {
        return Ok(ObservedOrder {
            pairwise: Vec::new(),
            order: None,
            exact: true,
            monotone: true,
        });
    }
    let monotone = errors.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0);
    let pairwise: Vec<f64> = errors
        .windows(2)
        .map(|w| (w[0] / w[1]).ln() / ratio.ln())
        .collect();
    let order = monotone.then(|| pairwise.iter().sum::<f64>() / pairwise.len() as f64);
    Ok(ObservedOrder {
        pairwise,
        order,
        exact: false,
        monotone,
    })
}
