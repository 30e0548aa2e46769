//! Uniform radial mesh on `[0, R]`, fourth-order finite differences and Simpson quadrature.
//!
//! Nodes are `r_i = i·h`, `i = 0..=N`, `h = R/N`. Derivative stencils are five-point
//! centered in the interior. Near the axis the stencil reads ghost values `f(−r) = ±f(r)`
//! from the declared parity of the field. The last two nodes use one-sided stencils of
//! the same order. All weights come from Fornberg's recursion.
//!
//! Quadrature is composite Simpson (N even), with the weights `1`, `r` and `1/r`. The
//! `1/r` weight requires an integrand that vanishes on the axis; the first node then
//! contributes the limit `f'(0)`.

use crate::error::{Error, Result};

/// Stencil half-width of the interior finite-difference operators.
pub const HALF_WIDTH: usize = 2;

/// Relative size below which an axis sample counts as zero for the `1/r` weight.
pub const AXIS_ZERO_TOL: f64 = 1e-12;

/// Reflection symmetry of a radial field under `r → −r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    /// `f(−r) = f(r)`.
    Even,
    /// `f(−r) = −f(r)`.
    Odd,
}

impl Parity {
    /// Parity of the derivative of a field with this parity.
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Measure used by [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Weight {
    /// `∫ f dr`.
    One,
    /// `∫ f r dr`.
    R,
    /// `∫ f / r dr`.
    InvR,
}

/// Finite-difference weights for the `m`-th derivative at `x0` from the nodes `xs`
/// (Fornberg 1988).
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

#[derive(Clone, Debug)]
struct Stencils {
    d1_center: [f64; 5],
    d2_center: [f64; 5],
    d1_edge: [[f64; 5]; 2],
    d2_edge: [[f64; 6]; 2],
}

impl Stencils {
    fn new() -> Self {
        let center: Vec<f64> = (-2..=2).map(f64::from).collect();
        let d1c = fornberg_weights(0.0, &center, 1);
        let d2c = fornberg_weights(0.0, &center, 2);
        let five: Vec<f64> = (-4..=0).map(f64::from).collect();
        let six: Vec<f64> = (-5..=0).map(f64::from).collect();
        let mut d1_edge = [[0.0; 5]; 2];
        let mut d2_edge = [[0.0; 6]; 2];
        for (slot, x0) in [-1.0, 0.0].into_iter().enumerate() {
            d1_edge[slot].copy_from_slice(&fornberg_weights(x0, &five, 1));
            d2_edge[slot].copy_from_slice(&fornberg_weights(x0, &six, 2));
        }
        Stencils {
            d1_center: d1c.try_into().expect("five weights"),
            d2_center: d2c.try_into().expect("five weights"),
            d1_edge,
            d2_edge,
        }
    }
}

/// Uniform radial mesh with precomputed stencils.
#[derive(Clone, Debug)]
pub struct Grid {
    r_max: f64,
    n: usize,
    h: f64,
    r: Vec<f64>,
    stencils: Stencils,
}

impl Grid {
    /// Mesh on `[0, r_max]` with `n` intervals; `n` must be even and at least 16.
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "R must be positive and finite, got {r_max}"
            )));
        }
        if n < 16 {
            return Err(Error::InvalidGrid(format!(
                "N must be at least 16, got {n}"
            )));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "N must be even for Simpson quadrature, got {n}"
            )));
        }
        let h = r_max / n as f64;
        let r = (0..=n).map(|i| i as f64 * h).collect();
        Ok(Grid {
            r_max,
            n,
            h,
            r,
            stencils: Stencils::new(),
        })
    }

    /// Outer radius `R`.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Number of intervals `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes `N + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    /// Always false: a grid has at least 17 nodes.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing `h`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Node radii.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// First node index with `r_i ≥ r_cut`, rounded up to an even index.
    pub fn even_index_at_or_above(&self, r_cut: f64) -> usize {
        let mut i = (r_cut / self.h).ceil().max(0.0) as usize;
        if i % 2 == 1 {
            i += 1;
        }
        i.min(self.n)
    }

    /// First derivative into `out` without input validation.
    pub fn d1_into(&self, f: &[f64], parity: Parity, out: &mut [f64]) {
        let n = self.n;
        let w = &self.stencils.d1_center;
        let inv_h = 1.0 / self.h;
        let s = parity.sign();
        let at = |j: isize| -> f64 {
            if j < 0 {
                s * f[(-j) as usize]
            } else {
                f[j as usize]
            }
        };
        for (i, o) in out.iter_mut().enumerate().take(HALF_WIDTH.min(n - 1)) {
            let ii = i as isize;
            *o = (w[0] * at(ii - 2) + w[1] * at(ii - 1) + w[3] * at(ii + 1) + w[4] * at(ii + 2))
                * inv_h;
        }
        for i in HALF_WIDTH..n - 1 {
            out[i] = (w[0] * (f[i - 2] - f[i + 2]) + w[1] * (f[i - 1] - f[i + 1])) * inv_h;
        }
        for (slot, i) in [n - 1, n].into_iter().enumerate() {
            let we = &self.stencils.d1_edge[slot];
            let base = n - 4;
            out[i] = we
                .iter()
                .enumerate()
                .map(|(k, c)| c * f[base + k])
                .sum::<f64>()
                * inv_h;
        }
    }

    /// Second derivative into `out` without input validation.
    pub fn d2_into(&self, f: &[f64], parity: Parity, out: &mut [f64]) {
        let n = self.n;
        let w = &self.stencils.d2_center;
        let inv_h2 = 1.0 / (self.h * self.h);
        let s = parity.sign();
        let at = |j: isize| -> f64 {
            if j < 0 {
                s * f[(-j) as usize]
            } else {
                f[j as usize]
            }
        };
        for (i, o) in out.iter_mut().enumerate().take(HALF_WIDTH.min(n - 1)) {
            let ii = i as isize;
            *o = (w[0] * at(ii - 2)
                + w[1] * at(ii - 1)
                + w[2] * at(ii)
                + w[3] * at(ii + 1)
                + w[4] * at(ii + 2))
                * inv_h2;
        }
        for i in HALF_WIDTH..n - 1 {
            out[i] = (w[0] * (f[i - 2] + f[i + 2]) + w[1] * (f[i - 1] + f[i + 1]) + w[2] * f[i])
                * inv_h2;
        }
        for (slot, i) in [n - 1, n].into_iter().enumerate() {
            let we = &self.stencils.d2_edge[slot];
            let base = n - 5;
            out[i] = we
                .iter()
                .enumerate()
                .map(|(k, c)| c * f[base + k])
                .sum::<f64>()
                * inv_h2;
        }
    }
}

fn check_samples(samples: &[f64], grid: &Grid) -> Result<()> {
    if samples.len() != grid.len() {
        return Err(Error::Contract(format!(
            "expected {} samples, got {}",
            grid.len(),
            samples.len()
        )));
    }
    match samples.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Radial derivative of order 1, 2 or 3 of a field with the given parity.
///
/// Order 3 is the first derivative of the second derivative, which keeps the stencil
/// half-width at two.
pub fn deriv_r(samples: &[f64], order: u8, parity: Parity, grid: &Grid) -> Result<Vec<f64>> {
    check_samples(samples, grid)?;
    let mut out = vec![0.0; grid.len()];
    match order {
        1 => grid.d1_into(samples, parity, &mut out),
        2 => grid.d2_into(samples, parity, &mut out),
        3 => {
            let mut second = vec![0.0; grid.len()];
            grid.d2_into(samples, parity, &mut second);
            grid.d1_into(&second, parity, &mut out);
        }
        other => {
            return Err(Error::Contract(format!(
                "derivative order must be 1, 2 or 3, got {other}"
            )))
        }
    }
    Ok(out)
}

/// Simpson quadrature of `samples` over `[0, R]` with the given weight.
pub fn integrate(samples: &[f64], weight: Weight, grid: &Grid) -> Result<f64> {
    check_samples(samples, grid)?;
    let h = grid.h;
    let r = &grid.r;
    let weighted: Vec<f64> = match weight {
        Weight::One => samples.to_vec(),
        Weight::R => samples.iter().zip(r).map(|(f, r)| f * r).collect(),
        Weight::InvR => {
            let scale = samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if samples[0].abs() > AXIS_ZERO_TOL * scale {
                return Err(Error::AxisSingular { value: samples[0] });
            }
            let f = samples;
            let mut g = Vec::with_capacity(f.len());
            g.push(
                (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h),
            );
            g.extend(f.iter().zip(r).skip(1).map(|(f, r)| f / r));
            g
        }
    };
    Ok(simpson(&weighted, h))
}

/// Composite Simpson sum over an even number of uniform intervals.
pub fn simpson(g: &[f64], h: f64) -> f64 {
    let n = g.len() - 1;
    let mut acc = g[0] + g[n];
    for (i, v) in g.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Running integral `C_i = ∫₀^{r_i} f dr`.
///
/// Even nodes follow the Simpson chain; odd nodes add a four-point cell rule to the
/// preceding even node, mirrored at the outer edge.
pub fn cumulative(samples: &[f64], grid: &Grid) -> Vec<f64> {
    let n = grid.n;
    let h = grid.h;
    let f = samples;
    let mut c = vec![0.0; n + 1];
    let mut i = 2;
    while i <= n {
        c[i] = c[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        i += 2;
    }
    let mut i = 1;
    while i < n {
        c[i] = if i + 2 <= n {
            c[i - 1] + h * (9.0 * f[i - 1] + 19.0 * f[i] - 5.0 * f[i + 1] + f[i + 2]) / 24.0
        } else {
            c[i + 1] - h * (9.0 * f[i + 1] + 19.0 * f[i] - 5.0 * f[i - 1] + f[i - 2]) / 24.0
        };
        i += 2;
    }
    c
}

/// Axis value of an even field from its values at `h`, `2h`, `3h`
/// (exact for `a + b r² + c r⁴`).
pub fn axis_even_extrapolate(f1: f64, f2: f64, f3: f64) -> f64 {
    1.5 * f1 - 0.6 * f2 + 0.1 * f3
}

/// Fills node 0 of a field that was evaluated only for `r > 0`.
pub fn close_axis(f: &mut [f64], parity: Parity) {
    f[0] = match parity {
        Parity::Odd => 0.0,
        Parity::Even => axis_even_extrapolate(f[1], f[2], f[3]),
    };
}
