//! Radial initial-data families and the data norm
//! `‖(φ₀, φ₁)‖² = ∫ rφ₀_rr² + φ₀_r²/r + rφ₁_r² + φ₁²/r dr`.

use crate::error::{Error, Result};
use crate::evolution::InitialData;
use crate::grid::{deriv_r, integrate, Grid, Parity, Weight};
use crate::oracle::{bessel_j0, BESSEL_X_MAX};

/// Multiple of the width beyond which a Gaussian is treated as zero (`e^{−42}` ≈ 6e−19).
pub const GAUSSIAN_SUPPORT_WIDTHS: f64 = 6.5;

/// Closed-form data family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `φ₀ = a·e^{−(r/σ)²}`.
    Gaussian,
    /// `φ₀ = a·(1 − (r/σ)²)³` for `r < σ`, zero beyond.
    Bump,
    /// `φ₀ = a·J₀(kr)`.
    BesselOracle,
    /// `φ₀ ≡ a`, `φ₁ ≡ b`.
    LinearTime,
}

impl Family {
    /// Name used in configuration files.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Bump => "bump",
            Family::BesselOracle => "bessel_oracle",
            Family::LinearTime => "linear_time",
        }
    }

    /// Family from its configuration name.
    pub fn from_name(name: &str) -> Option<Self> {
        [
            Family::Gaussian,
            Family::Bump,
            Family::BesselOracle,
            Family::LinearTime,
        ]
        .into_iter()
        .find(|f| f.name() == name)
    }
}

/// Data specification.
///
/// `velocity` adds `φ₁ = v·(r/σ)²e^{−(r/σ)²}` to the Gaussian family and
/// `φ₁ = v·(r/σ)²(1 − (r/σ)²)³` to the bump family; both vanish on the axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataSpec {
    /// Family.
    pub family: Family,
    /// Amplitude `a`.
    pub amplitude: f64,
    /// Width `σ`.
    pub width: f64,
    /// Wavenumber `k` (Bessel family).
    pub wavenumber: f64,
    /// Drift `b` (linear family).
    pub drift: f64,
    /// Velocity amplitude `v` (Gaussian and bump families).
    pub velocity: f64,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec {
            family: Family::Gaussian,
            amplitude: 0.0,
            width: 1.0,
            wavenumber: 1.0,
            drift: 0.0,
            velocity: 0.0,
        }
    }
}

impl DataSpec {
    /// Gaussian `a·e^{−(r/σ)²}` at rest.
    pub fn gaussian(a: f64, sigma: f64) -> Self {
        DataSpec {
            family: Family::Gaussian,
            amplitude: a,
            width: sigma,
            ..Default::default()
        }
    }

    /// Unit-width Gaussian at rest whose data norm equals `norm` (`a = norm/√2`).
    pub fn gaussian_with_norm(norm: f64) -> Self {
        Self::gaussian(norm / std::f64::consts::SQRT_2, 1.0)
    }

    /// Compact bump `a·(1 − (r/σ)²)³` at rest.
    pub fn bump(a: f64, sigma: f64) -> Self {
        DataSpec {
            family: Family::Bump,
            amplitude: a,
            width: sigma,
            ..Default::default()
        }
    }

    /// Linear standing-wave profile `a·J₀(kr)` at rest.
    pub fn bessel_oracle(a: f64, k: f64) -> Self {
        DataSpec {
            family: Family::BesselOracle,
            amplitude: a,
            wavenumber: k,
            ..Default::default()
        }
    }

    /// Exact solution `φ = a + b·t`.
    pub fn linear_time(a: f64, b: f64) -> Self {
        DataSpec {
            family: Family::LinearTime,
            amplitude: a,
            drift: b,
            ..Default::default()
        }
    }

    /// Radius beyond which the data vanish, `None` when they never do.
    pub fn support_radius(&self) -> Option<f64> {
        match self.family {
            Family::Gaussian => Some(GAUSSIAN_SUPPORT_WIDTHS * self.width),
            Family::Bump => Some(self.width),
            Family::BesselOracle | Family::LinearTime => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = [
            self.amplitude,
            self.width,
            self.wavenumber,
            self.drift,
            self.velocity,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("data parameters must be finite".into()));
        }
        if matches!(self.family, Family::Gaussian | Family::Bump) && !(self.width > 0.0) {
            return Err(Error::Config(format!(
                "width must be positive, got {}",
                self.width
            )));
        }
        if self.family == Family::BesselOracle && !(self.wavenumber >= 0.0) {
            return Err(Error::Config(format!(
                "wavenumber must be nonnegative, got {}",
                self.wavenumber
            )));
        }
        if self.family == Family::LinearTime && self.drift.abs() >= 1.0 {
            return Err(Error::TimeLike {
                node: 0,
                delta: 1.0 - self.drift * self.drift,
            });
        }
        Ok(())
    }

    /// Pointwise `(φ₀(r), φ₁(r))`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let s = r / self.width;
        Ok(match self.family {
            Family::Gaussian => {
                let g = (-s * s).exp();
                (self.amplitude * g, self.velocity * s * s * g)
            }
            Family::Bump => {
                if s < 1.0 {
                    let p = (1.0 - s * s).powi(3);
                    (self.amplitude * p, self.velocity * s * s * p)
                } else {
                    (0.0, 0.0)
                }
            }
            Family::BesselOracle => {
                let x = self.wavenumber * r;
                if x > BESSEL_X_MAX {
                    return Err(Error::Domain(format!(
                        "k·R = {x} exceeds the Bessel evaluator range"
                    )));
                }
                (self.amplitude * bessel_j0(x)?, 0.0)
            }
            Family::LinearTime => (self.amplitude, self.drift),
        })
    }
}

/// Samples the family on the grid.
pub fn realize(spec: &DataSpec, grid: &Grid) -> Result<InitialData> {
    spec.validate()?;
    let mut phi0 = Vec::with_capacity(grid.len());
    let mut phi1 = Vec::with_capacity(grid.len());
    for &r in grid.r() {
        let (a, b) = spec.eval(r)?;
        phi0.push(a);
        phi1.push(b);
    }
    Ok(InitialData {
        phi0,
        phi1,
        support: spec.support_radius(),
    })
}

/// Squared data norm.
pub fn hnorm2(phi0: &[f64], phi1: &[f64], grid: &Grid) -> Result<f64> {
    let p_r = deriv_r(phi0, 1, Parity::Even, grid)?;
    let p_rr = deriv_r(phi0, 2, Parity::Even, grid)?;
    let q_r = deriv_r(phi1, 1, Parity::Even, grid)?;
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    Ok(integrate(&sq(&p_rr), Weight::R, grid)?
        + integrate(&sq(&p_r), Weight::InvR, grid)?
        + integrate(&sq(&q_r), Weight::R, grid)?
        + integrate(&sq(phi1), Weight::InvR, grid)?)
}

/// Data norm.
pub fn hnorm(phi0: &[f64], phi1: &[f64], grid: &Grid) -> Result<f64> {
    Ok(hnorm2(phi0, phi1, grid)?.sqrt())
}
