//! Weighted balance laws in the normal form `∂_t D + ∂_r F = Rm`.
//!
//! Each law arises from multiplying `E(φ)` or one of its derivatives by a multiplier
//! `m`. For an arbitrary smooth field `D_t + F_r − Rm = m·∂^k E`, where `∂^k` is
//! `∂_t^k` for the time laws and `∂_r` for the spatial law. Densities, fluxes and
//! multipliers are written once over [`Scalar`], so exact derivatives of them follow
//! from dual-number lifts of a jet.
//!
//! The remainder of the spatial law is the derivation form
//! `D_t + F_r − m·∂_r E`, evaluated exactly by dual lifts. Alternative expanded forms of
//! three remainders are exposed through [`BalanceLaw::alternate_remainders`] for
//! node-wise comparison.

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::grid::{close_axis, deriv_r, Grid, Parity};
use crate::jet::{
    c, eq_residual, eq_residual_dr, eq_residual_dt, eq_residual_dtt, AnalyticField, Jet, Scalar,
};
use crate::kinematics::DerivBundle;

/// Identifier of a balance law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LawId {
    /// Multiplier `φ_t/r²` on the equation.
    Ph1,
    /// Multiplier `φ_r/r²` on the equation.
    Ph2,
    /// Multiplier `φ_tt` on the time derivative of the equation.
    Ph3,
    /// Multiplier `φ_tr + φ_t/(2r)` on the time derivative of the equation.
    Ph5,
    /// Multiplier `φ_rr + φ_r/(2r)` on the radial derivative of the equation.
    Ph6,
    /// Multiplier `φ_ttt` on the second time derivative of the equation.
    Ph7,
}

/// Which derivative of the equation residual a law multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqDerivative {
    /// `∂_t^k E` with `k ∈ {0, 1, 2}`.
    Time(u8),
    /// `∂_r E`.
    Space,
}

/// A balance law as a value object.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BalanceLaw {
    /// Which law.
    pub id: LawId,
}

/// Node-wise fields of one law on one bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct LawFields {
    /// Density `D`.
    pub density: Vec<f64>,
    /// Flux `F`.
    pub flux: Vec<f64>,
    /// Remainder `Rm`.
    pub remainder: Vec<f64>,
    /// Multiplier `m`.
    pub multiplier: Vec<f64>,
}

impl BalanceLaw {
    /// All six laws in order.
    pub const ALL: [BalanceLaw; 6] = [
        BalanceLaw { id: LawId::Ph1 },
        BalanceLaw { id: LawId::Ph2 },
        BalanceLaw { id: LawId::Ph3 },
        BalanceLaw { id: LawId::Ph5 },
        BalanceLaw { id: LawId::Ph6 },
        BalanceLaw { id: LawId::Ph7 },
    ];

    /// Law with the given identifier.
    pub const fn new(id: LawId) -> Self {
        BalanceLaw { id }
    }

    /// Short identifier used in reports.
    pub fn name(&self) -> &'static str {
        match self.id {
            LawId::Ph1 => "PH1",
            LawId::Ph2 => "PH2",
            LawId::Ph3 => "PH3",
            LawId::Ph5 => "PH5",
            LawId::Ph6 => "PH6",
            LawId::Ph7 => "PH7",
        }
    }

    /// Law from its report name, case-insensitive.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(name))
    }

    /// Derivative of the equation multiplied by `m`.
    pub fn eq_derivative(&self) -> EqDerivative {
        match self.id {
            LawId::Ph1 | LawId::Ph2 => EqDerivative::Time(0),
            LawId::Ph3 | LawId::Ph5 => EqDerivative::Time(1),
            LawId::Ph6 => EqDerivative::Space,
            LawId::Ph7 => EqDerivative::Time(2),
        }
    }

    /// Number of derivatives of the equation the law multiplies.
    pub fn eq_order(&self) -> u8 {
        match self.eq_derivative() {
            EqDerivative::Time(k) => k,
            EqDerivative::Space => 1,
        }
    }

    /// Parity of `D`, `Rm` and `m·∂E`; the flux has the opposite parity.
    pub fn density_parity(&self) -> Parity {
        match self.id {
            LawId::Ph1 | LawId::Ph3 | LawId::Ph7 => Parity::Odd,
            LawId::Ph2 | LawId::Ph5 | LawId::Ph6 => Parity::Even,
        }
    }

    /// Parity of `F`.
    pub fn flux_parity(&self) -> Parity {
        self.density_parity().flip()
    }

    /// True when some field of the law behaves like `φ_t(0)²/r` or worse near the axis,
    /// so it is bounded only while `φ_t` vanishes on the axis.
    pub fn singular_with_axis_velocity(&self) -> bool {
        matches!(self.id, LawId::Ph1 | LawId::Ph2 | LawId::Ph5)
    }

    /// Density `D` at a point.
    pub fn density<T: Scalar>(&self, j: &Jet<T>) -> T {
        let one = c::<T>(1.0);
        let (r, pt, pr) = (j.r, j.pt, j.pr);
        match self.id {
            LawId::Ph1 => (pr * pr + pt * pt) * 0.5 / (r * j.delta_pow(0.5)),
            LawId::Ph2 => pr * pt / (r * j.delta_pow(0.5)),
            LawId::Ph3 => {
                r * (j.ptt * j.ptt * (one + pr * pr) + j.ptr * j.ptr * (one - pt * pt))
                    * 0.5
                    * j.delta_pow(-1.5)
            }
            LawId::Ph5 => {
                let g = j.delta_pow(-1.5);
                let c1 = r * (j.ptt * j.ptr * (one + pr * pr) - pt * pr * j.ptr * j.ptr) * g;
                let c2 = (pt * j.ptt * (one + pr * pr) - pt * pt * pr * j.ptr) * 0.5 * g;
                c1 + c2
            }
            LawId::Ph6 => {
                let g = j.delta_pow(-1.5);
                r * (j.prr * j.ptr * (one + pr * pr) - pt * pr * j.prr * j.prr) * g
                    + (pr * j.ptr * (one + pr * pr) - pt * pr * pr * j.prr) * 0.5 * g
            }
            LawId::Ph7 => {
                let g = j.delta_pow(-1.5);
                let (a_t, b_t) = ph7_coefficient_rates(j);
                r * (j.pttt * j.pttt * (one + pr * pr) + j.pttr * j.pttr * (one - pt * pt))
                    * 0.5
                    * g
                    + r * j.pttr * j.ptr * a_t
                    + r * j.pttr * j.ptt * b_t
            }
        }
    }

    /// Flux `F` at a point.
    pub fn flux<T: Scalar>(&self, j: &Jet<T>) -> T {
        let one = c::<T>(1.0);
        let (r, pt, pr) = (j.r, j.pt, j.pr);
        match self.id {
            LawId::Ph1 => -(pt * pr) / (r * j.delta_pow(0.5)),
            LawId::Ph2 => -((pt * pt + pr * pr) * 0.5) / (r * j.delta_pow(0.5)),
            LawId::Ph3 => {
                -(r * (j.ptt * j.ptr * (one - pt * pt) + pr * pt * j.ptt * j.ptt)
                    * j.delta_pow(-1.5))
            }
            LawId::Ph5 => {
                let g = j.delta_pow(-1.5);
                let d1 = r
                    * (j.ptr * j.ptr * (one - pt * pt) + j.ptt * j.ptt * (one + pr * pr))
                    * 0.5
                    * g;
                let d2 = (pt * j.ptr * (one - pt * pt) + pt * pt * pr * j.ptt) * 0.5 * g;
                let d3 = pt * pt * 0.25 / (r * j.delta_pow(0.5));
                -(d1 + d2 + d3)
            }
            LawId::Ph6 => {
                let g = j.delta_pow(-1.5);
                let e1 = r
                    * (j.prr * j.prr * (one - pt * pt) + j.ptr * j.ptr * (one + pr * pr))
                    * 0.5
                    * g;
                let e2 = (pr * j.prr * (one - pt * pt) + pt * pr * pr * j.ptr) * 0.5 * g;
                let e3 = pr * pr * 0.25 / (r * j.delta_pow(0.5));
                -(e1 + e2 + e3)
            }
            LawId::Ph7 => {
                let g = j.delta_pow(-1.5);
                let (a_t, b_t) = ph7_coefficient_rates(j);
                -(r * (j.pttt * j.pttr * (one - pt * pt) + j.pttt * j.pttt * pt * pr) * g
                    + r * j.pttt * j.ptr * a_t
                    + r * j.pttt * j.ptt * b_t)
            }
        }
    }

    /// Multiplier `m` at a point.
    pub fn multiplier<T: Scalar>(&self, j: &Jet<T>) -> T {
        match self.id {
            LawId::Ph1 => j.pt / (j.r * j.r),
            LawId::Ph2 => j.pr / (j.r * j.r),
            LawId::Ph3 => j.ptt,
            LawId::Ph5 => j.ptr + j.pt / (j.r * 2.0),
            LawId::Ph6 => j.prr + j.pr / (j.r * 2.0),
            LawId::Ph7 => j.pttt,
        }
    }

    /// Remainder `Rm` at a point with `r > 0`.
    pub fn remainder(&self, j: &Jet<f64>) -> f64 {
        let (r, pt, pr, ptt, ptr, prr) = (j.r, j.pt, j.pr, j.ptt, j.ptr, j.prr);
        match self.id {
            LawId::Ph1 => {
                0.5 * (pr * pr - pt * pt) * j.delta_pow_t(-0.5) / r
                    + 2.0 * pt * pr / (r * r * j.delta_pow(0.5))
            }
            LawId::Ph2 => {
                let g = j.delta_pow(-0.5);
                0.5 * (pr * pr - pt * pt) * (-g / (r * r) + j.delta_pow_r(-0.5) / r)
                    + 2.0 * pr * pr * g / (r * r)
            }
            LawId::Ph3 => {
                let g = j.delta_pow(-1.5);
                let g_t = j.delta_pow_t(-1.5);
                let x1_t = r * (2.0 * pr * ptr * g + (1.0 + pr * pr) * g_t);
                let x2_t = r * ((ptt * pr + pt * ptr) * g + pt * pr * g_t);
                let x3_t = r * (-2.0 * pt * ptt * g + (1.0 - pt * pt) * g_t);
                -0.5 * ptt * ptt * x1_t + ptt * ptr * x2_t + 0.5 * ptr * ptr * x3_t
            }
            LawId::Ph5 => {
                let g = j.delta_pow(-1.5);
                r * j.delta_pow_r(-1.5)
                    * (-0.5 * ptt * ptt * (1.0 + pr * pr)
                        + ptr * ptt * pr * pt
                        + 0.5 * ptr * ptr * (1.0 - pt * pt))
                    + r * g * (ptt * pr - ptr * pt) * (ptr * ptr - ptt * prr)
                    + 0.25 * pt * pt / (r * r * j.delta_pow(0.5))
                    - j.delta_pow_r(-0.5) * pt * pt / (4.0 * r)
                    + j.delta_pow_t(-0.5) * pt * pr / (2.0 * r)
            }
            LawId::Ph6 => {
                let lt = j.lift_t();
                let lr = j.lift_r();
                self.density(&lt).eps + self.flux(&lr).eps
                    - self.multiplier(j) * eq_residual(&lr).eps
            }
            LawId::Ph7 => {
                let (pttt, pttr) = (j.pttt, j.pttr);
                let g = j.delta_pow(-1.5);
                let g_t = j.delta_pow_t(-1.5);
                let g_tt = j.delta_pow_tt(-1.5);
                let cross = pttt * ptr - pttr * ptt;
                r * g_tt
                    * (-pttt * ptt * (1.0 + pr * pr)
                        + pttt * ptr * pt * pr
                        + pttr * ptt * pr * pt
                        + pttr * ptr * (1.0 - pt * pt))
                    + r * g_t
                        * 1.5
                        * (-pttt * pttt * (1.0 + pr * pr)
                            + 2.0 * pttt * pttr * pt * pr
                            + pttr * pttr * (1.0 - pt * pt))
                    + r * g_t * 2.0 * cross * (ptr * pt - ptt * pr)
                    + r * g * 2.0 * (pttr * pt - pttt * pr) * cross
            }
        }
    }

    /// Alternative expanded forms of the remainder, by label.
    ///
    /// `PH3` has an intermediate and a collapsed form, `PH6` its expanded remainder and
    /// `PH7` a second expanded form. Other laws return an empty list.
    pub fn alternate_remainders(&self, j: &Jet<f64>) -> Vec<(&'static str, f64)> {
        let (r, pt, pr, ptt, ptr, prr) = (j.r, j.pt, j.pr, j.ptt, j.ptr, j.prr);
        match self.id {
            LawId::Ph3 => {
                let g = j.delta_pow(-1.5);
                let rg_t = r * j.delta_pow_t(-1.5);
                let bracket = ptr * ptr * (1.0 - pt * pt) + 2.0 * ptt * ptr * pt * pr
                    - ptt * ptt * (1.0 + pr * pr);
                let intermediate = rg_t * 0.5 * bracket
                    + r * g
                        * (-pr * ptr * ptt * ptt + ptt * ptr * (ptt * pr + pt * ptr)
                            - ptr * ptr * pt * ptt);
                vec![
                    ("W1_intermediate", intermediate),
                    ("W1_collapsed", rg_t * bracket),
                ]
            }
            LawId::Ph6 => {
                let expanded = r
                    * j.delta_pow_r(-1.5)
                    * (-0.5 * ptr * ptr * (1.0 + pr * pr)
                        + ptr * prr * pr * pt
                        + 0.5 * prr * prr * (1.0 - pt * pt))
                    + 0.75 * pr * pr / (r * r * j.delta_pow(0.5))
                    + j.delta_pow_r(-0.5) * 3.0 * pr * pr / (4.0 * r);
                vec![("P2_expanded", expanded)]
            }
            LawId::Ph7 => {
                let (pttt, pttr) = (j.pttt, j.pttr);
                let g = j.delta_pow(-1.5);
                let g_t = j.delta_pow_t(-1.5);
                let g_tt = j.delta_pow_tt(-1.5);
                let k = 4.5 * r * j.delta_pow(-2.5);
                let cross = pttt * ptr - pttr * ptt;
                let second = r
                    * g_tt
                    * (-pttt * ptt * (1.0 + pr * pr)
                        + pttt * ptr * pt * pr
                        + pttr * ptt * pr * pt
                        + pttr * ptr * (1.0 - pt * pt))
                    + k * (pr * pttr - pt * pttt)
                        * (ptr * pttr * (1.0 - pt * pt) - ptt * pttt * (1.0 + pr * pr)
                            + 2.0 * pttt * ptr * pr * pt)
                    + k * pt * pttr * (1.0 - pt * pt) * cross
                    - k * pr * pttt * (1.0 + pr * pr) * cross
                    + 2.0 * k * pt * pt * pr * pttt * cross
                    + r * g_t * 2.0 * cross * (ptr * pt - ptt * pr)
                    + r * g * 2.0 * (pttr * pt - pttt * pr) * cross;
                vec![("T1_second", second)]
            }
            _ => Vec::new(),
        }
    }

    /// Exact `m·∂^k E` at a point of an analytic field.
    pub fn multiplier_term(&self, field: &impl AnalyticField, t: f64, r: f64) -> f64 {
        let m = self.multiplier(&field.jet(t, r));
        let e = match self.eq_derivative() {
            EqDerivative::Time(0) => eq_residual(&field.jet(t, r)),
            EqDerivative::Time(1) => eq_residual_dt(field, t, r),
            EqDerivative::Time(_) => eq_residual_dtt(field, t, r),
            EqDerivative::Space => eq_residual_dr(field, t, r),
        };
        m * e
    }

    /// Node-wise `D`, `F`, `Rm`, `m` on a bundle, with the axis node closed by parity.
    pub fn fields(&self, bundle: &DerivBundle) -> LawFields {
        let n = bundle.len();
        let mut out = LawFields {
            density: vec![0.0; n],
            flux: vec![0.0; n],
            remainder: vec![0.0; n],
            multiplier: vec![0.0; n],
        };
        for i in 1..n {
            let j = bundle.jet(i);
            out.density[i] = self.density(&j);
            out.flux[i] = self.flux(&j);
            out.remainder[i] = self.remainder(&j);
            out.multiplier[i] = self.multiplier(&j);
        }
        if n > 3 {
            close_axis(&mut out.density, self.density_parity());
            close_axis(&mut out.flux, self.flux_parity());
            close_axis(&mut out.remainder, self.density_parity());
            close_axis(&mut out.multiplier, multiplier_parity(self.id));
        }
        out
    }
}

fn multiplier_parity(id: LawId) -> Parity {
    match id {
        LawId::Ph1 | LawId::Ph3 | LawId::Ph6 | LawId::Ph7 => Parity::Even,
        LawId::Ph2 | LawId::Ph5 => Parity::Odd,
    }
}

/// `A_t` and `B_t` for `A = (1−φ_t²)Δ^{−3/2}`, `B = φ_rφ_tΔ^{−3/2}`.
fn ph7_coefficient_rates<T: Scalar>(j: &Jet<T>) -> (T, T) {
    let one = c::<T>(1.0);
    let g = j.delta_pow(-1.5);
    let g_t = j.delta_pow_t(-1.5);
    let a_t = -(j.pt * j.ptt * g * 2.0) + (one - j.pt * j.pt) * g_t;
    let b_t = (j.ptr * j.pt + j.pr * j.ptt) * g + j.pr * j.pt * g_t;
    (a_t, b_t)
}

/// Exact pointwise gap `D_t + F_r − Rm − m·∂^k E` of an analytic field.
///
/// Vanishes to round-off for every smooth field exactly when the law is a true identity.
pub fn exact_identity_gap(law: BalanceLaw, field: &impl AnalyticField, t: f64, r: f64) -> f64 {
    let d_t = law.density(&field.jet_dt(t, r)).eps;
    let f_r = law.flux(&field.jet_dr(t, r)).eps;
    d_t + f_r - law.remainder(&field.jet(t, r)) - law.multiplier_term(field, t, r)
}

/// Exact pointwise gap of an alternative expanded remainder, in the same order as
/// [`BalanceLaw::alternate_remainders`].
pub fn alternate_identity_gaps(
    law: BalanceLaw,
    field: &impl AnalyticField,
    t: f64,
    r: f64,
) -> Vec<(&'static str, f64)> {
    let d_t = law.density(&field.jet_dt(t, r)).eps;
    let f_r = law.flux(&field.jet_dr(t, r)).eps;
    let m_e = law.multiplier_term(field, t, r);
    law.alternate_remainders(&field.jet(t, r))
        .into_iter()
        .map(|(name, rm)| (name, d_t + f_r - rm - m_e))
        .collect()
}

/// Grid gap `[∂_t D + ∂_r F − Rm] − m·∂^k E` of an analytic field at time `t`.
///
/// `∂_t D` is a centered difference with step `dt` of exact densities and `∂_r F` uses
/// the grid stencils; `Rm` and `m·∂^k E` are exact. The axis node is closed by parity.
pub fn multiplier_identity_gap(
    law: BalanceLaw,
    field: &impl AnalyticField,
    t: f64,
    dt: f64,
    grid: &Grid,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::Contract(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let r = grid.r();
    let n = grid.len();
    let mut flux = vec![0.0; n];
    for i in 1..n {
        flux[i] = law.flux(&field.jet(t, r[i]));
    }
    close_axis(&mut flux, law.flux_parity());
    let flux_r = deriv_r(&flux, 1, law.flux_parity(), grid)?;
    let mut gap = vec![0.0; n];
    for i in 1..n {
        let d_next = law.density(&field.jet(t + dt, r[i]));
        let d_prev = law.density(&field.jet(t - dt, r[i]));
        gap[i] = (d_next - d_prev) / (2.0 * dt) + flux_r[i]
            - law.remainder(&field.jet(t, r[i]))
            - law.multiplier_term(field, t, r[i]);
    }
    close_axis(&mut gap, law.density_parity());
    Ok(gap)
}

/// Node-wise residual `∂_t D + ∂_r F − Rm` at an interior snapshot of a trajectory.
///
/// `∂_t D` is the centered difference across the neighbouring snapshots.
pub fn residual(
    law: BalanceLaw,
    trajectory: &Trajectory,
    index: usize,
    grid: &Grid,
) -> Result<Vec<f64>> {
    let snaps = &trajectory.snapshots;
    if index == 0 || index + 1 >= snaps.len() {
        return Err(Error::Contract(format!(
            "snapshot {index} has no temporal neighbours among {} snapshots",
            snaps.len()
        )));
    }
    let prev = law.fields(&snaps[index - 1].bundle);
    let cur = law.fields(&snaps[index].bundle);
    let next = law.fields(&snaps[index + 1].bundle);
    let dt = snaps[index + 1].bundle.t - snaps[index - 1].bundle.t;
    let flux_r = deriv_r(&cur.flux, 1, law.flux_parity(), grid)?;
    Ok((0..grid.len())
        .map(|i| (next.density[i] - prev.density[i]) / dt + flux_r[i] - cur.remainder[i])
        .collect())
}
