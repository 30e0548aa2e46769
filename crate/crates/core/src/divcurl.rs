//! Div-curl pairing of two balance laws.
//!
//! The top law supplies `f¹¹_t + f¹²_r = G¹` with `(f¹¹, f¹², G¹) = (D, F, Rm)`, the
//! bottom law `f²¹_t − f²²_r = G²` with `(f²¹, f²², G²) = (D, −F, Rm)`. With
//! `C(t, r) = ∫₀^r f¹¹` and `f¹²(t, 0) = 0`,
//!
//! `∫₀ᵀ∫ f¹¹f²² + f¹²f²¹ = [∫ C f²¹ dr]_{t=T}^{t=0} + ∫₀ᵀ∫ f²¹ ∫₀^r G¹ + ∫₀ᵀ∫ G² C`,
//!
//! the outer boundary term vanishing for contained data. Integrals in `r` use Simpson's
//! rule and cumulative integrals the running rule of [`crate::grid::cumulative`];
//! integrals in `t` use the trapezoid rule over snapshots.

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::functionals::{det_fields, DetRecord, ANNULUS_INNER};
use crate::grid::{axis_even_extrapolate, cumulative, simpson, Grid};
use crate::laws::{BalanceLaw, LawFields, LawId};

/// Relative size of `f¹²` on the axis above which a pair is inadmissible.
pub const AXIS_FLUX_TOL: f64 = 1e-3;

/// The four matrix pairings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pairing {
    /// PH1 over PH5.
    A,
    /// PH3 over PH5.
    B,
    /// PH2 over PH7.
    C,
    /// PH7 over PH5.
    D,
}

impl Pairing {
    /// All four pairings.
    pub const ALL: [Pairing; 4] = [Pairing::A, Pairing::B, Pairing::C, Pairing::D];

    /// Report name.
    pub fn name(&self) -> &'static str {
        match self {
            Pairing::A => "A",
            Pairing::B => "B",
            Pairing::C => "C",
            Pairing::D => "D",
        }
    }

    /// Pairing from its report name.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(name))
    }

    /// Top and bottom laws.
    pub fn laws(&self) -> (BalanceLaw, BalanceLaw) {
        let (a, b) = match self {
            Pairing::A => (LawId::Ph1, LawId::Ph5),
            Pairing::B => (LawId::Ph3, LawId::Ph5),
            Pairing::C => (LawId::Ph2, LawId::Ph7),
            Pairing::D => (LawId::Ph7, LawId::Ph5),
        };
        (BalanceLaw::new(a), BalanceLaw::new(b))
    }

    /// Accumulator label of the determinant integral.
    pub fn accumulator(&self) -> &'static str {
        match self {
            Pairing::A => "eta2",
            Pairing::B => "xi2",
            Pairing::C => "zeta2",
            Pairing::D => "gamma2",
        }
    }

    fn det_column<'a>(&self, det: &'a DetRecord) -> &'a [f64] {
        match self {
            Pairing::A => &det.det_a,
            Pairing::B => &det.det_b,
            Pairing::C => &det.det_c,
            Pairing::D => &det.det_d,
        }
    }

    /// Pairing of two laws, if they form one of the four matrix pairings.
    pub fn of(top: BalanceLaw, bottom: BalanceLaw) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.laws() == (top, bottom))
    }
}

/// Radial range of a space-time integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// `[0, R]`.
    Full,
    /// `[r_c, R]` with `r_c` a mesh node.
    Annulus {
        /// Inner radius.
        r_c: f64,
    },
}

impl Domain {
    /// Annulus starting at the first even node at or above [`ANNULUS_INNER`].
    pub fn default_annulus(grid: &Grid) -> Self {
        Domain::Annulus {
            r_c: grid.r()[annulus_index(grid)],
        }
    }

    fn start(&self, grid: &Grid) -> usize {
        match self {
            Domain::Full => 0,
            Domain::Annulus { r_c } => grid.even_index_at_or_above(*r_c).min(grid.n() - 2),
        }
    }

    /// Report label.
    pub fn label(&self) -> String {
        match self {
            Domain::Full => "full".into(),
            Domain::Annulus { r_c } => format!("annulus(r_c={r_c})"),
        }
    }
}

fn annulus_index(grid: &Grid) -> usize {
    grid.even_index_at_or_above(ANNULUS_INNER).min(grid.n() - 2)
}

/// Lemma quantities of one pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingReport {
    /// Pair name.
    pub name: String,
    /// `∫₀ᵀ∫ f¹¹f²² + f¹²f²¹`.
    pub lhs: f64,
    /// Boundary-in-time term.
    pub a1: f64,
    /// `∫∫ f²¹ ∫₀^r G¹`.
    pub a2: f64,
    /// `∫∫ G² ∫₀^r f¹¹`.
    pub a3: f64,
    /// `lhs − a1 − a2 − a3`.
    pub gap: f64,
    /// `(‖f¹¹(0)‖₁ + sup_t‖f¹¹‖₁ + ∫∫|G¹|)·(‖f²¹(0)‖₁ + sup_t‖f²¹‖₁ + ∫∫|G²|)`.
    pub bound_rhs: f64,
    /// Largest `|f¹²(t, 0)|` over the snapshots, extrapolated from the first three
    /// nodes off the axis.
    pub axis_f12: f64,
    /// Largest `|f¹²|` over all nodes and snapshots.
    pub peak_f12: f64,
    /// Whether `f¹²` vanishes on the axis within [`AXIS_FLUX_TOL`] of its peak.
    pub admissible: bool,
    /// Final time of the integration window.
    pub t_final: f64,
}

impl PairingReport {
    /// Observed constant `lhs / bound_rhs`.
    pub fn observed_constant(&self) -> f64 {
        if self.bound_rhs == 0.0 {
            0.0
        } else {
            self.lhs.abs() / self.bound_rhs
        }
    }
}

struct Slice {
    t: f64,
    top: LawFields,
    bottom: LawFields,
}

fn window(trajectory: &Trajectory, t_final: f64) -> Vec<usize> {
    let eps = 1e-9 * t_final.abs().max(1.0);
    (0..trajectory.snapshots.len())
        .filter(|&k| trajectory.snapshots[k].bundle.t <= t_final + eps)
        .collect()
}

fn trapezoid(ts: &[f64], vals: &[f64]) -> f64 {
    ts.windows(2)
        .zip(vals.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Pointwise pairing integrand at nodes `r > 0`, the axis closed by even extrapolation.
fn pairing_integrand(top: &LawFields, bottom: &LawFields) -> Vec<f64> {
    let n = top.density.len();
    let mut g: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                top.density[i] * (-bottom.flux[i]) + top.flux[i] * bottom.density[i]
            }
        })
        .collect();
    if n > 3 {
        g[0] = axis_even_extrapolate(g[1], g[2], g[3]);
    }
    g
}

/// Product at nodes `r > 0`, the axis closed by even extrapolation.
fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    if p.len() > 3 {
        p[0] = axis_even_extrapolate(p[1], p[2], p[3]);
    }
    p
}

fn l1(v: &[f64], grid: &Grid) -> f64 {
    simpson(&v.iter().map(|x| x.abs()).collect::<Vec<_>>(), grid.h())
}

/// Lemma quantities of a pair on `[0, T]` without the admissibility gate.
pub fn pair_report(
    top: BalanceLaw,
    bottom: BalanceLaw,
    trajectory: &Trajectory,
    t_final: f64,
    grid: &Grid,
) -> Result<PairingReport> {
    let idx = window(trajectory, t_final);
    if idx.len() < 2 {
        return Err(Error::Contract(format!(
            "need at least two snapshots up to t = {t_final}, found {}",
            idx.len()
        )));
    }
    let slices: Vec<Slice> = idx
        .iter()
        .map(|&k| {
            let b = &trajectory.snapshots[k].bundle;
            Slice {
                t: b.t,
                top: top.fields(b),
                bottom: bottom.fields(b),
            }
        })
        .collect();
    let h = grid.h();
    let ts: Vec<f64> = slices.iter().map(|s| s.t).collect();
    let mut lhs_t = Vec::with_capacity(slices.len());
    let mut a2_t = Vec::with_capacity(slices.len());
    let mut a3_t = Vec::with_capacity(slices.len());
    let mut boundary = Vec::with_capacity(slices.len());
    let (mut axis_f12, mut peak_f12) = (0.0_f64, 0.0_f64);
    let (mut sup1, mut sup2) = (0.0_f64, 0.0_f64);
    let mut g1_abs = Vec::with_capacity(slices.len());
    let mut g2_abs = Vec::with_capacity(slices.len());
    for s in &slices {
        let f11 = &s.top.density;
        let f12 = &s.top.flux;
        let f21 = &s.bottom.density;
        let g1 = &s.top.remainder;
        let g2 = &s.bottom.remainder;
        axis_f12 = axis_f12.max((3.0 * f12[1] - 3.0 * f12[2] + f12[3]).abs());
        peak_f12 = f12.iter().fold(peak_f12, |m, v| m.max(v.abs()));
        lhs_t.push(simpson(&pairing_integrand(&s.top, &s.bottom), h));
        let c11 = cumulative(f11, grid);
        let cg1 = cumulative(g1, grid);
        a2_t.push(simpson(&product(f21, &cg1), h));
        a3_t.push(simpson(&product(g2, &c11), h));
        boundary.push(simpson(&product(&c11, f21), h));
        sup1 = sup1.max(l1(f11, grid));
        sup2 = sup2.max(l1(f21, grid));
        g1_abs.push(l1(g1, grid));
        g2_abs.push(l1(g2, grid));
    }
    let lhs = trapezoid(&ts, &lhs_t);
    let a1 = boundary[0] - boundary[boundary.len() - 1];
    let a2 = trapezoid(&ts, &a2_t);
    let a3 = trapezoid(&ts, &a3_t);
    let row1 = l1(&slices[0].top.density, grid) + sup1 + trapezoid(&ts, &g1_abs);
    let row2 = l1(&slices[0].bottom.density, grid) + sup2 + trapezoid(&ts, &g2_abs);
    let admissible = axis_f12 <= AXIS_FLUX_TOL * peak_f12 || peak_f12 == 0.0;
    let name = Pairing::of(top, bottom)
        .map(|p| p.name().to_string())
        .unwrap_or_else(|| format!("{}x{}", top.name(), bottom.name()));
    Ok(PairingReport {
        name,
        lhs,
        a1,
        a2,
        a3,
        gap: lhs - a1 - a2 - a3,
        bound_rhs: row1 * row2,
        axis_f12,
        peak_f12,
        admissible,
        t_final: ts[ts.len() - 1],
    })
}

/// Lemma quantities of an admissible pair on `[0, T]`.
///
/// Fails with [`Error::InadmissiblePair`] when `f¹²` does not vanish on the axis.
pub fn pair(
    top: BalanceLaw,
    bottom: BalanceLaw,
    trajectory: &Trajectory,
    t_final: f64,
    grid: &Grid,
) -> Result<PairingReport> {
    let report = pair_report(top, bottom, trajectory, t_final, grid)?;
    if !report.admissible {
        return Err(Error::InadmissiblePair {
            pair: report.name,
            axis_value: report.axis_f12,
            peak: report.peak_f12,
        });
    }
    Ok(report)
}

/// Space-time pairing integral over a radial domain.
pub fn pairing_integral(
    pairing: Pairing,
    trajectory: &Trajectory,
    domain: Domain,
    grid: &Grid,
) -> f64 {
    let (top, bottom) = pairing.laws();
    let i0 = domain.start(grid);
    let (ts, vals): (Vec<f64>, Vec<f64>) = trajectory
        .snapshots
        .iter()
        .map(|s| {
            let g = pairing_integrand(&top.fields(&s.bundle), &bottom.fields(&s.bundle));
            (s.bundle.t, simpson(&g[i0..], grid.h()))
        })
        .unzip();
    trapezoid(&ts, &vals)
}

/// Space-time determinant integral over a radial domain.
pub fn det_integral(pairing: Pairing, trajectory: &Trajectory, domain: Domain, grid: &Grid) -> f64 {
    let i0 = domain.start(grid);
    let (ts, vals): (Vec<f64>, Vec<f64>) = trajectory
        .snapshots
        .iter()
        .map(|s| {
            let det = det_fields(&s.bundle);
            (
                s.bundle.t,
                simpson(&pairing.det_column(&det)[i0..], grid.h()),
            )
        })
        .unzip();
    trapezoid(&ts, &vals)
}

/// One row of the determinant-versus-pairing comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct CrosscheckRow {
    /// Accumulator name.
    pub name: String,
    /// Value from the determinant integrands.
    pub via_det: f64,
    /// Value from the pairing integrand.
    pub via_pairing: f64,
    /// `|via_det − via_pairing| / max(|via_det|, |via_pairing|)`, zero when both vanish.
    pub gap: f64,
    /// Radial domain used.
    pub domain: Domain,
}

/// Domain on which a pairing is finite for this trajectory: the full range unless a
/// snapshot has a nonzero axis velocity and one of the pair's laws is axis-singular.
pub fn crosscheck_domain(pairing: Pairing, trajectory: &Trajectory, grid: &Grid) -> Domain {
    let (top, bottom) = pairing.laws();
    let singular_laws = top.singular_with_axis_velocity() || bottom.singular_with_axis_velocity();
    let moving_axis = trajectory.snapshots.iter().any(|s| {
        let scale = s.bundle.phi_t.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        scale > 0.0 && s.bundle.phi_t[0].abs() > 1e-6 * scale
    });
    if singular_laws && moving_axis {
        Domain::default_annulus(grid)
    } else {
        Domain::Full
    }
}

/// Compares the four determinant accumulators with the pairing integrals.
pub fn eta_xi_zeta_gamma_crosscheck(trajectory: &Trajectory, grid: &Grid) -> Vec<CrosscheckRow> {
    Pairing::ALL
        .iter()
        .map(|&p| {
            let domain = crosscheck_domain(p, trajectory, grid);
            let via_det = det_integral(p, trajectory, domain, grid);
            let via_pairing = pairing_integral(p, trajectory, domain, grid);
            let scale = via_det.abs().max(via_pairing.abs());
            let gap = if scale == 0.0 {
                0.0
            } else {
                (via_det - via_pairing).abs() / scale
            };
            CrosscheckRow {
                name: p.accumulator().into(),
                via_det,
                via_pairing,
                gap,
                domain,
            }
        })
        .collect()
}
