//! Energy-type functionals, space-time accumulators, determinant integrands and the
//! inequality report.
//!
//! Functionals with a `1/r` or `1/r²` weight on `φ_t²` are finite only while `φ_t`
//! vanishes on the axis. A nonzero axis velocity makes them `+∞`; the record then sets
//! [`FunctionalRecord::axis_singular`] and the annulus companions over `[r_c, R]` stay
//! finite.
//!
//! Determinant integrands come from the matrix entries, `a·Σd − b·Σc`. The cores
//! `det X_m` are the leading products `a·d¹ − b·c¹` (`a¹d¹ − b¹c¹` for `D`). The expanded
//! cores and expansions are evaluated in a shadow channel.

use crate::error::Result;
use crate::grid::{
    axis_even_extrapolate, deriv_r, integrate, simpson, Grid, Parity, Weight, AXIS_ZERO_TOL,
};
use crate::jet::Jet;
use crate::kinematics::{DerivBundle, FieldState};
use crate::laws::{BalanceLaw, LawId};

/// Inner radius of the annulus companions.
pub const ANNULUS_INNER: f64 = 0.5;

/// Energy-type values at one instant.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FunctionalRecord {
    /// Time.
    pub t: f64,
    /// `∫ (φ_t² + φ_r²)/r dr`.
    pub e1: f64,
    /// `∫ ½(φ_r² + φ_t²)/(rΔ^{1/2}) dr`.
    pub e1hat: f64,
    /// `∫ (φ_tt² + φ_tr² + φ_rr²) r dr`.
    pub e2: f64,
    /// `∫ ½(φ_tr²(1−φ_t²) + φ_tt²(1+φ_r²))/Δ^{3/2} r dr`.
    pub e2hat: f64,
    /// Full third-order energy.
    pub e3: f64,
    /// `∫ (φ_ttt² + φ_ttr²) r dr`.
    pub e3q: f64,
    /// `∫ (φ_trr² + φ_tr²/r²) r dr`.
    pub e3s: f64,
    /// `∫ (φ_rrr² + (φ_rr/r − φ_r/r²)²) r dr`.
    pub e3l: f64,
    /// `∫ D_PH7 dr`.
    pub e3hat: f64,
    /// `∫ ½r(φ_ttt²(1+φ_r²) + φ_ttr²(1−φ_t²))/Δ^{3/2} dr`.
    pub e3tilde: f64,
    /// Cross-term integral `∫ rφ_ttrφ_tr A_t + rφ_ttrφ_tt B_t dr`, evaluated on its own.
    pub e3_cross: f64,
    /// Squared data norm of `(φ, φ_t)`.
    pub hnorm2: f64,
    /// `∫ r√Δ dr`.
    pub area: f64,
    /// Conserved energy `∫ r[(1+φ_r²)/√Δ − 1] dr`.
    pub h_energy: f64,
    /// `max |φ_t|`.
    pub sup_pt: f64,
    /// `max |φ_r|`.
    pub sup_pr: f64,
    /// `min Δ`.
    pub delta_min: f64,
    /// `max Δ`.
    pub delta_max: f64,
    /// Whether `2(1+φ_r²) ≥ Δ^{3/2}` and `2(1−φ_t²) ≥ Δ^{3/2}` hold at every node.
    pub e3q_weights_dominated: bool,
    /// `φ_t` is nonzero on the axis.
    pub axis_singular: bool,
    /// `φ_t(t, 0)`.
    pub axis_velocity: f64,
    /// Annulus companions.
    pub annulus: AnnulusRecord,
    /// Quantities of the Sobolev, Hardy and Newton–Leibniz steps.
    pub chain: ChainStats,
}

/// Singular functionals restricted to `[r_c, R]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnnulusRecord {
    /// Inner radius (a mesh node).
    pub r_c: f64,
    /// E1 over the annulus.
    pub e1: f64,
    /// Ê1 over the annulus.
    pub e1hat: f64,
    /// Data norm squared over the annulus.
    pub hnorm2: f64,
}

/// One row of the Sobolev and Newton–Leibniz chain for a second derivative `f`
/// and its radial derivative `f_r`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChainRow {
    /// `sup_r r f²`.
    pub sup_r_f2: f64,
    /// `2∫ r|f f_r| dr`.
    pub two_int_f_fr: f64,
    /// `∫ r f² dr`.
    pub int_f2: f64,
    /// `∫ r f_r² dr`.
    pub int_fr2: f64,
    /// `∫ r f⁴ dr`.
    pub int_f4: f64,
    /// `∫ r f⁶ dr`.
    pub int_f6: f64,
}

/// Chain quantities at one instant.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChainStats {
    /// `f = φ_tt`.
    pub tt: ChainRow,
    /// `f = φ_tr`.
    pub tr: ChainRow,
    /// `f = φ_rr`.
    pub rr: ChainRow,
    /// `∫ (φ_t⁴ + φ_r⁴)/r² dr`.
    pub hardy_lhs: f64,
    /// `4∫ (φ_t²φ_tr² + φ_r²φ_rr²) dr`.
    pub hardy_rhs: f64,
}

/// Instantaneous `dr`-integrals whose time integrals form the accumulators.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Rates {
    /// Time.
    pub t: f64,
    /// `∫ (φ_t² + φ_r²)/r² dr`.
    pub m: f64,
    /// `∫ φ_tt²φ_r² + φ_tr²φ_t² + φ_tt²φ_t² + φ_tr²φ_r² dr`.
    pub m0: f64,
    /// Third-order analogue of `m0`.
    pub mh: f64,
    /// `∫ φ_tt²φ_t² + φ_tr²φ_t² dr`.
    pub m01: f64,
    /// `∫ φ_tt²φ_r² + φ_tr²φ_r² dr`.
    pub m02: f64,
    /// `∫ φ_ttt²φ_t² + φ_ttr²φ_t² dr`.
    pub mh1: f64,
    /// `∫ φ_ttt²φ_r² + φ_ttr²φ_r² dr`.
    pub mh2: f64,
    /// `∫ ¼φ_t²/(r²Δ^{1/2}) dr`.
    pub m1: f64,
    /// `∫ ¾φ_r²/(r²Δ^{1/2}) dr`.
    pub m2: f64,
    /// `∫ det A_m dr`.
    pub eta1: f64,
    /// `∫ det A dr`.
    pub eta2: f64,
    /// `∫ det B_m dr`.
    pub xi1: f64,
    /// `∫ det B dr`.
    pub xi2: f64,
    /// `∫ det C_m dr`.
    pub zeta1: f64,
    /// `∫ det C dr`.
    pub zeta2: f64,
    /// `∫ det D_m dr`.
    pub gamma1: f64,
    /// `∫ det D dr`.
    pub gamma2: f64,
    /// `m` over the annulus.
    pub ann_m: f64,
    /// `m1` over the annulus.
    pub ann_m1: f64,
    /// `m2` over the annulus.
    pub ann_m2: f64,
    /// `eta2` rate over the annulus.
    pub ann_eta2: f64,
}

/// Time-accumulated space-time integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AccumulatorRecord {
    /// Time.
    pub t: f64,
    /// M.
    pub m: f64,
    /// M0.
    pub m0: f64,
    /// Mh.
    pub mh: f64,
    /// M01.
    pub m01: f64,
    /// M02.
    pub m02: f64,
    /// Mh1.
    pub mh1: f64,
    /// Mh2.
    pub mh2: f64,
    /// M1.
    pub m1: f64,
    /// M2.
    pub m2: f64,
    /// η1.
    pub eta1: f64,
    /// η2.
    pub eta2: f64,
    /// ξ1.
    pub xi1: f64,
    /// ξ2.
    pub xi2: f64,
    /// ζ1.
    pub zeta1: f64,
    /// ζ2.
    pub zeta2: f64,
    /// γ1.
    pub gamma1: f64,
    /// γ2.
    pub gamma2: f64,
    /// M over the annulus.
    pub ann_m: f64,
    /// M1 over the annulus.
    pub ann_m1: f64,
    /// M2 over the annulus.
    pub ann_m2: f64,
    /// η2 over the annulus.
    pub ann_eta2: f64,
}

/// Determinant integrands at every node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DetRecord {
    /// `a·d¹ − b·c¹` of A.
    pub det_a_m: Vec<f64>,
    /// `a·Σd − b·Σc` of A.
    pub det_a: Vec<f64>,
    /// Core of B.
    pub det_b_m: Vec<f64>,
    /// Determinant of B.
    pub det_b: Vec<f64>,
    /// Core of C.
    pub det_c_m: Vec<f64>,
    /// Determinant of C.
    pub det_c: Vec<f64>,
    /// Core of D.
    pub det_d_m: Vec<f64>,
    /// Determinant of D.
    pub det_d: Vec<f64>,
}

/// Determinant values at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DetPoint {
    /// Core of A.
    pub a_m: f64,
    /// Determinant of A.
    pub a: f64,
    /// Core of B.
    pub b_m: f64,
    /// Determinant of B.
    pub b: f64,
    /// Core of C.
    pub c_m: f64,
    /// Determinant of C.
    pub c: f64,
    /// Core of D.
    pub d_m: f64,
    /// Determinant of D.
    pub d: f64,
}

impl DetPoint {
    /// Values in the order A_m, A, B_m, B, C_m, C, D_m, D.
    pub fn to_array(&self) -> [f64; 8] {
        [
            self.a_m, self.a, self.b_m, self.b, self.c_m, self.c, self.d_m, self.d,
        ]
    }
}

/// Labels matching [`DetPoint::to_array`].
pub const DET_LABELS: [&str; 8] = [
    "detA_m", "detA", "detB_m", "detB", "detC_m", "detC", "detD_m", "detD",
];

struct Entries {
    a_a: f64,
    b_a: f64,
    c1: f64,
    c2: f64,
    d1: f64,
    d2: f64,
    d3: f64,
    a_b: f64,
    b_b: f64,
    c1_c: f64,
    c2_c: f64,
    c3_c: f64,
    d1_c: f64,
    d2_c: f64,
    d3_c: f64,
}

fn entries(j: &Jet<f64>) -> Entries {
    let (r, pt, pr, ptt, ptr) = (j.r, j.pt, j.pr, j.ptt, j.ptr);
    let (pttt, pttr) = (j.pttt, j.pttr);
    let s12 = j.delta_pow(0.5);
    let g = j.delta_pow(-1.5);
    let g_t = j.delta_pow_t(-1.5);
    let a_t = -2.0 * pt * ptt * g + (1.0 - pt * pt) * g_t;
    let b_t = (ptr * pt + pr * ptt) * g + pr * pt * g_t;
    Entries {
        a_a: 0.5 * (pt * pt + pr * pr) / (r * s12),
        b_a: pt * pr / (r * s12),
        c1: (r * ptt * ptr * (1.0 + pr * pr) - r * pt * pr * ptr * ptr) * g,
        c2: 0.5 * (pt * ptt * (1.0 + pr * pr) - pt * pt * pr * ptr) * g,
        d1: 0.5 * (r * ptr * ptr * (1.0 - pt * pt) + r * ptt * ptt * (1.0 + pr * pr)) * g,
        d2: 0.5 * (pt * ptr * (1.0 - pt * pt) + pt * pt * pr * ptt) * g,
        d3: 0.25 * pt * pt / (r * s12),
        a_b: 0.5 * (r * ptt * ptt * (1.0 + pr * pr) + r * ptr * ptr * (1.0 - pt * pt)) * g,
        b_b: (r * ptr * ptt * (1.0 - pt * pt) + r * pr * pt * ptt * ptt) * g,
        c1_c: 0.5 * (r * pttt * pttt * (1.0 + pr * pr) + r * pttr * pttr * (1.0 - pt * pt)) * g,
        c2_c: r * pttr * ptr * a_t,
        c3_c: r * pttr * ptt * b_t,
        d1_c: (r * pttt * pttr * (1.0 - pt * pt) + r * pttt * pttt * pt * pr) * g,
        d2_c: r * pttt * ptr * a_t,
        d3_c: r * pttt * ptt * b_t,
    }
}

/// The products `a_B·d₁` and `b_B·c₁` whose difference is `detB_m`, at a point with `r > 0`.
pub fn det_b_core_terms(j: &Jet<f64>) -> (f64, f64) {
    let e = entries(j);
    (e.a_b * e.d1, e.b_b * e.c1)
}

/// Determinants from the matrix entries at a point with `r > 0`.
pub fn det_point(j: &Jet<f64>) -> DetPoint {
    let e = entries(j);
    let sum_c = e.c1 + e.c2;
    let sum_d = e.d1 + e.d2 + e.d3;
    let a_c = j.pt * j.pr / (j.r * j.delta_pow(0.5));
    let b_c = e.a_a;
    let sum_cc = e.c1_c + e.c2_c + e.c3_c;
    let sum_dc = e.d1_c + e.d2_c + e.d3_c;
    DetPoint {
        a_m: e.a_a * e.d1 - e.b_a * e.c1,
        a: e.a_a * sum_d - e.b_a * sum_c,
        b_m: e.a_b * e.d1 - e.b_b * e.c1,
        b: e.a_b * sum_d - e.b_b * sum_c,
        c_m: a_c * e.d1_c - b_c * e.c1_c,
        c: a_c * sum_dc - b_c * sum_cc,
        d_m: e.c1_c * e.d1 - e.d1_c * e.c1,
        d: sum_cc * sum_d - sum_dc * sum_c,
    }
}

/// The expanded cores and expansions at a point with `r > 0`.
pub fn det_point_expanded(j: &Jet<f64>) -> DetPoint {
    let (r, pt, pr, ptt, ptr) = (j.r, j.pt, j.pr, j.ptt, j.ptr);
    let (pttt, pttr) = (j.pttt, j.pttr);
    let dl = j.delta();
    let (d2, d3, d4) = (dl * dl, dl * dl * dl, dl * dl * dl * dl);
    let s = pt * pt + pr * pr;
    let op = 1.0 + pr * pr;
    let om = 1.0 - pt * pt;

    let a_m = (pt * ptt - pr * ptr).powi(2) / (4.0 * d2)
        + (pt * ptr - pr * ptt).powi(2) / (4.0 * d2)
        + (ptt * pr - pt * ptr).powi(2) * s / (4.0 * d2)
        + pr * pt * (ptt * pr - ptr * pt) * (ptt * pt - ptr * pr) / (2.0 * d2)
        + s * (ptt * pr - ptr * pt) * (ptr * pr - ptt * pt) / (2.0 * d2)
        - s * (ptt * pr - pt * ptr).powi(2) / (2.0 * d2);
    let w = pt * ptr * om + pt * pt * pr * ptt;
    let a = a_m + s * w / (4.0 * r * d2) - pt * pr * w / (2.0 * r * d2)
        + s * pt * pt / (8.0 * dl * r * r);

    let b_m = r * r * (0.5 * (ptr * ptr * om - ptt * ptt * op) + pt * pr * ptt * ptr).powi(2);
    let b = b_m
        + (pt * pt * ptt * ptt * op + pt * pt * ptr * ptr * om) / (8.0 * d2)
        + r / (4.0 * d3)
            * pt
            * pt
            * pr
            * ptt
            * (om * ptr * ptr - op * ptt * ptt + 2.0 * pt * pr * ptt * ptr)
        - r / (4.0 * d3) * pt * pt * (pt * pr * ptr * ptt * dl) / r
        - r / d3
            * om
            * pt
            * ptr
            * (ptt * ptt * op - 2.0 * pt * pr * ptt * ptt * ptr * ptr - ptr * ptr * om);

    let c_m = (pt * pttt - pr * pttr).powi(2) / (4.0 * d2)
        + (pt * pttr - pr * pttt).powi(2) / (4.0 * d2)
        + s * (pr * pttt - pt * pttr).powi(2) / (4.0 * d2)
        + s * (pttt * pr - pt * pttr) * (pttr * pr - pttt * pt) / (2.0 * d2)
        + s * (pttt * pr - pt * pttr) * (pttt * pt - pttr * pr) / (2.0 * d2)
        + pt * pt * (pttr * pt - pttt * pr) * (pttt * pr - pt * pttr) / (2.0 * d2)
        + pt * pr * (pttr * pr - pt * pttt) * (pttt * pr - pt * pttr) / (2.0 * d2);
    let c = c_m + pt * pr / d2 * (pttt * ptt * ptt * pr - pttt * ptr * ptt * pt)
        - s / (2.0 * d2) * (pttr * ptt * ptt * pr - pttr * ptr * ptt * pt)
        + pt * pr / d3
            * (pr * ptr - pt * ptt)
            * (-3.0 * om * pttt * ptr - 3.0 * pt * pr * pttt * ptt)
        - s / (2.0 * d3)
            * (pr * ptr - pt * ptt)
            * (-3.0 * om * pttr * ptr - 3.0 * pt * pr * pttr * ptt);

    let k = pttt * ptr - pttr * ptt;
    let g = pttr * ptr * om - pttt * ptt * op + 2.0 * pttt * ptr * pt * pr;
    let u = ptt * pr - ptr * pt;
    let v = ptr * pr - pt * ptt;
    let d_m = r * r / (4.0 * d3) * op * om * k * k + r * r / (4.0 * d3) * g;
    let d = d_m
        + r / (4.0 * d3) * pt * pttt * om * op * k
        + r / (4.0 * d3)
            * pt
            * pttr
            * om
            * (pttr * ptr * om - pttt * ptt * op + 2.0 * pttr * ptr * pt * pr)
        + r / (4.0 * d3) * pt * pt * pr * pttr * om * (-k)
        + r / (4.0 * d3) * pt * pt * pr * pttt * g
        + r * r / (2.0 * d3) * ptt * ptr * u * g
        + r * r / (2.0 * d3) * ptt * ptt * op * u * (-k)
        - 3.0 * r * r / (2.0 * d4) * ptr * ptr * om * v * g
        - 3.0 * r * r / (2.0 * d4) * ptt * ptr * op * om * v * (-k)
        - 3.0 * r * r / (2.0 * d4) * ptt * ptr * pt * pr * v * g
        - 3.0 * r * r / (2.0 * d4) * ptt * ptt * pt * pr * v * op * (-k)
        + r / (2.0 * d3) * u * pt * ptt * g
        + r / (2.0 * d3) * u * pt * pt * pr * ptt * k
        - 3.0 * r / (2.0 * d4) * u * ptr * pt * g
        - 3.0 * r / (2.0 * d4) * u * ptr * pt * pt * pr * om * k
        - 3.0 * r / (2.0 * d4)
            * u
            * ptt
            * pt
            * pt
            * pr
            * om
            * (pttt * ptr * om - pttt * ptt * op + 2.0 * pttt * ptr * pt * pr)
        - 3.0 * r / (4.0 * d4) * u * ptt * pt.powi(3) * pr * pr * (-k)
        + (pt * pt * pttt * pttt * op + pt * pt * pttr * pttr * om) / (8.0 * d2)
        - pt.powi(3) * pttt * ptr / (2.0 * d2)
        - 3.0 / (4.0 * d3) * pttr * ptr * om * pt * pt * v
        + pt.powi(3) * pttr * ptt * ptr / (4.0 * d2)
        + pt * pt * pr * pttr * ptt * ptt / (4.0 * d2)
        - 3.0 / (4.0 * d3) * pt.powi(3) * pr * pttr * ptt * v;

    DetPoint {
        a_m,
        a,
        b_m,
        b,
        c_m,
        c,
        d_m,
        d,
    }
}

fn closed_fields(bundle: &DerivBundle, f: impl Fn(&Jet<f64>) -> DetPoint) -> DetRecord {
    let n = bundle.len();
    let mut cols: [Vec<f64>; 8] = Default::default();
    for col in cols.iter_mut() {
        *col = vec![0.0; n];
    }
    for i in 1..n {
        for (col, v) in cols.iter_mut().zip(f(&bundle.jet(i)).to_array()) {
            col[i] = v;
        }
    }
    for col in cols.iter_mut() {
        col[0] = axis_even_extrapolate(col[1], col[2], col[3]);
    }
    let [det_a_m, det_a, det_b_m, det_b, det_c_m, det_c, det_d_m, det_d] = cols;
    DetRecord {
        det_a_m,
        det_a,
        det_b_m,
        det_b,
        det_c_m,
        det_c,
        det_d_m,
        det_d,
    }
}

/// Determinant integrands at every node, the axis value by even extrapolation.
pub fn det_fields(bundle: &DerivBundle) -> DetRecord {
    closed_fields(bundle, det_point)
}

/// Expanded cores and expansions at every node.
pub fn det_fields_expanded(bundle: &DerivBundle) -> DetRecord {
    closed_fields(bundle, det_point_expanded)
}

/// Largest node-wise discrepancy between direct and expanded determinants, relative to
/// the largest direct magnitude, per label of [`DET_LABELS`]. Nodes with `r < r_min` are
/// skipped.
pub fn det_discrepancy(bundle: &DerivBundle, r_min: f64) -> [(f64, f64); 8] {
    let mut out = [(0.0_f64, 0.0_f64); 8];
    for i in 1..bundle.len() {
        if bundle.r[i] < r_min {
            continue;
        }
        let j = bundle.jet(i);
        let direct = det_point(&j).to_array();
        let expanded = det_point_expanded(&j).to_array();
        for k in 0..8 {
            out[k].0 = out[k].0.max((direct[k] - expanded[k]).abs());
            out[k].1 = out[k].1.max(direct[k].abs());
        }
    }
    out
}

fn is_axis_singular(bundle: &DerivBundle) -> bool {
    let scale = bundle.phi_t.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    scale > 0.0 && bundle.phi_t[0].abs() > AXIS_ZERO_TOL.sqrt() * scale
}

fn sum_of<F: Fn(usize) -> f64>(n: usize, f: F) -> Vec<f64> {
    (0..n).map(f).collect()
}

fn int_r(g: &[f64], grid: &Grid) -> f64 {
    integrate(g, Weight::R, grid).unwrap_or(f64::NAN)
}

fn int_one(g: &[f64], grid: &Grid) -> f64 {
    simpson(g, grid.h())
}

/// `∫ g/r dr` for an integrand vanishing on the axis, `+∞` when it does not.
fn int_inv_r(g: &[f64], grid: &Grid) -> f64 {
    integrate(g, Weight::InvR, grid).unwrap_or(f64::INFINITY)
}

/// `∫ g/r² dr` for `g = O(r²)`, the axis value by even extrapolation.
fn int_inv_r2(g: &[f64], grid: &Grid, singular: bool) -> f64 {
    if singular {
        return f64::INFINITY;
    }
    let r = grid.r();
    let mut q: Vec<f64> = (0..g.len())
        .map(|i| if i == 0 { 0.0 } else { g[i] / (r[i] * r[i]) })
        .collect();
    q[0] = axis_even_extrapolate(q[1], q[2], q[3]);
    simpson(&q, grid.h())
}

fn annulus_start(grid: &Grid) -> usize {
    grid.even_index_at_or_above(ANNULUS_INNER).min(grid.n() - 2)
}

fn int_annulus(g: &[f64], weight: Weight, grid: &Grid) -> f64 {
    let i0 = annulus_start(grid);
    let r = grid.r();
    let w: Vec<f64> = (i0..g.len())
        .map(|i| match weight {
            Weight::One => g[i],
            Weight::R => g[i] * r[i],
            Weight::InvR => g[i] / r[i],
        })
        .collect();
    simpson(&w, grid.h())
}

fn int_annulus_inv_r2(g: &[f64], grid: &Grid) -> f64 {
    let r = grid.r();
    let q: Vec<f64> = g
        .iter()
        .zip(r)
        .map(|(g, r)| if *r > 0.0 { g / (r * r) } else { 0.0 })
        .collect();
    int_annulus(&q, Weight::One, grid)
}

fn chain_row(f: &[f64], fr: &[f64], grid: &Grid) -> ChainRow {
    let r = grid.r();
    let n = f.len();
    ChainRow {
        sup_r_f2: (0..n).fold(0.0_f64, |m, i| m.max(r[i] * f[i] * f[i])),
        two_int_f_fr: 2.0 * int_r(&sum_of(n, |i| (f[i] * fr[i]).abs()), grid),
        int_f2: int_r(&sum_of(n, |i| f[i] * f[i]), grid),
        int_fr2: int_r(&sum_of(n, |i| fr[i] * fr[i]), grid),
        int_f4: int_r(&sum_of(n, |i| f[i].powi(4)), grid),
        int_f6: int_r(&sum_of(n, |i| f[i].powi(6)), grid),
    }
}

/// Energy-type functionals of one bundle.
pub fn instant(bundle: &DerivBundle, grid: &Grid) -> Result<FunctionalRecord> {
    let b = bundle;
    let n = b.len();
    let r = grid.r();
    let singular = is_axis_singular(b);
    let sq = |v: &[f64]| sum_of(n, |i| v[i] * v[i]);
    let s12 = sum_of(n, |i| b.delta[i].sqrt());
    let g32 = sum_of(n, |i| b.delta[i].powf(-1.5));

    let e1_integrand = sum_of(n, |i| b.phi_t[i].powi(2) + b.phi_r[i].powi(2));
    let e1hat_integrand = sum_of(n, |i| 0.5 * e1_integrand[i] / s12[i]);
    let (e1, e1hat) = if singular {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (
            int_inv_r(&e1_integrand, grid),
            int_inv_r(&e1hat_integrand, grid),
        )
    };

    let e2 = int_r(
        &sum_of(n, |i| {
            b.phi_tt[i].powi(2) + b.phi_tr[i].powi(2) + b.phi_rr[i].powi(2)
        }),
        grid,
    );
    let e2hat = int_r(
        &sum_of(n, |i| {
            0.5 * (b.phi_tr[i].powi(2) * (1.0 - b.phi_t[i].powi(2))
                + b.phi_tt[i].powi(2) * (1.0 + b.phi_r[i].powi(2)))
                * g32[i]
        }),
        grid,
    );
    let q = sum_of(n, |i| {
        if i == 0 {
            0.0
        } else {
            b.phi_rr[i] - b.phi_r[i] / r[i]
        }
    });
    let e3q = int_r(
        &sum_of(n, |i| b.phi_ttt[i].powi(2) + b.phi_ttr[i].powi(2)),
        grid,
    );
    let e3s = int_r(&sq(&b.phi_trr), grid) + int_inv_r(&sq(&b.phi_tr), grid);
    let e3l = int_r(&sq(&b.phi_rrr), grid) + int_inv_r(&sq(&q), grid);
    let e3 = int_r(
        &sum_of(n, |i| {
            b.phi_ttt[i].powi(2)
                + b.phi_ttr[i].powi(2)
                + b.phi_trr[i].powi(2)
                + b.phi_rrr[i].powi(2)
        }),
        grid,
    ) + int_inv_r(&sum_of(n, |i| b.phi_tr[i].powi(2) + q[i] * q[i]), grid);
    let e3tilde = int_r(
        &sum_of(n, |i| {
            0.5 * (b.phi_ttt[i].powi(2) * (1.0 + b.phi_r[i].powi(2))
                + b.phi_ttr[i].powi(2) * (1.0 - b.phi_t[i].powi(2)))
                * g32[i]
        }),
        grid,
    );
    let ph7 = BalanceLaw::new(LawId::Ph7).fields(b);
    let e3hat = int_one(&ph7.density, grid);
    let cross = sum_of(n, |i| {
        let j = b.jet(i);
        let g = j.delta_pow(-1.5);
        let g_t = j.delta_pow_t(-1.5);
        let a_t = -2.0 * j.pt * j.ptt * g + (1.0 - j.pt * j.pt) * g_t;
        let b_t = (j.ptr * j.pt + j.pr * j.ptt) * g + j.pr * j.pt * g_t;
        j.r * j.pttr * j.ptr * a_t + j.r * j.pttr * j.ptt * b_t
    });
    let e3_cross = int_one(&cross, grid);

    let hn_regular = int_r(
        &sum_of(n, |i| b.phi_rr[i].powi(2) + b.phi_tr[i].powi(2)),
        grid,
    ) + int_inv_r(&sq(&b.phi_r), grid);
    let hnorm2 = if singular {
        f64::INFINITY
    } else {
        hn_regular + int_inv_r(&sq(&b.phi_t), grid)
    };

    let area = int_r(&s12, grid);
    let h_energy = int_r(&sum_of(n, |i| energy_density(b.phi_t[i], b.phi_r[i])), grid);

    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let delta_min = b.delta.iter().copied().fold(f64::INFINITY, f64::min);
    let delta_max = b.delta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e3q_weights_dominated = (0..n).all(|i| {
        let d = b.delta[i].powf(1.5);
        2.0 * (1.0 + b.phi_r[i].powi(2)) >= d && 2.0 * (1.0 - b.phi_t[i].powi(2)) >= d
    });

    let annulus = AnnulusRecord {
        r_c: r[annulus_start(grid)],
        e1: int_annulus(&e1_integrand, Weight::InvR, grid),
        e1hat: int_annulus(&e1hat_integrand, Weight::InvR, grid),
        hnorm2: int_annulus(
            &sum_of(n, |i| b.phi_rr[i].powi(2) + b.phi_tr[i].powi(2)),
            Weight::R,
            grid,
        ) + int_annulus(
            &sum_of(n, |i| b.phi_r[i].powi(2) + b.phi_t[i].powi(2)),
            Weight::InvR,
            grid,
        ),
    };

    let hardy_num = sum_of(n, |i| b.phi_t[i].powi(4) + b.phi_r[i].powi(4));
    let chain = ChainStats {
        tt: chain_row(&b.phi_tt, &b.phi_ttr, grid),
        tr: chain_row(&b.phi_tr, &b.phi_trr, grid),
        rr: chain_row(&b.phi_rr, &b.phi_rrr, grid),
        hardy_lhs: int_inv_r2(&hardy_num, grid, singular),
        hardy_rhs: 4.0
            * int_one(
                &sum_of(n, |i| {
                    b.phi_t[i].powi(2) * b.phi_tr[i].powi(2)
                        + b.phi_r[i].powi(2) * b.phi_rr[i].powi(2)
                }),
                grid,
            ),
    };

    Ok(FunctionalRecord {
        t: b.t,
        e1,
        e1hat,
        e2,
        e2hat,
        e3,
        e3q,
        e3s,
        e3l,
        e3hat,
        e3tilde,
        e3_cross,
        hnorm2,
        area,
        h_energy,
        sup_pt: max_abs(&b.phi_t),
        sup_pr: max_abs(&b.phi_r),
        delta_min,
        delta_max,
        e3q_weights_dominated,
        axis_singular: singular,
        axis_velocity: b.phi_t[0],
        annulus,
        chain,
    })
}

/// Instantaneous `dr`-integrals of the accumulator integrands.
pub fn rates(bundle: &DerivBundle, grid: &Grid) -> Rates {
    let b = bundle;
    let n = b.len();
    let singular = is_axis_singular(b);
    let p2 = |v: &[f64], i: usize| v[i] * v[i];
    let (pt, pr, ptt, ptr, pttt, pttr) = (
        &b.phi_t, &b.phi_r, &b.phi_tt, &b.phi_tr, &b.phi_ttt, &b.phi_ttr,
    );
    let one = |f: &dyn Fn(usize) -> f64| int_one(&sum_of(n, f), grid);
    let m_num = sum_of(n, |i| p2(pt, i) + p2(pr, i));
    let m1_num = sum_of(n, |i| 0.25 * p2(pt, i) / b.delta[i].sqrt());
    let m2_num = sum_of(n, |i| 0.75 * p2(pr, i) / b.delta[i].sqrt());
    let det = det_fields(b);
    let det_int = |v: &[f64]| int_one(v, grid);
    Rates {
        t: b.t,
        m: int_inv_r2(&m_num, grid, singular),
        m0: one(&|i| {
            p2(ptt, i) * p2(pr, i)
                + p2(ptr, i) * p2(pt, i)
                + p2(ptt, i) * p2(pt, i)
                + p2(ptr, i) * p2(pr, i)
        }),
        mh: one(&|i| {
            p2(pttt, i) * p2(pr, i)
                + p2(pttr, i) * p2(pt, i)
                + p2(pttt, i) * p2(pt, i)
                + p2(pttr, i) * p2(pr, i)
        }),
        m01: one(&|i| p2(ptt, i) * p2(pt, i) + p2(ptr, i) * p2(pt, i)),
        m02: one(&|i| p2(ptt, i) * p2(pr, i) + p2(ptr, i) * p2(pr, i)),
        mh1: one(&|i| p2(pttt, i) * p2(pt, i) + p2(pttr, i) * p2(pt, i)),
        mh2: one(&|i| p2(pttt, i) * p2(pr, i) + p2(pttr, i) * p2(pr, i)),
        m1: int_inv_r2(&m1_num, grid, singular),
        m2: int_inv_r2(&m2_num, grid, false),
        eta1: det_int(&det.det_a_m),
        eta2: if singular {
            f64::INFINITY
        } else {
            det_int(&det.det_a)
        },
        xi1: det_int(&det.det_b_m),
        xi2: det_int(&det.det_b),
        zeta1: det_int(&det.det_c_m),
        zeta2: det_int(&det.det_c),
        gamma1: det_int(&det.det_d_m),
        gamma2: det_int(&det.det_d),
        ann_m: int_annulus_inv_r2(&m_num, grid),
        ann_m1: int_annulus_inv_r2(&m1_num, grid),
        ann_m2: int_annulus_inv_r2(&m2_num, grid),
        ann_eta2: int_annulus(&det.det_a, Weight::One, grid),
    }
}

/// Trapezoid-in-time advance from the rates at two consecutive snapshots.
pub fn accumulate_rates(previous: &AccumulatorRecord, a: &Rates, b: &Rates) -> AccumulatorRecord {
    let half = 0.5 * (b.t - a.t);
    let step = |acc: f64, x: f64, y: f64| {
        if x == 0.0 && y == 0.0 {
            acc
        } else {
            acc + half * (x + y)
        }
    };
    AccumulatorRecord {
        t: b.t,
        m: step(previous.m, a.m, b.m),
        m0: step(previous.m0, a.m0, b.m0),
        mh: step(previous.mh, a.mh, b.mh),
        m01: step(previous.m01, a.m01, b.m01),
        m02: step(previous.m02, a.m02, b.m02),
        mh1: step(previous.mh1, a.mh1, b.mh1),
        mh2: step(previous.mh2, a.mh2, b.mh2),
        m1: step(previous.m1, a.m1, b.m1),
        m2: step(previous.m2, a.m2, b.m2),
        eta1: step(previous.eta1, a.eta1, b.eta1),
        eta2: step(previous.eta2, a.eta2, b.eta2),
        xi1: step(previous.xi1, a.xi1, b.xi1),
        xi2: step(previous.xi2, a.xi2, b.xi2),
        zeta1: step(previous.zeta1, a.zeta1, b.zeta1),
        zeta2: step(previous.zeta2, a.zeta2, b.zeta2),
        gamma1: step(previous.gamma1, a.gamma1, b.gamma1),
        gamma2: step(previous.gamma2, a.gamma2, b.gamma2),
        ann_m: step(previous.ann_m, a.ann_m, b.ann_m),
        ann_m1: step(previous.ann_m1, a.ann_m1, b.ann_m1),
        ann_m2: step(previous.ann_m2, a.ann_m2, b.ann_m2),
        ann_eta2: step(previous.ann_eta2, a.ann_eta2, b.ann_eta2),
    }
}

/// Trapezoid-in-time advance between two consecutive bundles.
pub fn accumulate(
    previous: &AccumulatorRecord,
    bundle_n: &DerivBundle,
    bundle_next: &DerivBundle,
    grid: &Grid,
) -> AccumulatorRecord {
    accumulate_rates(previous, &rates(bundle_n, grid), &rates(bundle_next, grid))
}

/// Functional series of a run, fed one bundle at a time in time order.
#[derive(Clone, Debug, Default)]
pub struct FunctionalSeries {
    /// Instantaneous records.
    pub records: Vec<FunctionalRecord>,
    /// Accumulators at the same instants.
    pub accumulators: Vec<AccumulatorRecord>,
    last_rates: Option<Rates>,
}

impl FunctionalSeries {
    /// Empty series.
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the next bundle.
    pub fn push(&mut self, bundle: &DerivBundle, grid: &Grid) -> Result<()> {
        let rec = instant(bundle, grid)?;
        let rt = rates(bundle, grid);
        let acc = match (&self.last_rates, self.accumulators.last()) {
            (Some(prev_rates), Some(prev)) => accumulate_rates(prev, prev_rates, &rt),
            _ => AccumulatorRecord {
                t: bundle.t,
                ..Default::default()
            },
        };
        self.records.push(rec);
        self.accumulators.push(acc);
        self.last_rates = Some(rt);
        Ok(())
    }
}

/// Outcome of one inequality check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `lhs ≤ rhs` within tolerance.
    Holds,
    /// `lhs > rhs`.
    Violated,
    /// A side is not finite.
    Undefined,
}

/// One evaluated inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityRow {
    /// Identifier.
    pub name: String,
    /// Snapshot time.
    pub t: f64,
    /// Left side.
    pub lhs: f64,
    /// Right side.
    pub rhs: f64,
    /// Outcome.
    pub verdict: Verdict,
    /// Whether a violation is an invariant failure.
    pub hard: bool,
}

impl InequalityRow {
    fn new(name: &str, t: f64, lhs: f64, rhs: f64, hard: bool) -> Self {
        let verdict = if !(lhs.is_finite() && rhs.is_finite()) {
            Verdict::Undefined
        } else if lhs <= rhs + 1e-12 * rhs.abs().max(lhs.abs()) + 1e-300 {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        InequalityRow {
            name: name.into(),
            t,
            lhs,
            rhs,
            verdict,
            hard,
        }
    }

    /// `lhs / rhs`.
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Evaluates the inequality set at every snapshot.
///
/// Hard rows: `bt1` when `Δ ≤ 1` at every node, `bt5` and its annulus version when
/// `Δ ≤ 4` held at every snapshot so far, `E3q ≤ 4Ẽ3` when its weight condition holds,
/// and the two decompositions `M0 = M01 + M02`, `Mh = Mh1 + Mh2`. The remaining rows
/// are reported. `eps` enables the rows that scale with the data size.
pub fn inequality_report(
    records: &[FunctionalRecord],
    accumulators: &[AccumulatorRecord],
    eps: Option<f64>,
) -> Vec<InequalityRow> {
    let mut rows = Vec::new();
    let e3_0 = records.first().map(|r| r.e3).unwrap_or(0.0);
    let mut delta_le_4_so_far = true;
    for (rec, acc) in records.iter().zip(accumulators) {
        let t = rec.t;
        delta_le_4_so_far &= rec.delta_max <= 4.0;
        rows.push(InequalityRow::new(
            "bt1",
            t,
            rec.e1,
            2.0 * rec.e1hat,
            rec.delta_max <= 1.0,
        ));
        rows.push(InequalityRow::new(
            "bt1_annulus",
            t,
            rec.annulus.e1,
            2.0 * rec.annulus.e1hat,
            rec.delta_max <= 1.0,
        ));
        rows.push(InequalityRow::new(
            "bt3",
            t,
            rec.e2,
            2.0 * rec.e1hat + 2.0 * rec.e2hat,
            false,
        ));
        rows.push(InequalityRow::new(
            "bt5",
            t,
            acc.m,
            8.0 * acc.m1 + 8.0 * acc.m2,
            delta_le_4_so_far,
        ));
        rows.push(InequalityRow::new(
            "bt5_annulus",
            t,
            acc.ann_m,
            8.0 * acc.ann_m1 + 8.0 * acc.ann_m2,
            delta_le_4_so_far,
        ));
        rows.push(InequalityRow::new(
            "E3q_le_4E3tilde",
            t,
            rec.e3q,
            4.0 * rec.e3tilde,
            rec.e3q_weights_dominated,
        ));
        let tol = |x: f64| 1e-12 * x.abs().max(1e-300);
        let m0_sum = acc.m01 + acc.m02;
        rows.push(InequalityRow::new(
            "M0_decomposition",
            t,
            (acc.m0 - m0_sum).abs(),
            tol(acc.m0),
            true,
        ));
        let mh_sum = acc.mh1 + acc.mh2;
        rows.push(InequalityRow::new(
            "Mh_decomposition",
            t,
            (acc.mh - mh_sum).abs(),
            tol(acc.mh),
            true,
        ));
        for (label, row, e3x) in [
            ("tt", &rec.chain.tt, rec.e3q),
            ("tr", &rec.chain.tr, rec.e3s),
            ("rr", &rec.chain.rr, rec.e3l),
        ] {
            rows.push(InequalityRow::new(
                &format!("wqes_{label}_pointwise"),
                t,
                row.sup_r_f2,
                row.two_int_f_fr,
                false,
            ));
            rows.push(InequalityRow::new(
                &format!("wqes_{label}_energy"),
                t,
                row.two_int_f_fr,
                2.0 * rec.e2.sqrt() * e3x.sqrt(),
                false,
            ));
            rows.push(InequalityRow::new(
                &format!("s1_{label}"),
                t,
                row.int_f4.powf(0.25),
                row.int_f2.powf(0.25) * row.int_fr2.powf(0.25),
                false,
            ));
            rows.push(InequalityRow::new(
                &format!("s2_{label}"),
                t,
                row.int_f6.powf(1.0 / 6.0),
                row.int_f2.powf(1.0 / 6.0) * row.int_fr2.powf(1.0 / 3.0),
                false,
            ));
        }
        rows.push(InequalityRow::new(
            "hardy",
            t,
            rec.chain.hardy_lhs,
            rec.chain.hardy_rhs,
            false,
        ));
        rows.push(InequalityRow::new(
            "E3_le_16E3_0",
            t,
            rec.e3,
            16.0 * e3_0,
            false,
        ));
        if let Some(eps) = eps {
            let e2 = eps * eps;
            rows.push(InequalityRow::new(
                "smallness_sqrt_eps",
                t,
                rec.sup_pt + rec.sup_pr,
                eps.sqrt(),
                false,
            ));
            for (name, v) in [
                ("sme_E1", rec.e1),
                ("sme_E2", rec.e2),
                ("sme_M0", acc.m0),
                ("sme_M", acc.m),
            ] {
                rows.push(InequalityRow::new(name, t, v, e2, false));
            }
            for (name, v) in [
                ("sme_xi1", acc.xi1),
                ("sme_xi2", acc.xi2),
                ("sme_eta1", acc.eta1),
                ("sme_eta2", acc.eta2),
            ] {
                rows.push(InequalityRow::new(name, t, v.abs(), e2 * e2, false));
            }
        }
    }
    rows
}

/// True when some hard row is violated.
pub fn has_hard_violation(rows: &[InequalityRow]) -> bool {
    rows.iter()
        .any(|r| r.hard && r.verdict == Verdict::Violated)
}

/// `(1+φ_r²)/√Δ − 1` written without cancellation for small slopes.
fn energy_density(pt: f64, pr: f64) -> f64 {
    let p = 1.0 + pr * pr;
    let s = (p - pt * pt).sqrt();
    (p * pr * pr + pt * pt) / (s * (p + s))
}

/// Conserved energy `∫ r[(1+φ_r²)/√Δ − 1] dr` of a state, without building a bundle.
pub fn plumbing_energy(state: &FieldState, grid: &Grid) -> Result<f64> {
    let pr = deriv_r(&state.phi, 1, Parity::Even, grid)?;
    let g: Vec<f64> = pr
        .iter()
        .zip(&state.psi)
        .map(|(pr, pt)| energy_density(*pt, *pr))
        .collect();
    integrate(&g, Weight::R, grid)
}
