//! Field states, derivative bundles, the quasilinear right-hand side and the
//! divergence-form residual.
//!
//! The evolved system is `φ_t = ψ`, `ψ_t = F` with
//! `F = [(1−φ_t²)φ_rr + 2φ_tφ_rφ_tr + (φ_r/r)Δ] / (1+φ_r²)` and `Δ = 1 + φ_r² − φ_t²`.
//! On the axis `φ_r/r → φ_rr`, which gives `F(0) = 2(1−φ_t²)φ_rr(0)`.
//!
//! A [`DerivBundle`] collects every derivative of `φ` up to third order at one instant.
//! Spatial derivatives come from the fourth-order stencils of [`crate::grid`]; `φ_tt` is
//! the right-hand side itself and `φ_ttt` follows from the chain rule through the
//! partials of `F`. A second-order time difference of `φ_tt` across a three-state
//! window is kept as an independent cross-check channel.

use crate::error::{Error, Result};
use crate::grid::{Grid, Parity};
use crate::jet::{eq_residual, Jet};

/// Default floor on Δ below which the hypersurface is declared no longer time-like.
pub const DEFAULT_DELTA_MIN: f64 = 1e-6;

/// Samples of `φ` and `ψ = φ_t` at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    /// Time.
    pub t: f64,
    /// φ at every node.
    pub phi: Vec<f64>,
    /// φ_t at every node.
    pub psi: Vec<f64>,
}

impl FieldState {
    /// State from samples; both arrays must match the grid and be finite.
    pub fn new(t: f64, phi: Vec<f64>, psi: Vec<f64>, grid: &Grid) -> Result<Self> {
        for v in [&phi, &psi] {
            if v.len() != grid.len() {
                return Err(Error::Contract(format!(
                    "state arrays must have {} samples, got {}",
                    grid.len(),
                    v.len()
                )));
            }
            if let Some(index) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(FieldState { t, phi, psi })
    }

    /// The vacuum state.
    pub fn vacuum(t: f64, grid: &Grid) -> Self {
        FieldState {
            t,
            phi: vec![0.0; grid.len()],
            psi: vec![0.0; grid.len()],
        }
    }
}

/// The quasilinear right-hand side and its partial derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiF {
    /// F at every node.
    pub value: Vec<f64>,
    /// ∂F/∂φ_r.
    pub d_pr: Vec<f64>,
    /// ∂F/∂φ_t.
    pub d_pt: Vec<f64>,
    /// ∂F/∂φ_rr.
    pub d_prr: Vec<f64>,
    /// ∂F/∂φ_tr.
    pub d_ptr: Vec<f64>,
}

/// Derivatives of φ up to third order plus Δ at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivBundle {
    /// Time.
    pub t: f64,
    /// Node radii.
    pub r: Vec<f64>,
    /// φ_t
    pub phi_t: Vec<f64>,
    /// φ_r
    pub phi_r: Vec<f64>,
    /// φ_tt
    pub phi_tt: Vec<f64>,
    /// φ_tr
    pub phi_tr: Vec<f64>,
    /// φ_rr
    pub phi_rr: Vec<f64>,
    /// φ_ttt (chain rule)
    pub phi_ttt: Vec<f64>,
    /// φ_ttr
    pub phi_ttr: Vec<f64>,
    /// φ_trr
    pub phi_trr: Vec<f64>,
    /// φ_rrr
    pub phi_rrr: Vec<f64>,
    /// Δ = 1 + φ_r² − φ_t²
    pub delta: Vec<f64>,
    /// φ_ttt from a centered time difference of φ_tt, when a window was supplied.
    pub phi_ttt_fd: Option<Vec<f64>>,
}

impl DerivBundle {
    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.r.len()
    }

    /// True when the bundle has no nodes.
    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Pointwise jet at node `i`.
    #[inline]
    pub fn jet(&self, i: usize) -> Jet<f64> {
        Jet {
            r: self.r[i],
            pt: self.phi_t[i],
            pr: self.phi_r[i],
            ptt: self.phi_tt[i],
            ptr: self.phi_tr[i],
            prr: self.phi_rr[i],
            pttt: self.phi_ttt[i],
            pttr: self.phi_ttr[i],
            ptrr: self.phi_trr[i],
            prrr: self.phi_rrr[i],
        }
    }

    /// Bundle sampled from exact jets, one per node.
    pub fn from_jets(t: f64, jets: &[Jet<f64>]) -> Self {
        let pick = |f: fn(&Jet<f64>) -> f64| jets.iter().map(f).collect::<Vec<_>>();
        DerivBundle {
            t,
            r: pick(|j| j.r),
            phi_t: pick(|j| j.pt),
            phi_r: pick(|j| j.pr),
            phi_tt: pick(|j| j.ptt),
            phi_tr: pick(|j| j.ptr),
            phi_rr: pick(|j| j.prr),
            phi_ttt: pick(|j| j.pttt),
            phi_ttr: pick(|j| j.pttr),
            phi_trr: pick(|j| j.ptrr),
            phi_rrr: pick(|j| j.prrr),
            delta: pick(|j| j.delta()),
            phi_ttt_fd: None,
        }
    }

    /// Smallest Δ and its node.
    pub fn delta_min(&self) -> (usize, f64) {
        self.delta
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, d)| if d < best.1 { (i, d) } else { best },
            )
    }

    /// Largest magnitude of the odd-parity members on the axis.
    pub fn axis_odd_residual(&self) -> f64 {
        [
            self.phi_r[0],
            self.phi_tr[0],
            self.phi_ttr[0],
            self.phi_rrr[0],
        ]
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Scratch-free evaluation of `F` at node `i > 0`.
#[inline]
pub(crate) fn rhs_point(r: f64, pt: f64, pr: f64, ptr: f64, prr: f64) -> f64 {
    let delta = 1.0 + pr * pr - pt * pt;
    ((1.0 - pt * pt) * prr + 2.0 * pt * pr * ptr + pr / r * delta) / (1.0 + pr * pr)
}

/// Axis limit of `F`.
#[inline]
pub(crate) fn rhs_axis(pt: f64, prr: f64) -> f64 {
    2.0 * (1.0 - pt * pt) * prr
}

fn check_delta(delta: &[f64], delta_min: f64) -> Result<()> {
    match delta.iter().position(|d| !(*d >= delta_min)) {
        Some(node) => Err(Error::TimeLike {
            node,
            delta: delta[node],
        }),
        None => Ok(()),
    }
}

/// Quasilinear right-hand side `F` with exact partials.
pub fn quasilinear_rhs(state: &FieldState, grid: &Grid, delta_min: f64) -> Result<QuasiF> {
    let n = grid.len();
    let mut pr = vec![0.0; n];
    let mut prr = vec![0.0; n];
    let mut ptr = vec![0.0; n];
    grid.d1_into(&state.phi, Parity::Even, &mut pr);
    grid.d2_into(&state.phi, Parity::Even, &mut prr);
    grid.d1_into(&state.psi, Parity::Even, &mut ptr);
    quasi_from_parts(&state.psi, &pr, &ptr, &prr, grid, delta_min)
}

fn quasi_from_parts(
    pt: &[f64],
    pr: &[f64],
    ptr: &[f64],
    prr: &[f64],
    grid: &Grid,
    delta_min: f64,
) -> Result<QuasiF> {
    let n = grid.len();
    let r = grid.r();
    let delta: Vec<f64> = (0..n)
        .map(|i| 1.0 + pr[i] * pr[i] - pt[i] * pt[i])
        .collect();
    check_delta(&delta, delta_min)?;
    let mut q = QuasiF {
        value: vec![0.0; n],
        d_pr: vec![0.0; n],
        d_pt: vec![0.0; n],
        d_prr: vec![0.0; n],
        d_ptr: vec![0.0; n],
    };
    q.value[0] = rhs_axis(pt[0], prr[0]);
    q.d_pt[0] = -4.0 * pt[0] * prr[0];
    q.d_prr[0] = 2.0 * (1.0 - pt[0] * pt[0]);
    for i in 1..n {
        let (ri, a, b, c, d) = (r[i], pt[i], pr[i], ptr[i], prr[i]);
        let s = 1.0 + b * b;
        let f = rhs_point(ri, a, b, c, d);
        q.value[i] = f;
        q.d_prr[i] = (1.0 - a * a) / s;
        q.d_ptr[i] = 2.0 * a * b / s;
        q.d_pt[i] = (-2.0 * a * d + 2.0 * b * c - 2.0 * a * b / ri) / s;
        q.d_pr[i] = (2.0 * a * c + (1.0 + 3.0 * b * b - a * a) / ri) / s - 2.0 * b * f / s;
    }
    Ok(q)
}

/// Bundle of a single state, without the time-difference cross-check channel.
pub fn bundle_at(state: &FieldState, grid: &Grid, delta_min: f64) -> Result<DerivBundle> {
    let n = grid.len();
    let mut b = DerivBundle {
        t: state.t,
        r: grid.r().to_vec(),
        phi_t: state.psi.clone(),
        phi_r: vec![0.0; n],
        phi_tt: vec![0.0; n],
        phi_tr: vec![0.0; n],
        phi_rr: vec![0.0; n],
        phi_ttt: vec![0.0; n],
        phi_ttr: vec![0.0; n],
        phi_trr: vec![0.0; n],
        phi_rrr: vec![0.0; n],
        delta: vec![0.0; n],
        phi_ttt_fd: None,
    };
    grid.d1_into(&state.phi, Parity::Even, &mut b.phi_r);
    grid.d2_into(&state.phi, Parity::Even, &mut b.phi_rr);
    grid.d1_into(&b.phi_rr, Parity::Even, &mut b.phi_rrr);
    grid.d1_into(&state.psi, Parity::Even, &mut b.phi_tr);
    grid.d2_into(&state.psi, Parity::Even, &mut b.phi_trr);
    let q = quasi_from_parts(&b.phi_t, &b.phi_r, &b.phi_tr, &b.phi_rr, grid, delta_min)?;
    b.phi_tt = q.value.clone();
    grid.d1_into(&b.phi_tt, Parity::Even, &mut b.phi_ttr);
    for i in 0..n {
        b.phi_ttt[i] = q.d_pr[i] * b.phi_tr[i]
            + q.d_pt[i] * b.phi_tt[i]
            + q.d_prr[i] * b.phi_trr[i]
            + q.d_ptr[i] * b.phi_ttr[i];
        b.delta[i] = 1.0 + b.phi_r[i] * b.phi_r[i] - b.phi_t[i] * b.phi_t[i];
    }
    Ok(b)
}

/// Bundle of the center state of three consecutive, equally spaced states.
pub fn bundle(window: [&FieldState; 3], grid: &Grid, delta_min: f64) -> Result<DerivBundle> {
    let [prev, center, next] = window;
    let dt_back = center.t - prev.t;
    let dt_fwd = next.t - center.t;
    let scale = dt_back.abs().max(dt_fwd.abs());
    if !(dt_back > 0.0 && dt_fwd > 0.0) || (dt_fwd - dt_back).abs() > 1e-9 * scale {
        return Err(Error::Contract(format!(
            "window states must be equally spaced and increasing in t (spacings {dt_back}, {dt_fwd})"
        )));
    }
    let mut b = bundle_at(center, grid, delta_min)?;
    let f_prev = quasilinear_rhs(prev, grid, delta_min)?.value;
    let f_next = quasilinear_rhs(next, grid, delta_min)?.value;
    let dt = 0.5 * (dt_back + dt_fwd);
    b.phi_ttt_fd = Some(
        f_next
            .iter()
            .zip(&f_prev)
            .map(|(a, b)| (a - b) / (2.0 * dt))
            .collect(),
    );
    Ok(b)
}

/// Divergence-form residual `E(φ)` at every node.
pub fn eq_residual_div(bundle: &DerivBundle) -> Vec<f64> {
    (0..bundle.len())
        .map(|i| eq_residual(&bundle.jet(i)))
        .collect()
}
