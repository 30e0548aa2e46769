//! Pointwise derivative jets of a radial field and the divergence-form equation residual.
//!
//! A [`Jet`] holds `r` and every partial derivative of `φ` up to third order at one point.
//! All pointwise formulas of the crate are written once, generic over [`Scalar`], so they
//! evaluate on plain `f64` and on forward-mode dual numbers alike. Lifting a jet into
//! dual numbers along `t` or `r` yields exact directional derivatives of any formula
//! whose inputs have known higher derivatives.

use num_dual::{Dual2, Dual2_64, Dual64, DualNum};

/// Real-like scalar accepted by the pointwise formulas.
pub trait Scalar: DualNum<Primitive = f64> + Copy {}
impl<T: DualNum<Primitive = f64> + Copy> Scalar for T {}

/// Constant as a scalar.
#[inline]
pub fn c<T: Scalar>(v: f64) -> T {
    T::from(v)
}

/// Derivatives of `φ` up to third order at one point `(t, r)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet<T> {
    /// Radius.
    pub r: T,
    /// φ_t
    pub pt: T,
    /// φ_r
    pub pr: T,
    /// φ_tt
    pub ptt: T,
    /// φ_tr
    pub ptr: T,
    /// φ_rr
    pub prr: T,
    /// φ_ttt
    pub pttt: T,
    /// φ_ttr
    pub pttr: T,
    /// φ_trr
    pub ptrr: T,
    /// φ_rrr
    pub prrr: T,
}

/// Fields with exact analytic partial derivatives `∂_t^i ∂_r^j φ(t, r)`.
pub trait AnalyticField {
    /// The partial derivative `∂_t^i ∂_r^j φ` at `(t, r)`.
    fn partial(&self, i: usize, j: usize, t: f64, r: f64) -> f64;

    /// Jet of exact derivatives at `(t, r)`.
    fn jet(&self, t: f64, r: f64) -> Jet<f64> {
        let d = |i, j| self.partial(i, j, t, r);
        Jet {
            r,
            pt: d(1, 0),
            pr: d(0, 1),
            ptt: d(2, 0),
            ptr: d(1, 1),
            prr: d(0, 2),
            pttt: d(3, 0),
            pttr: d(2, 1),
            ptrr: d(1, 2),
            prrr: d(0, 3),
        }
    }

    /// Jet whose dual parts carry the exact `t`-derivative of every entry.
    fn jet_dt(&self, t: f64, r: f64) -> Jet<Dual64> {
        let d = |i, j| Dual64::new(self.partial(i, j, t, r), self.partial(i + 1, j, t, r));
        jet_from(Dual64::from(r), d)
    }

    /// Jet whose dual parts carry the exact `r`-derivative of every entry.
    fn jet_dr(&self, t: f64, r: f64) -> Jet<Dual64> {
        let d = |i, j| Dual64::new(self.partial(i, j, t, r), self.partial(i, j + 1, t, r));
        jet_from(Dual64::new(r, 1.0), d)
    }

    /// Jet carrying exact first and second `t`-derivatives of every entry.
    fn jet_dt2(&self, t: f64, r: f64) -> Jet<Dual2_64> {
        let d = |i, j| {
            Dual2_64::new(
                self.partial(i, j, t, r),
                self.partial(i + 1, j, t, r),
                self.partial(i + 2, j, t, r),
            )
        };
        jet_from(Dual2::from(r), d)
    }
}

fn jet_from<T: Copy>(r: T, d: impl Fn(usize, usize) -> T) -> Jet<T> {
    Jet {
        r,
        pt: d(1, 0),
        pr: d(0, 1),
        ptt: d(2, 0),
        ptr: d(1, 1),
        prr: d(0, 2),
        pttt: d(3, 0),
        pttr: d(2, 1),
        ptrr: d(1, 2),
        prrr: d(0, 3),
    }
}

impl Jet<f64> {
    /// Lift along `t`: each entry carries its own `t`-derivative taken from the jet.
    ///
    /// Fourth-order derivatives are unknown and set to zero; formulas that depend on
    /// third-order entries therefore get an incomplete dual part.
    pub fn lift_t(&self) -> Jet<Dual64> {
        let d = Dual64::new;
        Jet {
            r: d(self.r, 0.0),
            pt: d(self.pt, self.ptt),
            pr: d(self.pr, self.ptr),
            ptt: d(self.ptt, self.pttt),
            ptr: d(self.ptr, self.pttr),
            prr: d(self.prr, self.ptrr),
            pttt: d(self.pttt, 0.0),
            pttr: d(self.pttr, 0.0),
            ptrr: d(self.ptrr, 0.0),
            prrr: d(self.prrr, 0.0),
        }
    }

    /// Lift along `r`, with the same fourth-order caveat as [`Jet::lift_t`].
    pub fn lift_r(&self) -> Jet<Dual64> {
        let d = Dual64::new;
        Jet {
            r: d(self.r, 1.0),
            pt: d(self.pt, self.ptr),
            pr: d(self.pr, self.prr),
            ptt: d(self.ptt, self.pttr),
            ptr: d(self.ptr, self.ptrr),
            prr: d(self.prr, self.prrr),
            pttt: d(self.pttt, 0.0),
            pttr: d(self.pttr, 0.0),
            ptrr: d(self.ptrr, 0.0),
            prrr: d(self.prrr, 0.0),
        }
    }
}

impl<T: Scalar> Jet<T> {
    /// Δ = 1 + φ_r² − φ_t².
    #[inline]
    pub fn delta(&self) -> T {
        c::<T>(1.0) + self.pr * self.pr - self.pt * self.pt
    }

    /// Δ_t = 2(φ_rφ_tr − φ_tφ_tt).
    #[inline]
    pub fn delta_t(&self) -> T {
        (self.pr * self.ptr - self.pt * self.ptt) * 2.0
    }

    /// Δ_r = 2(φ_rφ_rr − φ_tφ_tr).
    #[inline]
    pub fn delta_r(&self) -> T {
        (self.pr * self.prr - self.pt * self.ptr) * 2.0
    }

    /// Δ_tt = 2(φ_tr² + φ_rφ_ttr − φ_tt² − φ_tφ_ttt).
    #[inline]
    pub fn delta_tt(&self) -> T {
        (self.ptr * self.ptr + self.pr * self.pttr - self.ptt * self.ptt - self.pt * self.pttt)
            * 2.0
    }

    /// Δ^p.
    #[inline]
    pub fn delta_pow(&self, p: f64) -> T {
        self.delta().powf(p)
    }

    /// (Δ^p)_t.
    #[inline]
    pub fn delta_pow_t(&self, p: f64) -> T {
        self.delta().powf(p - 1.0) * self.delta_t() * p
    }

    /// (Δ^p)_r.
    #[inline]
    pub fn delta_pow_r(&self, p: f64) -> T {
        self.delta().powf(p - 1.0) * self.delta_r() * p
    }

    /// (Δ^p)_tt.
    #[inline]
    pub fn delta_pow_tt(&self, p: f64) -> T {
        let d = self.delta();
        let dt = self.delta_t();
        d.powf(p - 2.0) * dt * dt * (p * (p - 1.0)) + d.powf(p - 1.0) * self.delta_tt() * p
    }
}

/// Divergence-form residual
/// `E(φ) = (rφ_t/Δ^{1/2})_t − (rφ_r/Δ^{1/2})_r`
/// in its expanded form
/// `rΔ^{−3/2}[φ_tt(1+φ_r²) − 2φ_tφ_rφ_tr − (1−φ_t²)φ_rr] − φ_rΔ^{−1/2}`.
pub fn eq_residual<T: Scalar>(j: &Jet<T>) -> T {
    let one = c::<T>(1.0);
    let bracket =
        j.ptt * (one + j.pr * j.pr) - j.pt * j.pr * j.ptr * 2.0 - (one - j.pt * j.pt) * j.prr;
    j.r * j.delta_pow(-1.5) * bracket - j.pr * j.delta_pow(-0.5)
}

/// Quasilinear-form residual
/// `r φ_tt(1+φ_r²) − 2rφ_tφ_rφ_tr − φ_rΔ − r(1−φ_t²)φ_rr`, equal to `Δ^{3/2}·E(φ)`.
pub fn quasilinear_residual<T: Scalar>(j: &Jet<T>) -> T {
    let one = c::<T>(1.0);
    j.r * j.ptt * (one + j.pr * j.pr)
        - j.r * j.pt * j.pr * j.ptr * 2.0
        - j.pr * j.delta()
        - j.r * (one - j.pt * j.pt) * j.prr
}

/// Exact `∂_t E` at a point of an analytic field.
pub fn eq_residual_dt(field: &impl AnalyticField, t: f64, r: f64) -> f64 {
    eq_residual(&field.jet_dt(t, r)).eps
}

/// Exact `∂_t² E` at a point of an analytic field.
pub fn eq_residual_dtt(field: &impl AnalyticField, t: f64, r: f64) -> f64 {
    eq_residual(&field.jet_dt2(t, r)).v2
}

/// Exact `∂_r E` at a point of an analytic field.
pub fn eq_residual_dr(field: &impl AnalyticField, t: f64, r: f64) -> f64 {
    eq_residual(&field.jet_dr(t, r)).eps
}
