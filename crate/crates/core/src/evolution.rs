//! Method-of-lines time integration with classical RK4.
//!
//! The semi-discrete system is `φ_t = ψ`, `ψ_t = F(φ, ψ)` on the radial grid. The last two
//! nodes keep `ψ_t = 0`, so spatially constant states such as `φ = a + b·t` stay exact and
//! contained data see no boundary at all. Snapshots are taken every `save_stride` steps;
//! each carries the derivative bundle of its center state built from the window
//! `(t − dt, t, t + dt)`. The state before `t = 0` comes from one backward RK4 step.

use crate::error::{Error, Result};
use crate::grid::{Grid, Parity};
use crate::kinematics::{bundle, rhs_axis, rhs_point, DerivBundle, FieldState, DEFAULT_DELTA_MIN};

/// Number of outer nodes inspected by the containment monitor.
pub const BOUNDARY_WATCH: usize = 4;

/// Relative amplitude above which a signal counts as having reached the boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolveConfig {
    /// Final time.
    pub t_final: f64,
    /// Courant number `dt/h`.
    pub cfl: f64,
    /// Outer radius.
    pub r_max: f64,
    /// Number of mesh intervals.
    pub n: usize,
    /// Steps between snapshots.
    pub save_stride: usize,
    /// Breakdown floor on Δ.
    pub delta_min: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            t_final: 10.0,
            cfl: 0.4,
            r_max: 40.0,
            n: 800,
            save_stride: 5,
            delta_min: DEFAULT_DELTA_MIN,
        }
    }
}

impl EvolveConfig {
    /// Grid of this configuration.
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.r_max, self.n)
    }

    /// Number of steps and the step size: the smallest multiple of `save_stride` with
    /// `dt ≤ cfl·h`, and `dt = t_final / steps`.
    pub fn schedule(&self) -> Result<(usize, f64)> {
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "t_final must be finite and nonnegative, got {}",
                self.t_final
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if self.save_stride == 0 {
            return Err(Error::Config("save_stride must be at least 1".into()));
        }
        if !(self.delta_min > 0.0) {
            return Err(Error::Config(format!(
                "delta_min must be positive, got {}",
                self.delta_min
            )));
        }
        let h = self.r_max / self.n as f64;
        if self.t_final == 0.0 {
            return Ok((0, self.cfl * h));
        }
        let raw = (self.t_final / (self.cfl * h)).ceil() as usize;
        let stride = self.save_stride;
        let steps = raw.div_ceil(stride).max(1) * stride;
        Ok((steps, self.t_final / steps as f64))
    }
}

/// Initial data plus the radius beyond which they vanish identically.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    /// φ at t = 0.
    pub phi0: Vec<f64>,
    /// φ_t at t = 0.
    pub phi1: Vec<f64>,
    /// Support radius, `None` for data that do not vanish at large r.
    pub support: Option<f64>,
}

/// Termination cause of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Status {
    /// The run reached `t_final`.
    Completed,
    /// Δ fell below the floor or a value stopped being finite.
    Breakdown {
        /// Time of the failing stage's base state.
        t: f64,
        /// Offending node.
        node: usize,
        /// Δ there.
        delta: f64,
    },
    /// The solution became nonzero near the outer boundary.
    BoundaryTouched {
        /// Snapshot time.
        t: f64,
    },
}

impl Status {
    /// True for [`Status::Completed`].
    pub fn is_completed(&self) -> bool {
        matches!(self, Status::Completed)
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match self {
            Status::Completed => "completed".into(),
            Status::Breakdown { t, node, delta } => {
                format!("breakdown(t={t}, node={node}, delta={delta})")
            }
            Status::BoundaryTouched { t } => format!("boundary_touched(t={t})"),
        }
    }
}

/// One saved instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    /// The state.
    pub state: FieldState,
    /// Its derivative bundle.
    pub bundle: DerivBundle,
}

/// Run summary shared by the collecting and streaming drivers.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    /// Termination cause.
    pub status: Status,
    /// Step size.
    pub dt: f64,
    /// Time between snapshots.
    pub dt_snapshot: f64,
    /// Steps taken.
    pub steps: usize,
    /// Smallest Δ seen over the snapshots and its time.
    pub delta_min_seen: (f64, f64),
    /// Largest `|φ_t(t, 0)|` over the snapshots.
    pub axis_velocity_max: f64,
    /// `|φ₁(0)|` of the initial data.
    pub initial_axis_velocity: f64,
}

/// Snapshots of a run plus its summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Snapshots in increasing time.
    pub snapshots: Vec<Snapshot>,
    /// Termination cause.
    pub status: Status,
    /// Run summary.
    pub summary: RunSummary,
}

impl Trajectory {
    /// Time between snapshots.
    pub fn dt_snapshot(&self) -> f64 {
        self.summary.dt_snapshot
    }
}

/// RK4 integrator holding its scratch buffers.
#[derive(Clone, Debug)]
pub struct Stepper {
    grid: Grid,
    delta_min: f64,
    pr: Vec<f64>,
    prr: Vec<f64>,
    ptr: Vec<f64>,
    k_phi: [Vec<f64>; 4],
    k_psi: [Vec<f64>; 4],
    stage_phi: Vec<f64>,
    stage_psi: Vec<f64>,
}

impl Stepper {
    /// Stepper for a grid and breakdown floor.
    pub fn new(grid: &Grid, delta_min: f64) -> Self {
        let n = grid.len();
        let z = || vec![0.0; n];
        Stepper {
            grid: grid.clone(),
            delta_min,
            pr: z(),
            prr: z(),
            ptr: z(),
            k_phi: [z(), z(), z(), z()],
            k_psi: [z(), z(), z(), z()],
            stage_phi: z(),
            stage_psi: z(),
        }
    }

    fn rhs(&mut self, phi: &[f64], psi: &[f64], stage: usize) -> Result<()> {
        let grid = &self.grid;
        grid.d1_into(phi, Parity::Even, &mut self.pr);
        grid.d2_into(phi, Parity::Even, &mut self.prr);
        grid.d1_into(psi, Parity::Even, &mut self.ptr);
        let r = grid.r();
        let n = grid.len();
        let k_phi = &mut self.k_phi[stage];
        let k_psi = &mut self.k_psi[stage];
        k_phi.copy_from_slice(psi);
        for i in 0..n {
            let (pt, pr) = (psi[i], self.pr[i]);
            let delta = 1.0 + pr * pr - pt * pt;
            if !(delta >= self.delta_min) {
                return Err(Error::TimeLike { node: i, delta });
            }
            k_psi[i] = if i == 0 {
                rhs_axis(pt, self.prr[0])
            } else {
                rhs_point(r[i], pt, pr, self.ptr[i], self.prr[i])
            };
        }
        k_psi[n - 2] = 0.0;
        k_psi[n - 1] = 0.0;
        if let Some(index) = k_psi.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }

    /// One RK4 step of size `dt` (negative steps integrate backward).
    pub fn step(&mut self, state: &FieldState, dt: f64) -> Result<FieldState> {
        const C: [f64; 3] = [0.5, 0.5, 1.0];
        self.rhs(&state.phi, &state.psi, 0)?;
        for stage in 1..4 {
            let a = C[stage - 1] * dt;
            for i in 0..state.phi.len() {
                self.stage_phi[i] = state.phi[i] + a * self.k_phi[stage - 1][i];
                self.stage_psi[i] = state.psi[i] + a * self.k_psi[stage - 1][i];
            }
            let (phi, psi) = (
                std::mem::take(&mut self.stage_phi),
                std::mem::take(&mut self.stage_psi),
            );
            let res = self.rhs(&phi, &psi, stage);
            self.stage_phi = phi;
            self.stage_psi = psi;
            res?;
        }
        let w = dt / 6.0;
        let combine = |y: &[f64], k: &[Vec<f64>; 4]| -> Vec<f64> {
            (0..y.len())
                .map(|i| y[i] + w * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]))
                .collect()
        };
        let phi = combine(&state.phi, &self.k_phi);
        let psi = combine(&state.psi, &self.k_psi);
        if let Some(index) = phi.iter().chain(&psi).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: index % phi.len(),
            });
        }
        Ok(FieldState {
            t: state.t + dt,
            phi,
            psi,
        })
    }
}

/// One RK4 step of `(φ, ψ)`.
pub fn step(state: &FieldState, dt: f64, grid: &Grid, delta_min: f64) -> Result<FieldState> {
    Stepper::new(grid, delta_min).step(state, dt)
}

/// Checks the containment requirement `R ≥ support + T + 10h`.
pub fn check_containment(support: Option<f64>, config: &EvolveConfig) -> Result<()> {
    if let Some(s) = support {
        let h = config.r_max / config.n as f64;
        let need = s + config.t_final + 10.0 * h;
        if config.r_max < need {
            return Err(Error::Config(format!(
                "outer radius {} too small for support {s} and final time {}: need at least {need}",
                config.r_max, config.t_final
            )));
        }
    }
    Ok(())
}

fn breakdown_status(err: Error, t: f64) -> Result<Status> {
    match err {
        Error::TimeLike { node, delta } => Ok(Status::Breakdown { t, node, delta }),
        Error::NonFinite { index } => Ok(Status::Breakdown {
            t,
            node: index,
            delta: f64::NAN,
        }),
        other => Err(other),
    }
}

/// Streams the snapshots of a run to `observer` in time order.
///
/// The observer may stop the run early by returning an error, which is passed through.
pub fn evolve_with<O>(
    initial: &InitialData,
    config: &EvolveConfig,
    mut observer: O,
) -> Result<RunSummary>
where
    O: FnMut(Snapshot) -> Result<()>,
{
    let grid = config.grid()?;
    let (steps, dt) = config.schedule()?;
    check_containment(initial.support, config)?;
    let s0 = FieldState::new(0.0, initial.phi0.clone(), initial.phi1.clone(), &grid)?;
    let scale = {
        let m = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let s = m(&initial.phi0) + m(&initial.phi1);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let stride = config.save_stride;
    let mut summary = RunSummary {
        status: Status::Completed,
        dt,
        dt_snapshot: dt * stride as f64,
        steps: 0,
        delta_min_seen: (0.0, f64::INFINITY),
        axis_velocity_max: 0.0,
        initial_axis_velocity: initial.phi1[0].abs(),
    };
    let mut stepper = Stepper::new(&grid, config.delta_min);
    let mut prev = match stepper.step(&s0, -dt) {
        Ok(s) => s,
        Err(e) => {
            summary.status = breakdown_status(e, 0.0)?;
            return Ok(summary);
        }
    };
    let mut cur = s0;
    let mut next = match stepper.step(&cur, dt) {
        Ok(s) => s,
        Err(e) => {
            summary.status = breakdown_status(e, 0.0)?;
            return Ok(summary);
        }
    };
    let n = grid.len();
    for k in 0..=steps {
        if k % stride == 0 {
            let b = match bundle([&prev, &cur, &next], &grid, config.delta_min) {
                Ok(b) => b,
                Err(e) => {
                    summary.status = breakdown_status(e, cur.t)?;
                    return Ok(summary);
                }
            };
            let (_, dmin) = b.delta_min();
            if dmin < summary.delta_min_seen.1 {
                summary.delta_min_seen = (cur.t, dmin);
            }
            summary.axis_velocity_max = summary.axis_velocity_max.max(cur.psi[0].abs());
            let touched = initial.support.is_some()
                && (n - BOUNDARY_WATCH..n).any(|i| {
                    cur.psi[i].abs() > BOUNDARY_TOL * scale
                        || (cur.phi[i] - initial.phi0[i]).abs() > BOUNDARY_TOL * scale
                });
            observer(Snapshot {
                state: cur.clone(),
                bundle: b,
            })?;
            if touched {
                summary.status = Status::BoundaryTouched { t: cur.t };
                return Ok(summary);
            }
        }
        if k == steps {
            break;
        }
        let base_t = next.t;
        let after = match stepper.step(&next, dt) {
            Ok(s) => s,
            Err(e) => {
                summary.steps = k + 1;
                summary.status = breakdown_status(e, base_t)?;
                return Ok(summary);
            }
        };
        prev = std::mem::replace(&mut cur, std::mem::replace(&mut next, after));
        summary.steps = k + 1;
    }
    Ok(summary)
}

/// Runs to completion or breakdown and keeps every snapshot.
pub fn evolve(initial: &InitialData, config: &EvolveConfig) -> Result<Trajectory> {
    let mut snapshots = Vec::new();
    let summary = evolve_with(initial, config, |s| {
        snapshots.push(s);
        Ok(())
    })?;
    Ok(Trajectory {
        snapshots,
        status: summary.status,
        summary,
    })
}
