//! C ABI for the membrane-lab simulator.
//!
//! Configurations and finished runs are opaque handles created and destroyed through
//! this interface. Every fallible call returns an [`MlStatus`]; the message of the last
//! failure on the calling thread is available from [`ml_last_error`]. Panics never
//! cross the boundary; they surface as [`MlStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use membrane_lab::cli::config::{parse_override, Command, RunConfig};
use membrane_lab::cli::{
    error_code, execute, Outcome, EXIT_BREAKDOWN, EXIT_CONFIG, EXIT_IO, EXIT_VIOLATION,
};
use membrane_lab::evolution::{evolve_with, Status};
use membrane_lab::functionals::plumbing_energy;
use membrane_lab::initial_data::realize;
use membrane_lab::kinematics::FieldState;
use membrane_lab::oracle::bessel_j0;
use membrane_lab::Error;

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlStatus {
    /// Success.
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// Invalid configuration, key, value or argument.
    Config = 2,
    /// A run broke down.
    Breakdown = 3,
    /// A hard invariant or study assertion failed.
    Violation = 4,
    /// Reading or writing files failed.
    Io = 5,
    /// A caller buffer is too small.
    BufferTooSmall = 6,
    /// An index is out of range.
    OutOfRange = 7,
    /// An internal panic was caught.
    Panic = 8,
}

/// Termination cause of a run.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlRunStatus {
    /// Reached the final time.
    Completed = 0,
    /// The time-like condition failed.
    Breakdown = 1,
    /// The solution reached the outer boundary.
    BoundaryTouched = 2,
}

/// Opaque run configuration.
pub struct MlConfig {
    inner: RunConfig,
}

/// Opaque finished run: final state, snapshot times and energies.
pub struct MlRun {
    status: Status,
    final_state: FieldState,
    times: Vec<f64>,
    energies: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.as_bytes().to_vec());
}

fn status_of(err: &Error) -> MlStatus {
    match error_code(err) {
        EXIT_BREAKDOWN => MlStatus::Breakdown,
        EXIT_VIOLATION => MlStatus::Violation,
        EXIT_IO => MlStatus::Io,
        EXIT_CONFIG => MlStatus::Config,
        _ => MlStatus::Config,
    }
}

fn fail(err: Error) -> MlStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn guard(f: impl FnOnce() -> MlStatus) -> MlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            MlStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Option<&'a str> {
    if p.is_null() {
        return None;
    }
    CStr::from_ptr(p).to_str().ok()
}

/// Copies the last error message of this thread into `buf` as a NUL-terminated string.
///
/// Returns the message length without the terminator; nothing is written when `buf` is
/// null or `len` is too small.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ml_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > msg.len() {
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, msg.len());
            *buf.add(msg.len()) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ml_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates the default configuration of a subcommand such as `"simulate"`.
///
/// # Safety
/// `command` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ml_config_new(
    command: *const c_char,
    out: *mut *mut MlConfig,
) -> MlStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return MlStatus::NullPointer;
        }
        let Some(name) = text(command) else {
            set_error("command must be a UTF-8 string");
            return MlStatus::NullPointer;
        };
        let Some(cmd) = Command::from_name(name) else {
            set_error(&format!("unknown command '{name}'"));
            return MlStatus::Config;
        };
        *out = Box::into_raw(Box::new(MlConfig {
            inner: RunConfig::defaults(cmd),
        }));
        MlStatus::Ok
    })
}

/// Applies one `key=value` setting, as with `--override`.
///
/// # Safety
/// `config` must come from [`ml_config_new`] and `setting` be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ml_config_set(config: *mut MlConfig, setting: *const c_char) -> MlStatus {
    guard(|| {
        let (Some(cfg), Some(s)) = (config.as_mut(), text(setting)) else {
            set_error("null configuration or setting");
            return MlStatus::NullPointer;
        };
        let mut next = cfg.inner.clone();
        let applied = parse_override(s)
            .and_then(|(k, v)| next.set(&k, &v))
            .and_then(|_| next.validate());
        match applied {
            Ok(()) => {
                cfg.inner = next;
                MlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Destroys a configuration; null is ignored.
///
/// # Safety
/// `config` must be null or come from [`ml_config_new`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ml_config_free(config: *mut MlConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the configured subcommand, writing its outputs to `output.dir`.
///
/// # Safety
/// `config` must come from [`ml_config_new`].
#[no_mangle]
pub unsafe extern "C" fn ml_execute(config: *const MlConfig) -> MlStatus {
    guard(|| {
        let Some(cfg) = config.as_ref() else {
            set_error("null configuration");
            return MlStatus::NullPointer;
        };
        match execute(&cfg.inner) {
            Ok(Outcome::Success) => MlStatus::Ok,
            Ok(Outcome::Breakdown) => {
                set_error("a run broke down");
                MlStatus::Breakdown
            }
            Ok(Outcome::Violation) => {
                set_error("an invariant or assertion failed");
                MlStatus::Violation
            }
            Err(e) => fail(e),
        }
    })
}

/// Evolves the configured data in memory. A breakdown still yields a run handle whose
/// status reports it.
///
/// # Safety
/// `config` must come from [`ml_config_new`] and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ml_simulate(config: *const MlConfig, out: *mut *mut MlRun) -> MlStatus {
    guard(|| {
        let Some(cfg) = config.as_ref() else {
            set_error("null configuration");
            return MlStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer");
            return MlStatus::NullPointer;
        }
        let cfg = &cfg.inner;
        let result = cfg.evolve.grid().and_then(|grid| {
            let initial = realize(&cfg.data, &grid)?;
            let mut times = Vec::new();
            let mut energies = Vec::new();
            let mut last = None;
            let summary = evolve_with(&initial, &cfg.evolve, |s| {
                times.push(s.state.t);
                energies.push(plumbing_energy(&s.state, &grid)?);
                last = Some(s.state);
                Ok(())
            })?;
            let final_state = last.unwrap_or_else(|| FieldState::vacuum(0.0, &grid));
            Ok(MlRun {
                status: summary.status,
                final_state,
                times,
                energies,
            })
        });
        match result {
            Ok(run) => {
                *out = Box::into_raw(Box::new(run));
                MlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Termination cause of a run; a null handle reads as a breakdown.
///
/// # Safety
/// `run` must be null or come from [`ml_simulate`].
#[no_mangle]
pub unsafe extern "C" fn ml_run_status(run: *const MlRun) -> MlRunStatus {
    match run.as_ref().map(|r| r.status) {
        Some(Status::Completed) => MlRunStatus::Completed,
        Some(Status::BoundaryTouched { .. }) => MlRunStatus::BoundaryTouched,
        Some(Status::Breakdown { .. }) | None => MlRunStatus::Breakdown,
    }
}

/// Number of grid nodes of a run, zero for null.
///
/// # Safety
/// `run` must be null or come from [`ml_simulate`].
#[no_mangle]
pub unsafe extern "C" fn ml_run_nodes(run: *const MlRun) -> usize {
    run.as_ref().map_or(0, |r| r.final_state.phi.len())
}

/// Number of snapshots of a run, zero for null.
///
/// # Safety
/// `run` must be null or come from [`ml_simulate`].
#[no_mangle]
pub unsafe extern "C" fn ml_run_snapshots(run: *const MlRun) -> usize {
    run.as_ref().map_or(0, |r| r.times.len())
}

/// Copies `φ` (or `φ_t` when `velocity` is nonzero) of the last snapshot into `buf`.
///
/// # Safety
/// `run` must come from [`ml_simulate`] and `buf` be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ml_run_final_field(
    run: *const MlRun,
    velocity: i32,
    buf: *mut f64,
    len: usize,
) -> MlStatus {
    guard(|| {
        let Some(r) = run.as_ref() else {
            set_error("null run");
            return MlStatus::NullPointer;
        };
        if buf.is_null() {
            set_error("null buffer");
            return MlStatus::NullPointer;
        }
        let src = if velocity != 0 {
            &r.final_state.psi
        } else {
            &r.final_state.phi
        };
        if len < src.len() {
            set_error(&format!("buffer holds {len} values, {} needed", src.len()));
            return MlStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        MlStatus::Ok
    })
}

/// Time and conserved energy of snapshot `index`.
///
/// # Safety
/// `run` must come from [`ml_simulate`]; `t` and `energy` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ml_run_energy(
    run: *const MlRun,
    index: usize,
    t: *mut f64,
    energy: *mut f64,
) -> MlStatus {
    guard(|| {
        let Some(r) = run.as_ref() else {
            set_error("null run");
            return MlStatus::NullPointer;
        };
        if t.is_null() || energy.is_null() {
            set_error("null output pointer");
            return MlStatus::NullPointer;
        }
        if index >= r.times.len() {
            set_error(&format!(
                "snapshot {index} out of range 0..{}",
                r.times.len()
            ));
            return MlStatus::OutOfRange;
        }
        *t = r.times[index];
        *energy = r.energies[index];
        MlStatus::Ok
    })
}

/// Destroys a run; null is ignored.
///
/// # Safety
/// `run` must be null or come from [`ml_simulate`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ml_run_free(run: *mut MlRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Bessel function `J₀(x)` for `0 ≤ x ≤ 200`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ml_bessel_j0(x: f64, out: *mut f64) -> MlStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return MlStatus::NullPointer;
        }
        match bessel_j0(x) {
            Ok(v) => {
                *out = v;
                MlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
