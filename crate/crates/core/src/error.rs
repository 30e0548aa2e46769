//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by kernels, solvers and studies.
#[derive(Debug, Error)]
pub enum Error {
    /// A sample array contained NaN or an infinity.
    #[error("non-finite sample at index {index}")]
    NonFinite {
        /// First offending index.
        index: usize,
    },
    /// Grid parameters outside the supported range.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    /// A 1/r-weighted integrand does not vanish on the axis.
    #[error("axis-singular integrand: value {value} at r = 0")]
    AxisSingular {
        /// Axis value of the integrand.
        value: f64,
    },
    /// The time-like condition Δ ≥ δ_min failed.
    #[error("time-like condition violated at node {node}: delta = {delta}")]
    TimeLike {
        /// Offending node index.
        node: usize,
        /// Value of Δ at that node.
        delta: f64,
    },
    /// A caller broke an operation precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A run configuration could not be parsed or is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// The pair violates the axis hypothesis of the pairing lemma.
    #[error("inadmissible pair {pair}: axis limit of f12 is {axis_value:e} against peak {peak:e}")]
    InadmissiblePair {
        /// Pair label.
        pair: String,
        /// Extrapolated axis value of f12 (largest over the run).
        axis_value: f64,
        /// Largest |f12| over the run.
        peak: f64,
    },
    /// A run needed by a study stopped before its final time.
    #[error("{what}: run ended with {status}")]
    Incomplete {
        /// Which run.
        what: String,
        /// Termination label.
        status: String,
        /// True when the run stopped on a breakdown rather than at the boundary.
        breakdown: bool,
    },
    /// Argument outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Filesystem failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// CSV serialization failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
