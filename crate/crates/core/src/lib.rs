//! Simulator and verification harness for radial time-like extremal hypersurfaces
//! `x⁴ = φ(t, |x|)` in (1+3)-dimensional Minkowski space.

pub mod cli;
pub mod divcurl;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod functionals;
pub mod grid;
pub mod initial_data;
pub mod jet;
pub mod kinematics;
pub mod laws;
pub mod oracle;

pub use error::{Error, Result};
