//! Persistent outputs: CSV tables of functionals, residuals, pairings and inequalities.
//!
//! Every float is written as its shortest round-trip decimal text, so identical runs
//! produce identical bytes.

use std::fs;
use std::path::Path;

use crate::cli::config::format_f64;
use crate::divcurl::PairingReport;
use crate::error::Result;
use crate::evolution::Trajectory;
use crate::functionals::{AccumulatorRecord, FunctionalRecord, InequalityRow, Verdict};
use crate::grid::{simpson, Grid};
use crate::laws::{residual, BalanceLaw};

/// Column names of `functionals.csv`.
pub const FUNCTIONAL_COLUMNS: [&str; 30] = [
    "t", "E1", "E1hat", "E2", "E2hat", "E3", "E3q", "E3s", "E3l", "E3hat", "E3tilde", "hnorm2",
    "H", "M", "M0", "Mh", "M01", "M02", "Mh1", "Mh2", "M1", "M2", "eta1", "eta2", "xi1", "xi2",
    "zeta1", "zeta2", "gamma1", "gamma2",
];

fn functional_row(f: &FunctionalRecord, a: &AccumulatorRecord) -> Vec<f64> {
    vec![
        f.t, f.e1, f.e1hat, f.e2, f.e2hat, f.e3, f.e3q, f.e3s, f.e3l, f.e3hat, f.e3tilde, f.hnorm2,
        f.h_energy, a.m, a.m0, a.mh, a.m01, a.m02, a.mh1, a.mh2, a.m1, a.m2, a.eta1, a.eta2, a.xi1,
        a.xi2, a.zeta1, a.zeta2, a.gamma1, a.gamma2,
    ]
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// Writes `functionals.csv`: `t`, the energies, then the accumulated space-time integrals.
pub fn write_functionals(
    path: &Path,
    records: &[FunctionalRecord],
    accumulators: &[AccumulatorRecord],
) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(FUNCTIONAL_COLUMNS)?;
    for (f, a) in records.iter().zip(accumulators) {
        w.write_record(functional_row(f, a).into_iter().map(format_f64))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `residuals.csv`: `t, law, sup, l1` for every interior snapshot and law.
pub fn write_residuals(
    path: &Path,
    trajectory: &Trajectory,
    laws: &[BalanceLaw],
    grid: &Grid,
) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "law", "sup", "l1"])?;
    let n = trajectory.snapshots.len();
    for k in 1..n.saturating_sub(1) {
        let t = trajectory.snapshots[k].bundle.t;
        for &law in laws {
            let res = residual(law, trajectory, k, grid)?;
            let sup = res.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let l1 = simpson(&res.iter().map(|v| v.abs()).collect::<Vec<_>>(), grid.h());
            w.write_record([
                format_f64(t),
                law.name().to_string(),
                format_f64(sup),
                format_f64(l1),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `pairing.csv`: `pair, lhs, a1, a2, a3, gap, bound_rhs`.
pub fn write_pairings(path: &Path, rows: &[PairingReport]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["pair", "lhs", "a1", "a2", "a3", "gap", "bound_rhs"])?;
    for r in rows {
        let mut rec = vec![r.name.clone()];
        rec.extend(
            [r.lhs, r.a1, r.a2, r.a3, r.gap, r.bound_rhs]
                .into_iter()
                .map(format_f64),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `inequalities.csv`: `t, name, lhs, rhs, verdict, hard`.
pub fn write_inequalities(path: &Path, rows: &[InequalityRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "name", "lhs", "rhs", "verdict", "hard"])?;
    for r in rows {
        let verdict = match r.verdict {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Undefined => "undefined",
        };
        w.write_record([
            format_f64(r.t),
            r.name.clone(),
            format_f64(r.lhs),
            format_f64(r.rhs),
            verdict.to_string(),
            r.hard.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
