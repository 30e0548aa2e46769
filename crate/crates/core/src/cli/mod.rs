//! Command-line front end: argument parsing, dispatch to the studies and exit codes.
//!
//! Every run writes `manifest.toml` with the fully resolved configuration to the output
//! directory; feeding it back through `--config` reproduces the run. Exit codes are
//! [`EXIT_OK`], [`EXIT_BREAKDOWN`], [`EXIT_VIOLATION`], [`EXIT_CONFIG`], [`EXIT_IO`] and
//! [`EXIT_USAGE`].

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::divcurl::pair_report;
use crate::error::{Error, Result};
use crate::evolution::{evolve, Status};
use crate::experiments::{
    blowup_probe, convergence_study, det_check_study, homotopy_sweep, identity_study, lemma_study,
    smalldata_report, smalldata_runs, stability_pair, ConvergenceSetup, IdentitySetup, StudyReport,
};
use crate::functionals::{has_hard_violation, inequality_report, FunctionalSeries};
use crate::initial_data::{realize, DataSpec};
use crate::oracle::ManufacturedField;

pub use config::{Command, RunConfig};

/// Success.
pub const EXIT_OK: i32 = 0;
/// A run broke down.
pub const EXIT_BREAKDOWN: i32 = 2;
/// A hard invariant or study assertion failed.
pub const EXIT_VIOLATION: i32 = 3;
/// The configuration is invalid.
pub const EXIT_CONFIG: i32 = 4;
/// Reading or writing files failed.
pub const EXIT_IO: i32 = 1;
/// Unknown subcommand or flag.
pub const EXIT_USAGE: i32 = 64;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MEMBRANE_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "membrane-lab",
    version,
    about = "Radial extremal-hypersurface simulator and verification harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Evolve one data set and export functionals, residuals and pairings.
    Simulate(Common),
    /// Observed order of the solver on the Bessel standing wave.
    Convergence(Common),
    /// Balance-law identities on manufactured fields.
    IdentityCheck(Common),
    /// Determinant positivity, expanded-form discrepancies and accumulator cross-checks.
    DetCheck(Common),
    /// Pairing lemma at two resolutions.
    Divcurl(Common),
    /// Stability of the data-to-solution map between two data sets.
    Stability(Common),
    /// Homotopy between two data sets.
    Homotopy(Common),
    /// Small-data sweep over data norms.
    Sweep(Common),
    /// Amplitude ladder towards breakdown.
    BlowupProbe(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Setting applied after the file, repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::Simulate(c) => (Command::Simulate, c),
            Sub::Convergence(c) => (Command::Convergence, c),
            Sub::IdentityCheck(c) => (Command::IdentityCheck, c),
            Sub::DetCheck(c) => (Command::DetCheck, c),
            Sub::Divcurl(c) => (Command::Divcurl, c),
            Sub::Stability(c) => (Command::Stability, c),
            Sub::Homotopy(c) => (Command::Homotopy, c),
            Sub::Sweep(c) => (Command::Sweep, c),
            Sub::BlowupProbe(c) => (Command::BlowupProbe, c),
        }
    }
}

/// Result class of a completed command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Everything held.
    Success,
    /// A run broke down.
    Breakdown,
    /// A hard invariant or assertion failed.
    Violation,
}

impl Outcome {
    /// Exit code of the outcome.
    pub fn code(&self) -> i32 {
        match self {
            Outcome::Success => EXIT_OK,
            Outcome::Breakdown => EXIT_BREAKDOWN,
            Outcome::Violation => EXIT_VIOLATION,
        }
    }
}

/// Exit code of an error.
pub fn error_code(err: &Error) -> i32 {
    match err {
        Error::TimeLike { .. } | Error::NonFinite { .. } => EXIT_BREAKDOWN,
        Error::Incomplete {
            breakdown: true, ..
        } => EXIT_BREAKDOWN,
        Error::Incomplete {
            breakdown: false, ..
        }
        | Error::InadmissiblePair { .. }
        | Error::AxisSingular { .. } => EXIT_VIOLATION,
        Error::Config(_) | Error::InvalidGrid(_) | Error::Contract(_) | Error::Domain(_) => {
            EXIT_CONFIG
        }
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
    }
}

/// Worker-thread cap from [`THREADS_ENV`], `None` when unset.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let (command, common) = cli.command.split();
    let mut overrides = common.overrides;
    if let Some(out) = &common.out {
        overrides.push(format!(
            "output.dir={}",
            toml::Value::String(out.to_string_lossy().into_owned())
        ));
    }
    let result = RunConfig::load(command, common.config.as_deref(), &overrides).and_then(|cfg| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_cap()? {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| execute(&cfg))
    });
    match result {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            eprintln!("membrane-lab: {e}");
            error_code(&e)
        }
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn finish_study(dir: &Path, report: &StudyReport) -> Result<Outcome> {
    let text = report.to_text();
    write(dir, "report.txt", &text)?;
    print!("{text}");
    Ok(if report.passed() {
        Outcome::Success
    } else {
        Outcome::Violation
    })
}

/// Runs a resolved configuration and writes its outputs.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir)?;
    write(dir, "manifest.toml", &cfg.manifest())?;
    let s = &cfg.study;
    let second = DataSpec {
        amplitude: s.amplitude_b,
        ..cfg.data
    };
    match cfg.command {
        Command::Simulate => simulate(cfg, dir),
        Command::Convergence => {
            let setup = ConvergenceSetup {
                amplitude: cfg.data.amplitude,
                wavenumber: cfg.data.wavenumber,
                r_max: cfg.evolve.r_max,
                t_final: cfg.evolve.t_final,
                resolutions: s.resolutions.clone(),
                cfl: cfg.evolve.cfl,
                min_order: s.min_order,
            };
            finish_study(dir, &convergence_study(&setup)?)
        }
        Command::IdentityCheck => {
            let setup = IdentitySetup {
                r_max: cfg.evolve.r_max,
                t: s.time,
                resolutions: s.resolutions.clone(),
                cfl: cfg.evolve.cfl,
                min_order: s.min_order,
            };
            let fields = [
                ManufacturedField::gaussian_cos(),
                ManufacturedField::r2gauss_sin(),
            ];
            finish_study(dir, &identity_study(&fields, &setup)?)
        }
        Command::DetCheck => finish_study(
            dir,
            &det_check_study(
                &cfg.data,
                &cfg.evolve,
                s.samples,
                cfg.seed,
                s.crosscheck_tol,
            )?,
        ),
        Command::Divcurl => {
            let (report, rows) = lemma_study(
                &cfg.data,
                &cfg.evolve,
                &cfg.diagnostics.pairings,
                s.tol,
                s.min_shrink,
            )?;
            output::write_pairings(&dir.join("pairing.csv"), &rows)?;
            finish_study(dir, &report)
        }
        Command::Stability => finish_study(
            dir,
            &stability_pair(&cfg.data, &second, &cfg.evolve, s.bound)?,
        ),
        Command::Homotopy => finish_study(
            dir,
            &homotopy_sweep(&cfg.data, &second, s.n_lambda, &cfg.evolve, s.tol_fd)?,
        ),
        Command::Sweep => {
            let runs = smalldata_runs(&s.epsilons, &cfg.evolve)?;
            for (e, run) in s.epsilons.iter().zip(&runs) {
                let member = dir.join(format!("eps_{}", config::format_f64(*e)));
                fs::create_dir_all(&member)?;
                output::write_functionals(
                    &member.join("functionals.csv"),
                    &run.series.records,
                    &run.series.accumulators,
                )?;
                output::write_inequalities(&member.join("inequalities.csv"), &run.inequalities)?;
            }
            finish_study(dir, &smalldata_report(&s.epsilons, &runs, &cfg.evolve)?)
        }
        Command::BlowupProbe => {
            let (report, rungs) = blowup_probe(&s.amplitudes, cfg.data.width, &cfg.evolve)?;
            let outcome = finish_study(dir, &report)?;
            if rungs
                .iter()
                .any(|r| matches!(r.status, Status::Breakdown { .. }))
            {
                Ok(Outcome::Breakdown)
            } else {
                Ok(outcome)
            }
        }
    }
}

fn simulate(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let grid = cfg.evolve.grid()?;
    let trajectory = evolve(&realize(&cfg.data, &grid)?, &cfg.evolve)?;
    let summary = &trajectory.summary;
    let mut report = StudyReport::new("simulate");
    report.input("family", cfg.data.family.name());
    report.input("amplitude", cfg.data.amplitude);
    report.input("t_final", cfg.evolve.t_final);
    report.input("r_max", cfg.evolve.r_max);
    report.input("n", cfg.evolve.n);
    report
        .notes
        .push(format!("status: {}", summary.status.label()));
    report.output("steps", summary.steps as f64);
    report.output("dt", summary.dt);
    report.output("snapshots", trajectory.snapshots.len() as f64);
    report.output("delta_min", summary.delta_min_seen.1);
    report.output("t_of_delta_min", summary.delta_min_seen.0);
    report.output("axis_velocity_max", summary.axis_velocity_max);
    let mut hard = false;
    if cfg.diagnostics.functionals {
        let mut series = FunctionalSeries::new();
        for s in &trajectory.snapshots {
            series.push(&s.bundle, &grid)?;
        }
        output::write_functionals(
            &dir.join("functionals.csv"),
            &series.records,
            &series.accumulators,
        )?;
        let rows = inequality_report(&series.records, &series.accumulators, None);
        output::write_inequalities(&dir.join("inequalities.csv"), &rows)?;
        hard = has_hard_violation(&rows);
        if let (Some(first), Some(last)) = (series.records.first(), series.records.last()) {
            let drift = if first.h_energy == 0.0 {
                0.0
            } else {
                (last.h_energy - first.h_energy) / first.h_energy
            };
            report.output("energy_relative_change", drift);
        }
        for row in rows
            .iter()
            .filter(|r| r.hard && r.verdict == crate::functionals::Verdict::Violated)
        {
            report.notes.push(format!(
                "hard inequality {} violated at t = {}",
                row.name, row.t
            ));
        }
    }
    if !cfg.diagnostics.laws.is_empty() {
        output::write_residuals(
            &dir.join("residuals.csv"),
            &trajectory,
            &cfg.diagnostics.laws,
            &grid,
        )?;
    }
    if trajectory.snapshots.len() >= 2 {
        let t_last = trajectory
            .snapshots
            .last()
            .map(|s| s.bundle.t)
            .unwrap_or(0.0);
        let mut rows = Vec::with_capacity(cfg.diagnostics.pairings.len());
        for p in &cfg.diagnostics.pairings {
            let (top, bottom) = p.laws();
            let row = pair_report(top, bottom, &trajectory, t_last, &grid)?;
            if !row.admissible {
                report.notes.push(format!(
                    "pairing {}: f12 does not vanish on the axis",
                    row.name
                ));
            }
            rows.push(row);
        }
        output::write_pairings(&dir.join("pairing.csv"), &rows)?;
    }
    let text = report.to_text();
    write(dir, "summary.txt", &text)?;
    print!("{text}");
    Ok(match summary.status {
        Status::Breakdown { .. } => Outcome::Breakdown,
        Status::BoundaryTouched { .. } => Outcome::Violation,
        Status::Completed if hard => Outcome::Violation,
        Status::Completed => Outcome::Success,
    })
}
