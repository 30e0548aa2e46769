//! Run configuration: flat `key = value` text with dotted keys, per-command defaults,
//! command-line overrides and the manifest that records every resolved value.
//!
//! Values are TOML literals, so strings are quoted in files (`data.family = "gaussian"`).
//! An override `key=value` whose value is not a TOML literal is taken as a bare string.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::divcurl::Pairing;
use crate::error::{Error, Result};
use crate::evolution::{check_containment, EvolveConfig};
use crate::initial_data::{DataSpec, Family};
use crate::laws::BalanceLaw;

/// Subcommand of the command-line front end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    /// One evolution with functionals, residuals and pairings.
    Simulate,
    /// Solver convergence on the Bessel standing wave.
    Convergence,
    /// Balance-law identities on manufactured fields.
    IdentityCheck,
    /// Determinant positivity, expanded-form discrepancies and accumulator cross-checks.
    DetCheck,
    /// Pairing lemma at two resolutions.
    Divcurl,
    /// Stability of the data-to-solution map.
    Stability,
    /// Homotopy between two data sets.
    Homotopy,
    /// Small-data sweep over data norms.
    Sweep,
    /// Amplitude ladder towards breakdown.
    BlowupProbe,
}

impl Command {
    /// Every subcommand.
    pub const ALL: [Command; 9] = [
        Command::Simulate,
        Command::Convergence,
        Command::IdentityCheck,
        Command::DetCheck,
        Command::Divcurl,
        Command::Stability,
        Command::Homotopy,
        Command::Sweep,
        Command::BlowupProbe,
    ];

    /// Name on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Convergence => "convergence",
            Command::IdentityCheck => "identity-check",
            Command::DetCheck => "det-check",
            Command::Divcurl => "divcurl",
            Command::Stability => "stability",
            Command::Homotopy => "homotopy",
            Command::Sweep => "sweep",
            Command::BlowupProbe => "blowup-probe",
        }
    }

    /// Subcommand from its name.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Which diagnostics a run writes.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// Laws whose residuals are exported.
    pub laws: Vec<BalanceLaw>,
    /// Whether functionals are evaluated and exported.
    pub functionals: bool,
    /// Pairings whose lemma quantities are exported.
    pub pairings: Vec<Pairing>,
}

/// Study parameters; each subcommand reads the ones it needs.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyParams {
    /// Mesh sizes of a refinement study, each twice the previous.
    pub resolutions: Vec<usize>,
    /// Smallest accepted observed order.
    pub min_order: f64,
    /// Evaluation time of the identity check.
    pub time: f64,
    /// Number of random jets.
    pub samples: usize,
    /// Relative tolerance of the accumulator cross-check.
    pub crosscheck_tol: f64,
    /// Relative tolerance of the pairing-lemma gap.
    pub tol: f64,
    /// Smallest accepted shrink factor of the lemma gap under refinement.
    pub min_shrink: f64,
    /// Amplitude of the second member of a pair.
    pub amplitude_b: f64,
    /// Asserted stability constant.
    pub bound: f64,
    /// Number of homotopy parameters.
    pub n_lambda: usize,
    /// Difference-quotient allowance of the homotopy bound.
    pub tol_fd: f64,
    /// Data norms of the sweep.
    pub epsilons: Vec<f64>,
    /// Amplitudes of the blow-up ladder.
    pub amplitudes: Vec<f64>,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Subcommand.
    pub command: Command,
    /// Initial data.
    pub data: DataSpec,
    /// Solver settings.
    pub evolve: EvolveConfig,
    /// Exported diagnostics.
    pub diagnostics: Diagnostics,
    /// Study parameters.
    pub study: StudyParams,
    /// Output directory.
    pub output_dir: PathBuf,
    /// Seed of randomized checks.
    pub seed: u64,
}

impl RunConfig {
    /// Defaults of a subcommand.
    pub fn defaults(command: Command) -> Self {
        let mut cfg = RunConfig {
            command,
            data: DataSpec::gaussian(0.01, 1.0),
            evolve: EvolveConfig {
                t_final: 10.0,
                r_max: 20.0,
                n: 800,
                save_stride: 5,
                ..Default::default()
            },
            diagnostics: Diagnostics {
                laws: BalanceLaw::ALL.to_vec(),
                functionals: true,
                pairings: Pairing::ALL.to_vec(),
            },
            study: StudyParams {
                resolutions: vec![400, 800, 1600],
                min_order: 3.5,
                time: 0.7,
                samples: 1000,
                crosscheck_tol: 1e-6,
                tol: 1e-3,
                min_shrink: 3.0,
                amplitude_b: 0.0055,
                bound: 16.0,
                n_lambda: 5,
                tol_fd: 0.2,
                epsilons: vec![0.005, 0.01, 0.02],
                amplitudes: vec![0.25, 0.5, 1.0, 2.0],
            },
            output_dir: PathBuf::from("membrane-lab-out"),
            seed: 7,
        };
        match command {
            Command::Simulate | Command::DetCheck | Command::Divcurl | Command::BlowupProbe => {}
            Command::Convergence => {
                cfg.data = DataSpec::bessel_oracle(1e-4, 2.0);
                cfg.evolve.t_final = 5.0;
            }
            Command::IdentityCheck => {
                cfg.evolve.r_max = 8.0;
                cfg.study.resolutions = vec![200, 400, 800, 1600];
                cfg.study.min_order = 1.8;
            }
            Command::Stability | Command::Homotopy => {
                cfg.data = DataSpec::gaussian(0.005, 1.0);
                cfg.evolve.t_final = if command == Command::Stability {
                    100.0
                } else {
                    50.0
                };
                cfg.evolve.r_max = cfg.evolve.t_final + 10.0;
                cfg.evolve.n = (cfg.evolve.r_max * 16.0) as usize;
                cfg.evolve.save_stride = 10;
            }
            Command::Sweep => {
                cfg.evolve.t_final = 200.0;
                cfg.evolve.r_max = 210.0;
                cfg.evolve.save_stride = 10;
            }
        }
        cfg
    }

    /// Every setting as `(key, value)` in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, Value)> {
        let f = Value::Float;
        let u = |v: usize| Value::Integer(v as i64);
        let fl = |v: &[f64]| Value::Array(v.iter().map(|x| Value::Float(*x)).collect());
        let d = &self.data;
        let e = &self.evolve;
        let s = &self.study;
        vec![
            ("data.family", Value::String(d.family.name().into())),
            ("data.amplitude", f(d.amplitude)),
            ("data.width", f(d.width)),
            ("data.wavenumber", f(d.wavenumber)),
            ("data.drift", f(d.drift)),
            ("data.velocity", f(d.velocity)),
            ("evolve.t_final", f(e.t_final)),
            ("evolve.cfl", f(e.cfl)),
            ("evolve.r_max", f(e.r_max)),
            ("evolve.n", u(e.n)),
            ("evolve.save_stride", u(e.save_stride)),
            ("evolve.delta_min", f(e.delta_min)),
            (
                "diagnostics.laws",
                Value::Array(
                    self.diagnostics
                        .laws
                        .iter()
                        .map(|l| Value::String(l.name().into()))
                        .collect(),
                ),
            ),
            (
                "diagnostics.functionals",
                Value::Boolean(self.diagnostics.functionals),
            ),
            (
                "diagnostics.pairings",
                Value::Array(
                    self.diagnostics
                        .pairings
                        .iter()
                        .map(|p| Value::String(p.name().into()))
                        .collect(),
                ),
            ),
            (
                "study.resolutions",
                Value::Array(s.resolutions.iter().map(|n| u(*n)).collect()),
            ),
            ("study.min_order", f(s.min_order)),
            ("study.time", f(s.time)),
            ("study.samples", u(s.samples)),
            ("study.crosscheck_tol", f(s.crosscheck_tol)),
            ("study.tol", f(s.tol)),
            ("study.min_shrink", f(s.min_shrink)),
            ("study.amplitude_b", f(s.amplitude_b)),
            ("study.bound", f(s.bound)),
            ("study.n_lambda", u(s.n_lambda)),
            ("study.tol_fd", f(s.tol_fd)),
            ("study.epsilons", fl(&s.epsilons)),
            ("study.amplitudes", fl(&s.amplitudes)),
            (
                "output.dir",
                Value::String(self.output_dir.to_string_lossy().into_owned()),
            ),
            ("run.seed", Value::Integer(self.seed as i64)),
        ]
    }

    /// Assigns one setting.
    pub fn set(&mut self, key: &str, value: &Value) -> Result<()> {
        let d = &mut self.data;
        let e = &mut self.evolve;
        let s = &mut self.study;
        match key {
            "data.family" => {
                let name = as_str(key, value)?;
                d.family = Family::from_name(name)
                    .ok_or_else(|| Error::Config(format!("{key}: unknown family '{name}'")))?;
            }
            "data.amplitude" => d.amplitude = as_f64(key, value)?,
            "data.width" => d.width = as_f64(key, value)?,
            "data.wavenumber" => d.wavenumber = as_f64(key, value)?,
            "data.drift" => d.drift = as_f64(key, value)?,
            "data.velocity" => d.velocity = as_f64(key, value)?,
            "evolve.t_final" => e.t_final = as_f64(key, value)?,
            "evolve.cfl" => e.cfl = as_f64(key, value)?,
            "evolve.r_max" => e.r_max = as_f64(key, value)?,
            "evolve.n" => e.n = as_usize(key, value)?,
            "evolve.save_stride" => e.save_stride = as_usize(key, value)?,
            "evolve.delta_min" => e.delta_min = as_f64(key, value)?,
            "diagnostics.laws" => {
                self.diagnostics.laws = as_names(key, value)?
                    .iter()
                    .map(|n| {
                        BalanceLaw::from_name(n)
                            .ok_or_else(|| Error::Config(format!("{key}: unknown law '{n}'")))
                    })
                    .collect::<Result<_>>()?;
            }
            "diagnostics.functionals" => {
                self.diagnostics.functionals = value
                    .as_bool()
                    .ok_or_else(|| Error::Config(format!("{key}: expected true or false")))?;
            }
            "diagnostics.pairings" => {
                self.diagnostics.pairings = as_names(key, value)?
                    .iter()
                    .map(|n| {
                        Pairing::from_name(n)
                            .ok_or_else(|| Error::Config(format!("{key}: unknown pairing '{n}'")))
                    })
                    .collect::<Result<_>>()?;
            }
            "study.resolutions" => {
                s.resolutions = as_array(key, value)?
                    .iter()
                    .map(|v| as_usize(key, v))
                    .collect::<Result<_>>()?;
            }
            "study.min_order" => s.min_order = as_f64(key, value)?,
            "study.time" => s.time = as_f64(key, value)?,
            "study.samples" => s.samples = as_usize(key, value)?,
            "study.crosscheck_tol" => s.crosscheck_tol = as_f64(key, value)?,
            "study.tol" => s.tol = as_f64(key, value)?,
            "study.min_shrink" => s.min_shrink = as_f64(key, value)?,
            "study.amplitude_b" => s.amplitude_b = as_f64(key, value)?,
            "study.bound" => s.bound = as_f64(key, value)?,
            "study.n_lambda" => s.n_lambda = as_usize(key, value)?,
            "study.tol_fd" => s.tol_fd = as_f64(key, value)?,
            "study.epsilons" => {
                s.epsilons = as_array(key, value)?
                    .iter()
                    .map(|v| as_f64(key, v))
                    .collect::<Result<_>>()?;
            }
            "study.amplitudes" => {
                s.amplitudes = as_array(key, value)?
                    .iter()
                    .map(|v| as_f64(key, v))
                    .collect::<Result<_>>()?;
            }
            "output.dir" => self.output_dir = PathBuf::from(as_str(key, value)?),
            "run.seed" => {
                self.seed = match value {
                    Value::Integer(i) if *i >= 0 => *i as u64,
                    _ => {
                        return Err(Error::Config(format!(
                            "{key}: expected a nonnegative integer"
                        )))
                    }
                }
            }
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Defaults of `command`, then the settings of `text`, then `overrides` in order.
    pub fn from_text(command: Command, text: &str, overrides: &[String]) -> Result<Self> {
        let mut cfg = Self::defaults(command);
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let mut flat = BTreeMap::new();
        flatten("", &table, &mut flat);
        for (k, v) in &flat {
            cfg.set(k, v)?;
        }
        for o in overrides {
            let (k, v) = parse_override(o)?;
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads an optional configuration file and applies overrides.
    pub fn load(command: Command, path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_text(command, &text, overrides)
    }

    /// Consistency checks, including containment of every evolved data set.
    pub fn validate(&self) -> Result<()> {
        self.evolve.schedule()?;
        self.evolve.grid()?;
        let study_norms = |v: &[f64], what: &str| -> Result<()> {
            if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Config(format!(
                    "{what} must be a nonempty list of nonnegative numbers"
                )));
            }
            Ok(())
        };
        match self.command {
            Command::Simulate
            | Command::DetCheck
            | Command::Divcurl
            | Command::Stability
            | Command::Homotopy => {
                check_containment(self.data.support_radius(), &self.evolve)?;
            }
            Command::Sweep => {
                study_norms(&self.study.epsilons, "study.epsilons")?;
                for &e in &self.study.epsilons {
                    check_containment(
                        DataSpec::gaussian_with_norm(e).support_radius(),
                        &self.evolve,
                    )?;
                }
            }
            Command::BlowupProbe => {
                study_norms(&self.study.amplitudes, "study.amplitudes")?;
                check_containment(
                    DataSpec::gaussian(1.0, self.data.width).support_radius(),
                    &self.evolve,
                )?;
            }
            Command::Convergence | Command::IdentityCheck => {}
        }
        if matches!(self.command, Command::Divcurl) {
            let fine = EvolveConfig {
                n: 2 * self.evolve.n,
                ..self.evolve.clone()
            };
            fine.grid()?;
        }
        Ok(())
    }

    /// Manifest text: one `key = value` line per setting, loadable with `--config`.
    pub fn manifest(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# membrane-lab {} {}",
            env!("CARGO_PKG_VERSION"),
            self.command.name()
        );
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {}", literal(&v));
        }
        s
    }
}

/// Splits `key=value`; a value that is not a TOML literal is a bare string.
pub fn parse_override(text: &str) -> Result<(String, Value)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{text}' is not of the form key=value")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(Error::Config(format!("override '{text}' has an empty key")));
    }
    let value = format!("v = {v}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

/// Shortest round-trip decimal text of a float.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

fn literal(v: &Value) -> String {
    match v {
        Value::Float(x) => format_f64(*x),
        Value::Array(a) => format!("[{}]", a.iter().map(literal).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, table: &Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Config(format!("{key}: expected a number"))),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(Error::Config(format!(
            "{key}: expected a nonnegative integer"
        ))),
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::Config(format!("{key}: expected a string")))
}

fn as_array<'a>(key: &str, v: &'a Value) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Config(format!("{key}: expected a list")))
}

fn as_names(key: &str, v: &Value) -> Result<Vec<String>> {
    match v {
        Value::String(s) => Ok(s
            .split(',')
            .map(|x| x.trim().to_string())
            .filter(|x| !x.is_empty())
            .collect()),
        Value::Array(a) => a
            .iter()
            .map(|x| as_str(key, x).map(str::to_string))
            .collect(),
        _ => Err(Error::Config(format!("{key}: expected a list of names"))),
    }
}
