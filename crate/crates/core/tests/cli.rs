//! Configuration handling, exit codes and reproducibility of the command-line front end.

use std::fs;
use std::path::Path;
use std::process::Command as Process;

use membrane_lab::cli::config::{format_f64, parse_override};
use membrane_lab::cli::output::FUNCTIONAL_COLUMNS;
use membrane_lab::cli::{
    run, Command, RunConfig, EXIT_BREAKDOWN, EXIT_CONFIG, EXIT_OK, EXIT_USAGE,
};
use membrane_lab::initial_data::Family;

const SMALL: [&str; 4] = [
    "evolve.t_final=2.0",
    "evolve.r_max=12.0",
    "evolve.n=200",
    "evolve.save_stride=4",
];

fn simulate(dir: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        "membrane-lab".to_string(),
        "simulate".into(),
        "--out".into(),
        dir.to_string_lossy().into_owned(),
    ];
    for o in SMALL.iter().chain(extra) {
        args.push("--override".into());
        args.push(o.to_string());
    }
    run(args)
}

fn csv_values(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn command_names_round_trip() {
    for c in Command::ALL {
        assert_eq!(Command::from_name(c.name()), Some(c));
    }
    assert_eq!(Command::from_name("simulate"), Some(Command::Simulate));
    assert_eq!(Command::from_name("integrate"), None);
}

#[test]
fn defaults_validate() {
    for c in Command::ALL {
        RunConfig::defaults(c).validate().unwrap();
    }
}

#[test]
fn file_then_overrides_apply_in_order() {
    let text = "[data]\nfamily = \"bump\"\namplitude = 0.2\n\n[evolve]\nn = 400\n";
    let cfg = RunConfig::from_text(
        Command::Simulate,
        text,
        &["data.amplitude=0.3".into(), "evolve.n=600".into()],
    )
    .unwrap();
    assert_eq!(cfg.data.family, Family::Bump);
    assert_eq!(cfg.data.amplitude, 0.3);
    assert_eq!(cfg.evolve.n, 600);
    let dotted = RunConfig::from_text(Command::Simulate, "data.amplitude = 0.04\n", &[]).unwrap();
    assert_eq!(dotted.data.amplitude, 0.04);
}

#[test]
fn overrides_parse_literals_and_bare_strings() {
    let (k, v) = parse_override("study.epsilons=[0.1, 0.2]").unwrap();
    assert_eq!(k, "study.epsilons");
    assert_eq!(v.as_array().unwrap().len(), 2);
    let (_, v) = parse_override("data.family = bump").unwrap();
    assert_eq!(v.as_str(), Some("bump"));
    assert!(parse_override("no_equals_sign").is_err());
    assert!(parse_override("=1").is_err());
}

#[test]
fn manifest_round_trips() {
    for c in Command::ALL {
        let mut cfg = RunConfig::defaults(c);
        cfg.data.amplitude = 0.1 + 0.2;
        cfg.seed = 11;
        let again = RunConfig::from_text(c, &cfg.manifest(), &[]).unwrap();
        assert_eq!(again, cfg, "{}", c.name());
    }
}

#[test]
fn floats_are_written_round_trip() {
    for v in [0.1 + 0.2, 1e-300, 2.0, -0.0055, 123456.789] {
        assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
    }
}

#[test]
fn invalid_settings_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        "data.colour=1",
        "data.family=square",
        "evolve.n=-3",
        "evolve.n=15",
        "data.amplitude=nan",
        "evolve.r_max=5.0",
    ] {
        assert_eq!(simulate(dir.path(), &[bad]), EXIT_CONFIG, "{bad}");
    }
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let code = run([
        "membrane-lab",
        "simulate",
        "--config",
        dir.path().join("absent.toml").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(["membrane-lab", "integrate"]), EXIT_USAGE);
    assert_eq!(run(["membrane-lab", "simulate", "--colour"]), EXIT_USAGE);
    assert_eq!(run(["membrane-lab", "--help"]), EXIT_OK);
}

#[test]
fn zero_data_simulation_writes_zero_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(simulate(dir.path(), &["data.amplitude=0.0"]), EXIT_OK);
    for name in [
        "manifest.toml",
        "summary.txt",
        "functionals.csv",
        "residuals.csv",
        "pairing.csv",
        "inequalities.csv",
    ] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let (header, rows) = csv_values(&dir.path().join("functionals.csv"));
    assert_eq!(header, FUNCTIONAL_COLUMNS);
    assert!(rows.len() > 2);
    for row in &rows {
        assert!(row[1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
    }
    let (_, rows) = csv_values(&dir.path().join("residuals.csv"));
    assert!(rows
        .iter()
        .all(|r| r[2].parse::<f64>().unwrap() == 0.0 && r[3].parse::<f64>().unwrap() == 0.0));
    let (_, rows) = csv_values(&dir.path().join("pairing.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| r[1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0)));
}

#[test]
fn large_data_exit_with_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        simulate(dir.path(), &["data.amplitude=2.0"]),
        EXIT_BREAKDOWN
    );
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("breakdown"), "{summary}");
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    assert_eq!(simulate(first.path(), &["data.amplitude=0.05"]), EXIT_OK);
    let manifest = first.path().join("manifest.toml");
    let code = run([
        "membrane-lab",
        "simulate",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        second.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    for name in [
        "functionals.csv",
        "residuals.csv",
        "pairing.csv",
        "inequalities.csv",
        "summary.txt",
    ] {
        assert_eq!(
            fs::read(first.path().join(name)).unwrap(),
            fs::read(second.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn binary_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_membrane-lab");
    let status = Process::new(exe)
        .args(["simulate", "--out", dir.path().to_str().unwrap()])
        .args(SMALL.iter().flat_map(|o| ["--override", o]))
        .args(["--override", "data.amplitude=0.0"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let status = Process::new(exe).arg("integrate").status().unwrap();
    assert_eq!(status.code(), Some(EXIT_USAGE));
}
