use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use membrane_lab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    let n = unsafe { ml_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n < buf.len());
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn config(command: &str, settings: &[&str]) -> *mut MlConfig {
    let name = CString::new(command).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { ml_config_new(name.as_ptr(), &mut cfg) },
        MlStatus::Ok
    );
    for s in settings {
        let s = CString::new(*s).unwrap();
        assert_eq!(
            unsafe { ml_config_set(cfg, s.as_ptr()) },
            MlStatus::Ok,
            "{}",
            last_error()
        );
    }
    cfg
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(ml_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn unknown_command_and_key_are_config_errors() {
    let name = CString::new("nonsense").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { ml_config_new(name.as_ptr(), &mut cfg) },
        MlStatus::Config
    );
    assert!(cfg.is_null());
    assert!(last_error().contains("nonsense"));
    let cfg = config("simulate", &[]);
    let bad = CString::new("evolve.nope=3").unwrap();
    assert_eq!(
        unsafe { ml_config_set(cfg, bad.as_ptr()) },
        MlStatus::Config
    );
    assert!(last_error().contains("evolve.nope"));
    unsafe { ml_config_free(cfg) };
}

#[test]
fn rejected_setting_leaves_the_configuration_unchanged() {
    let cfg = config("simulate", &["evolve.t_final=2.0"]);
    let bad = CString::new("evolve.r_max=5.0").unwrap();
    assert_eq!(
        unsafe { ml_config_set(cfg, bad.as_ptr()) },
        MlStatus::Config
    );
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { ml_simulate(cfg, &mut run) }, MlStatus::Ok);
    assert_eq!(unsafe { ml_run_nodes(run) }, 801);
    unsafe {
        ml_run_free(run);
        ml_config_free(cfg);
    }
}

#[test]
fn null_pointers_are_reported() {
    let mut out = 0.0;
    assert_eq!(
        unsafe { ml_bessel_j0(1.0, ptr::null_mut()) },
        MlStatus::NullPointer
    );
    assert_eq!(unsafe { ml_execute(ptr::null()) }, MlStatus::NullPointer);
    assert_eq!(
        unsafe { ml_run_energy(ptr::null(), 0, &mut out, &mut out) },
        MlStatus::NullPointer
    );
    assert_eq!(unsafe { ml_run_nodes(ptr::null()) }, 0);
    unsafe {
        ml_config_free(ptr::null_mut());
        ml_run_free(ptr::null_mut());
    }
}

#[test]
fn bessel_j0_matches_its_first_zero_and_rejects_the_domain() {
    let mut v = 1.0;
    assert_eq!(
        unsafe { ml_bessel_j0(2.404825557695773, &mut v) },
        MlStatus::Ok
    );
    assert!(v.abs() < 1e-12);
    assert_eq!(unsafe { ml_bessel_j0(-1.0, &mut v) }, MlStatus::Config);
}

#[test]
fn small_gaussian_run_conserves_energy_and_exposes_its_state() {
    let cfg = config("simulate", &["evolve.t_final=4.0"]);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { ml_simulate(cfg, &mut run) }, MlStatus::Ok);
    assert_eq!(unsafe { ml_run_status(run) }, MlRunStatus::Completed);
    let n = unsafe { ml_run_nodes(run) };
    let mut phi = vec![0.0; n];
    assert_eq!(
        unsafe { ml_run_final_field(run, 0, phi.as_mut_ptr(), n - 1) },
        MlStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { ml_run_final_field(run, 0, phi.as_mut_ptr(), n) },
        MlStatus::Ok
    );
    assert!(phi.iter().all(|v| v.is_finite()) && phi.iter().any(|v| *v != 0.0));
    let k = unsafe { ml_run_snapshots(run) };
    let (mut t0, mut e0, mut t1, mut e1) = (0.0, 0.0, 0.0, 0.0);
    assert_eq!(
        unsafe { ml_run_energy(run, 0, &mut t0, &mut e0) },
        MlStatus::Ok
    );
    assert_eq!(
        unsafe { ml_run_energy(run, k - 1, &mut t1, &mut e1) },
        MlStatus::Ok
    );
    assert_eq!(
        unsafe { ml_run_energy(run, k, &mut t1, &mut e1) },
        MlStatus::OutOfRange
    );
    assert_eq!(t0, 0.0);
    assert!((t1 - 4.0).abs() < 1e-12);
    assert!(((e1 - e0) / e0).abs() < 1e-8);
    unsafe {
        ml_run_free(run);
        ml_config_free(cfg);
    }
}

#[test]
fn large_amplitude_run_reports_breakdown() {
    let cfg = config("simulate", &["data.amplitude=2.0"]);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { ml_simulate(cfg, &mut run) }, MlStatus::Ok);
    assert_eq!(unsafe { ml_run_status(run) }, MlRunStatus::Breakdown);
    unsafe {
        ml_run_free(run);
        ml_config_free(cfg);
    }
}

#[test]
fn execute_writes_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = format!("output.dir={}", toml_string(dir.path().to_str().unwrap()));
    let cfg = config("simulate", &["evolve.t_final=1.0", &out]);
    assert_eq!(unsafe { ml_execute(cfg) }, MlStatus::Ok, "{}", last_error());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    assert!(manifest.contains("evolve.t_final = 1.0"));
    assert!(dir.path().join("functionals.csv").exists());
    unsafe { ml_config_free(cfg) };
}

fn toml_string(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[test]
fn header_declares_every_entry_point_and_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/membrane_lab.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in [
        "ml_last_error",
        "ml_version",
        "ml_config_new",
        "ml_config_set",
        "ml_config_free",
        "ml_execute",
        "ml_simulate",
        "ml_run_status",
        "ml_run_nodes",
        "ml_run_snapshots",
        "ml_run_final_field",
        "ml_run_energy",
        "ml_run_free",
        "ml_bessel_j0",
    ] {
        assert!(
            text.contains(&format!("{name}(")),
            "{name} missing from the header"
        );
    }
    let status = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99", header])
        .status()
        .unwrap();
    assert!(status.success());
}
