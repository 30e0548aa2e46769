//! Study drivers on small configurations.

use approx::assert_relative_eq;
use membrane_lab::error::Error;
use membrane_lab::evolution::{EvolveConfig, Status};
use membrane_lab::experiments::{
    blowup_probe, det_check_study, difference_norms, energy_drift_study, exact_solution_study,
    format_value, homotopy_sweep, log_log_slope, random_jets, run_final, scaling_study,
    smalldata_runs, stability_pair, Assertion, StudyReport,
};
use membrane_lab::initial_data::{realize, DataSpec};

fn small(t_final: f64, r_max: f64, n: usize) -> EvolveConfig {
    EvolveConfig {
        t_final,
        r_max,
        n,
        save_stride: 4,
        ..Default::default()
    }
}

#[test]
fn assertions_compare_and_reject_non_finite_values() {
    assert!(Assertion::at_most("x", 1.0, 1.0).passed);
    assert!(!Assertion::at_least("x", 0.5, 1.0).passed);
    assert!(Assertion::within("x", 1.05, 1.0, 0.1).passed);
    assert!(!Assertion::at_most("x", f64::NAN, 1.0).passed);
    assert!(!Assertion::at_least("x", f64::INFINITY, 1.0).passed);
}

#[test]
fn report_text_lists_verdicts() {
    let mut report = StudyReport::new("demo");
    report.input("n", 400);
    report.output("order", 3.99);
    report
        .assertions
        .push(Assertion::at_least("order", 3.99, 3.5));
    let text = report.to_text();
    assert!(text.contains("verdict = pass"));
    assert!(text.contains("order = pass (3.99 >= 3.5)"));
    assert_eq!(report.get("order"), Some(3.99));
    report.assertions.push(Assertion::at_most("gap", 1.0, 0.5));
    assert!(!report.passed());
    assert!(report.to_text().contains("verdict = fail"));
    assert_eq!(format_value(2.5e-9), "2.5e-9");
    assert_eq!(format_value(0.25), "0.25");
}

#[test]
fn log_log_slope_recovers_power() {
    let x = [1.0, 2.0, 4.0, 8.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(-4)).collect();
    assert_relative_eq!(log_log_slope(&x, &y), -4.0, epsilon = 1e-12);
}

#[test]
fn random_jets_are_seeded_and_time_like() {
    let a = random_jets(200, 3);
    assert_eq!(a, random_jets(200, 3));
    assert_ne!(a, random_jets(200, 4));
    for j in &a {
        assert!(j.r >= 0.05 && j.r <= 5.0);
        assert!(1.0 - j.pt * j.pt + j.pr * j.pr > 0.0);
    }
}

#[test]
fn linear_time_solution_is_reproduced() {
    let report = exact_solution_study(0.1, 0.3, &small(2.0, 10.0, 200), 1e-11).unwrap();
    assert!(report.passed(), "{}", report.to_text());
}

#[test]
fn zero_data_have_no_energy_drift() {
    let report =
        energy_drift_study(&DataSpec::gaussian(0.0, 1.0), &small(2.0, 12.0, 200), 0.0).unwrap();
    assert_eq!(report.get("max_relative_drift"), Some(0.0));
    assert!(report.passed());
}

#[test]
fn identical_data_have_zero_difference() {
    let cfg = small(2.0, 12.0, 200);
    let spec = DataSpec::gaussian(0.005, 1.0);
    let report = stability_pair(&spec, &spec, &cfg, 16.0).unwrap();
    assert_eq!(report.get("ratio_hom"), Some(0.0));
    let grid = cfg.grid().unwrap();
    let (state, _) = run_final(&realize(&spec, &grid).unwrap(), &cfg).unwrap();
    let d = difference_norms(&state, &state, &grid).unwrap();
    assert_eq!((d.l2_dt, d.h1_hom, d.h1_inhom), (0.0, 0.0, 0.0));
}

#[test]
fn stability_refuses_large_data() {
    let cfg = small(2.0, 12.0, 200);
    let err = stability_pair(
        &DataSpec::gaussian(0.1, 1.0),
        &DataSpec::gaussian(0.005, 1.0),
        &cfg,
        16.0,
    );
    assert!(matches!(err, Err(Error::Config(_))));
    assert!(matches!(
        smalldata_runs(&[0.01, 0.05], &cfg),
        Err(Error::Config(_))
    ));
}

#[test]
fn short_homotopy_holds() {
    let cfg = small(4.0, 14.0, 224);
    let a = DataSpec::gaussian(0.005, 1.0);
    let b = DataSpec::gaussian(0.0055, 1.0);
    let report = homotopy_sweep(&a, &b, 3, &cfg, 0.2).unwrap();
    assert!(report.passed(), "{}", report.to_text());
    assert!(matches!(
        homotopy_sweep(&a, &b, 2, &cfg, 0.2),
        Err(Error::Config(_))
    ));
}

#[test]
fn short_scaling_run_is_covariant() {
    let report =
        scaling_study(&DataSpec::gaussian(0.01, 1.0), &small(2.0, 12.0, 240), 2.0).unwrap();
    assert!(report.passed(), "{}", report.to_text());
    assert!(matches!(
        scaling_study(&DataSpec::gaussian(0.01, 1.0), &small(2.0, 12.0, 240), 0.0),
        Err(Error::Config(_))
    ));
}

#[test]
fn blowup_ladder_finds_first_breakdown() {
    let cfg = small(3.0, 12.0, 200);
    let (report, rungs) = blowup_probe(&[0.25, 2.0, 3.0], 1.0, &cfg).unwrap();
    assert!(rungs[0].status.is_completed());
    assert!(matches!(rungs[1].status, Status::Breakdown { .. }));
    assert_eq!(report.get("first_breakdown_amplitude"), Some(2.0));
    assert!(matches!(
        blowup_probe(&[0.5, 0.25], 1.0, &cfg),
        Err(Error::Config(_))
    ));
}

#[test]
fn determinant_checks_pass_on_small_run() {
    let report = det_check_study(
        &DataSpec::gaussian(0.01, 1.0),
        &small(2.0, 12.0, 400),
        500,
        7,
        1e-6,
    )
    .unwrap();
    assert!(report.passed(), "{}", report.to_text());
    assert!(report.get("detB_m_min_relative").unwrap() >= 0.0);
}
