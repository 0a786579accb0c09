use std::fs;
use std::path::Path;

use wigner_core::bench::*;
use wigner_core::crystal::{load_state, newton_refine};
use wigner_core::error::Error;

fn config(dir: &Path) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "species = Be\n\
         cyclotron_hz = 7.608e6\n\
         axial_ratio = 0.7\n\
         ions = 8\n\
         angular_momentum = 200\n\
         carrier = auto-gap\n\
         gate_time_ratio = 0.5\n\
         temperatures = 1e-4, 1e-3, 1e-2\n\
         max_infidelity = 1\n\
         output = {}\n",
        dir.display()
    ))
    .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn without_output(manifest: &str) -> String {
    manifest.lines().filter(|l| !l.starts_with("output")).collect::<Vec<_>>().join("\n")
}

#[test]
fn run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let run = run_experiment(&config(tmp.path())).unwrap();
    for name in [EQUILIBRIUM_FILE, SPECTRUM_FILE, FIDELITY_FILE, PHASE_FILE, MANIFEST_FILE, TIMING_FILE, PLOT_FILE] {
        assert!(tmp.path().join(name).is_file(), "{name}");
    }
    assert!(!tmp.path().join(FAILURE_FILE).exists());
    assert_eq!(read(tmp.path(), FIDELITY_FILE).lines().count(), 4);
    assert_eq!(read(tmp.path(), SPECTRUM_FILE).lines().count(), 1 + 24);
    assert!((run.summary.gate.as_ref().unwrap().theta.abs() - std::f64::consts::PI).abs() < 1e-6);
    assert!(run.summary.checks.iter().any(|c| c.name == "equilibrium converged" && c.passed));
}

#[test]
fn single_ion_fails_at_gate_stage_keeping_partial_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(tmp.path());
    c.ions = 1;
    c.angular_momentum = 0.0;
    let err = run_experiment(&c).unwrap_err();
    assert_eq!(err.stage(), Some("gate"));
    assert!(matches!(err, Error::Stage { ref source, .. } if matches!(**source, Error::NoPair(_))));
    assert_eq!(err.code(), "no-pair");
    assert!(tmp.path().join(EQUILIBRIUM_FILE).is_file());
    assert!(tmp.path().join(SPECTRUM_FILE).is_file());
    assert!(tmp.path().join(MANIFEST_FILE).is_file());
    assert!(!tmp.path().join(FIDELITY_FILE).exists());
    assert!(read(tmp.path(), FAILURE_FILE).contains("gate"));
}

#[test]
fn rerun_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment(&config(a.path())).unwrap();
    run_experiment(&config(b.path())).unwrap();
    for name in [EQUILIBRIUM_FILE, SPECTRUM_FILE, FIDELITY_FILE, PHASE_FILE, PLOT_FILE] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    assert_eq!(without_output(&read(a.path(), MANIFEST_FILE)), without_output(&read(b.path(), MANIFEST_FILE)));
}

#[test]
fn thread_count_does_not_change_results() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut c = config(a.path());
    c.carrier = CarrierChoice::Tuned;
    c.tune_samples = 8;
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    single.install(|| run_experiment(&c)).unwrap();
    c.output = b.path().to_path_buf();
    many.install(|| run_experiment(&c)).unwrap();
    for name in [EQUILIBRIUM_FILE, SPECTRUM_FILE, FIDELITY_FILE, PHASE_FILE] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let original = config(a.path());
    run_experiment(&original).unwrap();
    let mut replay = ExperimentConfig::parse(&read(a.path(), MANIFEST_FILE)).unwrap();
    assert_eq!(replay, original);
    replay.output = b.path().to_path_buf();
    run_experiment(&replay).unwrap();
    assert_eq!(read(a.path(), FIDELITY_FILE), read(b.path(), FIDELITY_FILE));
    assert_eq!(read(a.path(), PHASE_FILE), read(b.path(), PHASE_FILE));
}

#[test]
fn saved_equilibrium_needs_no_further_newton_steps() {
    let tmp = tempfile::tempdir().unwrap();
    run_experiment(&config(tmp.path())).unwrap();
    let state = load_state(&tmp.path().join(EQUILIBRIUM_FILE)).unwrap();
    let refined = newton_refine(&state).unwrap();
    assert_eq!(refined.iterations, 0);
    assert_eq!(refined.state.positions, state.positions);
}

#[test]
fn failed_marker_is_cleared_by_a_successful_run() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(tmp.path());
    c.ions = 1;
    c.angular_momentum = 0.0;
    run_experiment(&c).unwrap_err();
    assert!(tmp.path().join(FAILURE_FILE).exists());
    run_experiment(&config(tmp.path())).unwrap();
    assert!(!tmp.path().join(FAILURE_FILE).exists());
}

fn parse_error(text: &str) -> String {
    match ExperimentConfig::parse(text) {
        Err(Error::Config(m)) => m,
        other => panic!("{other:?}"),
    }
}

const MINIMAL: &str = "cyclotron_hz = 7.608e6\naxial_ratio = 0.7\nions = 8\nangular_momentum = 200\ngate_time = 1e-6\ntemperatures = 1e-3\n";

#[test]
fn config_errors_name_the_line() {
    assert!(ExperimentConfig::parse(MINIMAL).is_ok());
    assert_eq!(parse_error(&format!("{MINIMAL}colour = red\n")), "line 7: unknown key 'colour'");
    assert_eq!(parse_error(&format!("{MINIMAL}ions = 3\n")), "line 7: duplicate key 'ions'");
    assert!(parse_error(&format!("# comment\n{MINIMAL}seed = x\n")).starts_with("line 8: seed"));
    assert_eq!(parse_error(&format!("{MINIMAL}just words\n")), "line 7: expected key = value");
    assert!(parse_error(&format!("{MINIMAL}gate_time_ratio = 0.1\n")).contains("exclusive"));
    assert!(parse_error(&format!("{MINIMAL}pair = 1\n")).contains("pair expects"));
    assert!(parse_error(&format!("{MINIMAL}pair = 2, 2\n")).contains("distinct"));
    assert!(parse_error(&MINIMAL.replace("ions = 8\n", "")).contains("'ions'"));
    assert!(parse_error(&MINIMAL.replace("1e-3", "1e-2, 1e-3")).contains("increasing"));
}

#[test]
fn config_defaults_and_ranges() {
    let c = ExperimentConfig::parse(&MINIMAL.replace("temperatures = 1e-3", "temperature_range = 1e-4:1e-2:3")).unwrap();
    assert_eq!(c.species, "Be");
    assert_eq!(c.pair, PairRule::Central);
    assert_eq!(c.carrier, CarrierChoice::Tuned);
    assert_eq!(c.envelope_width, 0.1);
    assert_eq!(c.gate_time, GateDuration::Seconds(1e-6));
    assert_eq!(c.temperatures.len(), 3);
    assert!((c.temperatures[1] - 1e-3).abs() < 1e-15);
    assert_eq!(c.temperatures[2], 1e-2);
    assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
}

#[test]
fn single_point_sweep_matches_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path());
    let run = run_experiment(&c).unwrap();
    let rows = run_sweep(&c, SweepAxis::AngularMomentum, &[c.angular_momentum]).unwrap();
    assert_eq!(rows.len(), c.temperatures.len());
    let curve = read(tmp.path(), FIDELITY_FILE);
    for (row, line) in rows.iter().zip(curve.lines().skip(1)) {
        assert!(row.ok());
        assert_eq!(row.theta, run.summary.gate.as_ref().unwrap().theta);
        assert_eq!(row.rotation_frequency, run.summary.rotation_frequency);
        let infidelity: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((row.infidelity - infidelity).abs() <= 1e-12 * infidelity.max(1e-300), "{} {}", row.infidelity, infidelity);
    }
}

#[test]
fn sweep_reports_failing_points_and_keeps_the_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path());
    let rows = write_sweep(&c, SweepAxis::GateTime, &[1e-6, -1.0, 2e-6]).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows[..3].iter().all(SweepRow::ok));
    assert!(rows[3..6].iter().all(|r| !r.ok() && r.stage == Some("gate")));
    assert!(rows[6..].iter().all(SweepRow::ok));
    let csv = read(tmp.path(), SWEEP_FILE);
    assert!(csv.starts_with("gate_time,temperature_K,status,stage,"));
    assert_eq!(csv.lines().count(), 10);
    assert_eq!(csv.lines().nth(4).unwrap().split(',').nth(3).unwrap(), "gate");
}

#[test]
fn sweep_axis_names_parse() {
    for axis in SweepAxis::ALL {
        assert_eq!(axis.label().parse::<SweepAxis>().unwrap(), axis);
    }
    assert_eq!("gate-time-ratio".parse::<SweepAxis>().unwrap(), SweepAxis::GateTimeRatio);
    assert!("temperature".parse::<SweepAxis>().is_err());
}

#[test]
fn runs_can_stop_after_a_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path());
    let run = run_through(&c, Stage::Equilibrium).unwrap();
    assert!(run.summary.gate.is_none() && run.summary.gaps.is_empty() && run.summary.passed());
    assert!(!tmp.path().join(SPECTRUM_FILE).exists());
    let run = run_through(&c, Stage::Modes).unwrap();
    assert!(run.summary.gate.is_none());
    assert!(!run.summary.gaps.is_empty());
    assert!(tmp.path().join(SPECTRUM_FILE).is_file());
    assert!(!tmp.path().join(PLOT_FILE).exists());
}
