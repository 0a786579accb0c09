use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{CarrierChoice, ExperimentConfig, GateDuration, PairRule};
use crate::crystal::{find_equilibrium, save_state, CrystalState, EquilibriumSearch};
use crate::error::{Error, Result};
use crate::gate::{central_pair, fidelity_csv, phase_report, tune_carrier, Gate, GateResult, GateSpec};
use crate::modes::{build_hessian, classify_bands, mode_spectrum, spectrum_csv, BandStructure, FrequencyGap, ModeSpectrum};
use crate::scales::{derive_scales, hz_to_rad, species, IonSpecies, ScaleSet, TrapSetup};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EQUILIBRIUM_FILE: &str = "equilibrium.txt";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const FIDELITY_FILE: &str = "fidelity.csv";
pub const PHASE_FILE: &str = "phase.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const TIMING_FILE: &str = "timing.txt";
pub const PLOT_FILE: &str = "plot.gp";
pub const FAILURE_FILE: &str = "FAILED";

/// Trap, species and unit system of a configuration.
#[derive(Debug, Clone)]
pub struct Environment {
    pub setup: TrapSetup,
    pub species: IonSpecies,
    pub scales: ScaleSet,
}

impl Environment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let setup = TrapSetup::new(hz_to_rad(config.cyclotron_hz), config.axial_ratio, config.ions)?;
        let species = species(&config.species)?;
        let scales = derive_scales(&setup, &species)?;
        Ok(Environment { setup, species, scales })
    }
}

pub fn equilibrium_search(config: &ExperimentConfig) -> EquilibriumSearch {
    let mut search = EquilibriumSearch::new(config.ions, config.seed);
    search.restarts = config.restarts;
    if let Some(c) = config.anneal_cycles {
        search.schedule.cycles = c;
    }
    if let Some(s) = config.anneal_steps {
        search.schedule.steps_per_cycle = s;
    }
    search
}

pub fn solve_equilibrium(config: &ExperimentConfig, env: &Environment, angular_momentum: f64) -> Result<CrystalState> {
    find_equilibrium(&env.setup, angular_momentum, &equilibrium_search(config))
}

pub fn solve_spectrum(state: &CrystalState) -> Result<(ModeSpectrum, BandStructure)> {
    let spectrum = mode_spectrum(&build_hessian(state)?)?;
    let bands = classify_bands(&spectrum);
    Ok((spectrum, bands))
}

pub fn widest_gap(bands: &BandStructure) -> Result<FrequencyGap> {
    bands
        .gaps
        .iter()
        .filter(|g| !g.is_empty())
        .max_by(|a, b| a.width().total_cmp(&b.width()))
        .copied()
        .ok_or_else(|| Error::InvalidParameter("spectrum has no band gap for the carrier".into()))
}

pub fn gate_duration(config: &ExperimentConfig, env: &Environment, state: &CrystalState) -> Result<f64> {
    match config.gate_time {
        GateDuration::Seconds(s) => Ok(s),
        GateDuration::RotationFraction(f) => {
            if state.rotation_frequency == 0.0 {
                return Err(Error::InvalidParameter("gate_time_ratio needs a rotating crystal".into()));
            }
            Ok(f * TAU / (state.rotation_frequency * env.setup.cyclotron_frequency))
        }
    }
}

/// Gate with the configured pair, duration and envelope, carrier resolved to rad/s.
pub fn build_gate(
    config: &ExperimentConfig,
    env: &Environment,
    state: &CrystalState,
    spectrum: &ModeSpectrum,
    bands: &BandStructure,
) -> Result<Gate> {
    let pair = match config.pair {
        PairRule::Central => central_pair(state)?,
        PairRule::Explicit(a, b) => (a, b),
    };
    let gate_time = gate_duration(config, env, state)?;
    let mut spec = GateSpec::new(pair, 1.0, gate_time);
    spec.envelope_width = Some(config.envelope_width * gate_time);
    let wc = env.setup.cyclotron_frequency;
    spec.carrier_frequency = match config.carrier {
        CarrierChoice::Hz(hz) => hz_to_rad(hz),
        CarrierChoice::AutoGap => widest_gap(bands)?.geometric_center() * wc,
        CarrierChoice::Tuned => {
            let gap = widest_gap(bands)?;
            tune_carrier(&spec, &gap, &config.temperatures, config.tune_samples, state, spectrum, &env.setup, &env.scales)?.0
        }
    };
    Gate::new(&spec, state, spectrum, &env.setup, &env.scales)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Last stage a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Stage {
    Equilibrium,
    Modes,
    Gate,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GateSummary {
    pub pair: (usize, usize),
    /// rad/s
    pub carrier: f64,
    pub gate_time: f64,
    pub amplitude: f64,
    pub theta: f64,
    pub worst_infidelity: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RunSummary {
    pub rotation_frequency: f64,
    pub anisotropy: f64,
    /// Band gaps in ω_c units.
    pub gaps: Vec<(f64, f64)>,
    pub gate: Option<GateSummary>,
    pub checks: Vec<Check>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: RunSummary,
}

/// Serializes every artifact write and remembers what was written.
pub struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let stale = dir.join(FAILURE_FILE);
        if stale.exists() {
            fs::remove_file(stale)?;
        }
        Ok(ArtifactWriter { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    pub fn fail(&mut self, error: &Error) -> Result<()> {
        self.write(FAILURE_FILE, &format!("{error}\n"))
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }
}

pub fn manifest(config: &ExperimentConfig, resolved: &[(&str, String)]) -> String {
    let mut out = format!("# wigner-core {VERSION}\n");
    for (key, value) in resolved {
        let _ = writeln!(out, "# resolved {key} = {value}");
    }
    out.push_str(&config.to_text());
    out
}

fn plot_script() -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set multiplot layout 2,1\n\
         set logscale xy\n\
         set xlabel 'T (K)'\n\
         set ylabel '1 - F'\n\
         plot '{FIDELITY_FILE}' using 1:3 with linespoints\n\
         unset logscale\n\
         set logscale y\n\
         set xlabel 'mode'\n\
         set ylabel 'omega / omega_c'\n\
         plot '{SPECTRUM_FILE}' using 1:2 with points\n\
         unset multiplot\n"
    )
}

struct Timer {
    lines: String,
    start: Instant,
}

impl Timer {
    fn new() -> Self {
        Timer { lines: String::new(), start: Instant::now() }
    }

    fn lap(&mut self, stage: &str) {
        let _ = writeln!(self.lines, "{stage} {:.3}", self.start.elapsed().as_secs_f64());
        self.start = Instant::now();
    }
}

/// equilibrium → spectrum → gate → fidelity sweep, writing artifacts into `config.output`.
///
/// On failure everything produced so far stays on disk next to a `FAILED` marker, and the
/// error carries the stage name.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunArtifacts> {
    run_through(config, Stage::Gate)
}

/// `run_experiment` stopping after `last`.
pub fn run_through(config: &ExperimentConfig, last: Stage) -> Result<RunArtifacts> {
    config.validate()?;
    let mut writer = ArtifactWriter::create(&config.output)?;
    let mut resolved = Vec::new();
    let mut timer = Timer::new();
    let outcome = run_stages(config, last, &mut writer, &mut resolved, &mut timer);
    writer.write(MANIFEST_FILE, &manifest(config, &resolved))?;
    writer.write(TIMING_FILE, &timer.lines)?;
    match outcome {
        Ok(summary) => {
            if summary.gate.is_some() {
                writer.write(PLOT_FILE, &plot_script())?;
            }
            Ok(RunArtifacts { dir: config.output.clone(), files: writer.files().to_vec(), summary })
        }
        Err(e) => {
            writer.fail(&e)?;
            Err(e)
        }
    }
}

fn run_stages(
    config: &ExperimentConfig,
    last: Stage,
    writer: &mut ArtifactWriter,
    resolved: &mut Vec<(&'static str, String)>,
    timer: &mut Timer,
) -> Result<RunSummary> {
    let env = Environment::new(config).map_err(|e| e.at_stage("setup"))?;
    let state = solve_equilibrium(config, &env, config.angular_momentum).map_err(|e| e.at_stage("equilibrium"))?;
    save_state(&state, &writer.path(EQUILIBRIUM_FILE)).map_err(|e| e.at_stage("equilibrium"))?;
    writer.files.push(writer.path(EQUILIBRIUM_FILE));
    timer.lap("equilibrium");
    let mut summary = RunSummary {
        rotation_frequency: state.rotation_frequency,
        anisotropy: state.anisotropy,
        gaps: Vec::new(),
        gate: None,
        checks: vec![Check {
            name: "equilibrium converged",
            passed: state.converged,
            detail: format!("|grad| = {:e}", state.gradient_norm),
        }],
    };
    if last == Stage::Equilibrium {
        return Ok(summary);
    }

    let (spectrum, bands) = solve_spectrum(&state).map_err(|e| e.at_stage("modes"))?;
    writer.write(SPECTRUM_FILE, &spectrum_csv(&spectrum, env.setup.cyclotron_frequency))?;
    timer.lap("modes");
    summary.gaps = bands.gaps.iter().filter(|g| !g.is_empty()).map(|g| (g.lower, g.upper)).collect();
    if last == Stage::Modes {
        return Ok(summary);
    }

    let gate = build_gate(config, &env, &state, &spectrum, &bands).map_err(|e| e.at_stage("gate"))?;
    resolved.push(("pair", format!("{}, {}", gate.spec.pair.0, gate.spec.pair.1)));
    resolved.push(("carrier_hz", format!("{:e}", gate.spec.carrier_frequency / TAU)));
    resolved.push(("gate_time", format!("{:e}", gate.spec.gate_time)));
    let result = gate.run(&config.temperatures).map_err(|e| e.at_stage("gate"))?;
    timer.lap("gate");

    writer.write(FIDELITY_FILE, &fidelity_csv(&result.curve))?;
    writer.write(PHASE_FILE, &phase_report(&gate, &result, state.rotation_frequency))?;
    summarize(&mut summary, config, &gate, &result);
    Ok(summary)
}

fn summarize(summary: &mut RunSummary, config: &ExperimentConfig, gate: &Gate, result: &GateResult) {
    let theta = result.phase.theta;
    let worst = result.curve.iter().map(|p| p.infidelity).fold(0.0, f64::max);
    let monotone = result.curve.windows(2).all(|w| w[1].fidelity <= w[0].fidelity);
    summary.checks.push(Check {
        name: "phase calibrated",
        passed: (theta.abs() - PI).abs() < 1e-6,
        detail: format!("theta = {theta:.12}"),
    });
    summary.checks.push(Check {
        name: "fidelity monotone in temperature",
        passed: monotone,
        detail: format!("worst 1 - F = {worst:e}"),
    });
    if let Some(bound) = config.max_infidelity {
        summary.checks.push(Check {
            name: "infidelity within bound",
            passed: worst <= bound,
            detail: format!("{worst:e} <= {bound:e}"),
        });
    }
    summary.gate = Some(GateSummary {
        pair: gate.spec.pair,
        carrier: gate.spec.carrier_frequency,
        gate_time: gate.spec.gate_time,
        amplitude: result.amplitude,
        theta,
        worst_infidelity: worst,
    });
}
