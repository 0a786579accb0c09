use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::{CarrierChoice, ExperimentConfig, GateDuration};
use super::run::{build_gate, solve_equilibrium, solve_spectrum, ArtifactWriter, Environment};
use crate::crystal::CrystalState;
use crate::error::{Error, Result};

pub const SWEEP_FILE: &str = "sweep.csv";

/// Parameter varied by a sweep. Temperature is always swept through the config grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SweepAxis {
    AngularMomentum,
    CarrierHz,
    GateTime,
    GateTimeRatio,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [SweepAxis::AngularMomentum, SweepAxis::CarrierHz, SweepAxis::GateTime, SweepAxis::GateTimeRatio];

    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::AngularMomentum => "angular_momentum",
            SweepAxis::CarrierHz => "carrier_hz",
            SweepAxis::GateTime => "gate_time",
            SweepAxis::GateTimeRatio => "gate_time_ratio",
        }
    }

    /// Whether every point shares one equilibrium.
    fn shares_crystal(self) -> bool {
        self != SweepAxis::AngularMomentum
    }

    fn apply(self, config: &mut ExperimentConfig, value: f64) {
        match self {
            SweepAxis::AngularMomentum => config.angular_momentum = value,
            SweepAxis::CarrierHz => config.carrier = CarrierChoice::Hz(value),
            SweepAxis::GateTime => config.gate_time = GateDuration::Seconds(value),
            SweepAxis::GateTimeRatio => config.gate_time = GateDuration::RotationFraction(value),
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.label() == key)
            .ok_or_else(|| Error::Config(format!("unknown sweep axis '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub temperature: f64,
    /// None when the point succeeded.
    pub error: Option<String>,
    pub stage: Option<&'static str>,
    pub rotation_frequency: f64,
    pub carrier_hz: f64,
    pub theta: f64,
    pub infidelity: f64,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

fn failed_rows(value: f64, temperatures: &[f64], error: &Error) -> Vec<SweepRow> {
    temperatures
        .iter()
        .map(|&temperature| SweepRow {
            value,
            temperature,
            error: Some(error.code().to_string()),
            stage: error.stage(),
            rotation_frequency: f64::NAN,
            carrier_hz: f64::NAN,
            theta: f64::NAN,
            infidelity: f64::NAN,
        })
        .collect()
}

fn evaluate(config: &ExperimentConfig, env: &Environment, value: f64, shared: Option<&CrystalState>) -> Result<Vec<SweepRow>> {
    let solved;
    let state = match shared {
        Some(s) => s,
        None => {
            solved = solve_equilibrium(config, env, config.angular_momentum).map_err(|e| e.at_stage("equilibrium"))?;
            &solved
        }
    };
    let (spectrum, bands) = solve_spectrum(state).map_err(|e| e.at_stage("modes"))?;
    let gate = build_gate(config, env, state, &spectrum, &bands).map_err(|e| e.at_stage("gate"))?;
    let result = gate.run(&config.temperatures).map_err(|e| e.at_stage("gate"))?;
    Ok(result
        .curve
        .iter()
        .map(|p| SweepRow {
            value,
            temperature: p.temperature,
            error: None,
            stage: None,
            rotation_frequency: state.rotation_frequency,
            carrier_hz: gate.spec.carrier_frequency / TAU,
            theta: result.phase.theta,
            infidelity: p.infidelity,
        })
        .collect())
}

/// Runs `values` along `axis` in parallel. A failing point becomes rows carrying its error
/// code; only a failure of the shared equilibrium aborts the sweep.
pub fn run_sweep(config: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let env = Environment::new(config).map_err(|e| e.at_stage("setup"))?;
    let shared = if axis.shares_crystal() {
        Some(solve_equilibrium(config, &env, config.angular_momentum).map_err(|e| e.at_stage("equilibrium"))?)
    } else {
        None
    };
    let rows: Vec<Vec<SweepRow>> = values
        .par_iter()
        .map(|&value| {
            let mut point = config.clone();
            axis.apply(&mut point, value);
            evaluate(&point, &env, value, shared.as_ref()).unwrap_or_else(|e| failed_rows(value, &config.temperatures, &e))
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

pub fn sweep_csv(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let mut out = format!("{},temperature_K,status,stage,rotation_frequency,carrier_hz,theta,infidelity\n", axis.label());
    for r in rows {
        let _ = writeln!(
            out,
            "{:e},{:e},{},{},{:e},{:e},{:e},{:e}",
            r.value,
            r.temperature,
            r.error.as_deref().unwrap_or("ok"),
            r.stage.unwrap_or(""),
            r.rotation_frequency,
            r.carrier_hz,
            r.theta,
            r.infidelity
        );
    }
    out
}

/// Sweep plus `sweep.csv` in `config.output`.
pub fn write_sweep(config: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    let mut writer = ArtifactWriter::create(&config.output)?;
    match run_sweep(config, axis, values) {
        Ok(rows) => {
            writer.write(SWEEP_FILE, &sweep_csv(axis, &rows))?;
            Ok(rows)
        }
        Err(e) => {
            writer.fail(&e)?;
            Err(e)
        }
    }
}
