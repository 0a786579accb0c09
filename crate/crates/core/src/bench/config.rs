use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};

/// Gate pair selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PairRule {
    /// Ion closest to the axis and its nearest neighbor.
    Central,
    Explicit(usize, usize),
}

/// How the carrier ν is chosen.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum CarrierChoice {
    Hz(f64),
    /// Geometric mean of the widest gap's edges.
    AutoGap,
    /// Scan of the widest gap for the smallest worst-case infidelity.
    Tuned,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum GateDuration {
    Seconds(f64),
    /// τ_g/τ_r with τ_r = 2π/ω_r.
    RotationFraction(f64),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExperimentConfig {
    pub species: String,
    pub cyclotron_hz: f64,
    pub axial_ratio: f64,
    pub ions: usize,
    /// P_θ in ℓ_s² m ω_c
    pub angular_momentum: f64,
    pub pair: PairRule,
    pub carrier: CarrierChoice,
    pub gate_time: GateDuration,
    /// σ/τ_g
    pub envelope_width: f64,
    /// K, strictly increasing
    pub temperatures: Vec<f64>,
    /// Optional bound on the worst 1 − F over the grid.
    pub max_infidelity: Option<f64>,
    pub restarts: usize,
    pub anneal_cycles: Option<usize>,
    pub anneal_steps: Option<usize>,
    pub tune_samples: usize,
    pub seed: u64,
    pub output: PathBuf,
}

const KEYS: &[&str] = &[
    "species",
    "cyclotron_hz",
    "axial_ratio",
    "ions",
    "angular_momentum",
    "pair",
    "carrier",
    "gate_time",
    "gate_time_ratio",
    "envelope_width",
    "temperatures",
    "temperature_range",
    "max_infidelity",
    "restarts",
    "anneal_cycles",
    "anneal_steps",
    "tune_samples",
    "seed",
    "output",
];

fn config_error(line: usize, message: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {message}"))
}

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| config_error(line, format!("{key}: {e}")))
}

fn list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| number::<f64>(line, key, v.trim())).collect()
}

/// `min:max:points`, logarithmically spaced.
fn log_range(line: usize, value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(config_error(line, "temperature_range expects min:max:points"));
    }
    let lo: f64 = number(line, "temperature_range", parts[0])?;
    let hi: f64 = number(line, "temperature_range", parts[1])?;
    let n: usize = number(line, "temperature_range", parts[2])?;
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(config_error(line, "temperature_range needs 0 < min < max and at least 2 points"));
    }
    let step = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n).map(|i| if i + 1 == n { hi } else { lo * (step * i as f64).exp() }).collect())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut species = "Be".to_string();
        let mut cyclotron_hz = None;
        let mut axial_ratio = None;
        let mut ions = None;
        let mut angular_momentum = None;
        let mut pair = PairRule::Central;
        let mut carrier = CarrierChoice::Tuned;
        let mut gate_time = None;
        let mut envelope_width = 0.1;
        let mut temperatures = None;
        let mut max_infidelity = None;
        let mut restarts = 4;
        let mut anneal_cycles = None;
        let mut anneal_steps = None;
        let mut tune_samples = 24;
        let mut seed = 1;
        let mut output = PathBuf::from("out");
        let mut seen = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| config_error(line, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(config_error(line, format!("unknown key '{key}'")));
            }
            if seen.contains(&key) {
                return Err(config_error(line, format!("duplicate key '{key}'")));
            }
            seen.push(key);
            match key {
                "species" => species = value.to_string(),
                "cyclotron_hz" => cyclotron_hz = Some(number(line, key, value)?),
                "axial_ratio" => axial_ratio = Some(number(line, key, value)?),
                "ions" => ions = Some(number(line, key, value)?),
                "angular_momentum" => angular_momentum = Some(number(line, key, value)?),
                "pair" => {
                    pair = if value == "central" {
                        PairRule::Central
                    } else {
                        let v: Vec<&str> = value.split(',').map(str::trim).collect();
                        if v.len() != 2 {
                            return Err(config_error(line, "pair expects 'central' or 'i, j'"));
                        }
                        PairRule::Explicit(number(line, key, v[0])?, number(line, key, v[1])?)
                    }
                }
                "carrier" => {
                    carrier = match value {
                        "auto-gap" => CarrierChoice::AutoGap,
                        "tuned" => CarrierChoice::Tuned,
                        hz => CarrierChoice::Hz(number(line, key, hz)?),
                    }
                }
                "gate_time" | "gate_time_ratio" => {
                    if gate_time.is_some() {
                        return Err(config_error(line, "gate_time and gate_time_ratio are exclusive"));
                    }
                    let v = number(line, key, value)?;
                    gate_time = Some(if key == "gate_time" { GateDuration::Seconds(v) } else { GateDuration::RotationFraction(v) });
                }
                "envelope_width" => envelope_width = number(line, key, value)?,
                "temperatures" | "temperature_range" => {
                    if temperatures.is_some() {
                        return Err(config_error(line, "temperatures and temperature_range are exclusive"));
                    }
                    temperatures = Some(if key == "temperatures" { list(line, key, value)? } else { log_range(line, value)? });
                }
                "max_infidelity" => max_infidelity = Some(number(line, key, value)?),
                "restarts" => restarts = number(line, key, value)?,
                "anneal_cycles" => anneal_cycles = Some(number(line, key, value)?),
                "anneal_steps" => anneal_steps = Some(number(line, key, value)?),
                "tune_samples" => tune_samples = number(line, key, value)?,
                "seed" => seed = number(line, key, value)?,
                "output" => output = PathBuf::from(value),
                _ => unreachable!(),
            }
        }
        let missing = |name: &str| Error::Config(format!("missing required key '{name}'"));
        let config = ExperimentConfig {
            species,
            cyclotron_hz: cyclotron_hz.ok_or_else(|| missing("cyclotron_hz"))?,
            axial_ratio: axial_ratio.ok_or_else(|| missing("axial_ratio"))?,
            ions: ions.ok_or_else(|| missing("ions"))?,
            angular_momentum: angular_momentum.ok_or_else(|| missing("angular_momentum"))?,
            pair,
            carrier,
            gate_time: gate_time.ok_or_else(|| missing("gate_time or gate_time_ratio"))?,
            envelope_width,
            temperatures: temperatures.ok_or_else(|| missing("temperatures or temperature_range"))?,
            max_infidelity,
            restarts,
            anneal_cycles,
            anneal_steps,
            tune_samples,
            seed,
            output,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperatures.is_empty() {
            return Err(Error::Config("temperature grid is empty".into()));
        }
        if self.temperatures.iter().any(|&t| !(t > 0.0)) || self.temperatures.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("temperatures must be positive and strictly increasing".into()));
        }
        if self.ions == 0 || self.restarts == 0 {
            return Err(Error::Config("ions and restarts must be positive".into()));
        }
        if !(self.envelope_width > 0.0) {
            return Err(Error::Config("envelope_width must be positive".into()));
        }
        if let PairRule::Explicit(a, b) = self.pair {
            if a == b || a >= self.ions || b >= self.ions {
                return Err(Error::Config(format!("pair ({a}, {b}) must be two distinct ions below {}", self.ions)));
            }
        }
        Ok(())
    }

    /// Text form accepted by `parse`; floats round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "species = {}", self.species);
        let _ = writeln!(out, "cyclotron_hz = {:e}", self.cyclotron_hz);
        let _ = writeln!(out, "axial_ratio = {:e}", self.axial_ratio);
        let _ = writeln!(out, "ions = {}", self.ions);
        let _ = writeln!(out, "angular_momentum = {:e}", self.angular_momentum);
        match self.pair {
            PairRule::Central => {
                let _ = writeln!(out, "pair = central");
            }
            PairRule::Explicit(a, b) => {
                let _ = writeln!(out, "pair = {a}, {b}");
            }
        }
        match self.carrier {
            CarrierChoice::Hz(v) => {
                let _ = writeln!(out, "carrier = {v:e}");
            }
            CarrierChoice::AutoGap => {
                let _ = writeln!(out, "carrier = auto-gap");
            }
            CarrierChoice::Tuned => {
                let _ = writeln!(out, "carrier = tuned");
            }
        }
        match self.gate_time {
            GateDuration::Seconds(v) => {
                let _ = writeln!(out, "gate_time = {v:e}");
            }
            GateDuration::RotationFraction(v) => {
                let _ = writeln!(out, "gate_time_ratio = {v:e}");
            }
        }
        let _ = writeln!(out, "envelope_width = {:e}", self.envelope_width);
        let temps: Vec<String> = self.temperatures.iter().map(|t| format!("{t:e}")).collect();
        let _ = writeln!(out, "temperatures = {}", temps.join(", "));
        if let Some(m) = self.max_infidelity {
            let _ = writeln!(out, "max_infidelity = {m:e}");
        }
        let _ = writeln!(out, "restarts = {}", self.restarts);
        if let Some(c) = self.anneal_cycles {
            let _ = writeln!(out, "anneal_cycles = {c}");
        }
        if let Some(s) = self.anneal_steps {
            let _ = writeln!(out, "anneal_steps = {s}");
        }
        let _ = writeln!(out, "tune_samples = {}", self.tune_samples);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "output = {}", self.output.display());
        out
    }
}
