use std::f64::consts::PI;
use std::fmt::Write as _;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use super::ratio::{Beam, Scheme};
use super::table::{check_detuning_chain, Line, Polarization, Qubit};
use super::zeeman::{require_zeeman, zeeman_scale};
use crate::error::{Error, Result};
use crate::scales::IonSpecies;

/// Minimum samples per modulation period when a sequence is handed to the gate as a force profile.
pub const MIN_SAMPLES_PER_PERIOD: usize = 40;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PulseDesign {
    pub scheme: Scheme,
    /// ν in I(t) ∝ sin²(νt), rad/s
    pub carrier: f64,
    pub periods: usize,
    /// (δ₁, δ₂), rad/s
    pub detunings: (f64, f64),
    /// B, T
    pub field: f64,
    /// Dead time at each polarization switch, s.
    pub switch_time: f64,
    /// Factor read into each ≪ of |ℬ| ≪ |δ| ≪ ΔE/ħ.
    pub margin: f64,
}

impl PulseDesign {
    pub fn new(scheme: Scheme, carrier: f64, periods: usize, detunings: (f64, f64), field: f64) -> Self {
        PulseDesign { scheme, carrier, periods, detunings, field, switch_time: 0.0, margin: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Segment {
    /// s
    pub start: f64,
    /// s
    pub duration: f64,
    pub beam: Beam,
    /// 𝒳 at the lobe maximum, relative
    pub drive: f64,
    /// ℰ₀² at the lobe maximum, normalized to the strongest beam
    pub intensity: f64,
    /// '+' or '-' after the circular polarization of beam 0
    pub branch: char,
    /// Force per unit 𝒳 on [|0⟩, |1⟩].
    pub coefficients: [f64; 2],
}

impl Segment {
    pub fn force(&self, state: Qubit, t: f64, carrier: f64) -> f64 {
        if t <= self.start || t >= self.start + self.duration {
            return 0.0;
        }
        let s = (carrier * (t - self.start)).sin();
        self.drive * self.coefficients[state as usize] * s * s
    }

    fn amplitude(&self, state: Qubit) -> f64 {
        self.drive * self.coefficients[state as usize]
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PulseSequence {
    /// rad/s
    pub carrier: f64,
    /// s
    pub period: f64,
    pub segments: Vec<Segment>,
}

impl PulseSequence {
    pub fn empty(carrier: f64) -> Self {
        PulseSequence { carrier, period: 2.0 * PI / carrier, segments: Vec::new() }
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.start + s.duration).fold(0.0, f64::max)
    }

    /// Total force on `state` at time `t` (s), per unit of the reference 𝒳.
    pub fn force(&self, state: Qubit, t: f64) -> f64 {
        self.segments.iter().map(|s| s.force(state, t, self.carrier)).sum()
    }

    /// Lobes as (start, duration, segment indices).
    fn lobes(&self) -> Vec<(f64, f64, Vec<usize>)> {
        let mut out: Vec<(f64, f64, Vec<usize>)> = Vec::new();
        for (i, s) in self.segments.iter().enumerate() {
            match out.iter_mut().find(|l| l.0 == s.start) {
                Some(l) => l.2.push(i),
                None => out.push((s.start, s.duration, vec![i])),
            }
        }
        out
    }

    /// Largest lobe-maximum force over both states.
    pub fn peak(&self) -> f64 {
        self.lobes()
            .iter()
            .flat_map(|(_, _, idx)| Qubit::BOTH.map(|q| idx.iter().map(|&i| self.segments[i].amplitude(q)).sum::<f64>().abs()))
            .fold(0.0, f64::max)
    }

    /// Uniform samples (t, f) of the force on `state`.
    pub fn sample_force(&self, state: Qubit, samples_per_period: usize) -> Result<Vec<(f64, f64)>> {
        if samples_per_period < MIN_SAMPLES_PER_PERIOD {
            return Err(Error::UnderResolved { required: MIN_SAMPLES_PER_PERIOD, given: samples_per_period });
        }
        let end = self.duration();
        let count = ((end / self.period) * samples_per_period as f64).ceil() as usize;
        Ok((0..=count)
            .map(|i| {
                let t = end * i as f64 / count.max(1) as f64;
                (t, self.force(state, t))
            })
            .collect())
    }

    /// CSV: t_start, duration, line, polarization, detuning_Hz, intensity_rel, ratio_branch.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_start,duration,line,polarization,detuning_Hz,intensity_rel,ratio_branch\n");
        for s in &self.segments {
            let _ = writeln!(
                out,
                "{:.12e},{:.12e},{},{},{:.12e},{:.12e},{}",
                s.start,
                s.duration,
                s.beam.line.label(),
                s.beam.polarization.label(),
                s.beam.detuning / (2.0 * PI),
                s.intensity,
                s.branch
            );
        }
        out
    }
}

fn matrix_element(species: &IonSpecies, line: Line) -> f64 {
    match line {
        Line::D1 => species.m_d1,
        Line::D2 => species.m_d2,
    }
}

/// Alternates the scheme's two branches on successive sin² lobes, with each branch's
/// intensity ratio solved for opposite forces and the second branch rescaled so each
/// state's force averages to zero over a period.
pub fn build_pulse_sequence(design: &PulseDesign, species: &IonSpecies) -> Result<PulseSequence> {
    let positive = |v: f64| v > 0.0 && v.is_finite();
    if !positive(design.carrier) || design.periods == 0 || !(design.switch_time >= 0.0) || !positive(design.margin) {
        return Err(Error::InvalidParameter("carrier, period count and margin must be positive, switch time non-negative".into()));
    }
    require_zeeman(species, design.field)?;
    let zeeman = zeeman_scale(design.field);
    let (d1, d2) = design.detunings;
    for d in [d1, d2] {
        check_detuning_chain(d, zeeman, species.fine_structure_splitting, design.margin)?;
    }
    let branches = design.scheme.branches(d1, d2);
    let mut plan = Vec::with_capacity(2);
    for branch in &branches {
        let solution = branch.ratio(zeeman)?;
        if !solution.physical {
            return Err(Error::NegativeRatio { scheme: design.scheme.to_string(), ratio: solution.ratio });
        }
        plan.push((branch, solution.ratio, branch.forces(solution.ratio, zeeman)?));
    }
    // second branch drive relative to the first for zero mean
    let scale = -plan[0].2[0] / plan[1].2[0];
    if !positive(scale) {
        return Err(Error::NegativeRatio { scheme: format!("{} lobe balance", design.scheme), ratio: scale });
    }

    let lobe = PI / design.carrier;
    let mut segments = Vec::with_capacity(4 * design.periods);
    for k in 0..2 * design.periods {
        let (branch, ratio, _) = plan[k % 2];
        let x2 = if k % 2 == 0 { 1.0 } else { scale };
        let start = k as f64 * (lobe + design.switch_time);
        let label = if branch.beams[0].polarization == Polarization::SigmaPlus { '+' } else { '-' };
        for (beam, drive) in branch.beams.iter().zip([ratio * x2, x2]) {
            segments.push(Segment {
                start,
                duration: lobe,
                beam: *beam,
                drive,
                intensity: drive / matrix_element(species, beam.line),
                branch: label,
                coefficients: beam.coefficients(zeeman)?,
            });
        }
    }
    let strongest = segments.iter().map(|s| s.intensity).fold(0.0, f64::max);
    for s in &mut segments {
        s.intensity /= strongest;
    }
    Ok(PulseSequence { carrier: design.carrier, period: 2.0 * (lobe + design.switch_time), segments })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConditionResiduals {
    /// max_t |f^{|0⟩} + f^{|1⟩}| / peak
    pub opposition: f64,
    /// max over periods of |∫ f dt| / (peak · period), per state
    pub mean: [f64; 2],
}

impl ConditionResiduals {
    pub const THRESHOLD: f64 = 1e-8;

    pub fn passes(&self) -> bool {
        self.opposition < Self::THRESHOLD && self.mean.iter().all(|&m| m < Self::THRESHOLD)
    }
}

/// Opposition from 64 samples per lobe; zero mean from Gauss–Legendre quadrature per lobe.
pub fn verify_conditions(seq: &PulseSequence) -> ConditionResiduals {
    let peak = seq.peak();
    if seq.segments.is_empty() || peak == 0.0 {
        return ConditionResiduals { opposition: 0.0, mean: [0.0; 2] };
    }
    let lobes = seq.lobes();
    let mut opposition = 0.0f64;
    for (start, duration, _) in &lobes {
        for i in 0..=64 {
            let t = start + duration * i as f64 / 64.0;
            opposition = opposition.max((seq.force(Qubit::Zero, t) + seq.force(Qubit::One, t)).abs());
        }
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(24).unwrap());
    let periods = (seq.duration() / seq.period).round().max(1.0) as usize;
    let mut integrals = vec![[0.0f64; 2]; periods];
    for (start, duration, idx) in &lobes {
        let p = ((start / seq.period + 1e-9).floor() as usize).min(periods - 1);
        for (slot, q) in Qubit::BOTH.into_iter().enumerate() {
            let f = |t: f64| idx.iter().map(|&i| seq.segments[i].force(q, t, seq.carrier)).sum::<f64>();
            integrals[p][slot] += rule.integrate(*start, start + duration, f);
        }
    }
    let mut mean = [0.0f64; 2];
    for period in &integrals {
        for slot in 0..2 {
            mean[slot] = mean[slot].max(period[slot].abs() / (peak * seq.period));
        }
    }
    ConditionResiduals { opposition: opposition / peak, mean }
}
