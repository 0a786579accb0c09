//! Modulated-carrier two-qubit phase gate on a crystal's normal modes.
//!
//! Everything is dimensionless: times in 1/ω_c, lengths in ℓ_s, forces in E_s/ℓ_s. The force
//! on each target ion has magnitude 𝒜_P ħ̃ ω_xy g(t)/|Δr| along the pair separation, which
//! drives mode k with
//!
//! α_k(t) = 𝒜_P √(ħ̃/2) (ω_xy/|Δr|) g(t) Σ_q s_q Σ_n e_n A_{k,(j_q,n)}
//!
//! in units of ω_c, where s_q = ±1 is the state of qubit q.

mod fidelity;
mod form_factor;
mod laser;
mod quadrature;

pub use fidelity::{fidelity, fidelity_csv, fidelity_curve, FidelityPoint};
pub use form_factor::{form_factor, leading_term, FormFactorRegime};
pub use laser::{laser_resources, BeamGeometry, LaserResources};
pub use quadrature::{integrate_mode, Envelope, PanelGrid, Quadrature, SAMPLES_PER_PERIOD};

use std::fmt::Write as _;

use nalgebra::Complex;
use rayon::prelude::*;

use crate::crystal::{distance, CrystalState, Vec3};
use crate::error::{Error, Result};
use crate::modes::{FrequencyGap, ModeSpectrum};
use crate::scales::{trap_frequencies, ScaleSet, TrapSetup};

/// Gate request in physical units.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GateSpec {
    pub pair: (usize, usize),
    /// ν, rad/s
    pub carrier_frequency: f64,
    /// τ_g, s
    pub gate_time: f64,
    /// t_c, s (default τ_g/2)
    pub envelope_center: Option<f64>,
    /// σ, s (default τ_g/10)
    pub envelope_width: Option<f64>,
    pub amplitude: f64,
    pub quadrature: Quadrature,
}

impl GateSpec {
    pub fn new(pair: (usize, usize), carrier_frequency: f64, gate_time: f64) -> Self {
        GateSpec {
            pair,
            carrier_frequency,
            gate_time,
            envelope_center: None,
            envelope_width: None,
            amplitude: 1.0,
            quadrature: Quadrature::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.pair;
        if a == b {
            return Err(Error::InvalidParameter(format!("target pair ({a}, {b}) must be two ions")));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.carrier_frequency) || !positive(self.gate_time) {
            return Err(Error::InvalidParameter("carrier frequency and gate time must be positive".into()));
        }
        if self.envelope_width.is_some_and(|w| !positive(w)) {
            return Err(Error::InvalidParameter("envelope width must be positive".into()));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter("amplitude must be finite".into()));
        }
        Ok(())
    }

    /// Envelope in units of 1/ω_c.
    pub fn envelope(&self, cyclotron_frequency: f64) -> Envelope {
        let tau = self.gate_time * cyclotron_frequency;
        Envelope {
            duration: tau,
            center: self.envelope_center.map_or(0.5 * tau, |c| c * cyclotron_frequency),
            width: self.envelope_width.map_or(0.1 * tau, |w| w * cyclotron_frequency),
            carrier: self.carrier_frequency / cyclotron_frequency,
        }
    }
}

/// Ion closest to the trap axis and its nearest neighbor.
pub fn central_pair(state: &CrystalState) -> Result<(usize, usize)> {
    let x = &state.positions;
    if x.len() < 2 {
        return Err(Error::NoPair("need at least two ions".into()));
    }
    let radius = |r: &Vec3| r[0].hypot(r[1]);
    let first = (0..x.len()).min_by(|&a, &b| radius(&x[a]).total_cmp(&radius(&x[b]))).unwrap();
    let second = (0..x.len())
        .filter(|&j| j != first)
        .min_by(|&a, &b| distance(&x[first], &x[a]).total_cmp(&distance(&x[first], &x[b])))
        .unwrap();
    Ok((first, second))
}

/// A gate specification bound to a crystal and its spectrum.
#[derive(Debug, Clone)]
pub struct Gate {
    pub spec: GateSpec,
    pub envelope: Envelope,
    /// ω_c, rad/s
    pub cyclotron_frequency: f64,
    /// ħ̃
    pub hbar: f64,
    /// ω_xy/ω_c
    pub trap_in_plane: f64,
    /// |r_{j1} − r_{j2}| in ℓ_s
    pub separation: f64,
    /// Unit vector from j2 to j1 (force direction for s = +1).
    pub direction: Vec3,
    pub ion_count: usize,
    pub frequencies: Vec<f64>,
    /// Per target ion, Σ_n e_n A_{k,(j,n)} times √(ħ̃/2) ω_xy/|Δr|: α_k at 𝒜_P = 1 is g(t)·(s1 c1 + s2 c2).
    pub couplings: [Vec<Complex<f64>>; 2],
    pub regularized: Option<usize>,
    pub panels: usize,
}

impl Gate {
    pub fn new(spec: &GateSpec, state: &CrystalState, spectrum: &ModeSpectrum, setup: &TrapSetup, scales: &ScaleSet) -> Result<Self> {
        spec.validate()?;
        let n = state.ion_count();
        if spectrum.ion_count() != n || setup.ion_count != n {
            return Err(Error::DimensionMismatch(format!(
                "crystal has {n} ions, spectrum {}, setup {}",
                spectrum.ion_count(),
                setup.ion_count
            )));
        }
        let (j1, j2) = spec.pair;
        if j1 >= n || j2 >= n {
            return Err(Error::NoPair(format!("pair ({j1}, {j2}) outside 0..{n}")));
        }
        let (r1, r2) = (state.positions[j1], state.positions[j2]);
        let separation = distance(&r1, &r2);
        if separation == 0.0 {
            return Err(Error::CoincidentIons(j1, j2));
        }
        let direction = [(r1[0] - r2[0]) / separation, (r1[1] - r2[1]) / separation, (r1[2] - r2[2]) / separation];
        let trap_in_plane = trap_frequencies(setup)?.in_plane / setup.cyclotron_frequency;
        let scale = (scales.hbar / 2.0).sqrt() * trap_in_plane / separation;
        let coupling_for = |ion: usize| -> Vec<Complex<f64>> {
            (0..spectrum.mode_count())
                .map(|k| (0..3).map(|axis| spectrum.position_coefficient(k, ion, axis) * direction[axis]).sum::<Complex<f64>>() * scale)
                .collect()
        };
        let envelope = spec.envelope(setup.cyclotron_frequency);
        envelope.validate()?;
        let fastest = spectrum.frequencies.iter().cloned().fold(0.0, f64::max);
        let panels = spec.quadrature.panel_count(&envelope, fastest)?;
        Ok(Gate {
            spec: spec.clone(),
            envelope,
            cyclotron_frequency: setup.cyclotron_frequency,
            hbar: scales.hbar,
            trap_in_plane,
            separation,
            direction,
            ion_count: n,
            frequencies: spectrum.frequencies.clone(),
            couplings: [coupling_for(j1), coupling_for(j2)],
            regularized: spectrum.regularized,
            panels,
        })
    }

    /// Same gate with another amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Gate {
        let mut g = self.clone();
        g.spec.amplitude = amplitude;
        g
    }

    /// Same gate with another panel count (must still resolve the drive).
    pub fn with_panels(&self, panels: usize) -> Result<Gate> {
        let fastest = self.frequencies.iter().cloned().fold(0.0, f64::max);
        let q = Quadrature { panels: Some(panels), ..self.spec.quadrature };
        let panels = q.panel_count(&self.envelope, fastest)?;
        let mut g = self.clone();
        g.spec.quadrature = q;
        g.panels = panels;
        Ok(g)
    }

    pub fn grid(&self) -> Result<PanelGrid> {
        PanelGrid::new(&self.envelope, self.spec.quadrature.nodes_per_panel, self.panels)
    }

    /// Peak force magnitude 𝒜_P ħ̃ ω_xy/|Δr|.
    pub fn peak_force(&self) -> f64 {
        self.spec.amplitude * self.hbar * self.trap_in_plane / self.separation
    }

    /// Per-ion force at physical time `t` (s) with both qubits in |0⟩.
    pub fn force_profile(&self, t: f64) -> Result<Vec<Vec3>> {
        if !(0.0..=self.spec.gate_time).contains(&t) {
            return Err(Error::InvalidParameter(format!("t = {t} s outside the gate window")));
        }
        let f = self.peak_force() * self.envelope.value(t * self.cyclotron_frequency);
        let mut out = vec![[0.0; 3]; self.ion_count];
        for ion in [self.spec.pair.0, self.spec.pair.1] {
            out[ion] = [f * self.direction[0], f * self.direction[1], f * self.direction[2]];
        }
        Ok(out)
    }

    /// α_k(t) for every mode, t in units of 1/ω_c, qubit signs s1, s2.
    pub fn mode_drive(&self, t: f64, signs: (f64, f64)) -> Vec<Complex<f64>> {
        let g = self.spec.amplitude * self.envelope.value(t);
        self.couplings[0]
            .iter()
            .zip(&self.couplings[1])
            .map(|(c1, c2)| (c1 * signs.0 + c2 * signs.1) * g)
            .collect()
    }

    /// ℐ_k = ω_k^{-1/2} ∫₀^τ e^{iω_k t} α_k(t) dt with the force of a single target ion (slot 0 or 1).
    pub fn residuals(&self, slot: usize) -> Result<Vec<Complex<f64>>> {
        let grid = self.grid()?;
        Ok(self.residuals_on(&grid, slot))
    }

    fn residuals_on(&self, grid: &PanelGrid, slot: usize) -> Vec<Complex<f64>> {
        self.frequencies
            .par_iter()
            .zip(&self.couplings[slot])
            .map(|(&w, &c)| grid.transform(w) * c * (self.spec.amplitude / w.sqrt()))
            .collect()
    }

    /// Per-mode −∫∫_{s<t} g(t)g(s) sin(ω_k(t − s)).
    pub fn phase_kernels(&self) -> Result<Vec<f64>> {
        let grid = self.grid()?;
        Ok(self.frequencies.par_iter().map(|&w| grid.phase_kernel(w)).collect())
    }

    pub fn two_qubit_phase(&self) -> Result<PhaseResult> {
        let kernels = self.phase_kernels()?;
        Ok(phase_from_couplings(&self.couplings[0], &self.couplings[1], &kernels, self.spec.amplitude))
    }

    /// 𝒜_P giving |θ| = target, scaled from the phase at the configured amplitude.
    pub fn calibrate(&self, target: f64) -> Result<f64> {
        let reference = self.two_qubit_phase()?;
        if reference.theta == 0.0 || !reference.theta.is_finite() {
            return Err(Error::Calibration(format!(
                "θ(𝒜_P = {}) = {} cannot be scaled",
                self.spec.amplitude, reference.theta
            )));
        }
        Ok(self.spec.amplitude.abs() * (target / reference.theta.abs()).sqrt())
    }

    /// Calibrates to θ = π and evaluates residuals, phases and the fidelity curve.
    pub fn run(&self, temperatures: &[f64]) -> Result<GateResult> {
        let amplitude = self.calibrate(std::f64::consts::PI)?;
        let unit = self.with_amplitude(1.0);
        let grid = unit.grid()?;
        let residuals = [self.without_rotation(unit.residuals_on(&grid, 0)), self.without_rotation(unit.residuals_on(&grid, 1))];
        let kernels: Vec<f64> = self.frequencies.par_iter().map(|&w| grid.phase_kernel(w)).collect();
        let phase = phase_from_couplings(&self.couplings[0], &self.couplings[1], &kernels, amplitude);
        let curve = fidelity_curve(&residuals[0], &residuals[1], amplitude, &self.frequencies, self.cyclotron_frequency, temperatures);
        Ok(GateResult { amplitude, residuals, phase, curve })
    }

    /// The regularized rotation mode has an arbitrary frequency, so it is left out of the fidelity.
    fn without_rotation(&self, mut residuals: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        if let Some(k) = self.regularized {
            residuals[k] = Complex::new(0.0, 0.0);
        }
        residuals
    }

    /// Worst 1 − F over `temperatures` after calibrating to θ = π.
    pub fn worst_infidelity(&self, temperatures: &[f64]) -> Result<f64> {
        let result = self.run(temperatures)?;
        Ok(result.curve.iter().map(|p| p.infidelity).fold(0.0, f64::max))
    }

    /// τ_g ω_r/(2π) for a crystal rotating at `rotation_frequency` (units ω_c).
    pub fn rotation_fraction(&self, rotation_frequency: f64) -> f64 {
        self.envelope.duration * rotation_frequency / std::f64::consts::TAU
    }
}

/// Carrier inside `gap` minimizing the worst 1 − F over `temperatures`: a coarse scan of
/// `samples` points followed by a golden-section refinement around the best one.
///
/// Returns ν in rad/s and the infidelity reached.
#[allow(clippy::too_many_arguments)]
pub fn tune_carrier(
    spec: &GateSpec,
    gap: &FrequencyGap,
    temperatures: &[f64],
    samples: usize,
    state: &CrystalState,
    spectrum: &ModeSpectrum,
    setup: &TrapSetup,
    scales: &ScaleSet,
) -> Result<(f64, f64)> {
    if gap.is_empty() || samples < 3 {
        return Err(Error::InvalidParameter("carrier scan needs a non-empty gap and at least 3 samples".into()));
    }
    let wc = setup.cyclotron_frequency;
    let cost = |nu: f64| -> Result<f64> {
        let trial = GateSpec { carrier_frequency: nu * wc, ..spec.clone() };
        Gate::new(&trial, state, spectrum, setup, scales)?.worst_infidelity(temperatures)
    };
    let step = gap.width() / samples as f64;
    let nodes: Vec<f64> = (0..samples).map(|i| gap.lower + step * (i as f64 + 0.5)).collect();
    let costs = nodes.par_iter().map(|&nu| cost(nu)).collect::<Result<Vec<f64>>>()?;
    let best = (0..samples).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).unwrap();
    let (mut lo, mut hi) = (nodes[best] - step, nodes[best] + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (cost(a)?, cost(b)?);
    for _ in 0..24 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = cost(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = cost(b)?;
        }
    }
    let (nu, f) = [(a, fa), (b, fb), (nodes[best], costs[best])].into_iter().min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
    Ok((nu * wc, f))
}

/// Phases accumulated by the four logical states.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhaseResult {
    /// θ_{εε'} with ε = 0 ↔ s = +1.
    pub states: [[f64; 2]; 2],
    /// θ₀₀ − θ₀₁ − θ₁₀ + θ₁₁
    pub theta: f64,
    /// Σ_k |c_{1k}|² X_k, Σ_k |c_{2k}|² X_k, Σ_k Re(c*_{1k} c_{2k}) X_k
    pub self_phases: [f64; 2],
    pub cross_phase: f64,
}

/// With α_k = 𝒜_P g (s1 c1 + s2 c2), φ(s1, s2) = 𝒜_P² Σ_k |s1 c1 + s2 c2|² X_k and θ_{εε'} = −φ.
pub fn phase_from_couplings(c1: &[Complex<f64>], c2: &[Complex<f64>], kernels: &[f64], amplitude: f64) -> PhaseResult {
    let a2 = amplitude * amplitude;
    let mut p11 = 0.0;
    let mut p22 = 0.0;
    let mut p12 = 0.0;
    for ((a, b), x) in c1.iter().zip(c2).zip(kernels) {
        p11 += a.norm_sqr() * x;
        p22 += b.norm_sqr() * x;
        p12 += (a.conj() * b).re * x;
    }
    let (p11, p22, p12) = (a2 * p11, a2 * p22, a2 * p12);
    let phi = |s1: f64, s2: f64| p11 + p22 + 2.0 * s1 * s2 * p12;
    let sign = |e: usize| if e == 0 { 1.0 } else { -1.0 };
    let mut states = [[0.0; 2]; 2];
    for (e1, row) in states.iter_mut().enumerate() {
        for (e2, v) in row.iter_mut().enumerate() {
            *v = -phi(sign(e1), sign(e2));
        }
    }
    // θ₀₀ − θ₀₁ − θ₁₀ + θ₁₁, free of the cancelling self phases
    let theta = -8.0 * p12;
    PhaseResult { states, theta, self_phases: [p11, p22], cross_phase: p12 }
}

#[derive(Debug, Clone)]
pub struct GateResult {
    pub amplitude: f64,
    /// ℐ_k at 𝒜_P = 1 for each target ion, zero for the regularized mode.
    pub residuals: [Vec<Complex<f64>>; 2],
    pub phase: PhaseResult,
    pub curve: Vec<FidelityPoint>,
}

/// Plain-text phase report.
pub fn phase_report(gate: &Gate, result: &GateResult, rotation_frequency: f64) -> String {
    let p = &result.phase;
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"theta\": {:.16e},", p.theta);
    for (e1, row) in p.states.iter().enumerate() {
        for (e2, v) in row.iter().enumerate() {
            let _ = writeln!(out, "  \"theta_{e1}{e2}\": {v:.16e},");
        }
    }
    let _ = writeln!(out, "  \"A_P\": {:.16e},", result.amplitude);
    let _ = writeln!(out, "  \"nu_rad_per_s\": {:.16e},", gate.spec.carrier_frequency);
    let _ = writeln!(out, "  \"tau_g_s\": {:.16e},", gate.spec.gate_time);
    let _ = writeln!(out, "  \"tau_g_over_tau_r\": {:.16e},", gate.rotation_fraction(rotation_frequency));
    let _ = writeln!(out, "  \"pair\": [{}, {}]", gate.spec.pair.0, gate.spec.pair.1);
    let _ = writeln!(out, "}}");
    out
}
