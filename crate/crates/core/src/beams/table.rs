use crate::constants::HBAR;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Line {
    D1,
    D2,
}

impl Line {
    pub fn label(self) -> &'static str {
        match self {
            Line::D1 => "D1",
            Line::D2 => "D2",
        }
    }

    /// 2J' + 1 of the excited manifold.
    pub fn upper_multiplicity(self) -> f64 {
        match self {
            Line::D1 => 2.0,
            Line::D2 => 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Polarization {
    SigmaMinus,
    Pi,
    SigmaPlus,
}

impl Polarization {
    pub const ALL: [Polarization; 3] = [Polarization::SigmaMinus, Polarization::Pi, Polarization::SigmaPlus];

    pub fn label(self) -> &'static str {
        match self {
            Polarization::SigmaMinus => "sigma-",
            Polarization::Pi => "pi",
            Polarization::SigmaPlus => "sigma+",
        }
    }
}

/// Logical state: |0⟩ is m_j = −1/2, |1⟩ is m_j = +1/2 of S_{1/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Qubit {
    Zero,
    One,
}

impl Qubit {
    pub const BOTH: [Qubit; 2] = [Qubit::Zero, Qubit::One];
}

/// One entry of the force table: f = weight · 𝒳 / (ħ (detuning_factor · δ + zeeman_factor · ℬ)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub weight: f64,
    pub detuning_factor: f64,
    pub zeeman_factor: f64,
}

impl TableEntry {
    const fn new(weight: f64, detuning_factor: f64, zeeman_factor: f64) -> Self {
        TableEntry { weight, detuning_factor, zeeman_factor }
    }

    pub fn denominator(&self, detuning: f64, zeeman: f64) -> f64 {
        self.detuning_factor * detuning + self.zeeman_factor * zeeman
    }

    /// Force per unit 𝒳, in 1/(ħ · rad/s).
    pub fn coefficient(&self, detuning: f64, zeeman: f64) -> Result<f64> {
        let d = self.denominator(detuning, zeeman);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::SingularRatio(format!(
                "force denominator {}δ + {}ℬ vanishes at δ = {detuning:e}, ℬ = {zeeman:e}",
                self.detuning_factor, self.zeeman_factor
            )));
        }
        Ok(self.weight / (HBAR * d))
    }
}

/// The polarization × line × state force table; `None` where the transition is closed.
pub fn table_entry(polarization: Polarization, line: Line, state: Qubit) -> Option<TableEntry> {
    use Line::*;
    use Polarization::*;
    use Qubit::*;
    let e = TableEntry::new;
    match (polarization, line, state) {
        (SigmaMinus, D1, Zero) => None,
        (SigmaMinus, D1, One) => Some(e(-0.5, 3.0, 4.0)),
        (SigmaMinus, D2, Zero) => Some(e(-0.25, 1.0, 1.0)),
        (SigmaMinus, D2, One) => Some(e(-0.25, 3.0, 5.0)),
        (Pi, D1, Zero) => Some(e(-0.25, 3.0, -2.0)),
        (Pi, D1, One) => Some(e(-0.25, 3.0, 2.0)),
        (Pi, D2, Zero) => Some(e(-0.5, 3.0, -1.0)),
        (Pi, D2, One) => Some(e(-0.5, 3.0, 1.0)),
        (SigmaPlus, D1, Zero) => Some(e(-0.5, 3.0, -4.0)),
        (SigmaPlus, D1, One) => None,
        (SigmaPlus, D2, Zero) => Some(e(-0.25, 3.0, -5.0)),
        (SigmaPlus, D2, One) => Some(e(-0.25, 1.0, -1.0)),
    }
}

/// A single beam acting on one logical state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ForceTerm {
    pub line: Line,
    pub polarization: Polarization,
    pub state: Qubit,
    /// δ, rad/s
    pub detuning: f64,
    /// 𝒳 = 𝓜 ℰ₀² ∇χ²
    pub drive: f64,
    /// ℬ = μ_B B/ħ, rad/s
    pub zeeman: f64,
}

/// Dipole force of one beam on one logical state.
pub fn dipole_force(term: &ForceTerm) -> Result<f64> {
    match table_entry(term.polarization, term.line, term.state) {
        None => Ok(0.0),
        Some(entry) => Ok(term.drive * entry.coefficient(term.detuning, term.zeeman)?),
    }
}

/// |ℬ| ≪ |δ| ≪ ΔE/ħ with ≪ read as a factor of `margin`.
pub fn check_detuning_chain(detuning: f64, zeeman: f64, fine_structure: f64, margin: f64) -> Result<()> {
    let d = detuning.abs();
    if !(zeeman.abs() * margin <= d && d * margin <= fine_structure) {
        return Err(Error::InvalidParameter(format!(
            "detuning {detuning:e} rad/s violates |ℬ| ≪ |δ| ≪ ΔE/ħ (ℬ = {zeeman:e}, ΔE/ħ = {fine_structure:e}, margin {margin})"
        )));
    }
    Ok(())
}
