use crate::constants::{BOHR_MAGNETON, HBAR};
use crate::error::{Error, Result};
use crate::scales::{IonSpecies, Level};

/// μ_B g_J m_j B in J; `field` in T.
pub fn zeeman_shift(species: &IonSpecies, level: Level, m_j: f64, field: f64) -> Result<f64> {
    let j = level.j();
    let steps = m_j + j;
    if m_j.abs() > j || (steps - steps.round()).abs() > 1e-12 {
        return Err(Error::InvalidMj { j, m_j });
    }
    Ok(BOHR_MAGNETON * species.lande(level) * m_j * field)
}

/// ℬ = μ_B B/ħ in rad/s.
pub fn zeeman_scale(field: f64) -> f64 {
    BOHR_MAGNETON * field / HBAR
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Regime {
    Zeeman,
    Intermediate,
    PaschenBack,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Zeeman => "Zeeman",
            Regime::Intermediate => "intermediate",
            Regime::PaschenBack => "Paschen-Back",
        }
    }
}

/// Zeeman below the species' B_Z, Paschen–Back above B_PB, intermediate in between.
pub fn classify_regime(species: &IonSpecies, field: f64) -> Result<Regime> {
    if !(field >= 0.0) || !field.is_finite() {
        return Err(Error::InvalidParameter(format!("field {field} T must be non-negative")));
    }
    Ok(if field < species.b_zeeman {
        Regime::Zeeman
    } else if field > species.b_paschen_back {
        Regime::PaschenBack
    } else {
        Regime::Intermediate
    })
}

/// Fails unless the ion is in the Zeeman regime, where the forces are state dependent.
pub fn require_zeeman(species: &IonSpecies, field: f64) -> Result<()> {
    match classify_regime(species, field)? {
        Regime::Zeeman => Ok(()),
        other => Err(Error::RegimeUnavailable(other.label())),
    }
}
