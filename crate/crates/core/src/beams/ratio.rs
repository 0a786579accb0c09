use std::str::FromStr;

use super::table::{table_entry, Line, Polarization, Qubit};
use crate::error::{Error, Result};

/// Laser configuration producing opposite forces on |0⟩ and |1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    SameSigmaMinus,
    SameSigmaPlus,
    /// D1 and D2 with opposite circular polarizations.
    Mixed,
    /// Two D1 beams with opposite circular polarizations; no coupling to P_{3/2}.
    #[default]
    MixedP12,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::SameSigmaMinus, Scheme::SameSigmaPlus, Scheme::Mixed, Scheme::MixedP12];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::SameSigmaMinus => "same-sigma-",
            Scheme::SameSigmaPlus => "same-sigma+",
            Scheme::Mixed => "mixed",
            Scheme::MixedP12 => "mixed-p12",
        }
    }

    /// The two polarization branches, alternated lobe by lobe. Beam 0 carries 𝒳₁ at δ₁,
    /// beam 1 carries 𝒳₂ at δ₂.
    pub fn branches(self, first: f64, second: f64) -> [Branch; 2] {
        use Line::*;
        use Polarization::*;
        let b = |l0, p0, l1, p1| Branch { beams: [Beam::new(l0, p0, first), Beam::new(l1, p1, second)] };
        match self {
            Scheme::SameSigmaPlus => [b(D1, SigmaPlus, D2, SigmaPlus), b(D1, SigmaMinus, D2, SigmaMinus)],
            Scheme::SameSigmaMinus => [b(D1, SigmaMinus, D2, SigmaMinus), b(D1, SigmaPlus, D2, SigmaPlus)],
            Scheme::Mixed => [b(D1, SigmaPlus, D2, SigmaMinus), b(D1, SigmaMinus, D2, SigmaPlus)],
            Scheme::MixedP12 => [b(D1, SigmaPlus, D1, SigmaMinus), b(D1, SigmaMinus, D1, SigmaPlus)],
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Beam {
    pub line: Line,
    pub polarization: Polarization,
    /// rad/s
    pub detuning: f64,
}

impl Beam {
    pub fn new(line: Line, polarization: Polarization, detuning: f64) -> Self {
        Beam { line, polarization, detuning }
    }

    /// Force per unit 𝒳 on each logical state, [|0⟩, |1⟩].
    pub fn coefficients(&self, zeeman: f64) -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        for (slot, state) in Qubit::BOTH.into_iter().enumerate() {
            if let Some(entry) = table_entry(self.polarization, self.line, state) {
                out[slot] = entry.coefficient(self.detuning, zeeman)?;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Branch {
    pub beams: [Beam; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RatioSolution {
    /// 𝒳₁/𝒳₂
    pub ratio: f64,
    /// false when the ratio needs a negative intensity
    pub physical: bool,
}

impl Branch {
    /// 𝒳₁/𝒳₂ making f^{|0⟩} + f^{|1⟩} = 0.
    pub fn ratio(&self, zeeman: f64) -> Result<RatioSolution> {
        let [u, v] = [self.beams[0].coefficients(zeeman)?, self.beams[1].coefficients(zeeman)?];
        let (a, b) = (u[0] + u[1], v[0] + v[1]);
        if a == 0.0 || !(b / a).is_finite() {
            return Err(Error::SingularRatio(format!("beam 0 exerts no net force at ℬ = {zeeman:e}")));
        }
        let ratio = -b / a;
        Ok(RatioSolution { ratio, physical: ratio > 0.0 })
    }

    /// Force on [|0⟩, |1⟩] per unit 𝒳₂ when 𝒳₁ = ratio · 𝒳₂.
    pub fn forces(&self, ratio: f64, zeeman: f64) -> Result<[f64; 2]> {
        let [u, v] = [self.beams[0].coefficients(zeeman)?, self.beams[1].coefficients(zeeman)?];
        Ok([ratio * u[0] + v[0], ratio * u[1] + v[1]])
    }
}

/// Intensity ratio of the scheme's leading branch.
pub fn solve_intensity_ratio(scheme: Scheme, first: f64, second: f64, zeeman: f64) -> Result<RatioSolution> {
    scheme.branches(first, second)[0].ratio(zeeman)
}

/// Closed form for two σ⁺ beams: (4ℬ − 3δ₁)(2δ₂ − 3ℬ)/((δ₂ − ℬ)(3δ₂ − 5ℬ)).
pub fn sigma_plus_ratio(d1: f64, d2: f64, zeeman: f64) -> f64 {
    (4.0 * zeeman - 3.0 * d1) * (2.0 * d2 - 3.0 * zeeman) / ((d2 - zeeman) * (3.0 * d2 - 5.0 * zeeman))
}

/// Left side of the σ⁺ balance equation, 𝒳₂/(δ₂ − ℬ) + 𝒳₂/(3δ₂ − 5ℬ) + 2𝒳₁/(3δ₁ − 4ℬ), for 𝒳₂ = 1.
pub fn sigma_plus_balance(ratio: f64, d1: f64, d2: f64, zeeman: f64) -> f64 {
    1.0 / (d2 - zeeman) + 1.0 / (3.0 * d2 - 5.0 * zeeman) + 2.0 * ratio / (3.0 * d1 - 4.0 * zeeman)
}
