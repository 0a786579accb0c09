//! Classical equilibria of a rotating planar crystal.
//!
//! Equilibria are found in the frame co-rotating with the crystal, where the ions feel
//! the effective potential of [`EffectivePotential`]. The total canonical angular
//! momentum is tied to the rotation frequency by the rigid-body relation
//! P_θ = (1/2 − ω_r/ω_c) Σ_k r_k² (units ℓ_s² m ω_c), so P_θ = 0 exactly when
//! ω_r = ω_c/2 and P_θ > 0 on the slow-rotation branch ω_m < ω_r < ω_c/2.

mod anneal;
mod equilibrium;
mod io;
mod newton;
mod potential;

pub use anneal::{anneal, anneal_restarts, seed_configuration, AnnealSchedule};
pub use equilibrium::{find_equilibrium, EquilibriumSearch};
pub use io::{load_state, parse_state, save_state, write_state};
pub use newton::{newton_refine, newton_refine_with, NewtonOptions, Refinement};
pub use potential::{distance, radial_moment, rotation_generator, EffectivePotential, Vec3};

use crate::error::{Error, Result};
use crate::scales::{anisotropy_ratio, stability_class, StabilityClass};

/// Gradient-norm threshold below which a configuration counts as an equilibrium.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CrystalState {
    /// Ion positions in units of ℓ_s.
    pub positions: Vec<Vec3>,
    pub axial_ratio: f64,
    /// ω_r/ω_c
    pub rotation_frequency: f64,
    /// P_θ in units of ℓ_s² m ω_c.
    pub angular_momentum: f64,
    pub anisotropy: f64,
    /// Effective potential energy in units of E_s.
    pub energy: f64,
    pub converged: bool,
    pub gradient_norm: f64,
}

impl CrystalState {
    /// Evaluates energy, gradient and angular momentum for a configuration.
    pub fn from_positions(positions: Vec<Vec3>, rotation_frequency: f64, axial_ratio: f64) -> Result<Self> {
        let potential = EffectivePotential::new(rotation_frequency, axial_ratio);
        let energy = potential.energy(&positions)?;
        let gradient_norm = potential.gradient(&positions)?.norm();
        Ok(CrystalState {
            angular_momentum: total_angular_momentum(&positions, rotation_frequency),
            anisotropy: anisotropy_ratio(rotation_frequency, axial_ratio),
            positions,
            axial_ratio,
            rotation_frequency,
            energy,
            converged: gradient_norm < GRADIENT_TOLERANCE,
            gradient_norm,
        })
    }

    pub fn ion_count(&self) -> usize {
        self.positions.len()
    }

    pub fn potential(&self) -> EffectivePotential {
        EffectivePotential::new(self.rotation_frequency, self.axial_ratio)
    }

    pub fn stability(&self) -> StabilityClass {
        stability_class(self.anisotropy, self.ion_count())
    }

    /// Largest |z_k|.
    pub fn max_axial_offset(&self) -> f64 {
        self.positions.iter().map(|r| r[2].abs()).fold(0.0, f64::max)
    }
}

/// Effective potential of a configuration at rotation frequency α = ω_r/ω_c.
pub fn effective_potential(positions: &[Vec3], rotation_frequency: f64, axial_ratio: f64) -> Result<f64> {
    EffectivePotential::new(rotation_frequency, axial_ratio).energy(positions)
}

/// P_θ = (1/2 − α) Σ_k r_k².
pub fn total_angular_momentum(positions: &[Vec3], rotation_frequency: f64) -> f64 {
    (0.5 - rotation_frequency) * radial_moment(positions)
}

/// Inverse of [`total_angular_momentum`] at fixed positions.
pub fn rotation_frequency_from_angular_momentum(positions: &[Vec3], angular_momentum: f64) -> Result<f64> {
    let moment = radial_moment(positions);
    if moment == 0.0 {
        return Err(Error::AllAxial);
    }
    Ok(0.5 - angular_momentum / moment)
}
