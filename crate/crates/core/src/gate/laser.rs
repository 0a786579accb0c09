use std::f64::consts::{PI, SQRT_2, TAU};

use crate::constants::{HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::scales::{trap_frequencies, IonSpecies, TrapSetup};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BeamGeometry {
    /// w, m
    pub waist: f64,
    /// γ between the two wave vectors, rad
    pub angle: f64,
    /// Δ = ω_L − ω_A, rad/s
    pub detuning: f64,
    /// λ_L, m
    pub wavelength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LaserResources {
    /// W
    pub power: f64,
    pub scattered_photons: f64,
    /// e^{−N_phot}
    pub scattering_fidelity: f64,
}

/// Standing-wave power P = 𝒜_P ω_xy |Δ| ħ c κ² w² sin²(γ/2)/(3Γ|Δr|) and scattered photons
/// N = √2 π³ ε₀ c m² w² ω_xy⁴ |Δr|³ sin(γ/2)/(3 e² λ_L P); `separation` in m.
pub fn laser_resources(
    setup: &TrapSetup,
    species: &IonSpecies,
    geometry: &BeamGeometry,
    amplitude: f64,
    separation: f64,
) -> Result<LaserResources> {
    let BeamGeometry { waist, angle, detuning, wavelength } = *geometry;
    if !(angle > 0.0 && angle <= PI) {
        return Err(Error::InvalidParameter(format!("beam angle {angle} not in (0, π]")));
    }
    if detuning == 0.0 || !(waist > 0.0) || !(wavelength > 0.0) || !(separation > 0.0) {
        return Err(Error::InvalidParameter("detuning, waist, wavelength and separation must be nonzero".into()));
    }
    species.require_ion()?;
    let w_xy = trap_frequencies(setup)?.in_plane;
    let kappa = TAU / wavelength;
    let half = (0.5 * angle).sin();
    let power = amplitude.abs() * w_xy * detuning.abs() * HBAR * SPEED_OF_LIGHT * kappa * kappa * waist * waist * half * half
        / (3.0 * species.linewidth * separation);
    let m = species.mass;
    let photons = SQRT_2 * PI.powi(3) * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT * m * m * waist * waist * w_xy.powi(4) * separation.powi(3) * half
        / (3.0 * species.charge * species.charge * wavelength * power);
    Ok(LaserResources { power, scattered_photons: photons, scattering_fidelity: (-photons).exp() })
}
