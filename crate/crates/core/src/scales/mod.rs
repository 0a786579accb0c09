//! Trap parameters, the dimensionless unit system and closed-form trap relations.
//!
//! Lengths are measured in ℓ_s = (e²/(4πε₀ m ω_c²))^{1/3}, momenta in p_s = ℓ_s m ω_c,
//! energies in E_s = e²/(4πε₀ ℓ_s) = m ω_c² ℓ_s² and times in 1/ω_c. Frequencies
//! passed to this module are angular (rad/s) unless a name says otherwise.

mod species;

pub use species::{lande_g, parse_species_table, species, species_table, IonSpecies, Level};

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::constants::{coulomb_constant_e2, HBAR};
use crate::error::{Error, Result};

/// Critical anisotropy prefactor: planar crystals need β < 0.665/√N.
pub const PLANAR_THRESHOLD: f64 = 0.665;

pub fn hz_to_rad(nu: f64) -> f64 {
    2.0 * PI * nu
}

pub fn rad_to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TrapSetup {
    /// ω_c, rad/s
    pub cyclotron_frequency: f64,
    /// α_z = ω_z/ω_c
    pub axial_ratio: f64,
    pub ion_count: usize,
}

impl TrapSetup {
    pub fn new(cyclotron_frequency: f64, axial_ratio: f64, ion_count: usize) -> Result<Self> {
        if !(cyclotron_frequency > 0.0) {
            return Err(Error::InvalidParameter("cyclotron frequency must be positive".into()));
        }
        if !(axial_ratio > 0.0) {
            return Err(Error::InvalidParameter("axial ratio must be positive".into()));
        }
        if axial_ratio >= FRAC_1_SQRT_2 {
            return Err(Error::NoRadialConfinement { alpha_z: axial_ratio });
        }
        if ion_count == 0 {
            return Err(Error::InvalidParameter("ion count must be at least 1".into()));
        }
        Ok(TrapSetup { cyclotron_frequency, axial_ratio, ion_count })
    }

    /// Builds a setup from ν_c in Hz.
    pub fn from_hz(nu_c: f64, axial_ratio: f64, ion_count: usize) -> Result<Self> {
        Self::new(hz_to_rad(nu_c), axial_ratio, ion_count)
    }

    /// B = m ω_c / q, in tesla.
    pub fn magnetic_field(&self, species: &IonSpecies) -> f64 {
        species.mass * self.cyclotron_frequency / species.charge
    }

    pub fn axial_frequency(&self) -> f64 {
        self.axial_ratio * self.cyclotron_frequency
    }

    /// Converts a physical angular frequency to units of ω_c.
    pub fn to_dimensionless(&self, omega: f64) -> f64 {
        omega / self.cyclotron_frequency
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScaleSet {
    /// ℓ_s, m
    pub length: f64,
    /// p_s, kg·m/s
    pub momentum: f64,
    /// E_s, J
    pub energy: f64,
    /// ħ̃ = ħ/(ℓ_s² m ω_c): the action quantum in units of ℓ_s p_s.
    pub hbar: f64,
}

pub fn derive_scales(setup: &TrapSetup, species: &IonSpecies) -> Result<ScaleSet> {
    species.validate()?;
    species.require_ion()?;
    let m = species.mass;
    let wc = setup.cyclotron_frequency;
    let k = coulomb_constant_e2() * (species.charge / crate::constants::ELEMENTARY_CHARGE).powi(2);
    let length = (k / (m * wc * wc)).cbrt();
    let momentum = length * m * wc;
    let energy = k / length;
    let hbar = HBAR / (length * length * m * wc);
    Ok(ScaleSet { length, momentum, energy, hbar })
}

/// Axial, in-plane and magnetron frequencies (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TrapFrequencies {
    pub axial: f64,
    pub in_plane: f64,
    pub magnetron: f64,
}

pub fn trap_frequencies(setup: &TrapSetup) -> Result<TrapFrequencies> {
    let wc = setup.cyclotron_frequency;
    let wz = setup.axial_frequency();
    let radicand = wc * wc - 2.0 * wz * wz;
    if setup.axial_ratio >= FRAC_1_SQRT_2 || radicand < 0.0 {
        return Err(Error::NoRadialConfinement { alpha_z: setup.axial_ratio });
    }
    let in_plane = 0.5 * radicand.sqrt();
    Ok(TrapFrequencies { axial: wz, in_plane, magnetron: 0.5 * wc - in_plane })
}

/// β in terms of the dimensionless rotation frequency α = ω_r/ω_c.
pub fn anisotropy_ratio(alpha: f64, axial_ratio: f64) -> f64 {
    alpha * (1.0 - alpha) / (axial_ratio * axial_ratio) - 0.5
}

/// β = ω_r(ω_c − ω_r)/ω_z² − 1/2, with ω_z = α_z ω_c.
pub fn anisotropy(omega_r: f64, setup: &TrapSetup) -> f64 {
    let wz = setup.axial_frequency();
    omega_r * (setup.cyclotron_frequency - omega_r) / (wz * wz) - 0.5
}

pub fn critical_anisotropy(ion_count: usize) -> f64 {
    PLANAR_THRESHOLD / (ion_count as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StabilityClass {
    Unconfined,
    Confined3D,
    Planar2D,
}

pub fn stability_class(beta: f64, ion_count: usize) -> StabilityClass {
    if beta <= 0.0 {
        StabilityClass::Unconfined
    } else if beta < critical_anisotropy(ion_count.max(1)) {
        StabilityClass::Planar2D
    } else {
        StabilityClass::Confined3D
    }
}

/// ω_xy^eff = ½√(ω_c² − δω² − 2ω_z²) with δω = ω_c − 2ω_r.
pub fn effective_radial_frequency(omega_r: f64, setup: &TrapSetup) -> Result<f64> {
    let wc = setup.cyclotron_frequency;
    let wz = setup.axial_frequency();
    let dw = wc - 2.0 * omega_r;
    let radicand = wc * wc - dw * dw - 2.0 * wz * wz;
    if radicand < 0.0 {
        return Err(Error::NoEffectiveConfinement { radicand });
    }
    Ok(0.5 * radicand.sqrt())
}

/// The equivalent form √(ω_r(ω_c − ω_r) − ω_z²/2).
pub fn effective_radial_frequency_alt(omega_r: f64, setup: &TrapSetup) -> Result<f64> {
    let wz = setup.axial_frequency();
    let radicand = omega_r * (setup.cyclotron_frequency - omega_r) - 0.5 * wz * wz;
    if radicand < 0.0 {
        return Err(Error::NoEffectiveConfinement { radicand: 4.0 * radicand });
    }
    Ok(radicand.sqrt())
}
