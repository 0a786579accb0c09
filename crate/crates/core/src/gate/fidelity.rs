use std::fmt::Write as _;

use nalgebra::Complex;
use rayon::prelude::*;

use crate::constants::{BOLTZMANN, HBAR};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FidelityPoint {
    /// K
    pub temperature: f64,
    pub fidelity: f64,
    /// 1 − F without cancellation.
    pub infidelity: f64,
    /// Worst branch, '+' or '−' in ℐ⁽¹⁾ ± ℐ⁽²⁾.
    pub branch: char,
}

/// F = min_± Π_k exp[−(𝒜_P²/4) |ℐ_k⁽¹⁾ ± ℐ_k⁽²⁾|² / (1 − e^{−ħω_kω_c/k_BT})].
///
/// Residuals are those at 𝒜_P = 1; `frequencies` are in units of ω_c (rad/s). T ≤ 0 takes
/// the zero-temperature limit.
pub fn fidelity(
    residuals_1: &[Complex<f64>],
    residuals_2: &[Complex<f64>],
    amplitude: f64,
    frequencies: &[f64],
    cyclotron_frequency: f64,
    temperature: f64,
) -> FidelityPoint {
    let mut exponents = [0.0f64; 2];
    for ((a, b), &w) in residuals_1.iter().zip(residuals_2).zip(frequencies) {
        let occupation = if temperature > 0.0 {
            -(-HBAR * w * cyclotron_frequency / (BOLTZMANN * temperature)).exp_m1()
        } else {
            1.0
        };
        exponents[0] += (a + b).norm_sqr() / occupation;
        exponents[1] += (a - b).norm_sqr() / occupation;
    }
    let scale = amplitude * amplitude / 4.0;
    let (log_f, branch) = if exponents[1] > exponents[0] {
        (-scale * exponents[1], '-')
    } else {
        (-scale * exponents[0], '+')
    };
    FidelityPoint { temperature, fidelity: log_f.exp(), infidelity: -log_f.exp_m1(), branch }
}

pub fn fidelity_curve(
    residuals_1: &[Complex<f64>],
    residuals_2: &[Complex<f64>],
    amplitude: f64,
    frequencies: &[f64],
    cyclotron_frequency: f64,
    temperatures: &[f64],
) -> Vec<FidelityPoint> {
    temperatures
        .par_iter()
        .map(|&t| fidelity(residuals_1, residuals_2, amplitude, frequencies, cyclotron_frequency, t))
        .collect()
}

pub fn fidelity_csv(curve: &[FidelityPoint]) -> String {
    let mut out = String::from("T_K,F,infidelity,branch\n");
    for p in curve {
        let _ = writeln!(out, "{:.6e},{:.16e},{:.16e},{}", p.temperature, p.fidelity, p.infidelity, p.branch);
    }
    out
}
