use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::modes::OrthogonalModes;

/// Frequencies below this (units ω_c) are the free rotation and carry no restoring force.
const ZERO_MODE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FormFactorRegime {
    Adiabatic,
    /// Carrier ν in units of ω_c.
    Modulated(f64),
    /// Expansion of the modulated form to order ν⁻⁴.
    ModulatedExpansion(f64),
}

fn block(modes: &OrthogonalModes, weight: impl Fn(f64) -> Option<f64>, pair: (usize, usize)) -> Matrix3<f64> {
    let (n, j) = pair;
    let m = &modes.transform;
    let mut s = Matrix3::zeros();
    for (k, &w) in modes.frequencies.iter().enumerate() {
        let Some(c) = weight(w) else { continue };
        for mu in 0..3 {
            for eta in 0..3 {
                s[(mu, eta)] += c * m[(3 * j + mu, k)] * m[(3 * n + eta, k)];
            }
        }
    }
    s
}

/// S^{(nj)}_{μη} = Σ_K w(ω_K) M_{K;j,μ} M_{K;n,η} in units where m = 1:
/// adiabatic w = 1/(2ħ̃ω²) (free rotation skipped); modulated w = −1/(4ħ̃(ν² − ω²));
/// expansion −(δ_{jn}δ_{μη}/ν² + Σ ω² M M/ν⁴)/(4ħ̃).
pub fn form_factor(modes: &OrthogonalModes, hbar: f64, pair: (usize, usize), regime: FormFactorRegime) -> Result<Matrix3<f64>> {
    let coords = modes.transform.nrows();
    if 3 * pair.0.max(pair.1) + 3 > coords {
        return Err(Error::NoPair(format!("pair {pair:?} outside {} ions", coords / 3)));
    }
    match regime {
        FormFactorRegime::Adiabatic => Ok(block(modes, |w| (w > ZERO_MODE).then(|| 1.0 / (2.0 * hbar * w * w)), pair)),
        FormFactorRegime::Modulated(nu) => {
            if let Some((mode, &omega)) = modes.frequencies.iter().enumerate().find(|(_, &w)| (nu - w).abs() <= 1e-6 * nu.max(w)) {
                return Err(Error::Resonance { mode, omega, nu });
            }
            Ok(block(modes, |w| Some(-1.0 / (4.0 * hbar * (nu * nu - w * w))), pair))
        }
        FormFactorRegime::ModulatedExpansion(nu) => {
            let nu4 = nu.powi(4);
            let mut s = block(modes, |w| Some(-w * w / (4.0 * hbar * nu4)), pair);
            if pair.0 == pair.1 {
                s -= Matrix3::identity() / (4.0 * hbar * nu * nu);
            }
            Ok(s)
        }
    }
}

/// Σ_K M_{K;j,μ} M_{K;n,η} − δ_{jn}δ_{μη}: the coefficient of the 1/ν² term, zero for orthogonal M.
pub fn leading_term(modes: &OrthogonalModes, pair: (usize, usize)) -> Matrix3<f64> {
    let mut s = block(modes, |_| Some(1.0), pair);
    if pair.0 == pair.1 {
        s -= Matrix3::identity();
    }
    s
}
