//! Normal modes of a crystal about its co-rotating equilibrium: quadratic Hamiltonian,
//! Williamson symplectic diagonalization, mode coefficients and band structure.

mod hessian;
mod williamson;

pub use hessian::{build_hessian, phase_hessian, coupling, orthogonal_modes, phase_index, OrthogonalModes, QuadraticHamiltonian};
pub use williamson::{symplectic_eigenvalues_direct, symplectic_form, williamson, Williamson};

use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix};

use crate::error::Result;
use crate::scales::rad_to_hz;

/// Weight given to the rigid-rotation direction so the Hessian becomes strictly positive.
pub const ZERO_MODE_SHIFT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Band {
    ExB,
    Cyclotron,
    Axial,
}

impl Band {
    pub fn label(self) -> &'static str {
        match self {
            Band::ExB => "ExB",
            Band::Cyclotron => "cyclotron",
            Band::Axial => "axial",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub symplectic: DMatrix<f64>,
    /// ω_k/ω_c, ascending.
    pub frequencies: Vec<f64>,
    /// A_{k,j} = S_{2k,j} + i S_{2k+1,j} (0-based), 3N × 6N.
    pub coefficients: DMatrix<Complex<f64>>,
    pub bands: Vec<Band>,
    /// Mode carrying the regularized rigid rotation.
    pub regularized: Option<usize>,
}

impl ModeSpectrum {
    pub fn mode_count(&self) -> usize {
        self.frequencies.len()
    }

    pub fn ion_count(&self) -> usize {
        self.mode_count() / 3
    }

    /// A_{k,j} for the position coordinate of `ion` along `axis`.
    pub fn position_coefficient(&self, mode: usize, ion: usize, axis: usize) -> Complex<f64> {
        self.coefficients[(mode, phase_index(ion, axis, false))]
    }

    /// Share of Σ_j |A_{k,j}|² on each ion.
    pub fn participation(&self, mode: usize) -> Vec<f64> {
        let row = self.coefficients.row(mode);
        let total: f64 = row.iter().map(|a| a.norm_sqr()).sum();
        (0..self.ion_count())
            .map(|i| (0..6).map(|c| row[6 * i + c].norm_sqr()).sum::<f64>() / total)
            .collect()
    }

    /// Share of Σ_j |A_{k,j}|² on axial coordinates.
    pub fn axial_weight(&self, mode: usize) -> f64 {
        let row = self.coefficients.row(mode);
        let total: f64 = row.iter().map(|a| a.norm_sqr()).sum();
        let axial: f64 = (0..self.ion_count())
            .map(|i| row[phase_index(i, 2, false)].norm_sqr() + row[phase_index(i, 2, true)].norm_sqr())
            .sum();
        axial / total
    }

    pub fn williamson(&self) -> Williamson {
        Williamson { symplectic: self.symplectic.clone(), frequencies: self.frequencies.clone() }
    }
}

fn dominant_index(s: &DMatrix<f64>, mode: usize) -> usize {
    let weight = |j: usize| s[(2 * mode, j)].hypot(s[(2 * mode + 1, j)]);
    (0..s.ncols()).max_by(|&a, &b| weight(a).total_cmp(&weight(b)).then(b.cmp(&a))).unwrap_or(0)
}

/// Williamson spectrum of a crystal Hessian with the rigid rotation regularized.
pub fn mode_spectrum(qh: &QuadraticHamiltonian) -> Result<ModeSpectrum> {
    let mut h = qh.hessian.clone();
    if let Some(u) = &qh.rotation_mode {
        h += ZERO_MODE_SHIFT * (u * u.transpose());
    }
    let w = williamson(&h)?;
    let m = w.frequencies.len();
    let dim = 2 * m;

    let dominant: Vec<usize> = (0..m).map(|k| dominant_index(&w.symplectic, k)).collect();
    let mut order: Vec<usize> = (0..m).collect();
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && w.frequencies[end] - w.frequencies[start] <= 1e-12 * w.frequencies[end].abs().max(1.0) {
            end += 1;
        }
        order[start..end].sort_by_key(|&k| dominant[k]);
        start = end;
    }

    let mut symplectic = DMatrix::zeros(dim, dim);
    for (new, &old) in order.iter().enumerate() {
        symplectic.row_mut(2 * new).copy_from(&w.symplectic.row(2 * old));
        symplectic.row_mut(2 * new + 1).copy_from(&w.symplectic.row(2 * old + 1));
    }
    let frequencies: Vec<f64> = order.iter().map(|&k| w.frequencies[k]).collect();
    let coefficients = DMatrix::from_fn(m, dim, |k, j| Complex::new(symplectic[(2 * k, j)], symplectic[(2 * k + 1, j)]));

    let regularized = qh.rotation_mode.as_ref().map(|u| {
        // Mode amplitudes of u: S⁻ᵀ u = −𝕁 S 𝕁 u.
        let j = symplectic_form(dim);
        let amp = -(&j * (&symplectic * (&j * u)));
        (0..m)
            .max_by(|&a, &b| amp[2 * a].hypot(amp[2 * a + 1]).total_cmp(&amp[2 * b].hypot(amp[2 * b + 1])))
            .unwrap_or(0)
    });

    let mut spectrum = ModeSpectrum { symplectic, frequencies, coefficients, bands: Vec::new(), regularized };
    spectrum.bands = classify_bands(&spectrum).labels;
    Ok(spectrum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGap {
    pub lower: f64,
    pub upper: f64,
    pub below: Band,
    pub above: Band,
}

impl FrequencyGap {
    pub fn is_empty(&self) -> bool {
        self.upper <= self.lower
    }

    pub fn width(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega > self.lower && omega < self.upper
    }

    pub fn geometric_center(&self) -> f64 {
        (self.lower * self.upper).sqrt()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

#[derive(Debug, Clone)]
pub struct BandStructure {
    pub labels: Vec<Band>,
    /// (band, lowest, highest) ordered by lowest frequency.
    pub ranges: Vec<(Band, f64, f64)>,
    /// Between consecutive bands; empty when they overlap.
    pub gaps: Vec<FrequencyGap>,
}

/// Axial modes are those with most of their weight on z; the in-plane modes split at
/// their largest frequency gap into the E×B (lower) and cyclotron (upper) bands.
pub fn classify_bands(spectrum: &ModeSpectrum) -> BandStructure {
    let m = spectrum.mode_count();
    let mut labels = vec![Band::ExB; m];
    let mut in_plane = Vec::new();
    for (k, label) in labels.iter_mut().enumerate() {
        if spectrum.axial_weight(k) > 0.5 {
            *label = Band::Axial;
        } else {
            in_plane.push(k);
        }
    }
    if in_plane.len() >= 2 {
        let split = (1..in_plane.len())
            .max_by(|&a, &b| {
                let ga = spectrum.frequencies[in_plane[a]] - spectrum.frequencies[in_plane[a - 1]];
                let gb = spectrum.frequencies[in_plane[b]] - spectrum.frequencies[in_plane[b - 1]];
                ga.total_cmp(&gb).then(b.cmp(&a))
            })
            .unwrap();
        for &k in &in_plane[split..] {
            labels[k] = Band::Cyclotron;
        }
    }

    let mut ranges: Vec<(Band, f64, f64)> = Vec::new();
    for band in [Band::ExB, Band::Cyclotron, Band::Axial] {
        let f: Vec<f64> = (0..m).filter(|&k| labels[k] == band).map(|k| spectrum.frequencies[k]).collect();
        if !f.is_empty() {
            ranges.push((band, f.iter().cloned().fold(f64::INFINITY, f64::min), f.iter().cloned().fold(0.0, f64::max)));
        }
    }
    ranges.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut gaps = Vec::new();
    let mut top = f64::NEG_INFINITY;
    let mut top_band = Band::ExB;
    for (i, r) in ranges.iter().enumerate() {
        if i > 0 {
            gaps.push(FrequencyGap { lower: top, upper: r.1, below: top_band, above: r.0 });
        }
        if r.2 > top {
            top = r.2;
            top_band = r.0;
        }
    }
    BandStructure { labels, ranges, gaps }
}

/// CSV: mode, ω/ω_c, frequency in Hz, band, regularized flag, then per-ion participation.
pub fn spectrum_csv(spectrum: &ModeSpectrum, cyclotron_frequency: f64) -> String {
    let mut out = String::from("mode,omega_over_omega_c,frequency_Hz,band,regularized");
    for i in 0..spectrum.ion_count() {
        let _ = write!(out, ",ion_{}", i + 1);
    }
    out.push('\n');
    for k in 0..spectrum.mode_count() {
        let w = spectrum.frequencies[k];
        let _ = write!(
            out,
            "{},{:.16e},{:.16e},{},{}",
            k + 1,
            w,
            rad_to_hz(w * cyclotron_frequency),
            spectrum.bands[k].label(),
            u8::from(spectrum.regularized == Some(k))
        );
        for p in spectrum.participation(k) {
            let _ = write!(out, ",{p:.6e}");
        }
        out.push('\n');
    }
    out
}
