use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::crystal::{CrystalState, EffectivePotential, Vec3, GRADIENT_TOLERANCE};
use crate::error::{Error, Result};

/// Quadratic expansion of the co-rotating Hamiltonian about an equilibrium.
///
/// Phase vector ordering per ion: (q_x, p_x, q_y, p_y, q_z, p_z).
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    pub hessian: DMatrix<f64>,
    pub state: CrystalState,
    /// Unit phase-space direction of rigid rotation (null vector of the Hessian), if any.
    pub rotation_mode: Option<DVector<f64>>,
}

impl QuadraticHamiltonian {
    pub fn dimension(&self) -> usize {
        self.hessian.nrows()
    }

    pub fn ion_count(&self) -> usize {
        self.dimension() / 6
    }
}

/// Index of (ion, axis, momentum?) in the phase vector.
pub fn phase_index(ion: usize, axis: usize, momentum: bool) -> usize {
    6 * ion + 2 * axis + usize::from(momentum)
}

/// Coefficient of the minimal-coupling term (α − 1/2)(x p_y − y p_x).
pub fn coupling(rotation_frequency: f64) -> f64 {
    rotation_frequency - 0.5
}

/// Hessian of H = Σ_k [p_k²/2 + c (x_k p_{y,k} − y_k p_{x,k}) + ((1 − 2α_z²)/8) r_k² + (α_z²/2) z_k²]
/// + Σ_{k<j} 1/|r_k − r_j|, with c = α − 1/2.
pub fn build_hessian(state: &CrystalState) -> Result<QuadraticHamiltonian> {
    if !state.converged || !(state.gradient_norm < GRADIENT_TOLERANCE) {
        return Err(Error::UnconvergedState(state.gradient_norm));
    }
    let hessian = phase_hessian(&state.positions, state.rotation_frequency, state.axial_ratio)?;
    let rotation_mode = rotation_direction(state, coupling(state.rotation_frequency));
    Ok(QuadraticHamiltonian { hessian, state: state.clone(), rotation_mode })
}

/// Phase-space Hessian at arbitrary positions (momenta enter only through constants).
pub fn phase_hessian(positions: &[Vec3], rotation_frequency: f64, axial_ratio: f64) -> Result<DMatrix<f64>> {
    let n = positions.len();
    let c = coupling(rotation_frequency);
    // Position block of H is the effective-potential Hessian plus c² in plane.
    let v = EffectivePotential::new(rotation_frequency, axial_ratio).hessian(positions)?;
    let mut h = DMatrix::zeros(6 * n, 6 * n);
    for a in 0..3 * n {
        for b in 0..3 * n {
            h[(2 * a, 2 * b)] = 0.5 * (v[(a, b)] + v[(b, a)]);
        }
    }
    for k in 0..n {
        for axis in 0..2 {
            let q = phase_index(k, axis, false);
            h[(q, q)] += c * c;
        }
        for axis in 0..3 {
            let p = phase_index(k, axis, true);
            h[(p, p)] = 1.0;
        }
        let (x, px) = (phase_index(k, 0, false), phase_index(k, 0, true));
        let (y, py) = (phase_index(k, 1, false), phase_index(k, 1, true));
        h[(x, py)] = c;
        h[(py, x)] = c;
        h[(y, px)] = -c;
        h[(px, y)] = -c;
    }
    Ok(h)
}

/// Tangent of the equilibrium orbit under rigid rotation: δq = ẑ × q, δp = ẑ × p with p = c(y, −x).
fn rotation_direction(state: &CrystalState, c: f64) -> Option<DVector<f64>> {
    let n = state.ion_count();
    let mut u = DVector::zeros(6 * n);
    for (k, r) in state.positions.iter().enumerate() {
        u[phase_index(k, 0, false)] = -r[1];
        u[phase_index(k, 1, false)] = r[0];
        u[phase_index(k, 0, true)] = c * r[0];
        u[phase_index(k, 1, true)] = c * r[1];
    }
    let len = u.norm();
    (n > 1 && len > 0.0).then(|| u / len)
}

/// Normal modes of the field-free frame ω_r = ω_c/2: eigenvectors M (columns) and
/// frequencies √λ of the position Hessian, ascending. Negative round-off is clamped to 0.
#[derive(Debug, Clone)]
pub struct OrthogonalModes {
    pub transform: DMatrix<f64>,
    pub frequencies: Vec<f64>,
}

pub fn orthogonal_modes(state: &CrystalState) -> Result<OrthogonalModes> {
    if state.rotation_frequency != 0.5 {
        return Err(Error::FrameMismatch(format!(
            "orthogonal modes need omega_r = omega_c/2, got {}",
            state.rotation_frequency
        )));
    }
    if !state.converged {
        return Err(Error::UnconvergedState(state.gradient_norm));
    }
    let v = state.potential().hessian(&state.positions)?;
    let eig = SymmetricEigen::new(v);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let transform = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
    let frequencies = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    Ok(OrthogonalModes { transform, frequencies })
}
