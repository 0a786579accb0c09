use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::potential::{rotation_generator, EffectivePotential, Vec3};
use super::{CrystalState, GRADIENT_TOLERANCE};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iterations: 200, tolerance: GRADIENT_TOLERANCE }
    }
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub state: CrystalState,
    pub iterations: usize,
    /// Norm of the last accepted step (0 when no step was taken).
    pub last_step: f64,
    /// Energy after each accepted step, starting with the input energy.
    pub energies: Vec<f64>,
}

impl Refinement {
    pub fn converged(&self) -> bool {
        self.state.converged
    }
}

pub fn newton_refine(candidate: &CrystalState) -> Result<Refinement> {
    newton_refine_with(candidate, NewtonOptions::default())
}

/// Damped Newton iteration on the effective potential at fixed rotation frequency.
///
/// The rigid-rotation null direction is pinned: the Hessian is shifted along it and the
/// step is projected off it. Steps are halved until the energy does not rise beyond
/// rounding, so the energy sequence is non-increasing.
pub fn newton_refine_with(candidate: &CrystalState, options: NewtonOptions) -> Result<Refinement> {
    let potential = candidate.potential();
    let mut x: Vec<Vec3> = candidate.positions.clone();
    let mut energy = potential.energy(&x)?;
    let mut energies = vec![energy];
    let mut iterations = 0;
    let mut last_step = 0.0;

    loop {
        let g = potential.gradient(&x)?;
        if g.norm() < options.tolerance || iterations >= options.max_iterations {
            break;
        }
        let step = pinned_step(&potential, &x, &g)?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = displaced(&x, &step, t);
            if let Ok(e) = potential.energy(&trial) {
                if e <= energy + 4.0 * f64::EPSILON * energy.abs() {
                    accepted = Some((trial, e));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, e)) = accepted else { break };
        last_step = t * step.norm();
        x = trial;
        energy = e.min(energy);
        energies.push(e);
        iterations += 1;
        if last_step == 0.0 {
            break;
        }
    }

    // Soft modes leave positions loose at the gradient threshold; polish with full
    // Newton steps while the gradient keeps shrinking.
    let mut g_norm = potential.gradient(&x)?.norm();
    if g_norm < options.tolerance {
        for _ in 0..3 {
            let g = potential.gradient(&x)?;
            let step = pinned_step(&potential, &x, &g)?;
            let trial = displaced(&x, &step, 1.0);
            let (Ok(e), Ok(gt)) = (potential.energy(&trial), potential.gradient(&trial)) else { break };
            if gt.norm() >= g_norm || e > energy + 4.0 * f64::EPSILON * energy.abs() {
                break;
            }
            g_norm = gt.norm();
            x = trial;
            energy = e.min(energy);
            energies.push(e);
            last_step = step.norm();
        }
    }

    let state = CrystalState::from_positions(x, candidate.rotation_frequency, candidate.axial_ratio)?;
    Ok(Refinement { state, iterations, last_step, energies })
}

/// Newton step with the rigid-rotation direction shifted out of the Hessian and projected off the step.
fn pinned_step(potential: &EffectivePotential, x: &[Vec3], g: &DVector<f64>) -> Result<DVector<f64>> {
    let rotation = if x.len() > 1 { rotation_generator(x) } else { None };
    let mut h = potential.hessian(x)?;
    if let Some(u) = &rotation {
        let scale = h.diagonal().amax().max(1e-300);
        h += scale * (u * u.transpose());
    }
    let mut step = newton_direction(h, g);
    if let Some(u) = &rotation {
        let along = u.dot(&step);
        step -= u * along;
    }
    Ok(step)
}

fn displaced(x: &[Vec3], step: &DVector<f64>, t: f64) -> Vec<Vec3> {
    x.iter()
        .enumerate()
        .map(|(k, r)| [r[0] + t * step[3 * k], r[1] + t * step[3 * k + 1], r[2] + t * step[3 * k + 2]])
        .collect()
}

/// Solves H s = −g; falls back to an eigenvalue-modified Hessian away from a minimum.
fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    if let Some(chol) = h.clone().cholesky() {
        return -chol.solve(g);
    }
    let eig = SymmetricEigen::new(h);
    let floor = eig.eigenvalues.amax() * 1e-8;
    let mut step = DVector::zeros(g.len());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        step -= v * (v.dot(g) / lambda.abs().max(floor));
    }
    step
}
