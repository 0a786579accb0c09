use rayon::prelude::*;

use super::anneal::{anneal_restarts, AnnealSchedule};
use super::newton::newton_refine;
use super::potential::{radial_moment, Vec3};
use super::CrystalState;
use crate::error::{Error, Result};
use crate::scales::TrapSetup;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EquilibriumSearch {
    pub schedule: AnnealSchedule,
    pub restarts: usize,
    /// Outer iterations on the rotation frequency.
    pub max_iterations: usize,
    /// Relative tolerance on P_θ.
    pub tolerance: f64,
}

impl EquilibriumSearch {
    pub fn new(ion_count: usize, seed: u64) -> Self {
        EquilibriumSearch {
            schedule: AnnealSchedule::for_ions(ion_count, seed),
            restarts: 4,
            max_iterations: 60,
            tolerance: 1e-11,
        }
    }
}

fn in_plane_curvature(alpha: f64, axial_ratio: f64) -> f64 {
    alpha * (1.0 - alpha) - axial_ratio * axial_ratio / 2.0
}

/// Rotation frequency at which radial confinement vanishes, below ω_c/2.
fn magnetron_limit(axial_ratio: f64) -> f64 {
    0.5 * (1.0 - (1.0 - 2.0 * axial_ratio * axial_ratio).sqrt())
}

/// Lowest-energy converged refinement of all annealing candidates at fixed α.
fn ground_state(setup: &TrapSetup, alpha: f64, search: &EquilibriumSearch) -> Result<CrystalState> {
    let candidates = anneal_restarts(setup, alpha, &search.schedule, search.restarts)?;
    let refined: Vec<Option<CrystalState>> = candidates
        .par_iter()
        .map(|c| newton_refine(c).ok().map(|r| r.state).filter(|s| s.converged))
        .collect();
    refined
        .into_iter()
        .flatten()
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .ok_or(Error::NotConverged {
            iterations: candidates.len(),
            gradient_norm: f64::NAN,
        })
}

fn relax(positions: Vec<Vec3>, alpha: f64, axial_ratio: f64) -> Result<CrystalState> {
    let start = CrystalState::from_positions(positions, alpha, axial_ratio)?;
    let refined = newton_refine(&start)?;
    if !refined.converged() {
        return Err(Error::NotConverged {
            iterations: refined.iterations,
            gradient_norm: refined.state.gradient_norm,
        });
    }
    Ok(refined.state)
}

/// Solves (1/2 − α)·moment·(k_ref/k(α))^{2/3} = P for α inside (lo, hi) by bisection.
fn model_root(p_theta: f64, moment: f64, k_ref: f64, axial_ratio: f64, lo: f64, hi: f64) -> f64 {
    let f = |a: f64| {
        let k = in_plane_curvature(a, axial_ratio);
        (0.5 - a) * moment * (k_ref / k).powf(2.0 / 3.0) - p_theta
    };
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn continuum_moment(ion_count: usize, curvature: f64) -> f64 {
    let n = ion_count as f64;
    0.4 * n * (3.0 * std::f64::consts::PI * n / (4.0 * curvature)).powf(2.0 / 3.0)
}

/// Equilibrium at fixed total canonical angular momentum.
///
/// Outer root-find on α = ω_r/ω_c: at each α the crystal is relaxed by Newton refinement
/// starting from the previous configuration rescaled by the planar law r ∝ k^{-1/3}.
/// The bracket (α_m, 1/2) for P_θ > 0, or (1/2, 1 − α_m) for P_θ < 0, is kept as a
/// bisection safeguard. Once converged, a fresh anneal at the final α checks for a
/// lower-energy structure.
pub fn find_equilibrium(setup: &TrapSetup, p_theta: f64, search: &EquilibriumSearch) -> Result<CrystalState> {
    search.schedule.validate()?;
    if !p_theta.is_finite() {
        return Err(Error::InvalidParameter(format!("P_theta = {p_theta}")));
    }
    let az = setup.axial_ratio;
    if p_theta == 0.0 {
        return ground_state(setup, 0.5, search).map_err(|e| e.at_stage("anneal"));
    }
    if setup.ion_count < 2 {
        return Err(Error::InvalidParameter("nonzero P_theta needs an off-axis ion pair".into()));
    }

    let edge = magnetron_limit(az);
    let (mut lo, mut hi) = if p_theta > 0.0 { (edge, 0.5) } else { (0.5, 1.0 - edge) };
    // f(α) = P(α) − P_θ is decreasing in α on both branches.
    let pad = 1e-15;
    let inner = |lo: f64, hi: f64| (lo + pad, hi - pad);

    let k_half = in_plane_curvature(0.5, az);
    let (a, b) = inner(lo, hi);
    let mut alpha = model_root(p_theta, continuum_moment(setup.ion_count, k_half), k_half, az, a, b);
    let mut state = ground_state(setup, alpha, search).map_err(|e| e.at_stage("anneal"))?;
    let mut reannealed = false;

    for _ in 0..search.max_iterations.max(1) {
        let residual = state.angular_momentum - p_theta;
        if residual.abs() <= search.tolerance * p_theta.abs() {
            if reannealed {
                return Ok(state);
            }
            reannealed = true;
            let fresh = ground_state(setup, alpha, search).map_err(|e| e.at_stage("anneal"))?;
            if fresh.energy < state.energy - 1e-9 * state.energy.abs() {
                state = fresh;
            } else {
                return Ok(state);
            }
            continue;
        }
        if residual > 0.0 {
            lo = lo.max(alpha);
        } else {
            hi = hi.min(alpha);
        }
        let k_now = in_plane_curvature(alpha, az);
        let (a, b) = inner(lo, hi);
        let mut next = model_root(p_theta, radial_moment(&state.positions), k_now, az, a, b);
        if !(next > lo && next < hi) || next == alpha {
            next = 0.5 * (lo + hi);
        }
        let scale = (k_now / in_plane_curvature(next, az)).cbrt();
        let moved: Vec<Vec3> = state.positions.iter().map(|r| [r[0] * scale, r[1] * scale, r[2]]).collect();
        state = relax(moved, next, az).map_err(|e| e.at_stage("newton"))?;
        alpha = next;
    }
    Err(Error::NotConverged {
        iterations: search.max_iterations,
        gradient_norm: state.gradient_norm,
    })
}
