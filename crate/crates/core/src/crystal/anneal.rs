use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::potential::{EffectivePotential, Vec3};
use super::CrystalState;
use crate::error::{Error, Result};
use crate::scales::TrapSetup;

/// Metropolis annealing schedule.
///
/// `initial_temperature` and `step_size` are relative: they are multiplied by the
/// crystal's natural energy 1/ℓ_c and length ℓ_c = k^{-1/3}, where k is the weaker of
/// the two trap curvatures at the chosen rotation frequency.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    pub decay: f64,
    pub cycles: usize,
    pub steps_per_cycle: usize,
    pub step_size: f64,
    pub seed: u64,
}

impl AnnealSchedule {
    /// A schedule sized for `ion_count` ions.
    pub fn for_ions(ion_count: usize, seed: u64) -> Self {
        AnnealSchedule {
            initial_temperature: 0.05,
            decay: 0.7,
            cycles: 16,
            steps_per_cycle: 400 * ion_count.max(1),
            step_size: 0.2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::InvalidParameter(format!("decay {} not in (0, 1)", self.decay)));
        }
        if self.cycles == 0 {
            return Err(Error::InvalidParameter("annealing needs at least one cycle".into()));
        }
        if !(self.initial_temperature > 0.0) || !(self.step_size > 0.0) {
            return Err(Error::InvalidParameter("temperature and step size must be positive".into()));
        }
        Ok(())
    }
}

fn natural_length(potential: &EffectivePotential) -> f64 {
    potential.in_plane.min(potential.axial).max(1e-300).cbrt().recip()
}

/// Random starting configuration inside the ellipsoid set by the trap curvatures.
pub fn seed_configuration(
    ion_count: usize,
    rotation_frequency: f64,
    axial_ratio: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec3> {
    let potential = EffectivePotential::new(rotation_frequency, axial_ratio);
    let n = ion_count as f64;
    let r_xy = (n / potential.in_plane.max(1e-300)).cbrt() * 0.5;
    let r_z = (n / potential.axial).cbrt() * 0.5;
    (0..ion_count)
        .map(|_| {
            let rho = r_xy * rng.random::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            let z = r_z * (2.0 * rng.random::<f64>() - 1.0);
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One annealing run; returns the lowest-energy configuration of each cycle.
pub fn anneal(setup: &TrapSetup, rotation_frequency: f64, schedule: &AnnealSchedule) -> Result<Vec<CrystalState>> {
    anneal_stream(setup, rotation_frequency, schedule, 0)
}

fn anneal_stream(
    setup: &TrapSetup,
    rotation_frequency: f64,
    schedule: &AnnealSchedule,
    stream: u64,
) -> Result<Vec<CrystalState>> {
    schedule.validate()?;
    let alpha_z = setup.axial_ratio;
    let potential = EffectivePotential::new(rotation_frequency, alpha_z);
    if potential.in_plane <= 0.0 {
        return Err(Error::NoConfiningFrequency(format!(
            "rotation frequency {rotation_frequency} gives no radial confinement"
        )));
    }
    let mut rng = stream_rng(schedule.seed, stream);
    let mut x = seed_configuration(setup.ion_count, rotation_frequency, alpha_z, &mut rng);
    if schedule.steps_per_cycle == 0 {
        return Ok(vec![CrystalState::from_positions(x, rotation_frequency, alpha_z)?]);
    }

    let length = natural_length(&potential);
    let mut temperature = schedule.initial_temperature / length;
    let mut step = schedule.step_size * length;
    let n = x.len();
    let mut energy = potential.energy(&x)?;
    let mut candidates = Vec::with_capacity(schedule.cycles);

    for _ in 0..schedule.cycles {
        let mut best = (energy, x.clone());
        let mut accepted = 0usize;
        for _ in 0..schedule.steps_per_cycle {
            let k = rng.random_range(0..n);
            let old = x[k];
            let mut trial = old;
            for c in trial.iter_mut() {
                let xi: f64 = StandardNormal.sample(&mut rng);
                *c += step * xi;
            }
            let delta = potential.site_energy(&x, k, &trial) - potential.site_energy(&x, k, &old);
            let u: f64 = rng.random();
            if delta <= 0.0 || u < (-delta / temperature).exp() {
                x[k] = trial;
                energy += delta;
                accepted += 1;
                if energy < best.0 {
                    best = (energy, x.clone());
                }
            }
        }
        energy = potential.energy(&x)?;
        candidates.push(CrystalState::from_positions(best.1, rotation_frequency, alpha_z)?);

        let rate = accepted as f64 / schedule.steps_per_cycle as f64;
        step *= (rate / 0.5).clamp(0.5, 2.0);
        temperature *= schedule.decay;
    }
    Ok(candidates)
}

/// Independent annealing runs on RNG streams 0..restarts, concatenated in stream order.
pub fn anneal_restarts(
    setup: &TrapSetup,
    rotation_frequency: f64,
    schedule: &AnnealSchedule,
    restarts: usize,
) -> Result<Vec<CrystalState>> {
    let runs: Vec<Result<Vec<CrystalState>>> = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|s| anneal_stream(setup, rotation_frequency, schedule, s))
        .collect();
    let mut out = Vec::new();
    for run in runs {
        out.extend(run?);
    }
    Ok(out)
}
