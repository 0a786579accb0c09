use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Co-rotating-frame potential (units E_s, lengths in ℓ_s) of a crystal rotating at
/// α = ω_r/ω_c:
///
/// V = Σ_k (α_z²/2)(z_k² + β r_k²) + Σ_{k<j} 1/|r_k − r_j|
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectivePotential {
    /// α_z² β = α(1 − α) − α_z²/2
    pub in_plane: f64,
    /// α_z²
    pub axial: f64,
}

impl EffectivePotential {
    pub fn new(alpha: f64, axial_ratio: f64) -> Self {
        let az2 = axial_ratio * axial_ratio;
        EffectivePotential { in_plane: alpha * (1.0 - alpha) - 0.5 * az2, axial: az2 }
    }

    fn trap(&self, r: &Vec3) -> f64 {
        0.5 * (self.in_plane * (r[0] * r[0] + r[1] * r[1]) + self.axial * r[2] * r[2])
    }

    pub fn energy(&self, positions: &[Vec3]) -> Result<f64> {
        let mut e = 0.0;
        for (k, rk) in positions.iter().enumerate() {
            e += self.trap(rk);
            for (j, rj) in positions.iter().enumerate().skip(k + 1) {
                let d = distance(rk, rj);
                if d == 0.0 {
                    return Err(Error::CoincidentIons(k, j));
                }
                e += 1.0 / d;
            }
        }
        Ok(e)
    }

    /// Energy of ion `k` with every other ion plus its trap term.
    pub fn site_energy(&self, positions: &[Vec3], k: usize, r: &Vec3) -> f64 {
        let mut e = self.trap(r);
        for (j, rj) in positions.iter().enumerate() {
            if j != k {
                e += 1.0 / distance(r, rj);
            }
        }
        e
    }

    pub fn gradient(&self, positions: &[Vec3]) -> Result<DVector<f64>> {
        let n = positions.len();
        let mut g = DVector::zeros(3 * n);
        for (k, rk) in positions.iter().enumerate() {
            g[3 * k] += self.in_plane * rk[0];
            g[3 * k + 1] += self.in_plane * rk[1];
            g[3 * k + 2] += self.axial * rk[2];
            for (j, rj) in positions.iter().enumerate().skip(k + 1) {
                let d = sub(rk, rj);
                let r = norm(&d);
                if r == 0.0 {
                    return Err(Error::CoincidentIons(k, j));
                }
                let inv3 = 1.0 / (r * r * r);
                for a in 0..3 {
                    g[3 * k + a] -= d[a] * inv3;
                    g[3 * j + a] += d[a] * inv3;
                }
            }
        }
        Ok(g)
    }

    pub fn hessian(&self, positions: &[Vec3]) -> Result<DMatrix<f64>> {
        let n = positions.len();
        let mut h = DMatrix::zeros(3 * n, 3 * n);
        for k in 0..n {
            h[(3 * k, 3 * k)] += self.in_plane;
            h[(3 * k + 1, 3 * k + 1)] += self.in_plane;
            h[(3 * k + 2, 3 * k + 2)] += self.axial;
        }
        for k in 0..n {
            for j in (k + 1)..n {
                let d = sub(&positions[k], &positions[j]);
                let r2 = dot(&d, &d);
                if r2 == 0.0 {
                    return Err(Error::CoincidentIons(k, j));
                }
                let r = r2.sqrt();
                let inv5 = 1.0 / (r2 * r2 * r);
                for a in 0..3 {
                    for b in 0..3 {
                        let delta = if a == b { r2 } else { 0.0 };
                        let t = (3.0 * d[a] * d[b] - delta) * inv5;
                        h[(3 * k + a, 3 * k + b)] += t;
                        h[(3 * j + a, 3 * j + b)] += t;
                        h[(3 * k + a, 3 * j + b)] -= t;
                        h[(3 * j + a, 3 * k + b)] -= t;
                    }
                }
            }
        }
        Ok(h)
    }
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &Vec3, b: &Vec3) -> f64 {
    norm(&sub(a, b))
}

/// Σ_k (x_k² + y_k²)
pub fn radial_moment(positions: &[Vec3]) -> f64 {
    positions.iter().map(|r| r[0] * r[0] + r[1] * r[1]).sum()
}

/// Unit generator of rigid rotation about the z axis, or `None` when every ion is on the axis.
pub fn rotation_generator(positions: &[Vec3]) -> Option<DVector<f64>> {
    let n = positions.len();
    let mut u = DVector::zeros(3 * n);
    for (k, r) in positions.iter().enumerate() {
        u[3 * k] = -r[1];
        u[3 * k + 1] = r[0];
    }
    let len = u.norm();
    (len > 0.0).then(|| u / len)
}
