use std::f64::consts::TAU;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::Complex;

use crate::error::{Error, Result};

/// Carrier under a Gaussian envelope on the window [0, duration], all in units of 1/ω_c:
/// g(t) = cos(ν(t − t_c)) exp(−(t − t_c)²/σ²).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Envelope {
    pub duration: f64,
    pub center: f64,
    pub width: f64,
    pub carrier: f64,
}

impl Envelope {
    /// Centered envelope with σ = duration/10.
    pub fn centered(duration: f64, carrier: f64) -> Self {
        Envelope { duration, center: 0.5 * duration, width: 0.1 * duration, carrier }
    }

    pub fn value(&self, t: f64) -> f64 {
        let u = t - self.center;
        (self.carrier * u).cos() * (-(u * u) / (self.width * self.width)).exp()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.duration > 0.0
            && self.width > 0.0
            && self.carrier >= 0.0
            && self.center >= 0.0
            && self.center <= self.duration
            && [self.duration, self.width, self.carrier, self.center].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid envelope {self:?}")))
        }
    }
}

/// Composite Gauss–Legendre settings. `panels = None` picks twice the minimum count.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Quadrature {
    pub nodes_per_panel: usize,
    pub panels: Option<usize>,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { nodes_per_panel: 20, panels: None }
    }
}

/// Samples required per period of the fastest oscillation.
pub const SAMPLES_PER_PERIOD: f64 = 20.0;

impl Quadrature {
    /// Smallest panel count giving 20 nodes per period of `fastest` and panels no wider
    /// than the envelope width.
    pub fn required_panels(&self, envelope: &Envelope, fastest: f64) -> usize {
        let n = self.nodes_per_panel.max(1) as f64;
        let periods = envelope.duration * fastest.max(envelope.carrier) / TAU;
        let by_period = (SAMPLES_PER_PERIOD * periods / n).ceil();
        let by_envelope = (envelope.duration / envelope.width).ceil();
        by_period.max(by_envelope).max(1.0) as usize
    }

    pub fn panel_count(&self, envelope: &Envelope, fastest: f64) -> Result<usize> {
        let required = self.required_panels(envelope, fastest);
        match self.panels {
            None => Ok(2 * required),
            Some(p) if p >= required => Ok(p),
            Some(p) => Err(Error::UnderResolved { required, given: p }),
        }
    }

    pub fn refined(&self, envelope: &Envelope, fastest: f64) -> Result<Quadrature> {
        Ok(Quadrature { panels: Some(2 * self.panel_count(envelope, fastest)?), ..*self })
    }
}

/// Precomputed nodes, weights and envelope samples for one envelope and panel count.
#[derive(Debug, Clone)]
pub struct PanelGrid {
    nodes: usize,
    /// (t, w·g(t)) for every outer node.
    outer: Vec<(f64, f64)>,
    /// For outer node i, the sub-rule on [panel start, t_i]: (s, w·g(s)).
    inner: Vec<(f64, f64)>,
    panel_starts: Vec<f64>,
}

impl PanelGrid {
    pub fn new(envelope: &Envelope, nodes_per_panel: usize, panels: usize) -> Result<Self> {
        envelope.validate()?;
        let n = NonZeroUsize::new(nodes_per_panel)
            .ok_or_else(|| Error::InvalidParameter("nodes per panel must be positive".into()))?;
        let rule = GaussLegendre::new(n);
        let pairs = rule.as_node_weight_pairs();
        let h = envelope.duration / panels as f64;
        let mut outer = Vec::with_capacity(panels * pairs.len());
        let mut inner = Vec::with_capacity(panels * pairs.len() * pairs.len());
        let mut panel_starts = Vec::with_capacity(panels);
        for p in 0..panels {
            let a = p as f64 * h;
            panel_starts.push(a);
            for &(x, w) in pairs {
                let t = a + 0.5 * h * (x + 1.0);
                outer.push((t, 0.5 * h * w * envelope.value(t)));
                let len = t - a;
                for &(y, v) in pairs {
                    let s = a + 0.5 * len * (y + 1.0);
                    inner.push((s, 0.5 * len * v * envelope.value(s)));
                }
            }
        }
        Ok(PanelGrid { nodes: pairs.len(), outer, inner, panel_starts })
    }

    pub fn panels(&self) -> usize {
        self.panel_starts.len()
    }

    /// ∫₀^τ g(t) e^{iωt} dt
    pub fn transform(&self, omega: f64) -> Complex<f64> {
        self.outer.iter().map(|&(t, wg)| Complex::cis(omega * t) * wg).sum()
    }

    /// −∫∫_{s<t} g(t) g(s) sin(ω(t − s)) ds dt, evaluated as −Im ∫ g(t) e^{iωt} G(t) dt with
    /// G(t) = ∫₀^t g(s) e^{−iωs} ds.
    pub fn phase_kernel(&self, omega: f64) -> f64 {
        let n = self.nodes;
        let mut carried = Complex::new(0.0, 0.0);
        let mut total = 0.0;
        for p in 0..self.panels() {
            let mut panel = Complex::new(0.0, 0.0);
            for i in 0..n {
                let idx = p * n + i;
                let (t, wg) = self.outer[idx];
                let partial: Complex<f64> = self.inner[idx * n..(idx + 1) * n]
                    .iter()
                    .map(|&(s, vg)| Complex::cis(-omega * s) * vg)
                    .sum();
                total += (Complex::cis(omega * t) * (carried + partial)).im * wg;
                panel += Complex::cis(-omega * t) * wg;
            }
            carried += panel;
        }
        -total
    }
}

/// Time-stepped cross-check: RK4 on the interaction-picture amplitude b = β e^{iωt} and the
/// phase φ for a single mode driven by α(t) = c·g(t), with β̇ = −iωβ − iα, φ̇ = Re(α* β).
/// Returns (β(τ), φ(τ)).
pub fn integrate_mode(envelope: &Envelope, omega: f64, coupling: Complex<f64>, steps: usize) -> (Complex<f64>, f64) {
    let h = envelope.duration / steps as f64;
    let rhs = |t: f64, b: Complex<f64>| -> (Complex<f64>, f64) {
        let alpha = coupling * envelope.value(t);
        let db = Complex::new(0.0, -1.0) * alpha * Complex::cis(omega * t);
        let beta = b * Complex::cis(-omega * t);
        (db, (alpha.conj() * beta).re)
    };
    let mut b = Complex::new(0.0, 0.0);
    let mut phi = 0.0;
    for i in 0..steps {
        let t = i as f64 * h;
        let (k1, p1) = rhs(t, b);
        let (k2, p2) = rhs(t + 0.5 * h, b + k1 * (0.5 * h));
        let (k3, p3) = rhs(t + 0.5 * h, b + k2 * (0.5 * h));
        let (k4, p4) = rhs(t + h, b + k3 * h);
        b += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        phi += (p1 + 2.0 * p2 + 2.0 * p3 + p4) * (h / 6.0);
    }
    (b * Complex::cis(-omega * envelope.duration), phi)
}
