//! Gauss–Legendre rules and the four-dimensional integration settings.

use serde::{Deserialize, Serialize};

use crate::error::{DpaError, Result};

pub const DEFAULT_START_NODES: usize = 24;
pub const DEFAULT_MAX_DOUBLINGS: usize = 4;
pub const DEFAULT_TOL_WLN: f64 = 2e-3;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `P_n(z)` and `P_n'(z)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Rule rescaled to `[-half, half]`.
pub fn scaled_rule(n: usize, half: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.into_iter().map(|v| v * half).collect(),
        w.into_iter().map(|v| v * half).collect(),
    )
}

/// Sum by recursive halving; the result depends only on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2..=8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Tensor Gauss–Legendre settings for phase-space integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Half-width of the integration box per axis. `None` picks
    /// `max(5, 3 + 2 sqrt(nbar_total + 1))` from the state.
    pub box_halfwidth: Option<f64>,
    pub nodes_per_axis: usize,
    pub max_doublings: usize,
    pub tol_wln: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            box_halfwidth: None,
            nodes_per_axis: DEFAULT_START_NODES,
            max_doublings: DEFAULT_MAX_DOUBLINGS,
            tol_wln: DEFAULT_TOL_WLN,
        }
    }
}

impl QuadratureConfig {
    pub fn default_box(nbar_total: f64) -> f64 {
        f64::max(5.0, 3.0 + 2.0 * (nbar_total + 1.0).sqrt())
    }

    pub fn validate(&self, nbar_total: f64) -> Result<()> {
        if self.nodes_per_axis < 2 || self.nodes_per_axis % 2 != 0 {
            return Err(DpaError::InvalidParameter(format!(
                "nodes per axis must be even and at least 2, got {}",
                self.nodes_per_axis
            )));
        }
        if self.max_doublings > DEFAULT_MAX_DOUBLINGS {
            return Err(DpaError::InvalidParameter(format!(
                "at most {DEFAULT_MAX_DOUBLINGS} doublings, got {}",
                self.max_doublings
            )));
        }
        if !(self.tol_wln.is_finite() && self.tol_wln > 0.0) {
            return Err(DpaError::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol_wln
            )));
        }
        if let Some(l) = self.box_halfwidth {
            let min = 3.0 + 2.0 * (nbar_total + 1.0).sqrt();
            if !(l.is_finite() && l >= min) {
                return Err(DpaError::InvalidParameter(format!(
                    "box half-width {l} below the minimum {min:.4} for this energy"
                )));
            }
        }
        Ok(())
    }

    pub fn halfwidth(&self, nbar_total: f64) -> f64 {
        self.box_halfwidth
            .unwrap_or_else(|| Self::default_box(nbar_total))
    }
}
