//! Truncated heat kernel `K` and its defect `Q = (∂_t − Δ)K − δ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Ratio between the spatial and temporal cutoff radii.
///
/// On the time support `t < r_K²` the Gaussian at `|x| = 13 r_K` is below
/// `e^{−42}`, so the spatial cutoff is invisible at double precision.
pub const SPATIAL_CUTOFF_FACTOR: f64 = 26.0;

fn f_smooth(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        (-1.0 / y).exp()
    }
}

fn df_smooth(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        f_smooth(y) / (y * y)
    }
}

/// Smooth step: 1 on `[0, ½]`, 0 on `[1, ∞)`.
pub fn cutoff(x: f64) -> f64 {
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let p = f_smooth(1.0 - x);
        p / (p + f_smooth(x - 0.5))
    }
}

/// Derivative of [`cutoff`].
pub fn cutoff_deriv(x: f64) -> f64 {
    if x <= 0.5 || x >= 1.0 {
        return 0.0;
    }
    let p = f_smooth(1.0 - x);
    let q = f_smooth(x - 0.5);
    let dp = -df_smooth(1.0 - x);
    let dq = df_smooth(x - 0.5);
    (dp * q - p * dq) / ((p + q) * (p + q))
}

/// `K(t, x) = G(t, x) φ(t) ρ(|x|)` with `φ(t) = ψ(√t / r_K)` and
/// `ρ(r) = ψ(r / (26 r_K))`, where `G` is the Gaussian heat kernel on `R^d`.
///
/// `K = G` whenever `√t < r_K/2` and `|x| < 13 r_K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedHeatKernel {
    d: usize,
    r_k: f64,
}

impl TruncatedHeatKernel {
    /// Default cutoff radius.
    pub const DEFAULT_RADIUS: f64 = 0.25;

    /// Kernel in dimension `d` with cutoff radius `r_K`.
    pub fn new(d: usize, r_k: f64) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(invalid("kernel dimension must be 2 or 3"));
        }
        if !(r_k > 0.0) || !r_k.is_finite() {
            return Err(invalid(format!("kernel radius must be positive, got {r_k}")));
        }
        Ok(TruncatedHeatKernel { d, r_k })
    }

    /// Identifier recorded in output metadata.
    pub fn id(&self) -> String {
        format!("heat-trunc-r{}", self.r_k)
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Cutoff radius `r_K`.
    pub fn radius(&self) -> f64 {
        self.r_k
    }

    /// Time horizon `T = r_K²` beyond which `K` vanishes.
    pub fn horizon(&self) -> f64 {
        self.r_k * self.r_k
    }

    /// Temporal cutoff `φ(t)`.
    pub fn phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        cutoff(t.sqrt() / self.r_k)
    }

    /// `φ'(t)`, supported in `(T/4, T)`.
    pub fn dphi(&self, t: f64) -> f64 {
        if t <= 0.25 * self.horizon() || t >= self.horizon() {
            return 0.0;
        }
        let s = t.sqrt();
        cutoff_deriv(s / self.r_k) / (2.0 * s * self.r_k)
    }

    /// Spatial cutoff `ρ(r)`.
    pub fn rho(&self, r: f64) -> f64 {
        cutoff(r / (SPATIAL_CUTOFF_FACTOR * self.r_k))
    }

    /// Gaussian heat kernel on `R^d`.
    pub fn gaussian(&self, t: f64, x: &[f64]) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let r2: f64 = x.iter().map(|c| c * c).sum();
        (4.0 * PI * t).powf(-(self.d as f64) / 2.0) * (-r2 / (4.0 * t)).exp()
    }

    /// `K(t, x)`.
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.gaussian(t, x) * self.phi(t) * self.rho(r)
    }

    /// `Q(t, x) = (∂_t − Δ)K − δ`, up to spatial-cutoff terms below `e^{−42}`.
    pub fn q(&self, t: f64, x: &[f64]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.gaussian(t, x) * self.dphi(t) * self.rho(r)
    }
}
