//! Zeroth-order gradient estimates of Gaussian-smoothed functions, and
//! central finite differences for validating analytic gradients.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, numerical, Result};

fn default_sigma() -> f64 {
    0.05
}
fn default_samples() -> usize {
    1000
}
fn yes() -> bool {
    true
}

/// Estimator for `∇ E_z f(x + σz)`, `z ~ N(0, I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudogradConfig {
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Function evaluations at perturbed points (rounded up to even when antithetic).
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "yes")]
    pub antithetic: bool,
    #[serde(default = "yes")]
    pub baseline: bool,
}

impl Default for PseudogradConfig {
    fn default() -> Self {
        PseudogradConfig {
            sigma: default_sigma(),
            samples: default_samples(),
            antithetic: true,
            baseline: true,
        }
    }
}

impl PseudogradConfig {
    pub fn new(sigma: f64, samples: usize) -> Self {
        PseudogradConfig {
            sigma,
            samples,
            ..Self::default()
        }
    }

    pub fn plain(sigma: f64, samples: usize) -> Self {
        PseudogradConfig {
            sigma,
            samples,
            antithetic: false,
            baseline: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.samples == 0 {
            return Err(invalid("samples must be at least 1"));
        }
        Ok(())
    }
}

/// Mean and per-coordinate standard error of a pseudogradient estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Number of independent terms averaged (pairs when antithetic).
    pub terms: usize,
}

/// Central differences `(f(x + h e_d) − f(x − h e_d)) / 2h`.
pub fn finite_difference_gradient(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(invalid("step must be positive"));
    }
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for d in 0..x.len() {
        probe[d] = x[d] + h;
        let up = f(&probe);
        probe[d] = x[d] - h;
        let down = f(&probe);
        probe[d] = x[d];
        if !(up.is_finite() && down.is_finite()) {
            return Err(numerical(
                0,
                format!("non-finite evaluation along coordinate {d}"),
            ));
        }
        out.push((up - down) / (2.0 * h));
    }
    Ok(out)
}

/// Pseudogradient estimate `(1/N) Σ (f(x + σz) − b) z / σ`.
pub fn pseudogradient<R: Rng + ?Sized>(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    cfg: &PseudogradConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(pseudogradient_estimate(f, x, cfg, rng)?.mean)
}

/// [`pseudogradient`] with standard errors.
pub fn pseudogradient_estimate<R: Rng + ?Sized>(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    cfg: &PseudogradConfig,
    rng: &mut R,
) -> Result<Estimate> {
    cfg.validate()?;
    let dim = x.len();
    let eval = |p: &[f64]| -> Result<f64> {
        let v = f(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(numerical(0, "non-finite function value"))
        }
    };
    let base = if cfg.baseline { eval(x)? } else { 0.0 };
    let terms = if cfg.antithetic {
        cfg.samples.div_ceil(2)
    } else {
        cfg.samples
    };

    let mut sum = vec![0.0; dim];
    let mut sum_sq = vec![0.0; dim];
    let mut z = vec![0.0; dim];
    let mut probe = vec![0.0; dim];
    for _ in 0..terms {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        for d in 0..dim {
            probe[d] = x[d] + cfg.sigma * z[d];
        }
        let up = eval(&probe)?;
        let scale = if cfg.antithetic {
            for d in 0..dim {
                probe[d] = x[d] - cfg.sigma * z[d];
            }
            let down = eval(&probe)?;
            // average of the +z and −z terms; the baseline cancels
            ((up - base) - (down - base)) / (2.0 * cfg.sigma)
        } else {
            (up - base) / cfg.sigma
        };
        for d in 0..dim {
            let g = scale * z[d];
            sum[d] += g;
            sum_sq[d] += g * g;
        }
    }
    let n = terms as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_error = if terms > 1 {
        mean.iter()
            .zip(&sum_sq)
            .map(|(m, sq)| (((sq - n * m * m) / (n - 1.0)).max(0.0) / n).sqrt())
            .collect()
    } else {
        vec![f64::INFINITY; dim]
    };
    Ok(Estimate {
        mean,
        std_error,
        terms,
    })
}
