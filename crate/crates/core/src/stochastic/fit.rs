//! Maximum-likelihood Gamma fitting and order-statistic summaries for
//! empirical stake data.

use super::special::{digamma, trigamma};
use super::{GammaParams, StochasticError};

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 200;
/// Below this value of s = ln(mean) - mean(ln) the sample is treated as
/// constant; the MLE shape diverges as 1/s.
const DEGENERATE_S: f64 = 1e-12;

/// Fit Gamma(shape, scale) by maximum likelihood.
///
/// The scale is profiled out (scale = mean/shape), leaving a one-dimensional
/// root problem ln(shape) - psi(shape) = s solved by damped Newton from the
/// standard closed-form initializer. At the returned parameters both
/// log-likelihood gradient components vanish to first order.
pub fn fit_gamma_mle(samples: &[f64]) -> Result<GammaParams, StochasticError> {
    if samples.is_empty() {
        return Err(StochasticError::EmptySample);
    }
    let mut sum = 0.0;
    let mut log_sum = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        if x <= 0.0 || !x.is_finite() {
            return Err(StochasticError::NonPositiveSample(i));
        }
        sum += x;
        log_sum += x.ln();
    }
    let n = samples.len() as f64;
    let mean = sum / n;
    let s = mean.ln() - log_sum / n;
    if !s.is_finite() {
        return Err(StochasticError::Domain(format!(
            "sample statistic s = ln(mean) - mean(ln) is not finite (s={s})"
        )));
    }
    // Jensen gives s >= 0 with equality iff all samples are equal.
    if s < DEGENERATE_S {
        return Err(StochasticError::DegenerateSample);
    }
    let mut alpha = (3.0 - s + ((s - 3.0) * (s - 3.0) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..NEWTON_MAX_ITER {
        let f = alpha.ln() - digamma(alpha) - s;
        let fprime = 1.0 / alpha - trigamma(alpha);
        let mut step = f / fprime;
        // keep the iterate strictly positive
        while alpha - step <= 0.0 {
            step *= 0.5;
        }
        alpha -= step;
        if step.abs() < NEWTON_TOL {
            return GammaParams::new(alpha, mean / alpha);
        }
    }
    Err(StochasticError::NoConvergence(format!(
        "shape update failed to converge below {NEWTON_TOL} (last alpha={alpha})"
    )))
}

/// Order statistics for a stake sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StakeSummary {
    pub count: usize,
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

/// Count, min, median, mean, max of a sample. The median of an even-length
/// sample is the lower-middle order statistic, not the midpoint average.
pub fn stake_summary(samples: &[f64]) -> Result<StakeSummary, StochasticError> {
    if samples.is_empty() {
        return Err(StochasticError::EmptySample);
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(StochasticError::Domain(format!(
            "non-finite sample at index {i}"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let count = sorted.len();
    Ok(StakeSummary {
        count,
        min: sorted[0],
        median: sorted[(count - 1) / 2],
        mean: sorted.iter().sum::<f64>() / count as f64,
        max: sorted[count - 1],
    })
}
