//! Seeded Gamma and Dirichlet samplers.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::{GammaParams, RngSeed, StochasticError};
use crate::games::WeightProfile;

/// Draw `count` i.i.d. Gamma(shape, scale) variates from a ChaCha stream
/// seeded with `seed`. The underlying sampler is the Marsaglia-Tsang squeeze,
/// which handles shape < 1 by boosting the shape and applying the U^(1/shape)
/// correction, so small fitted shapes are safe.
pub fn sample_gamma(
    params: GammaParams,
    count: usize,
    seed: RngSeed,
) -> Result<Vec<f64>, StochasticError> {
    let dist = Gamma::new(params.shape, params.scale)
        .map_err(|e| StochasticError::Domain(format!("gamma sampler rejected parameters: {e}")))?;
    let mut rng = seed.rng();
    Ok((0..count).map(|_| dist.sample(&mut rng)).collect())
}

/// Draw one weight profile from the symmetric Dirichlet with concentration
/// `alpha` over `n` agents: normalize n Gamma(alpha, 1) draws.
///
/// The scale parameter of the underlying Gamma cancels in the normalization,
/// so it is fixed at 1.
pub fn sample_dirichlet_symmetric(
    n: usize,
    alpha: f64,
    seed: RngSeed,
) -> Result<WeightProfile, StochasticError> {
    if n == 0 {
        return Err(StochasticError::EmptySample);
    }
    let dist = Gamma::new(alpha, 1.0)
        .map_err(|e| StochasticError::Domain(format!("gamma sampler rejected parameters: {e}")))?;
    let mut rng = seed.rng();
    let mut draws: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let mut total: f64 = draws.iter().sum();
    // Gamma draws are almost surely positive; an all-zero vector can only
    // arise from underflow at tiny alpha. Re-draw rather than divide by zero.
    while total <= 0.0 {
        for d in draws.iter_mut() {
            *d = dist.sample(&mut rng);
        }
        total = draws.iter().sum();
    }
    for d in draws.iter_mut() {
        *d /= total;
    }
    WeightProfile::new(draws)
        .map_err(|e| StochasticError::Domain(format!("sampled profile invalid: {e}")))
}

/// Internal helper for callers that need a raw simplex point without the
/// profile validation overhead (hot loops).
pub(crate) fn dirichlet_into(alpha: f64, out: &mut [f64], rng: &mut impl Rng) {
    let dist = Gamma::new(alpha, 1.0).expect("validated alpha");
    loop {
        let mut total = 0.0;
        for slot in out.iter_mut() {
            let g = dist.sample(rng);
            *slot = g;
            total += g;
        }
        if total > 0.0 {
            for slot in out.iter_mut() {
                *slot /= total;
            }
            return;
        }
    }
}
