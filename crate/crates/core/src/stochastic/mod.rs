//! Randomness and distribution layer: Gamma/Dirichlet sampling, the Beta
//! marginal of a symmetric Dirichlet coordinate, maximum-likelihood Gamma
//! fitting, and the order statistics used for stake summaries.

mod fit;
mod sample;
pub mod special;

pub use fit::{fit_gamma_mle, stake_summary, StakeSummary};
pub use sample::{sample_dirichlet_symmetric, sample_gamma};
pub(crate) use sample::dirichlet_into;
pub use special::{beta_density_x1, digamma, ln_beta, ln_gamma, reg_inc_beta, trigamma};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StochasticError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("log-likelihood undefined: samples must be strictly positive (offender at index {0})")]
    NonPositiveSample(usize),
    #[error("degenerate sample (α → ∞): all values are equal")]
    DegenerateSample,
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("empty sample")]
    EmptySample,
}

/// Shape/scale parameterization of the Gamma distribution; density
/// proportional to x^(shape-1) exp(-x/scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub shape: f64,
    pub scale: f64,
}

impl GammaParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self, StochasticError> {
        if shape <= 0.0 || !shape.is_finite() || scale <= 0.0 || !scale.is_finite() {
            return Err(StochasticError::Domain(format!(
                "Gamma parameters must be positive and finite, got shape={shape}, scale={scale}"
            )));
        }
        Ok(Self { shape, scale })
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }
}

/// Seed for every randomized operation in the crate.
///
/// Derived seeds (`derive`) feed independently keyed ChaCha streams, so
/// parallel work can be split into deterministically seeded blocks whose
/// results do not depend on the thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Derive a stream seed for a tagged sub-task (block index, profile
    /// index, ...). Uses splitmix64 finalization twice so related tags do not
    /// produce related streams.
    pub fn derive(self, tag: u64) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ splitmix64(tag.wrapping_add(0x9E37_79B9_7F4A_7C15))))
    }

    /// Fresh deterministic generator for this seed.
    pub fn rng(self) -> rand_chacha::ChaCha8Rng {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
