//! Monte Carlo estimation of pivot probabilities over a quota grid: each
//! iteration draws one fair-coin coalition of all agents and reuses it for
//! every (agent, quota) pair, so estimates share common random numbers.

use crate::games::{GameError, PowerProfile, WeightProfile};
use crate::stochastic::RngSeed;
use rand::RngCore;
use rayon::prelude::*;

/// Iterations per independently seeded work block. Fixed so that results
/// depend only on (seed, sample count), never on thread scheduling.
const BLOCK_SAMPLES: u64 = 4096;

/// Estimated pivot probabilities, one row per agent and one column per quota.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotEstimate {
    /// probs[agent][quota] in [0, 1].
    pub probs: Vec<Vec<f64>>,
    /// Number of sampled coalitions.
    pub samples: u64,
    /// Seed the estimate was derived from.
    pub seed: RngSeed,
}

/// Estimate every agent's pivot probability at every quota from `samples`
/// uniformly random coalitions.
///
/// For each sampled coalition with weight S, agent i is pivotal at quota t
/// exactly when t lies in (S_wo, S_wo + w_i], where S_wo is the coalition
/// weight excluding i; the interval is located in the sorted quota grid by
/// binary search. Quotas may include the degenerate endpoints 0 and 1.
pub fn estimate_pivots(
    weights: &WeightProfile,
    quotas: &[f64],
    samples: u64,
    seed: RngSeed,
) -> Result<PivotEstimate, GameError> {
    if quotas.is_empty() {
        return Err(GameError::Invalid("quota grid must be non-empty".into()));
    }
    for &t in quotas {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(GameError::Invalid(format!(
                "quota must lie in [0, 1], got {t}"
            )));
        }
    }
    if samples == 0 {
        return Err(GameError::Invalid("sample count must be positive".into()));
    }

    let n = weights.len();
    let q = quotas.len();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| quotas[a].total_cmp(&quotas[b]));
    let sorted: Vec<f64> = order.iter().map(|&j| quotas[j]).collect();

    let ws = weights.as_slice();
    let words = n.div_ceil(64);
    let stride = q + 1;
    let blocks = samples.div_ceil(BLOCK_SAMPLES);

    let diff = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = seed.derive(block).rng();
            let iters = BLOCK_SAMPLES.min(samples - block * BLOCK_SAMPLES);
            let mut bits = vec![0u64; words];
            let mut local = vec![0i64; n * stride];
            for _ in 0..iters {
                for word in bits.iter_mut() {
                    *word = rng.next_u64();
                }
                let mut coalition = 0.0;
                for (i, &w) in ws.iter().enumerate() {
                    if bits[i >> 6] >> (i & 63) & 1 == 1 {
                        coalition += w;
                    }
                }
                for (i, &w) in ws.iter().enumerate() {
                    let without = if bits[i >> 6] >> (i & 63) & 1 == 1 {
                        coalition - w
                    } else {
                        coalition
                    };
                    let lower = sorted.partition_point(|&t| t <= without);
                    let upper = sorted.partition_point(|&t| t <= without + w);
                    if lower < upper {
                        local[i * stride + lower] += 1;
                        local[i * stride + upper] -= 1;
                    }
                }
            }
            local
        })
        .reduce(
            || vec![0i64; n * stride],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let mut probs = vec![vec![0.0; q]; n];
    for i in 0..n {
        let mut running = 0i64;
        for (pos, &orig) in order.iter().enumerate() {
            running += diff[i * stride + pos];
            probs[i][orig] = running as f64 / samples as f64;
        }
    }
    Ok(PivotEstimate {
        probs,
        samples,
        seed,
    })
}

/// Extract one quota column as a power profile; the flag reports a
/// degenerate all-zero column (no pivot was ever sampled).
pub fn normalize_power(
    estimate: &PivotEstimate,
    quota_index: usize,
) -> Result<(PowerProfile, bool), GameError> {
    let q = estimate.probs.first().map_or(0, Vec::len);
    if quota_index >= q {
        return Err(GameError::Invalid(format!(
            "quota index {quota_index} out of range for {q} quotas"
        )));
    }
    let raw: Vec<f64> = estimate.probs.iter().map(|row| row[quota_index]).collect();
    let degenerate = raw.iter().all(|&b| b == 0.0);
    Ok((PowerProfile::from_raw(raw), degenerate))
}
