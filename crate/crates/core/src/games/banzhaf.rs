//! Banzhaf power computation: exact subset enumeration (single quota or a
//! whole quota grid in one pass), subset-sum dynamic programming for integer
//! stakes, and a meet-in-the-middle pivot count for a single agent.
//!
//! Conventions shared by every routine here: a coalition wins when its weight
//! is at least the quota, and an agent is pivotal in a coalition that contains
//! it when the coalition wins but loses without the agent. The raw index of an
//! agent is its number of pivotal coalitions divided by 2^(n-1).

use super::{GameError, PowerProfile, WeightProfile};
use rayon::prelude::*;

/// Default cap on agents for exact enumeration (2^n subsets).
pub const ENUM_AGENT_LIMIT: usize = 30;
/// Hard cap on the other-agent count for the meet-in-the-middle counter.
pub const MITM_OTHERS_LIMIT: usize = 40;

/// Subsets processed per parallel work item; fixed so results do not depend
/// on thread count.
const BLOCK_BITS: u32 = 14;
/// Cap on the dynamic-programming table length (16 bytes per cell).
const MAX_DP_CELLS: u64 = 1 << 27;

fn validate_quota_grid(quotas: &[f64]) -> Result<(), GameError> {
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
    Ok(())
}

/// Exact raw and normalized Banzhaf indices by enumerating all coalitions.
pub fn banzhaf_enumerate(weights: &WeightProfile, theta: f64) -> Result<PowerProfile, GameError> {
    banzhaf_enumerate_within(weights, theta, ENUM_AGENT_LIMIT)
}

/// Exact enumeration with a caller-chosen agent cap (at most 62).
pub fn banzhaf_enumerate_within(
    weights: &WeightProfile,
    theta: f64,
    limit: usize,
) -> Result<PowerProfile, GameError> {
    let mut grid = enumerate_grid_within(weights, &[theta], limit)?;
    Ok(grid.pop().expect("one quota in, one profile out"))
}

/// Exact indices for every quota in `quotas` (any order, duplicates allowed)
/// in a single pass over the 2^n coalitions. Returns one power profile per
/// quota, aligned with the input order.
pub fn banzhaf_enumerate_grid(
    weights: &WeightProfile,
    quotas: &[f64],
) -> Result<Vec<PowerProfile>, GameError> {
    enumerate_grid_within(weights, quotas, ENUM_AGENT_LIMIT)
}

fn enumerate_grid_within(
    weights: &WeightProfile,
    quotas: &[f64],
    limit: usize,
) -> Result<Vec<PowerProfile>, GameError> {
    let n = weights.len();
    let limit = limit.min(62);
    if n > limit {
        return Err(GameError::TooManyAgents { n, limit });
    }
    validate_quota_grid(quotas)?;

    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| quotas[a].total_cmp(&quotas[b]));
    let sorted: Vec<f64> = order.iter().map(|&j| quotas[j]).collect();

    let counts = enumerate_grid_kernel(weights.as_slice(), &sorted);

    let denom = (1u64 << (n - 1)) as f64;
    let mut raw = vec![vec![0.0; n]; quotas.len()];
    for (pos, &orig) in order.iter().enumerate() {
        for i in 0..n {
            raw[orig][i] = counts[i][pos] as f64 / denom;
        }
    }
    Ok(raw.into_iter().map(PowerProfile::from_raw).collect())
}

/// Pivot counts per agent and per (ascending) quota. Coalitions are scanned
/// in fixed-size blocks; each block yields integer tallies, so the result is
/// identical for any thread count.
fn enumerate_grid_kernel(weights: &[f64], sorted_quotas: &[f64]) -> Vec<Vec<u64>> {
    let n = weights.len();
    let q = sorted_quotas.len();
    let low_bits = (n as u32).min(BLOCK_BITS);
    let low_len = 1usize << low_bits;

    // Subset sums of the low bit range, shared by every block.
    let mut low_sums = vec![0.0f64; low_len];
    for m in 1..low_len {
        let i = m.trailing_zeros() as usize;
        low_sums[m] = low_sums[m & (m - 1)] + weights[i];
    }

    let blocks = 1usize << (n as u32 - low_bits);
    let stride = q + 1;
    let diff = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let high_mask = b << low_bits;
            let mut high_sum = 0.0;
            {
                let mut rem = high_mask;
                while rem != 0 {
                    let i = rem.trailing_zeros() as usize;
                    rem &= rem - 1;
                    high_sum += weights[i];
                }
            }
            let mut local = vec![0i64; n * stride];
            for (low, &low_sum) in low_sums.iter().enumerate() {
                let mask = high_mask | low;
                if mask == 0 {
                    continue;
                }
                let coalition_weight = high_sum + low_sum;
                let upper = sorted_quotas.partition_point(|&t| t <= coalition_weight);
                let mut rem = mask;
                while rem != 0 {
                    let i = rem.trailing_zeros() as usize;
                    rem &= rem - 1;
                    let without = coalition_weight - weights[i];
                    let lower = sorted_quotas.partition_point(|&t| t <= without);
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

    let mut counts = vec![vec![0u64; q]; n];
    for i in 0..n {
        let mut running = 0i64;
        for j in 0..q {
            running += diff[i * stride + j];
            counts[i][j] = running as u64;
        }
    }
    counts
}

/// Exact Banzhaf indices for integer stakes under a linear weight rule, via
/// subset-sum counting. The coalition wins when its stake total reaches
/// `quota`. Counts are exact in 128-bit integers for up to 128 positive-stake
/// agents; beyond that a probability-space recurrence in f64 is used.
pub fn banzhaf_dp(stakes: &[u64], quota: u64) -> Result<PowerProfile, GameError> {
    if stakes.is_empty() {
        return Err(GameError::EmptyProfile);
    }
    let n = stakes.len();
    let total: u128 = stakes.iter().map(|&s| s as u128).sum();
    if total == 0 {
        return Err(GameError::DegenerateStakes);
    }
    // quota 0: every coalition wins, nobody is ever pivotal.
    // quota above the grand total: nobody ever wins.
    if quota == 0 || quota as u128 > total {
        return Ok(PowerProfile::from_raw(vec![0.0; n]));
    }
    if quota > MAX_DP_CELLS {
        return Err(GameError::Invalid(format!(
            "quota {quota} needs a table beyond {MAX_DP_CELLS} cells; rescale the stakes"
        )));
    }

    let positive: Vec<(usize, u64)> = stakes
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, s)| s > 0)
        .collect();
    let pos_stakes: Vec<u64> = positive.iter().map(|&(_, s)| s).collect();
    // Zero-stake agents never shift a coalition sum: they scale every subset
    // count by the same power of two, which cancels in the index.
    let per_positive = if pos_stakes.len() <= 128 {
        dp_exact(&pos_stakes, quota)
    } else {
        dp_float(&pos_stakes, quota)
    };

    let mut raw = vec![0.0; n];
    for (&(orig, _), b) in positive.iter().zip(per_positive) {
        raw[orig] = b;
    }
    Ok(PowerProfile::from_raw(raw))
}

/// Exact path: u128 subset counts, table over sums 0..quota.
fn dp_exact(stakes: &[u64], quota: u64) -> Vec<f64> {
    let cap = quota as usize;
    let p = stakes.len();
    let mut with_all = vec![0u128; cap];
    with_all[0] = 1;
    for &s in stakes {
        let s = s as usize;
        if s >= cap {
            continue; // never contributes to sums below the quota
        }
        for t in (s..cap).rev() {
            with_all[t] += with_all[t - s];
        }
    }
    let denom = 2f64.powi(p as i32 - 1);
    stakes
        .iter()
        .map(|&s| {
            let s = s as usize;
            // Counts over coalitions excluding this agent, by dividing its
            // factor back out of the full table.
            let mut without = with_all.clone();
            if s < cap {
                for t in s..cap {
                    without[t] -= without[t - s];
                }
            }
            let lo = cap.saturating_sub(s);
            let pivots: u128 = without[lo..cap].iter().sum();
            // pivots <= 2^(p-1) <= 2^127, within f64 range
            pivots as f64 / denom
        })
        .collect()
}

/// Probability-space path for more than 128 positive agents: the table holds
/// subset counts scaled by 2^-p, so entries stay in f64 range.
fn dp_float(stakes: &[u64], quota: u64) -> Vec<f64> {
    let cap = quota as usize;
    let mut with_all = vec![0.0f64; cap];
    with_all[0] = 1.0;
    for &s in stakes {
        let s = s as usize;
        if s >= cap {
            for v in &mut with_all[..] {
                *v *= 0.5;
            }
            continue;
        }
        for t in (s..cap).rev() {
            with_all[t] = 0.5 * (with_all[t] + with_all[t - s]);
        }
        for v in &mut with_all[..s.min(cap)] {
            *v *= 0.5;
        }
    }
    stakes
        .iter()
        .map(|&s| {
            let s = s as usize;
            let mut without = with_all.clone();
            if s < cap {
                for v in &mut without[..s] {
                    *v *= 2.0;
                }
                for t in s..cap {
                    without[t] = 2.0 * without[t] - without[t - s];
                }
            } else {
                for v in &mut without[..] {
                    *v *= 2.0;
                }
            }
            let lo = cap.saturating_sub(s);
            without[lo..cap].iter().sum()
        })
        .collect()
}

/// Exact pivot probability of one agent with weight `own` against the listed
/// other agents, by meet-in-the-middle subset-sum counting. The other agents'
/// weights may live on any scale (they need not sum to one with `own`).
///
/// Counts coalitions T of the others with theta - own <= sum(T) < theta,
/// divided by 2^m. Boundary comparisons use sums grouped as
/// (left half) + (right half) against theta - own and theta; ties at the
/// quota follow the inclusive win rule up to that grouping.
pub fn pivot_probability_exact(
    own: f64,
    others: &[f64],
    theta: f64,
) -> Result<f64, GameError> {
    let m = others.len();
    if m > MITM_OTHERS_LIMIT {
        return Err(GameError::TooManyAgents {
            n: m,
            limit: MITM_OTHERS_LIMIT,
        });
    }
    if !own.is_finite() || own < 0.0 {
        return Err(GameError::InvalidWeight {
            index: 0,
            reason: format!("focal weight must be finite and non-negative, got {own}"),
        });
    }
    if let Some(i) = others.iter().position(|w| !w.is_finite() || *w < 0.0) {
        return Err(GameError::InvalidWeight {
            index: i,
            reason: format!("must be finite and non-negative, got {}", others[i]),
        });
    }
    if !theta.is_finite() {
        return Err(GameError::QuotaOutOfRange { theta });
    }

    let (left, right) = others.split_at(m / 2);
    MITM_SCRATCH.with(|bufs| {
        let [left_cur, left_next, right_cur, right_next] = &mut *bufs.borrow_mut();
        sorted_subset_sums(left, left_cur, left_next);
        sorted_subset_sums(right, right_cur, right_next);
        let (left_sums, right_sums) = (&*left_cur, &*right_cur);

        // ascending left sums push both window bounds theta-own-l and
        // theta-l down monotonically, so two descending cursors replace
        // per-element binary searches
        let mut start = right_sums.len();
        let mut end = right_sums.len();
        let mut pivots: u64 = 0;
        for &l in left_sums {
            let lo = theta - own - l;
            let hi = theta - l;
            while start > 0 && right_sums[start - 1] >= lo {
                start -= 1;
            }
            while end > 0 && right_sums[end - 1] >= hi {
                end -= 1;
            }
            pivots += (end - start) as u64;
        }
        Ok(pivots as f64 / 2f64.powi(m as i32))
    })
}

thread_local! {
    /// Scratch for the meet-in-the-middle halves; reused across calls so the
    /// hot path never reallocates.
    static MITM_SCRATCH: std::cell::RefCell<[Vec<f64>; 4]> = const {
        std::cell::RefCell::new([Vec::new(), Vec::new(), Vec::new(), Vec::new()])
    };
}

/// Fills `cur` with all 2^k subset sums in ascending order, built by merging
/// each element's shifted copy instead of sorting. Every subset's value is
/// the left-to-right sum of its members, the same additions a plain doubling
/// enumeration does.
fn sorted_subset_sums(weights: &[f64], cur: &mut Vec<f64>, next: &mut Vec<f64>) {
    cur.clear();
    cur.push(0.0);
    for &w in weights {
        let len = cur.len();
        next.clear();
        next.reserve(2 * len);
        let (mut i, mut j) = (0, 0);
        while i < len || j < len {
            let a = if i < len { cur[i] } else { f64::INFINITY };
            let b = if j < len { cur[j] + w } else { f64::INFINITY };
            if a <= b {
                next.push(a);
                i += 1;
            } else {
                next.push(b);
                j += 1;
            }
        }
        std::mem::swap(cur, next);
    }
}
