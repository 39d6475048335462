//! Experiment drivers: quota-grid sweeps over sampled weight profiles,
//! single-quota ratio distributions, and the single-agent ratio simulation
//! that cross-checks the analytic variance.

use crate::games::{
    banzhaf_enumerate_grid, pivot_probability_exact, power_stake_ratios, GameError, PowerProfile,
    RatioKind, WeightProfile, MITM_OTHERS_LIMIT,
};
use crate::montecarlo::estimate_pivots;
use crate::stochastic::{dirichlet_into, sample_dirichlet_symmetric, RngSeed};
use crate::Error;
use rand::Rng;
use rand_distr::Beta;
use rayon::prelude::*;

/// How per-profile power indices are obtained during sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerEstimator {
    /// Coalition sampling with the given iteration count.
    MonteCarlo { samples: u64 },
    /// Exact subset enumeration (small populations only).
    ExactEnumeration,
}

/// Configuration of a quota-grid sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Number of agents per profile.
    pub n: usize,
    /// Symmetric Dirichlet concentration for profile sampling.
    pub alpha: f64,
    /// Number of sampled weight profiles (ignored when profiles are
    /// injected).
    pub stake_draws: usize,
    /// Quota grid, each value in [0, 1]; endpoints are evaluated and flagged
    /// degenerate when no pivot is observed.
    pub quotas: Vec<f64>,
    pub estimator: PowerEstimator,
    /// Raw pivot probabilities or normalized indices in the ratios.
    pub ratio_kind: RatioKind,
    pub seed: RngSeed,
    /// Fixed profiles to evaluate instead of sampling; must match `n`.
    pub injected_profiles: Option<Vec<WeightProfile>>,
    /// Keep per-profile means/variances in the result.
    pub keep_per_profile: bool,
}

impl SweepConfig {
    /// Defaults: 100 profile draws, 15,000 coalition samples, a 101-point
    /// quota grid spanning [0, 1], normalized ratios.
    pub fn new(n: usize, alpha: f64, seed: RngSeed) -> Self {
        Self {
            n,
            alpha,
            stake_draws: 100,
            quotas: quota_grid(101),
            estimator: PowerEstimator::MonteCarlo { samples: 15_000 },
            ratio_kind: RatioKind::Normalized,
            seed,
            injected_profiles: None,
            keep_per_profile: false,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.n < 2 {
            return Err(Error::Config(format!(
                "population size must be at least 2, got {}",
                self.n
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::Config(format!(
                "concentration must be positive and finite, got {}",
                self.alpha
            )));
        }
        if self.quotas.is_empty() {
            return Err(Error::Config("quota grid must be non-empty".into()));
        }
        for &t in &self.quotas {
            if !t.is_finite() || !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!("quota must lie in [0, 1], got {t}")));
            }
        }
        if let PowerEstimator::MonteCarlo { samples } = self.estimator {
            if samples == 0 {
                return Err(Error::Config("sample count must be positive".into()));
            }
        }
        match &self.injected_profiles {
            Some(profiles) => {
                if profiles.is_empty() {
                    return Err(Error::Config("injected profile list is empty".into()));
                }
                if let Some(p) = profiles.iter().find(|p| p.len() != self.n) {
                    return Err(Error::Config(format!(
                        "injected profile has {} agents, expected {}",
                        p.len(),
                        self.n
                    )));
                }
            }
            None => {
                if self.stake_draws == 0 {
                    return Err(Error::Config("stake draw count must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Per-quota aggregates of a sweep, averaged over profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotaGridResult {
    pub quotas: Vec<f64>,
    /// Mean over profiles of the within-profile mean ratio.
    pub mean_ratio: Vec<f64>,
    /// Mean over profiles of the within-profile population variance.
    pub within_var: Vec<f64>,
    /// True where at least one profile produced an all-zero power column.
    pub degenerate: Vec<bool>,
    /// Per-profile means, one row per profile, when requested.
    pub per_profile_mean: Option<Vec<Vec<f64>>>,
    /// Per-profile variances, one row per profile, when requested.
    pub per_profile_var: Option<Vec<Vec<f64>>>,
}

/// Mean and population variance (divide by n, not n-1) of one profile's
/// power-stake ratio vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioStats {
    pub mean: f64,
    pub pop_var: f64,
}

/// Ratio mean and population variance for one power profile.
pub fn ratio_stats(
    power: &PowerProfile,
    weights: &WeightProfile,
    kind: RatioKind,
) -> Result<RatioStats, GameError> {
    let ratios = power_stake_ratios(power, weights, kind)?;
    Ok(stats_of(&ratios))
}

fn stats_of(values: &[f64]) -> RatioStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let pop_var = values.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    RatioStats { mean, pop_var }
}

/// Evenly spaced quota grid over [0, 1] inclusive.
pub fn quota_grid(len: usize) -> Vec<f64> {
    assert!(len >= 2, "grid needs at least the two endpoints");
    let step = 1.0 / (len - 1) as f64;
    (0..len).map(|j| (j as f64 * step).min(1.0)).collect()
}

/// The same grid without its degenerate endpoints.
pub fn interior_quota_grid(len: usize) -> Vec<f64> {
    let full = quota_grid(len);
    full[1..len - 1].to_vec()
}

/// The weight profiles a sweep config evaluates: injected or freshly
/// sampled. Sampling depends only on (seed, profile index), so two configs
/// sharing those fields see identical profiles.
fn sweep_profiles(cfg: &SweepConfig) -> Result<Vec<WeightProfile>, Error> {
    if let Some(profiles) = &cfg.injected_profiles {
        return Ok(profiles.clone());
    }
    (0..cfg.stake_draws)
        .map(|m| {
            sample_dirichlet_symmetric(cfg.n, cfg.alpha, cfg.seed.derive(m as u64).derive(0))
                .map_err(Error::from)
        })
        .collect()
}

/// Per-profile, per-quota ratio statistics plus degenerate-column flags.
fn per_profile_grid(
    cfg: &SweepConfig,
    quotas: &[f64],
) -> Result<(Vec<Vec<RatioStats>>, Vec<bool>), Error> {
    let profiles = sweep_profiles(cfg)?;
    let rows: Vec<(Vec<RatioStats>, Vec<bool>)> = profiles
        .par_iter()
        .enumerate()
        .map(|(m, profile)| -> Result<_, Error> {
            let raw_columns: Vec<Vec<f64>> = match cfg.estimator {
                PowerEstimator::MonteCarlo { samples } => {
                    let est = estimate_pivots(
                        profile,
                        quotas,
                        samples,
                        cfg.seed.derive(m as u64).derive(1),
                    )?;
                    (0..quotas.len())
                        .map(|j| est.probs.iter().map(|row| row[j]).collect())
                        .collect()
                }
                PowerEstimator::ExactEnumeration => banzhaf_enumerate_grid(profile, quotas)?
                    .into_iter()
                    .map(|p| p.raw)
                    .collect(),
            };
            let mut stats = Vec::with_capacity(quotas.len());
            let mut degenerate = Vec::with_capacity(quotas.len());
            for raw in raw_columns {
                degenerate.push(raw.iter().all(|&b| b == 0.0));
                let power = PowerProfile::from_raw(raw);
                stats.push(ratio_stats(&power, profile, cfg.ratio_kind)?);
            }
            Ok((stats, degenerate))
        })
        .collect::<Result<_, _>>()?;

    let mut flags = vec![false; quotas.len()];
    for (_, row_flags) in &rows {
        for (f, &b) in flags.iter_mut().zip(row_flags) {
            *f |= b;
        }
    }
    Ok((rows.into_iter().map(|(stats, _)| stats).collect(), flags))
}

/// Sweep the quota grid over sampled (or injected) profiles and average the
/// within-profile ratio statistics.
pub fn run_sweep(cfg: &SweepConfig) -> Result<QuotaGridResult, Error> {
    cfg.validate()?;
    let (per_profile, degenerate) = per_profile_grid(cfg, &cfg.quotas)?;
    let m = per_profile.len() as f64;
    let q = cfg.quotas.len();

    let mut mean_ratio = vec![0.0; q];
    let mut within_var = vec![0.0; q];
    for row in &per_profile {
        for (j, stat) in row.iter().enumerate() {
            mean_ratio[j] += stat.mean / m;
            within_var[j] += stat.pop_var / m;
        }
    }
    let (per_profile_mean, per_profile_var) = if cfg.keep_per_profile {
        let means = per_profile
            .iter()
            .map(|row| row.iter().map(|s| s.mean).collect())
            .collect();
        let vars = per_profile
            .iter()
            .map(|row| row.iter().map(|s| s.pop_var).collect())
            .collect();
        (Some(means), Some(vars))
    } else {
        (None, None)
    };
    Ok(QuotaGridResult {
        quotas: cfg.quotas.clone(),
        mean_ratio,
        within_var,
        degenerate,
        per_profile_mean,
        per_profile_var,
    })
}

/// Ratio statistics of every profile at a single quota (box-plot source
/// data). Profiles depend only on (seed, profile index), so two calls with
/// different quotas but the same seed evaluate identical profiles.
pub fn fixed_quota_distribution(cfg: &SweepConfig, theta: f64) -> Result<Vec<RatioStats>, Error> {
    cfg.validate()?;
    if !(theta.is_finite() && theta > 0.0 && theta < 1.0) {
        return Err(Error::Config(format!(
            "quota must lie strictly inside (0, 1), got {theta}"
        )));
    }
    let (per_profile, _) = per_profile_grid(cfg, &[theta])?;
    Ok(per_profile.into_iter().map(|row| row[0]).collect())
}

/// How the focal agent's ratio is estimated in the single-agent simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentRatioEstimator {
    /// One draw of the co-players per profile: the ratio of the realized
    /// index to the realized weight. Its variance includes the co-player
    /// randomness on top of the weight randomness.
    Realized,
    /// Average the index over `redraws` independent co-player draws at the
    /// profile's focal weight before dividing: estimates the variance of the
    /// conditional-mean ratio, the quantity the analytic module integrates.
    ConditionalMean { redraws: u32 },
}

/// Configuration of the single-agent ratio simulation.
#[derive(Debug, Clone)]
pub struct SingleAgentConfig {
    pub n: usize,
    pub alpha: f64,
    /// Interior quotas to evaluate.
    pub quotas: Vec<f64>,
    /// Weight profiles per repetition (the variance sample size).
    pub profiles_per_point: usize,
    /// Independent repetitions averaged for a stable estimate.
    pub repetitions: usize,
    pub estimator: AgentRatioEstimator,
    /// Fallback coalition samples when the population is too large for exact
    /// per-profile counting.
    pub coalition_samples: u64,
    pub seed: RngSeed,
    /// Fixed profiles (cycled) instead of sampling; the conditional-mean
    /// estimator takes only the focal weight from them.
    pub injected_profiles: Option<Vec<WeightProfile>>,
}

impl SingleAgentConfig {
    pub fn new(n: usize, alpha: f64, quotas: Vec<f64>, seed: RngSeed) -> Self {
        Self {
            n,
            alpha,
            quotas,
            profiles_per_point: 20,
            repetitions: 1,
            estimator: AgentRatioEstimator::ConditionalMean { redraws: 192 },
            coalition_samples: 15_000,
            seed,
            injected_profiles: None,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.n < 2 {
            return Err(Error::Config(format!(
                "population size must be at least 2, got {}",
                self.n
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::Config(format!(
                "concentration must be positive and finite, got {}",
                self.alpha
            )));
        }
        if self.quotas.is_empty() {
            return Err(Error::Config("quota list must be non-empty".into()));
        }
        for &t in &self.quotas {
            if !(t.is_finite() && t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!(
                    "quota must lie strictly inside (0, 1), got {t}"
                )));
            }
        }
        if self.profiles_per_point < 2 {
            return Err(Error::Config(
                "variance needs at least 2 profiles per point".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetition count must be positive".into()));
        }
        if let AgentRatioEstimator::ConditionalMean { redraws } = self.estimator {
            if redraws == 0 {
                return Err(Error::Config("redraw count must be positive".into()));
            }
        }
        if self.coalition_samples == 0 {
            return Err(Error::Config("sample count must be positive".into()));
        }
        if let Some(profiles) = &self.injected_profiles {
            if profiles.is_empty() {
                return Err(Error::Config("injected profile list is empty".into()));
            }
            if let Some(p) = profiles.iter().find(|p| p.len() != self.n) {
                return Err(Error::Config(format!(
                    "injected profile has {} agents, expected {}",
                    p.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// Mean and variance of the focal agent's power-stake ratio at one quota.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotaMoments {
    pub theta: f64,
    pub mean: f64,
    pub var: f64,
}

/// Pivot probability of the focal agent against fixed co-player weights:
/// exact subset counting when feasible, coalition sampling otherwise.
fn focal_power(
    own: f64,
    others: &[f64],
    theta: f64,
    coalition_samples: u64,
    seed: RngSeed,
) -> Result<f64, Error> {
    if others.len() <= MITM_OTHERS_LIMIT {
        return Ok(pivot_probability_exact(own, others, theta)?);
    }
    let mut entries = Vec::with_capacity(others.len() + 1);
    entries.push(own);
    entries.extend_from_slice(others);
    let profile = WeightProfile::new(entries)?;
    let est = estimate_pivots(&profile, &[theta], coalition_samples, seed)?;
    Ok(est.probs[0][0])
}

/// One ratio draw for the focal agent, plus the estimated variance the
/// estimator's own sampling noise contributes to that ratio (zero when the
/// draw is exact). Subtracting the noise term from the across-profile
/// variance leaves an unbiased estimate of the profile-level variance.
fn agent_ratio(
    cfg: &SingleAgentConfig,
    theta: f64,
    index: usize,
    seed: RngSeed,
) -> Result<(f64, f64), Error> {
    let focal_weight = |tag: u64| -> Result<f64, Error> {
        if let Some(profiles) = &cfg.injected_profiles {
            return Ok(profiles[index % profiles.len()].as_slice()[0]);
        }
        let beta = Beta::new(cfg.alpha, (cfg.n - 1) as f64 * cfg.alpha)
            .map_err(|e| Error::Config(format!("focal weight distribution: {e}")))?;
        let mut rng = seed.derive(tag).rng();
        loop {
            let c: f64 = rng.sample(beta);
            if c > 0.0 && c < 1.0 {
                return Ok(c);
            }
        }
    };

    match cfg.estimator {
        AgentRatioEstimator::Realized => {
            let profile = match &cfg.injected_profiles {
                Some(profiles) => profiles[index % profiles.len()].clone(),
                None => sample_dirichlet_symmetric(cfg.n, cfg.alpha, seed.derive(0))?,
            };
            let ws = profile.as_slice();
            let own = ws[0];
            if own <= 0.0 {
                return Err(Error::Config(
                    "focal agent has zero weight; its ratio is undefined".into(),
                ));
            }
            let b = focal_power(own, &ws[1..], theta, cfg.coalition_samples, seed.derive(1))?;
            // realization noise is part of this estimand, so none of it is
            // subtracted back out
            Ok((b / own, 0.0))
        }
        AgentRatioEstimator::ConditionalMean { redraws } => {
            let c = focal_weight(0)?;
            if c <= 0.0 {
                return Err(Error::Config(
                    "focal agent has zero weight; its ratio is undefined".into(),
                ));
            }
            let mut rng = seed.derive(1).rng();
            let mut others = vec![0.0; cfg.n - 1];
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for r in 0..redraws {
                dirichlet_into(cfg.alpha, &mut others, &mut rng);
                for w in &mut others {
                    *w *= 1.0 - c;
                }
                let b = focal_power(
                    c,
                    &others,
                    theta,
                    cfg.coalition_samples,
                    seed.derive(2).derive(r as u64),
                )?;
                sum += b;
                sum_sq += b * b;
            }
            let k = redraws as f64;
            let mean_b = sum / k;
            // unbiased redraw variance of the index; the ratio's noise
            // variance is that divided by the redraw count and the squared
            // focal weight
            let noise = if redraws > 1 {
                let sq = (sum_sq - k * mean_b * mean_b).max(0.0) / (k - 1.0);
                sq / (k * c * c)
            } else {
                0.0
            };
            Ok((mean_b / c, noise))
        }
    }
}

/// Estimate the mean and variance of the focal agent's power-stake ratio at
/// each quota: `repetitions` independent batches of `profiles_per_point`
/// weight draws. The variance is the unbiased sample variance across
/// profiles, with the estimator's own per-profile sampling noise subtracted
/// back out and the result averaged across batches (clamped at zero).
pub fn single_agent_simulation(cfg: &SingleAgentConfig) -> Result<Vec<QuotaMoments>, Error> {
    cfg.validate()?;
    cfg.quotas
        .par_iter()
        .enumerate()
        .map(|(qi, &theta)| -> Result<QuotaMoments, Error> {
            let mut mean_acc = 0.0;
            let mut var_acc = 0.0;
            for rep in 0..cfg.repetitions {
                let rep_seed = cfg.seed.derive(qi as u64).derive(rep as u64);
                let draws: Vec<(f64, f64)> = (0..cfg.profiles_per_point)
                    .into_par_iter()
                    .map(|p| agent_ratio(cfg, theta, p, rep_seed.derive(p as u64)))
                    .collect::<Result<_, _>>()?;
                let p = draws.len() as f64;
                let mean = draws.iter().map(|d| d.0).sum::<f64>() / p;
                let sample_var = draws
                    .iter()
                    .map(|d| (d.0 - mean) * (d.0 - mean))
                    .sum::<f64>()
                    / (p - 1.0);
                let noise = draws.iter().map(|d| d.1).sum::<f64>() / p;
                mean_acc += mean;
                var_acc += sample_var - noise;
            }
            Ok(QuotaMoments {
                theta,
                mean: mean_acc / cfg.repetitions as f64,
                var: (var_acc / cfg.repetitions as f64).max(0.0),
            })
        })
        .collect()
}
