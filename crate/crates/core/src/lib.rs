//! Voting-power analysis for stake-weighted quota games.
//!
//! The crate measures how far decision power, in the sense of pivotal
//! coalition counts, drifts from proportionality to stake:
//!
//! - [`games`]: stake and weight profiles, quota rules, exact power indices
//!   by subset enumeration, subset-sum counting for integer weights, a
//!   meet-in-the-middle pivot count for a single agent, and a greedy
//!   stake-weighted project selection used for budget allocation.
//! - [`montecarlo`]: seeded coalition sampling that estimates pivot
//!   probabilities for many quotas in one pass, deterministic for a given
//!   seed regardless of thread count.
//! - [`analytic`]: closed-form conditional power given one agent's weight
//!   under symmetric Dirichlet weights, with adaptive quadrature for the
//!   moments of the power-stake ratio.
//! - [`stochastic`]: seeded Gamma/Dirichlet sampling, maximum-likelihood
//!   Gamma fitting, stake summaries, and the special functions backing the
//!   analytic layer.
//! - [`experiments`]: quota-grid sweeps, fixed-quota ratio distributions,
//!   and a single-agent simulation that cross-checks the analytic moments.

pub mod analytic;
pub mod experiments;
pub mod games;
pub mod montecarlo;
pub mod stochastic;

pub use analytic::{
    conditional_banzhaf, expected_ratio, jelnov_expected_ratio, single_agent_variance,
    AnalyticConfig, AnalyticError,
};
pub use experiments::{
    fixed_quota_distribution, interior_quota_grid, quota_grid, ratio_stats, run_sweep,
    single_agent_simulation, AgentRatioEstimator, PowerEstimator, QuotaGridResult, QuotaMoments,
    RatioStats, SingleAgentConfig, SweepConfig,
};
pub use games::{
    banzhaf_dp, banzhaf_enumerate, banzhaf_enumerate_grid, coalition_wins, greedy_select,
    pivot_probability_exact, power_stake_ratios, GameError, PowerProfile, Project, QuotaRule,
    RatioKind, StakeProfile, Vwa, WeightProfile, ENUM_AGENT_LIMIT, MITM_OTHERS_LIMIT,
};
pub use montecarlo::{estimate_pivots, normalize_power, PivotEstimate};
pub use stochastic::{
    fit_gamma_mle, sample_dirichlet_symmetric, sample_gamma, stake_summary, GammaParams, RngSeed,
    StakeSummary, StochasticError,
};

use thiserror::Error as ThisError;

/// Top-level error type: every failure mode of the library funnels here.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("invalid configuration: {0}")]
    Config(String),
}
