//! Core types for stake-weighted quota voting: stake and weight profiles,
//! quota rules, power profiles, and power-to-stake ratios.

mod banzhaf;
mod select;

pub use banzhaf::{
    banzhaf_dp, banzhaf_enumerate, banzhaf_enumerate_grid, banzhaf_enumerate_within,
    pivot_probability_exact, ENUM_AGENT_LIMIT, MITM_OTHERS_LIMIT,
};
pub use select::greedy_select;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("stake profile must be non-empty")]
    EmptyProfile,
    #[error("invalid stake at index {index}: {reason}")]
    InvalidStake { index: usize, reason: String },
    #[error("degenerate stakes: at least one agent must hold positive stake")]
    DegenerateStakes,
    #[error("invalid weight at index {index}: {reason}")]
    InvalidWeight { index: usize, reason: String },
    #[error("weights must sum to 1 (got {sum})")]
    WeightSum { sum: f64 },
    #[error("quota must lie strictly inside (0, 1), got {theta}")]
    QuotaOutOfRange { theta: f64 },
    #[error("exact enumeration supports at most {limit} agents, got {n}")]
    TooManyAgents { n: usize, limit: usize },
    #[error("power-stake ratio undefined: agent {index} has zero weight but positive power")]
    ZeroStakePivotal { index: usize },
    #[error("profile length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Raw (unnormalized) stakes: finite, non-negative, at least one positive.
#[derive(Debug, Clone, PartialEq)]
pub struct StakeProfile(Vec<f64>);

impl StakeProfile {
    pub fn new(stakes: Vec<f64>) -> Result<Self, GameError> {
        if stakes.is_empty() {
            return Err(GameError::EmptyProfile);
        }
        for (index, &s) in stakes.iter().enumerate() {
            if !s.is_finite() {
                return Err(GameError::InvalidStake {
                    index,
                    reason: format!("not finite ({s})"),
                });
            }
            if s < 0.0 {
                return Err(GameError::InvalidStake {
                    index,
                    reason: format!("negative ({s})"),
                });
            }
        }
        if !stakes.iter().any(|&s| s > 0.0) {
            return Err(GameError::DegenerateStakes);
        }
        Ok(Self(stakes))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Voting weights on the simplex: each entry in [0, 1], summing to 1 within
/// a fixed tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile(Vec<f64>);

pub const WEIGHT_SUM_TOL: f64 = 1e-9;

impl WeightProfile {
    pub fn new(weights: Vec<f64>) -> Result<Self, GameError> {
        if weights.is_empty() {
            return Err(GameError::EmptyProfile);
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() || !(0.0..=1.0).contains(&w) {
                return Err(GameError::InvalidWeight {
                    index,
                    reason: format!("must lie in [0, 1], got {w}"),
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(GameError::WeightSum { sum });
        }
        Ok(Self(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Vote-weight assignment: how raw stakes map to voting weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vwa {
    /// Weight proportional to stake.
    Linear,
    /// Weight proportional to the square root of stake.
    Penrose,
}

impl Vwa {
    pub fn apply(self, stakes: &StakeProfile) -> Result<WeightProfile, GameError> {
        let transformed: Vec<f64> = match self {
            Vwa::Linear => stakes.as_slice().to_vec(),
            Vwa::Penrose => stakes.as_slice().iter().map(|s| s.sqrt()).collect(),
        };
        let total: f64 = transformed.iter().sum();
        // StakeProfile guarantees total > 0
        WeightProfile::new(transformed.into_iter().map(|s| s / total).collect())
    }
}

/// A quota voting rule: a coalition wins when its total weight reaches theta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotaRule {
    theta: f64,
    vwa: Vwa,
}

impl QuotaRule {
    pub fn new(theta: f64, vwa: Vwa) -> Result<Self, GameError> {
        if !theta.is_finite() || theta <= 0.0 || theta >= 1.0 {
            return Err(GameError::QuotaOutOfRange { theta });
        }
        Ok(Self { theta, vwa })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn vwa(&self) -> Vwa {
        self.vwa
    }
}

/// A coalition wins when its accumulated weight meets or exceeds the quota.
pub fn coalition_wins(coalition_weight: f64, theta: f64) -> bool {
    coalition_weight >= theta
}

/// Raw and normalized power indices for every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    /// Per-agent pivot probability (raw index).
    pub raw: Vec<f64>,
    /// Raw indices rescaled to sum to 1; all zeros when no agent is ever
    /// pivotal.
    pub normalized: Vec<f64>,
}

impl PowerProfile {
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let total: f64 = raw.iter().sum();
        let normalized = if total > 0.0 {
            raw.iter().map(|b| b / total).collect()
        } else {
            vec![0.0; raw.len()]
        };
        Self { raw, normalized }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

/// Which flavor of power index enters a power-to-stake ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioKind {
    /// Pivot probability divided by weight.
    Raw,
    /// Normalized index divided by weight.
    Normalized,
}

/// Per-agent power-to-weight ratios. An agent with zero weight and zero power
/// gets ratio 0; zero weight with positive power is an error.
pub fn power_stake_ratios(
    power: &PowerProfile,
    weights: &WeightProfile,
    kind: RatioKind,
) -> Result<Vec<f64>, GameError> {
    if power.len() != weights.len() {
        return Err(GameError::LengthMismatch {
            left: power.len(),
            right: weights.len(),
        });
    }
    let values = match kind {
        RatioKind::Raw => &power.raw,
        RatioKind::Normalized => &power.normalized,
    };
    values
        .iter()
        .zip(weights.as_slice())
        .enumerate()
        .map(|(index, (&b, &w))| {
            if w > 0.0 {
                Ok(b / w)
            } else if b == 0.0 {
                Ok(0.0)
            } else {
                Err(GameError::ZeroStakePivotal { index })
            }
        })
        .collect()
}

/// A funding proposal in a participatory-budgeting round.
#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    pub id: String,
    pub cost: f64,
    /// approvals[i] is true when agent i approves this project.
    pub approvals: Vec<bool>,
}
