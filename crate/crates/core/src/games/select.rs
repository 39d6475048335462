//! Greedy stake-weighted project selection for participatory-budgeting
//! rounds.

use super::{GameError, Project, StakeProfile};
use crate::stochastic::RngSeed;
use rand::Rng;

/// Pick projects greedily by stake-weighted approval score until the budget
/// admits none of the rest.
///
/// Each round selects the affordable project with the highest total stake of
/// approving agents; exact score ties are broken uniformly at random with the
/// given seed. Returns indices into `projects` in selection order.
pub fn greedy_select(
    projects: &[Project],
    stakes: &StakeProfile,
    budget: f64,
    seed: RngSeed,
) -> Result<Vec<usize>, GameError> {
    if !budget.is_finite() || budget < 0.0 {
        return Err(GameError::Invalid(format!(
            "budget must be finite and non-negative, got {budget}"
        )));
    }
    for (j, p) in projects.iter().enumerate() {
        if !p.cost.is_finite() || p.cost < 0.0 {
            return Err(GameError::Invalid(format!(
                "project {} (index {j}) has invalid cost {}",
                p.id, p.cost
            )));
        }
        if p.approvals.len() != stakes.len() {
            return Err(GameError::LengthMismatch {
                left: p.approvals.len(),
                right: stakes.len(),
            });
        }
    }

    let scores: Vec<f64> = projects
        .iter()
        .map(|p| {
            p.approvals
                .iter()
                .zip(stakes.as_slice())
                .filter_map(|(&yes, &s)| yes.then_some(s))
                .sum()
        })
        .collect();

    let mut rng = seed.rng();
    let mut remaining = budget;
    let mut taken = vec![false; projects.len()];
    let mut selected = Vec::new();
    loop {
        let mut best: Option<f64> = None;
        for (j, p) in projects.iter().enumerate() {
            if !taken[j] && p.cost <= remaining {
                best = Some(best.map_or(scores[j], |b: f64| b.max(scores[j])));
            }
        }
        let Some(best) = best else { break };
        let candidates: Vec<usize> = (0..projects.len())
            .filter(|&j| !taken[j] && projects[j].cost <= remaining && scores[j] == best)
            .collect();
        let pick = candidates[rng.random_range(0..candidates.len())];
        taken[pick] = true;
        remaining -= projects[pick].cost;
        selected.push(pick);
    }
    Ok(selected)
}
