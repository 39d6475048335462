//! Cross-checks between independent computation paths: the sampling
//! estimator against exact enumeration, weighting rules against known
//! power distributions, and the sweep pipeline against its parts.

use approx::assert_abs_diff_eq;
use stakepower_core::{
    banzhaf_enumerate, estimate_pivots, ratio_stats, run_sweep, PowerEstimator, RatioKind,
    RngSeed, StakeProfile, SweepConfig, Vwa, WeightProfile,
};

/// No subset of these weights sums to 0.53, so the exact and sampled paths
/// face identical pivot decisions.
fn reference_profile() -> (WeightProfile, f64) {
    let w = WeightProfile::new(vec![0.36, 0.26, 0.16, 0.12, 0.10]).unwrap();
    (w, 0.53)
}

#[test]
fn sampling_estimator_is_unbiased_over_many_seeds() {
    let (w, theta) = reference_profile();
    let exact = banzhaf_enumerate(&w, theta).unwrap();

    let runs = 200u64;
    let samples_per_run = 1_500u64;
    let mut avg = vec![0.0f64; w.len()];
    for run in 0..runs {
        let est = estimate_pivots(&w, &[theta], samples_per_run, RngSeed(0xBEEF).derive(run))
            .unwrap();
        for (acc, probs) in avg.iter_mut().zip(&est.probs) {
            *acc += probs[0];
        }
    }
    for acc in &mut avg {
        *acc /= runs as f64;
    }

    let pooled = (runs * samples_per_run) as f64;
    for (i, (&estimate, &truth)) in avg.iter().zip(&exact.raw).enumerate() {
        let se = (truth * (1.0 - truth) / pooled).sqrt();
        assert!(
            (estimate - truth).abs() <= 3.5 * se + 1e-12,
            "agent {i}: pooled estimate {estimate} vs exact {truth} (se {se})"
        );
    }
}

#[test]
fn linear_weights_hand_all_power_to_the_majority_holder() {
    let stakes = StakeProfile::new(vec![10.0, 90.0, 100.0, 200.0, 600.0]).unwrap();
    let w = Vwa::Linear.apply(&stakes).unwrap();
    let p = banzhaf_enumerate(&w, 0.5).unwrap();

    assert_eq!(p.normalized, vec![0.0, 0.0, 0.0, 0.0, 1.0]);

    // power shares sit far from stake shares: the whale gains 0.4 while
    // everyone else is zeroed out
    let shares = w.as_slice();
    let max_gap = p
        .normalized
        .iter()
        .zip(shares)
        .map(|(b, s)| (b - s).abs())
        .fold(0.0f64, f64::max);
    assert!(max_gap > 0.35, "max |power - stake share| = {max_gap}");

    let stats = ratio_stats(&p, &w, RatioKind::Normalized).unwrap();
    assert!(stats.pop_var > 0.0);
}

#[test]
fn sqrt_weighting_rewards_wallet_splitting() {
    let whole = StakeProfile::new(vec![10.0, 90.0, 100.0, 200.0, 600.0]).unwrap();
    let p_whole = banzhaf_enumerate(&Vwa::Penrose.apply(&whole).unwrap(), 0.5).unwrap();
    assert_eq!(p_whole.raw, vec![0.0, 0.25, 0.25, 0.25, 0.75]);

    // the 600 holder splits into two 300 wallets; under square-root
    // weighting the two halves together end up strictly more powerful
    let split = StakeProfile::new(vec![10.0, 90.0, 100.0, 200.0, 300.0, 300.0]).unwrap();
    let p_split = banzhaf_enumerate(&Vwa::Penrose.apply(&split).unwrap(), 0.5).unwrap();
    assert_eq!(
        p_split.raw,
        vec![0.0625, 0.3125, 0.3125, 0.3125, 0.4375, 0.4375]
    );
    let combined = p_split.raw[4] + p_split.raw[5];
    assert!(
        combined > p_whole.raw[4],
        "split power {combined} should exceed whole-wallet power {}",
        p_whole.raw[4]
    );

    // under linear weighting the same split is pointless: the two halves
    // keep exactly the whale's old grip on every decision
    let p_lin_split = banzhaf_enumerate(&Vwa::Linear.apply(&split).unwrap(), 0.5).unwrap();
    assert_eq!(p_lin_split.raw[4], p_lin_split.raw[5]);
    assert!(p_lin_split.raw[4] + p_lin_split.raw[5] >= 0.99);
}

#[test]
fn sweep_pipeline_matches_manual_composition() {
    let (w, theta) = reference_profile();
    let quotas = vec![0.2, theta, 0.8];

    let mut cfg = SweepConfig::new(5, 1.0, RngSeed(7));
    cfg.stake_draws = 1;
    cfg.quotas = quotas.clone();
    cfg.estimator = PowerEstimator::ExactEnumeration;
    cfg.ratio_kind = RatioKind::Normalized;
    cfg.injected_profiles = Some(vec![w.clone()]);
    let grid = run_sweep(&cfg).unwrap();

    for (qi, &q) in quotas.iter().enumerate() {
        let p = banzhaf_enumerate(&w, q).unwrap();
        let direct = ratio_stats(&p, &w, RatioKind::Normalized).unwrap();
        assert_abs_diff_eq!(grid.mean_ratio[qi], direct.mean, epsilon = 1e-12);
        assert_abs_diff_eq!(grid.within_var[qi], direct.pop_var, epsilon = 1e-12);
    }
}
