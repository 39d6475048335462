//! Closed-form power analysis under symmetric Dirichlet weight profiles:
//! the expected Banzhaf index of a focal agent conditional on its weight,
//! the expected power-stake ratio, and the variance of that ratio across
//! weight draws, all evaluated by piecewise adaptive quadrature. A
//! self-contained binomial-sum specialization at quota one-half serves as an
//! independent cross-check.

mod quad;

use crate::stochastic::special::{beta_density_x1, ln_beta, ln_gamma};
use crate::stochastic::{reg_inc_beta, StochasticError};
use quad::integrate_piecewise;
use std::f64::consts::LN_2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("invalid parameter: {0}")]
    Domain(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
}

/// Parameters for the analytic machinery: population size, Dirichlet
/// concentration, and quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticConfig {
    /// Number of agents; odd and at least 3.
    pub n: usize,
    /// Symmetric Dirichlet concentration; positive.
    pub alpha: f64,
    /// Absolute tolerance per quadrature panel.
    pub quad_abs_tol: f64,
    /// Maximum bisection depth per panel.
    pub quad_max_depth: u32,
    /// Open-interval clipping for the weight variable.
    pub c_epsilon: f64,
}

impl AnalyticConfig {
    pub fn new(n: usize, alpha: f64) -> Result<Self, AnalyticError> {
        let cfg = Self {
            n,
            alpha,
            quad_abs_tol: 1e-9,
            quad_max_depth: 60,
            c_epsilon: 1e-9,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), AnalyticError> {
        if self.n < 3 || self.n.is_multiple_of(2) {
            return Err(AnalyticError::Domain(format!(
                "population size must be odd and at least 3, got {}",
                self.n
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(AnalyticError::Domain(format!(
                "concentration must be positive and finite, got {}",
                self.alpha
            )));
        }
        if !self.quad_abs_tol.is_finite() || self.quad_abs_tol <= 0.0 {
            return Err(AnalyticError::Domain(
                "quadrature tolerance must be positive".into(),
            ));
        }
        if !(self.c_epsilon > 0.0 && self.c_epsilon < 0.5) {
            return Err(AnalyticError::Domain(
                "interval clipping must lie in (0, 0.5)".into(),
            ));
        }
        Ok(())
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<(), AnalyticError> {
    if !(v.is_finite() && v > 0.0 && v < 1.0) {
        return Err(AnalyticError::Domain(format!(
            "{name} must lie strictly inside (0, 1), got {v}"
        )));
    }
    Ok(())
}

/// Expected Banzhaf index of an agent holding weight `c`, with the remaining
/// weight split among the other n-1 agents by a symmetric Dirichlet draw and
/// each of them joining a coalition with probability 1/2.
///
/// Ties follow the inclusive win rule everywhere: a coalition whose weight
/// equals the quota wins. At the case boundaries c = theta and c = 1 - theta
/// this determines which side the (measure-zero) jump belongs to.
pub fn conditional_banzhaf(c: f64, theta: f64, cfg: &AnalyticConfig) -> Result<f64, AnalyticError> {
    cfg.validate()?;
    check_unit_interval("conditioned weight", c)?;
    check_unit_interval("quota", theta)?;
    Ok(conditional_banzhaf_unchecked(c, theta, cfg.n, cfg.alpha)?)
}

/// Below this pivot-interval width the CDF difference loses most of its
/// mantissa to cancellation and the density integral takes over.
const NARROW_INTERVAL: f64 = 1e-4;

/// Smallest weight evaluated on the wide side of the interval-width switch.
/// The two evaluation paths agree only to their own accuracy, so the switch
/// is a tiny jump in the integrand; the quadrature must split a panel there,
/// and the split has to land on the exact float where the branch flips or a
/// one-ulp sliver of the jump survives inside a panel. The computed width
/// c / (1 - c) is monotone over the float lattice (the numerator moves by
/// ulps while the denominator holds still much longer), so a bit-level
/// bisection pins the flip exactly.
fn narrow_switch_point() -> f64 {
    let mut lo = (0.9 * NARROW_INTERVAL).to_bits();
    let mut hi = (1.1 * NARROW_INTERVAL).to_bits();
    debug_assert!({
        let (a, b) = (f64::from_bits(lo), f64::from_bits(hi));
        a / (1.0 - a) < NARROW_INTERVAL && b / (1.0 - b) >= NARROW_INTERVAL
    });
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let c = f64::from_bits(mid);
        if c / (1.0 - c) < NARROW_INTERVAL {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    f64::from_bits(hi)
}

/// Shared kernel; assumes 0 < c < 1, 0 <= theta <= 1, n >= 2, alpha > 0.
fn conditional_banzhaf_unchecked(
    c: f64,
    theta: f64,
    n: usize,
    alpha: f64,
) -> Result<f64, StochasticError> {
    let m = n - 1; // the other agents
    let ln_denom = m as f64 * LN_2;
    let single = (-ln_denom).exp(); // 1 / 2^(n-1)

    let mut total = 0.0;
    // Empty coalition: the agent alone meets the quota while nobody else
    // does only when the quota is positive.
    if c >= theta && theta > 0.0 {
        total += single;
    }
    // Grand coalition of the others: pivotal only when they miss the quota
    // without the agent. Compared in c-space so the jump sits exactly on the
    // 1 - theta panel boundary the quadrature splits at.
    if c > 1.0 - theta {
        total += single;
    }
    if m >= 2 {
        // A coalition holding fraction Y of the others' weight turns the
        // agent pivotal when (theta - c)/(1 - c) <= Y < theta/(1 - c); for a
        // k-subset Y is Beta(k*alpha, (m-k)*alpha) distributed.
        let hi = (theta / (1.0 - c)).clamp(0.0, 1.0);
        let lo = ((theta - c) / (1.0 - c)).clamp(0.0, 1.0);
        if hi > lo {
            // Exact interval width when neither endpoint clamps. CDF
            // differences over an interval this short cancel catastrophically
            // (both values agree to ~width), so integrate the density
            // instead; the switch needs the endpoints strictly interior.
            let width = c / (1.0 - c);
            let narrow = lo > 0.0 && hi < 1.0 && width < NARROW_INTERVAL;
            let ln_n = ln_gamma(n as f64);
            for k in 1..m {
                let ln_weight = ln_n
                    - ln_gamma(k as f64 + 1.0)
                    - ln_gamma((n - k) as f64)
                    - ln_denom;
                let a = k as f64 * alpha;
                let b = (m - k) as f64 * alpha;
                let delta = if narrow {
                    let density = |y: f64| {
                        ((a - 1.0) * y.ln() + (b - 1.0) * (1.0 - y).ln() - ln_beta(a, b)).exp()
                    };
                    let mid = lo + 0.5 * width;
                    width / 6.0 * (density(lo) + 4.0 * density(mid) + density(hi))
                } else {
                    let d_hi = if hi >= 1.0 { 1.0 } else { reg_inc_beta(hi, a, b)? };
                    let d_lo = if lo <= 0.0 { 0.0 } else { reg_inc_beta(lo, a, b)? };
                    d_hi - d_lo
                };
                total += ln_weight.exp() * delta;
            }
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Guard bound: the pivot-to-weight factor at the clipping point must stay
/// bounded or the clipped integral silently misrepresents a divergent tail.
const RATIO_GUARD: f64 = 1e6;

/// Panel boundaries: clipping points plus whichever case boundaries
/// (theta, 1 - theta, the narrow-interval switch) fall inside them.
fn panel_points(theta: f64, cfg: &AnalyticConfig) -> Vec<f64> {
    let lo = cfg.c_epsilon;
    let hi = 1.0 - cfg.c_epsilon;
    let mut points = vec![lo, hi];
    for p in [theta.min(1.0 - theta), theta.max(1.0 - theta), narrow_switch_point()] {
        if p > lo && p < hi {
            points.push(p);
        }
    }
    points.sort_unstable_by(f64::total_cmp);
    points.dedup();
    points
}

/// E[(B/c)^power] over the weight distribution, by piecewise quadrature.
fn ratio_moment(theta: f64, cfg: &AnalyticConfig, power: i32) -> Result<f64, AnalyticError> {
    cfg.validate()?;
    check_unit_interval("quota", theta)?;

    let guard_b = conditional_banzhaf_unchecked(cfg.c_epsilon, theta, cfg.n, cfg.alpha)?;
    if guard_b / cfg.c_epsilon > RATIO_GUARD {
        return Err(AnalyticError::Domain(format!(
            "pivot probability per unit weight exceeds {RATIO_GUARD:.0e} at the clipping point \
             (quota {theta} is closer to 0 than the clipped interval resolves)"
        )));
    }

    let integrand = |c: f64| -> f64 {
        let b = match conditional_banzhaf_unchecked(c, theta, cfg.n, cfg.alpha) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        let density = match beta_density_x1(c, cfg.n, cfg.alpha) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        density * (b / c).powi(power)
    };
    integrate_piecewise(
        &integrand,
        &panel_points(theta, cfg),
        cfg.quad_abs_tol,
        cfg.quad_max_depth,
    )
}

/// Expected power-stake ratio E[B/X] of a single agent over Dirichlet
/// weight draws.
pub fn expected_ratio(theta: f64, cfg: &AnalyticConfig) -> Result<f64, AnalyticError> {
    ratio_moment(theta, cfg, 1)
}

/// How small a computed variance may go negative before it is an error
/// rather than roundoff.
const VARIANCE_CLAMP: f64 = 1e-10;

/// Variance of the conditional-mean power-stake ratio E[B|X]/X of a single
/// agent over Dirichlet weight draws: E[(B/X)^2] - E[B/X]^2 with B the
/// conditional expected index at each weight.
pub fn single_agent_variance(theta: f64, cfg: &AnalyticConfig) -> Result<f64, AnalyticError> {
    let m1 = ratio_moment(theta, cfg, 1)?;
    let m2 = ratio_moment(theta, cfg, 2)?;
    let var = m2 - m1 * m1;
    if var < -VARIANCE_CLAMP {
        return Err(AnalyticError::Quadrature(format!(
            "variance came out negative beyond roundoff: {var}"
        )));
    }
    Ok(var.max(0.0))
}

/// P(Binomial(trials, h) >= k), summed directly; the 0^0 = 1 convention of
/// powi covers the h = 0 and h = 1 edges.
fn binomial_tail(h: f64, k: usize, trials: usize) -> f64 {
    let mut choose = 1.0;
    for j in 1..=k {
        choose *= (trials - j + 1) as f64 / j as f64;
    }
    let mut sum = 0.0;
    let mut c = choose;
    for j in k..=trials {
        sum += c * h.powi(j as i32) * (1.0 - h).powi((trials - j) as i32);
        c *= (trials - j) as f64 / (j + 1) as f64;
    }
    sum
}

/// Expected power-stake ratio at quota 1/2 under uniform simplex weights
/// (concentration 1), via an independent route: Beta CDFs reduce to binomial
/// tail sums and the weight density to (n-1)(1-c)^(n-2). Serves as an oracle
/// for `expected_ratio` at that parameter point.
pub fn jelnov_expected_ratio(n: usize) -> Result<f64, AnalyticError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(AnalyticError::Domain(format!(
            "population size must be odd and at least 3, got {n}"
        )));
    }
    let m = n - 1;
    let scale = 0.5f64.powi(m as i32);
    let pivot_mean = move |c: f64| -> f64 {
        if c > 0.5 {
            return 1.0;
        }
        let mut acc = if c >= 0.5 { 1.0 } else { 0.0 };
        let hi = (0.5 / (1.0 - c)).min(1.0);
        let lo = ((0.5 - c) / (1.0 - c)).max(0.0);
        let width = c / (1.0 - c);
        let narrow = hi < 1.0 && width < NARROW_INTERVAL;
        let mid = lo + 0.5 * width;
        let mut choose = 1.0;
        // C(m-2, k-1), advanced alongside C(m, k) below.
        let mut slope_choose = 1.0;
        for k in 1..m {
            choose *= (m - k + 1) as f64 / k as f64;
            let tail_diff = if narrow {
                // d/dh P(Bin(t, h) >= k) = t C(t-1, k-1) h^(k-1) (1-h)^(t-k),
                // evaluated at the midpoint: the tails themselves agree to
                // ~width and their difference would cancel.
                let t = m - 1;
                let slope = t as f64
                    * slope_choose
                    * mid.powi(k as i32 - 1)
                    * (1.0 - mid).powi((t - k) as i32);
                width * slope
            } else {
                binomial_tail(hi, k, m - 1) - binomial_tail(lo, k, m - 1)
            };
            acc += choose * tail_diff;
            slope_choose *= (m - 1 - k) as f64 / k as f64;
        }
        acc * scale
    };
    let density_pow = (m - 1) as i32;
    let integrand =
        move |c: f64| pivot_mean(c) / c * m as f64 * (1.0 - c).powi(density_pow);

    let eps = 1e-9;
    integrate_piecewise(&integrand, &[eps, narrow_switch_point(), 0.5, 1.0], 1e-9, 60)
}
