//! Scalar special functions backing the density and likelihood code.
//!
//! Everything here is plain `f64` math with no allocation: log-gamma via the
//! Lanczos expansion, digamma/trigamma via upward recurrence plus asymptotic
//! series, and the regularized incomplete beta via the standard continued
//! fraction with the symmetry switch.

use super::StochasticError;

/// Lanczos g parameter for `ln_gamma`.
const LANCZOS_R: f64 = 10.900511;

/// Lanczos expansion coefficients (Pugh's optimal 10-term set for f64).
const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];

const LN_PI: f64 = 1.144_729_885_849_400_2;
/// ln(2 * sqrt(e / pi))
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;

/// Natural log of the gamma function, accurate to ~1e-14 relative for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0 || x.fract() != 0.0, "ln_gamma pole at {x}");
    if x < 0.5 {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let s = LANCZOS_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_DK[0], |s, (i, &d)| s + d / (i as f64 - x));
        LN_PI
            - (std::f64::consts::PI * x).sin().ln()
            - s.ln()
            - LN_2_SQRT_E_OVER_PI
            - (0.5 - x) * ((0.5 - x + LANCZOS_R) / std::f64::consts::E).ln()
    } else {
        let s = LANCZOS_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_DK[0], |s, (i, &d)| s + d / (x + i as f64 - 1.0));
        s.ln()
            + LN_2_SQRT_E_OVER_PI
            + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / std::f64::consts::E).ln()
    }
}

/// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Digamma psi(x) for x > 0: shift into the asymptotic region, then the
/// Bernoulli-number series in 1/x^2.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut result = 0.0;
    let mut x = x;
    while x < 10.0 {
        result -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // psi(x) ~ ln x - 1/(2x) - sum B_2n / (2n x^{2n})
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    result + x.ln() - 0.5 * inv - series
}

/// Trigamma psi'(x) for x > 0, same shift-then-series scheme as `digamma`.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut result = 0.0;
    let mut x = x;
    while x < 10.0 {
        result += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // psi'(x) ~ 1/x + 1/(2x^2) + sum B_2n / x^{2n+1}
    let series = inv
        * (1.0
            + inv * (0.5
                + inv * (1.0 / 6.0
                    - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0))))));
    result + series
}

const BETA_CF_MAX_ITER: usize = 300;
const BETA_CF_EPS: f64 = 1e-15;
const BETA_CF_FPMIN: f64 = 1e-300;

/// Regularized incomplete beta function I_h(a, b).
///
/// Continued-fraction evaluation (modified Lentz) with the symmetry switch at
/// h > (a+1)/(a+b+2); endpoints return exactly 0 and 1.
pub fn reg_inc_beta(h: f64, a: f64, b: f64) -> Result<f64, StochasticError> {
    if a <= 0.0 || b <= 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(StochasticError::Domain(format!(
            "incomplete beta requires positive finite shape parameters, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&h) {
        return Err(StochasticError::Domain(format!(
            "incomplete beta argument must lie in [0,1], got {h}"
        )));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    if h == 1.0 {
        return Ok(1.0);
    }
    let ln_prefactor = a * h.ln() + b * (1.0 - h).ln() - ln_beta(a, b);
    if h < (a + 1.0) / (a + b + 2.0) {
        Ok((ln_prefactor.exp() / a) * beta_cf(h, a, b)?)
    } else {
        Ok(1.0 - (ln_prefactor.exp() / b) * beta_cf(1.0 - h, b, a)?)
    }
}

/// Continued fraction for the incomplete beta (Lentz's algorithm).
fn beta_cf(x: f64, a: f64, b: f64) -> Result<f64, StochasticError> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < BETA_CF_FPMIN {
        d = BETA_CF_FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // even step
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < BETA_CF_FPMIN {
            d = BETA_CF_FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < BETA_CF_FPMIN {
            c = BETA_CF_FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < BETA_CF_FPMIN {
            d = BETA_CF_FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < BETA_CF_FPMIN {
            c = BETA_CF_FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < BETA_CF_EPS {
            return Ok(h);
        }
    }
    Err(StochasticError::NoConvergence(format!(
        "incomplete beta continued fraction did not converge for x={x}, a={a}, b={b}"
    )))
}

/// Density of the first coordinate of a symmetric Dirichlet(alpha, ..., alpha)
/// over n agents: Beta(alpha, (n-1) alpha) evaluated at c.
///
/// Endpoints are accepted only where the limit is finite; a divergent endpoint
/// (exponent < 0 there) is a domain error.
pub fn beta_density_x1(c: f64, n: usize, alpha: f64) -> Result<f64, StochasticError> {
    if n < 2 {
        return Err(StochasticError::Domain(format!(
            "first-coordinate density needs at least 2 agents, got {n}"
        )));
    }
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(StochasticError::Domain(format!(
            "Dirichlet concentration must be positive and finite, got {alpha}"
        )));
    }
    if !(0.0..=1.0).contains(&c) {
        return Err(StochasticError::Domain(format!(
            "density argument must lie in [0,1], got {c}"
        )));
    }
    let a = alpha;
    let b = (n - 1) as f64 * alpha;
    if c == 0.0 || c == 1.0 {
        let exponent = if c == 0.0 { a - 1.0 } else { b - 1.0 };
        return if exponent > 0.0 {
            Ok(0.0)
        } else if exponent == 0.0 {
            // the surviving factor is exactly 1 at this endpoint
            let other = if c == 0.0 { b - 1.0 } else { a - 1.0 };
            if other < 0.0 {
                Err(StochasticError::Domain(format!(
                    "density diverges at c={c} for alpha={alpha}, n={n}"
                )))
            } else {
                Ok((ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)).exp())
            }
        } else {
            Err(StochasticError::Domain(format!(
                "density diverges at c={c} for alpha={alpha}, n={n}"
            )))
        };
    }
    let ln_density = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
        + (a - 1.0) * c.ln()
        + (b - 1.0) * (1.0 - c).ln();
    Ok(ln_density.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(2.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(5.0), 24f64.ln(), max_relative = 1e-13);
        assert_relative_eq!(
            ln_gamma(0.5),
            std::f64::consts::PI.sqrt().ln(),
            max_relative = 1e-13
        );
        // recurrence Gamma(x+1) = x Gamma(x) across the reflection split
        for &x in &[0.1, 0.273568, 0.9, 3.7, 25.0] {
            assert_relative_eq!(
                ln_gamma(x + 1.0),
                ln_gamma(x) + x.ln(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn digamma_and_trigamma_known_values() {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        assert_relative_eq!(digamma(1.0), -EULER_GAMMA, max_relative = 1e-12);
        // psi(2) = 1 - gamma
        assert_relative_eq!(digamma(2.0), 1.0 - EULER_GAMMA, max_relative = 1e-12);
        // psi(1/2) = -gamma - 2 ln 2
        assert_relative_eq!(
            digamma(0.5),
            -EULER_GAMMA - 2.0 * 2f64.ln(),
            max_relative = 1e-12
        );
        // psi'(1) = pi^2/6
        assert_relative_eq!(
            trigamma(1.0),
            std::f64::consts::PI.powi(2) / 6.0,
            max_relative = 1e-12
        );
        // psi'(x+1) = psi'(x) - 1/x^2
        for &x in &[0.3, 1.7, 8.5] {
            assert_relative_eq!(
                trigamma(x + 1.0),
                trigamma(x) - 1.0 / (x * x),
                max_relative = 1e-11
            );
        }
    }

    /// Composite-Simpson oracle for the unregularized incomplete beta,
    /// deliberately independent of the continued-fraction path. Endpoint
    /// singularities (a < 1 at t = 0, b < 1 at t = 1) are removed by the
    /// substitutions u = t^a and v = (1-t)^b before quadrature.
    fn simpson_inc_beta(h: f64, a: f64, b: f64, panels: usize) -> f64 {
        let simpson = |g: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
            let step = (hi - lo) / panels as f64;
            (0..panels)
                .map(|i| {
                    let x = lo + i as f64 * step;
                    step / 6.0 * (g(x) + 4.0 * g(x + 0.5 * step) + g(x + step))
                })
                .sum::<f64>()
        };
        let direct = |t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0);
        let split = h.min(0.5);
        let left = if a < 1.0 {
            // int_0^split t^(a-1)(1-t)^(b-1) dt with u = t^a
            let g = |u: f64| (1.0 - u.powf(1.0 / a)).powf(b - 1.0) / a;
            simpson(&g, 0.0, split.powf(a))
        } else {
            simpson(&direct, 0.0, split)
        };
        let right = if h <= 0.5 {
            0.0
        } else if b < 1.0 {
            // int_0.5^h with v = (1-t)^b; dv flips the orientation
            let g = |v: f64| (1.0 - v.powf(1.0 / b)).powf(a - 1.0) / b;
            simpson(&g, (1.0 - h).powf(b), 0.5f64.powf(b))
        } else {
            simpson(&direct, 0.5, h)
        };
        left + right
    }

    #[test]
    fn reg_inc_beta_matches_simpson_oracle() {
        // I_{0.3}(2,3): polynomial integrand, oracle is exact up to quadrature
        let oracle = simpson_inc_beta(0.3, 2.0, 3.0, 20_000) / simpson_inc_beta(1.0, 2.0, 3.0, 20_000);
        assert_relative_eq!(oracle, 0.3483, epsilon = 5e-5);
        let cf = reg_inc_beta(0.3, 2.0, 3.0).unwrap();
        assert!((cf - oracle).abs() < 1e-9, "cf={cf} oracle={oracle}");

        for &(h, a, b) in &[(0.1, 0.7, 4.2), (0.62, 3.0, 1.25), (0.9, 12.0, 0.4)] {
            let oracle = simpson_inc_beta(h, a, b, 400_000) / simpson_inc_beta(1.0, a, b, 400_000);
            let cf = reg_inc_beta(h, a, b).unwrap();
            assert!(
                (cf - oracle).abs() < 1e-6,
                "h={h} a={a} b={b}: cf={cf} oracle={oracle}"
            );
        }
    }

    #[test]
    fn reg_inc_beta_identities() {
        // I_h(1,1) = h
        for &h in &[0.0, 0.25, 0.7, 1.0] {
            assert_relative_eq!(reg_inc_beta(h, 1.0, 1.0).unwrap(), h, epsilon = 1e-12);
        }
        // symmetry point: I_{1/2}(a,a) = 1/2
        for &a in &[0.5, 2.0, 7.0] {
            assert_relative_eq!(reg_inc_beta(0.5, a, a).unwrap(), 0.5, epsilon = 1e-12);
        }
        // exact endpoints
        assert_eq!(reg_inc_beta(0.0, 3.2, 1.1).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(1.0, 3.2, 1.1).unwrap(), 1.0);
    }

    #[test]
    fn reg_inc_beta_rejects_bad_domain() {
        assert!(reg_inc_beta(0.5, 0.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 1.0, -2.0).is_err());
        assert!(reg_inc_beta(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn beta_density_known_value() {
        // n=3, alpha=1: Beta(1,2) density 2(1-c); at c=0.25 -> 1.5
        assert_relative_eq!(beta_density_x1(0.25, 3, 1.0).unwrap(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn beta_density_integrates_to_one() {
        // alpha >= 1: integrate directly with composite Simpson
        for &(n, alpha) in &[(3usize, 1.0), (5, 2.5), (31, 1.0)] {
            let f = |c: f64| beta_density_x1(c, n, alpha).unwrap();
            let panels = 200_000;
            let step = 1.0 / panels as f64;
            let mut acc = 0.0;
            for i in 0..panels {
                let lo = i as f64 * step;
                let hi = lo + step;
                let l = if i == 0 && alpha == 1.0 { f(1e-14) } else { f(lo) };
                let h = if i == panels - 1 { f(1.0 - 1e-14) } else { f(hi) };
                acc += step / 6.0 * (l + 4.0 * f(0.5 * (lo + hi)) + h);
            }
            assert!(
                (acc - 1.0).abs() < 1e-9,
                "n={n} alpha={alpha}: integral={acc}"
            );
        }
    }

    #[test]
    fn beta_density_integrates_to_one_small_alpha() {
        // alpha < 1 diverges at both endpoints; substitute c = u^(1/a) on the
        // left and 1-c = v^(1/b) on the right so the transformed integrand is
        // bounded, then integrate each half with composite Simpson.
        let (n, alpha) = (50usize, 0.273568);
        let a = alpha;
        let b = (n - 1) as f64 * alpha;
        let norm = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)).exp();
        // left: int_0^{1/2} c^{a-1}(1-c)^{b-1} dc = int_0^{(1/2)^a} (1-u^{1/a})^{b-1} / a du
        let left_g = |u: f64| (1.0 - u.powf(1.0 / a)).powf(b - 1.0) / a;
        // right: int_{1/2}^1 = int_0^{(1/2)^b} (1-v^{1/b})^{a-1} / b dv
        let right_g = |v: f64| (1.0 - v.powf(1.0 / b)).powf(a - 1.0) / b;
        let simpson = |g: &dyn Fn(f64) -> f64, hi: f64, panels: usize| {
            let step = hi / panels as f64;
            (0..panels)
                .map(|i| {
                    let lo = i as f64 * step;
                    step / 6.0 * (g(lo) + 4.0 * g(lo + 0.5 * step) + g(lo + step))
                })
                .sum::<f64>()
        };
        let total = norm
            * (simpson(&left_g, 0.5f64.powf(a), 400_000) + simpson(&right_g, 0.5f64.powf(b), 400_000));
        assert!((total - 1.0).abs() < 1e-9, "integral={total}");
    }

    #[test]
    fn beta_density_endpoint_rules() {
        // alpha < 1 diverges at 0
        assert!(beta_density_x1(0.0, 5, 0.5).is_err());
        // alpha > 1 vanishes at both endpoints
        assert_eq!(beta_density_x1(0.0, 5, 2.0).unwrap(), 0.0);
        assert_eq!(beta_density_x1(1.0, 5, 2.0).unwrap(), 0.0);
        // alpha = 1, n = 2 is the uniform density
        assert_relative_eq!(beta_density_x1(0.0, 2, 1.0).unwrap(), 1.0, epsilon = 1e-12);
    }
}
