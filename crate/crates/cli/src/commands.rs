//! Subcommand definitions and the work behind each one.

use crate::io::{emit, fmt12, ingest_stakes, load_projects, RunManifest, StakeRecord};
use crate::{verify, CliError};
use clap::{ArgGroup, Args, Subcommand, ValueEnum};
use stakepower_core::{
    banzhaf_dp, banzhaf_enumerate, estimate_pivots, expected_ratio, fit_gamma_mle,
    fixed_quota_distribution, greedy_select, interior_quota_grid, normalize_power,
    power_stake_ratios, quota_grid, run_sweep, single_agent_variance, stake_summary,
    AnalyticConfig, PowerEstimator, PowerProfile, QuotaRule, RatioKind, RngSeed, StakeProfile,
    SweepConfig, Vwa,
};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VwaArg {
    /// Weight proportional to stake.
    Linear,
    /// Weight proportional to the square root of stake.
    Penrose,
}

impl From<VwaArg> for Vwa {
    fn from(v: VwaArg) -> Vwa {
        match v {
            VwaArg::Linear => Vwa::Linear,
            VwaArg::Penrose => Vwa::Penrose,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Exact coalition enumeration.
    Enum,
    /// Exact integer subset-sum counting (integer stakes, linear weights).
    Dp,
    /// Seeded coalition sampling.
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RatioArg {
    /// Pivot probability divided by weight.
    Raw,
    /// Normalized index divided by weight.
    Normalized,
}

impl From<RatioArg> for RatioKind {
    fn from(r: RatioArg) -> RatioKind {
        match r {
            RatioArg::Raw => RatioKind::Raw,
            RatioArg::Normalized => RatioKind::Normalized,
        }
    }
}

fn arg_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Order statistics of a stake file: count, min, median, mean, max.
    Summarize(SummarizeArgs),
    /// Maximum-likelihood Gamma fit of the stake values.
    Fit(FitArgs),
    /// Power indices and power-stake ratios for one concrete profile.
    Banzhaf(BanzhafArgs),
    /// Analytic expected power-stake ratio and its variance across quotas.
    Analytic(AnalyticArgs),
    /// Simulated quota sweep over sampled weight profiles.
    Sweep(SweepArgs),
    /// Per-profile ratio mean and variance at one fixed quota.
    FixedQuota(FixedQuotaArgs),
    /// Built-in cross-validation suites (pass/fail with measured deviations).
    Verify(VerifyArgs),
    /// Greedy stake-weighted approval selection under a budget.
    PbSelect(PbSelectArgs),
}

#[derive(Args)]
pub struct SummarizeArgs {
    /// Stake CSV with header `address,stake`.
    #[arg(long, value_name = "FILE")]
    stakes: PathBuf,
    /// Drop wallets below this stake (after duplicate summing).
    #[arg(long, value_name = "MIN")]
    min_stake: Option<f64>,
    /// Write the CSV here (plus a JSON manifest) instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FitArgs {
    /// Stake CSV with header `address,stake`.
    #[arg(long, value_name = "FILE")]
    stakes: PathBuf,
    /// Drop wallets below this stake (after duplicate summing).
    #[arg(long, value_name = "MIN")]
    min_stake: Option<f64>,
    /// Write the key-value output here (plus a JSON manifest) instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["stakes", "weights"])))]
pub struct BanzhafArgs {
    /// Stake CSV with header `address,stake`.
    #[arg(long, value_name = "FILE")]
    stakes: Option<PathBuf>,
    /// Inline comma-separated stake values; agents are numbered 0,1,2,...
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Relative quota, strictly between 0 and 1.
    #[arg(long)]
    theta: f64,
    /// How stakes map to voting weights.
    #[arg(long, value_enum, default_value_t = VwaArg::Linear)]
    vwa: VwaArg,
    /// Computation method.
    #[arg(long, value_enum, default_value_t = MethodArg::Enum)]
    method: MethodArg,
    /// Coalition samples for --method mc.
    #[arg(long, default_value_t = 15_000)]
    samples: u64,
    /// RNG seed (default: STAKEPOWER_SEED or 0); only --method mc uses it.
    #[arg(long)]
    seed: Option<u64>,
    /// Which index flavor enters the ratio column.
    #[arg(long, value_enum, default_value_t = RatioArg::Normalized)]
    ratio: RatioArg,
    /// Drop wallets below this stake (file input only).
    #[arg(long, value_name = "MIN")]
    min_stake: Option<f64>,
    /// Write the CSV here (plus a JSON manifest) instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("where").required(true).args(["quota_grid", "theta"])))]
pub struct AnalyticArgs {
    /// Number of agents (odd, at least 3).
    #[arg(long)]
    n: usize,
    /// Symmetric Dirichlet concentration of the weight distribution.
    #[arg(long)]
    alpha: f64,
    /// Evaluate on the interior points of an evenly spaced grid this large.
    #[arg(long, value_name = "POINTS")]
    quota_grid: Option<usize>,
    /// Evaluate at one quota, strictly between 0 and 1.
    #[arg(long)]
    theta: Option<f64>,
    /// Write the CSV here (plus a JSON manifest) instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Number of agents per sampled profile.
    #[arg(long)]
    n: usize,
    /// Symmetric Dirichlet concentration of the weight distribution.
    #[arg(long)]
    alpha: f64,
    /// Number of sampled weight profiles.
    #[arg(long, default_value_t = 100)]
    m: usize,
    /// Coalition samples per profile (ignored with --exact).
    #[arg(long, default_value_t = 15_000)]
    samples: u64,
    /// Quota grid size over [0, 1] inclusive.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// RNG seed (default: STAKEPOWER_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Which index flavor enters the ratios.
    #[arg(long, value_enum, default_value_t = RatioArg::Normalized)]
    ratio: RatioArg,
    /// Exact coalition enumeration instead of sampling (small n only).
    #[arg(long)]
    exact: bool,
    /// Write the CSV here (plus a JSON manifest) instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FixedQuotaArgs {
    /// The fixed quota, strictly between 0 and 1.
    #[arg(long)]
    theta: f64,
    /// Number of agents per sampled profile.
    #[arg(long)]
    n: usize,
    /// Symmetric Dirichlet concentration of the weight distribution.
    #[arg(long)]
    alpha: f64,
    /// Number of sampled weight profiles.
    #[arg(long, default_value_t = 100)]
    m: usize,
    /// Coalition samples per profile (ignored with --exact).
    #[arg(long, default_value_t = 15_000)]
    samples: u64,
    /// RNG seed (default: STAKEPOWER_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Which index flavor enters the ratios.
    #[arg(long, value_enum, default_value_t = RatioArg::Normalized)]
    ratio: RatioArg,
    /// Exact coalition enumeration instead of sampling (small n only).
    #[arg(long)]
    exact: bool,
    /// Write the CSV here (plus a JSON manifest) instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Which built-in suite to run.
    #[arg(long, value_enum)]
    suite: verify::Suite,
    /// RNG seed for the simulation-backed suites.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
pub struct PbSelectArgs {
    /// Project CSV with header `id,cost,approvals`.
    #[arg(long, value_name = "FILE")]
    projects: PathBuf,
    /// Stake CSV with header `address,stake`; row order defines agent indices.
    #[arg(long, value_name = "FILE")]
    stakes: PathBuf,
    /// Total budget.
    #[arg(long)]
    budget: f64,
    /// RNG seed for score tie-breaking (default: STAKEPOWER_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Drop wallets below this stake (after duplicate summing).
    #[arg(long, value_name = "MIN")]
    min_stake: Option<f64>,
    /// Write the CSV here (plus a JSON manifest) instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Summarize(a) => summarize(a),
        Cmd::Fit(a) => fit(a),
        Cmd::Banzhaf(a) => banzhaf(a),
        Cmd::Analytic(a) => analytic(a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::FixedQuota(a) => fixed_quota(a),
        Cmd::Verify(a) => verify::run(a.suite, resolve_seed(a.seed)?),
        Cmd::PbSelect(a) => pb_select(a),
    }
}

/// Flag beats environment beats the zero default.
fn resolve_seed(flag: Option<u64>) -> Result<RngSeed, CliError> {
    if let Some(s) = flag {
        return Ok(RngSeed(s));
    }
    match std::env::var("STAKEPOWER_SEED") {
        Ok(raw) => raw.trim().parse::<u64>().map(RngSeed).map_err(|_| {
            CliError::Usage(format!(
                "STAKEPOWER_SEED must be an unsigned 64-bit integer, got `{raw}`"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(RngSeed(0)),
        Err(e) => Err(CliError::Usage(format!("STAKEPOWER_SEED: {e}"))),
    }
}

fn summarize(a: SummarizeArgs) -> Result<(), CliError> {
    let records = ingest_stakes(&a.stakes, a.min_stake)?;
    let values: Vec<f64> = records.iter().map(|r| r.stake).collect();
    let s = stake_summary(&values)?;
    let body = format!(
        "count,min,median,mean,max\n{},{},{},{},{}\n",
        s.count,
        fmt12(s.min),
        fmt12(s.median),
        fmt12(s.mean),
        fmt12(s.max)
    );
    let manifest = RunManifest::new("summarize")
        .param("stakes", a.stakes.display())
        .opt_param("min_stake", a.min_stake);
    emit(a.out.as_deref(), &body, &manifest)
}

fn fit(a: FitArgs) -> Result<(), CliError> {
    let records = ingest_stakes(&a.stakes, a.min_stake)?;
    let values: Vec<f64> = records.iter().map(|r| r.stake).collect();
    let params = fit_gamma_mle(&values)?;
    let body = format!(
        "count={}\nshape={}\nscale={}\n",
        values.len(),
        fmt12(params.shape),
        fmt12(params.scale)
    );
    let manifest = RunManifest::new("fit")
        .param("stakes", a.stakes.display())
        .opt_param("min_stake", a.min_stake);
    emit(a.out.as_deref(), &body, &manifest)
}

fn banzhaf(a: BanzhafArgs) -> Result<(), CliError> {
    let records: Vec<StakeRecord> = match (&a.stakes, &a.weights) {
        (Some(path), None) => ingest_stakes(path, a.min_stake)?,
        (None, Some(list)) => {
            if let Some(bad) = list.iter().find(|v| !v.is_finite() || **v <= 0.0) {
                return Err(CliError::Usage(format!(
                    "inline stake values must be positive and finite, got {bad}"
                )));
            }
            list.iter()
                .enumerate()
                .map(|(i, &stake)| StakeRecord {
                    address: i.to_string(),
                    stake,
                })
                .collect()
        }
        _ => unreachable!("clap enforces exactly one input source"),
    };
    let rule = QuotaRule::new(a.theta, a.vwa.into())?;
    let stakes = StakeProfile::new(records.iter().map(|r| r.stake).collect())?;
    let weights = rule.vwa().apply(&stakes)?;
    let seed = resolve_seed(a.seed)?;

    let power: PowerProfile = match a.method {
        MethodArg::Enum => banzhaf_enumerate(&weights, rule.theta())?,
        MethodArg::Dp => integer_dp(&records, rule)?,
        MethodArg::Mc => {
            let est = estimate_pivots(&weights, &[rule.theta()], a.samples, seed)?;
            let (p, degenerate) = normalize_power(&est, 0)?;
            if degenerate {
                eprintln!("note: no pivots observed; all power estimates are zero");
            }
            p
        }
    };
    let ratios = power_stake_ratios(&power, &weights, a.ratio.into())?;

    // addresses are untrusted strings, so build this CSV with a real writer
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "agent",
        "address",
        "stake",
        "weight",
        "power_raw",
        "power_normalized",
        "ratio",
    ])
    .map_err(|e| CliError::Data(e.to_string()))?;
    for (i, r) in records.iter().enumerate() {
        wtr.write_record([
            i.to_string(),
            r.address.clone(),
            fmt12(r.stake),
            fmt12(weights.as_slice()[i]),
            fmt12(power.raw[i]),
            fmt12(power.normalized[i]),
            fmt12(ratios[i]),
        ])
        .map_err(|e| CliError::Data(e.to_string()))?;
    }
    let body = String::from_utf8(
        wtr.into_inner()
            .map_err(|e| CliError::Data(e.to_string()))?,
    )
    .expect("csv writer emits utf-8");

    let mut manifest = RunManifest::new("banzhaf")
        .param("theta", a.theta)
        .param("vwa", arg_name(a.vwa))
        .param("method", arg_name(a.method))
        .param("ratio", arg_name(a.ratio))
        .opt_param("stakes", a.stakes.as_ref().map(|p| p.display()))
        .opt_param("min_stake", a.min_stake);
    if let Some(list) = &a.weights {
        manifest = manifest.param(
            "weights",
            list.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    if a.method == MethodArg::Mc {
        manifest = manifest.param("samples", a.samples).seeded(seed.0);
    }
    emit(a.out.as_deref(), &body, &manifest)
}

/// Exact integer counting path: linear weights and integer stakes only.
fn integer_dp(records: &[StakeRecord], rule: QuotaRule) -> Result<PowerProfile, CliError> {
    if rule.vwa() != Vwa::Linear {
        return Err(CliError::Usage(
            "--method dp requires --vwa linear: square-root weights are not integers".into(),
        ));
    }
    const EXACT_LIMIT: f64 = (1u64 << 53) as f64;
    let mut stakes = Vec::with_capacity(records.len());
    for r in records {
        if r.stake.fract() != 0.0 || r.stake < 1.0 || r.stake > EXACT_LIMIT {
            return Err(CliError::Usage(format!(
                "--method dp requires integer stakes (got {}); use enum or mc instead",
                r.stake
            )));
        }
        stakes.push(r.stake as u64);
    }
    let total = stakes
        .iter()
        .try_fold(0u64, |acc, &s| acc.checked_add(s))
        .ok_or_else(|| CliError::Usage("total stake overflows 64 bits".into()))?;
    // smallest integer coalition weight that reaches theta * total, so the
    // integer rule wins exactly when the relative rule does
    let quota = (rule.theta() * total as f64).ceil().max(1.0) as u64;
    Ok(banzhaf_dp(&stakes, quota)?)
}

fn analytic(a: AnalyticArgs) -> Result<(), CliError> {
    let cfg = AnalyticConfig::new(a.n, a.alpha).map_err(|e| CliError::Usage(e.to_string()))?;
    let quotas: Vec<f64> = match (a.quota_grid, a.theta) {
        (Some(points), None) => {
            if points < 3 {
                return Err(CliError::Usage(
                    "--quota-grid needs at least 3 points to have an interior".into(),
                ));
            }
            interior_quota_grid(points)
        }
        (None, Some(theta)) => {
            if !(theta.is_finite() && theta > 0.0 && theta < 1.0) {
                return Err(CliError::Usage(format!(
                    "--theta must lie strictly between 0 and 1, got {theta}"
                )));
            }
            vec![theta]
        }
        _ => unreachable!("clap enforces exactly one evaluation target"),
    };

    let mut body = String::from("theta,expected_ratio,ratio_variance\n");
    for &theta in &quotas {
        let mean = expected_ratio(theta, &cfg)?;
        let var = single_agent_variance(theta, &cfg)?;
        body.push_str(&format!(
            "{},{},{}\n",
            fmt12(theta),
            fmt12(mean),
            fmt12(var)
        ));
    }
    let manifest = RunManifest::new("analytic")
        .param("n", a.n)
        .param("alpha", a.alpha)
        .opt_param("quota_grid", a.quota_grid)
        .opt_param("theta", a.theta);
    emit(a.out.as_deref(), &body, &manifest)
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    if a.grid < 2 {
        return Err(CliError::Usage(
            "--grid needs at least the two endpoints".into(),
        ));
    }
    let seed = resolve_seed(a.seed)?;
    let mut cfg = SweepConfig::new(a.n, a.alpha, seed);
    cfg.stake_draws = a.m;
    cfg.quotas = quota_grid(a.grid);
    cfg.estimator = if a.exact {
        PowerEstimator::ExactEnumeration
    } else {
        PowerEstimator::MonteCarlo { samples: a.samples }
    };
    cfg.ratio_kind = a.ratio.into();
    let result = run_sweep(&cfg)?;

    let mut body = String::from("theta,degenerate,mean_ratio,within_variance\n");
    for (j, &theta) in result.quotas.iter().enumerate() {
        body.push_str(&format!(
            "{},{},{},{}\n",
            fmt12(theta),
            result.degenerate[j] as u8,
            fmt12(result.mean_ratio[j]),
            fmt12(result.within_var[j])
        ));
    }
    let manifest = RunManifest::new("sweep")
        .param("n", a.n)
        .param("alpha", a.alpha)
        .param("m", a.m)
        .param("grid", a.grid)
        .param("ratio", arg_name(a.ratio))
        .param("estimator", if a.exact { "exact".into() } else { format!("mc:{}", a.samples) })
        .seeded(seed.0);
    emit(a.out.as_deref(), &body, &manifest)
}

fn fixed_quota(a: FixedQuotaArgs) -> Result<(), CliError> {
    let seed = resolve_seed(a.seed)?;
    let mut cfg = SweepConfig::new(a.n, a.alpha, seed);
    cfg.stake_draws = a.m;
    cfg.estimator = if a.exact {
        PowerEstimator::ExactEnumeration
    } else {
        PowerEstimator::MonteCarlo { samples: a.samples }
    };
    cfg.ratio_kind = a.ratio.into();
    let stats = fixed_quota_distribution(&cfg, a.theta)?;

    let mut body = String::from("profile,mean_ratio,variance\n");
    for (m, s) in stats.iter().enumerate() {
        body.push_str(&format!("{m},{},{}\n", fmt12(s.mean), fmt12(s.pop_var)));
    }
    let manifest = RunManifest::new("fixed-quota")
        .param("theta", a.theta)
        .param("n", a.n)
        .param("alpha", a.alpha)
        .param("m", a.m)
        .param("ratio", arg_name(a.ratio))
        .param("estimator", if a.exact { "exact".into() } else { format!("mc:{}", a.samples) })
        .seeded(seed.0);
    emit(a.out.as_deref(), &body, &manifest)
}

fn pb_select(a: PbSelectArgs) -> Result<(), CliError> {
    let records = ingest_stakes(&a.stakes, a.min_stake)?;
    let stakes = StakeProfile::new(records.iter().map(|r| r.stake).collect())?;
    let projects = load_projects(&a.projects, records.len())?;
    let seed = resolve_seed(a.seed)?;
    let picked = greedy_select(&projects, &stakes, a.budget, seed)?;

    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["rank", "id", "cost", "score"])
        .map_err(|e| CliError::Data(e.to_string()))?;
    for (rank, &j) in picked.iter().enumerate() {
        let p = &projects[j];
        let score: f64 = p
            .approvals
            .iter()
            .zip(stakes.as_slice())
            .filter_map(|(&yes, &s)| yes.then_some(s))
            .sum();
        wtr.write_record([
            (rank + 1).to_string(),
            p.id.clone(),
            fmt12(p.cost),
            fmt12(score),
        ])
        .map_err(|e| CliError::Data(e.to_string()))?;
    }
    let body = String::from_utf8(
        wtr.into_inner()
            .map_err(|e| CliError::Data(e.to_string()))?,
    )
    .expect("csv writer emits utf-8");

    let manifest = RunManifest::new("pb-select")
        .param("projects", a.projects.display())
        .param("stakes", a.stakes.display())
        .param("budget", a.budget)
        .opt_param("min_stake", a.min_stake)
        .seeded(seed.0);
    emit(a.out.as_deref(), &body, &manifest)
}
