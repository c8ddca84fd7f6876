//! Command-line front end: argument parsing, dispatch and output formatting.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use stable_est::bounds::{
    binom_log_oracle, binom_moment_check, binom_ratio_oracle, eta_grid, exact_risk_worst_bounded,
    lower_avg_corollary, lower_avg_sharper_sup, lower_lp, lower_worst, maximal_coupling_sample, phase_threshold, rate_avg_bounded,
    tv_discrete, Problem, TwoPointInstance,
};
use stable_est::dpbridge::{
    dp_audit, dp_to_stability, laplace_mechanism, prop1_curves, AuditConfig, PrivacyBudget, PrivacyProblem,
};
use stable_est::estimators::{
    avg_bounded, classical_thresholds, exact_worst_bounded, heavy_tail_estimator, naive_avg_bounded,
    shrinkage_bounded, sparse_soft, wavelet_estimator, BoundedMeanSpec, HeavyMode, HeavyTailSpec, ShrinkageRule,
    SparseMeanSpec, WaveletConstants, WaveletEstimatorSpec, WaveletMode,
};
use stable_est::risk::{log_grid, sweep, RiskCurve, RiskMethod, RiskRow, SweepConfig, SweepProblem, SCHEMA_VERSION};
use stable_est::stability::certify_sup;
use stable_est::wavelet::{besov_test_functions, empirical_coeffs, WaveletBasis};
use stable_est::{
    Dataset, DistributionSpec, EstimatorHandle, Exec, NormKind, SearchBudget, SearchDomain, Seed, StabilityOrder,
    Witness,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ASSERT: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "STABLE_EST_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Internal(anyhow::Error),
    Assert(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Internal(_) => EXIT_INTERNAL,
            CliError::Assert(_) => EXIT_ASSERT,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Internal(e) => write!(f, "internal error: {e:#}"),
            CliError::Assert(m) => write!(f, "assertion failed: {m}"),
        }
    }
}

impl From<stable_est::Error> for CliError {
    fn from(e: stable_est::Error) -> Self {
        match e {
            stable_est::Error::Io(m) => CliError::Internal(anyhow::anyhow!(m)),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Internal(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "stable-est",
    version,
    about = "Stability-constrained estimation: certification, risk sweeps, bounds and DP conversions",
    after_help = "Exit codes: 0 success, 1 internal failure, 2 usage error, 3 failed --assert.\n\
                  Set STABLE_EST_THREADS to cap parallelism. `--config FILE` (a JSON object of flag names to values)\n\
                  supplies defaults that explicit flags override."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Search for the worst stability statistic of an estimator.
    ///
    /// Output JSON: {schema_version, estimator, order, found_sup, budget_claim, budget_satisfied,
    /// evaluations, strategy, witness_csv_path | witness_csv}.
    Certify(CertifyArgs),
    /// Evaluate an estimator on a CSV dataset.
    ///
    /// Output JSON: {schema_version, estimator, estimate, spec_echo, certified: {p, beta} | null}.
    Eval(EvalArgs),
    /// Witnessed sup-risk against the stability budget.
    ///
    /// Output CSV columns: beta,sup_mse,ci,bound_lower,bound_upper,argmax_param,schema_version.
    Sweep(SweepArgs),
    /// Two-point lower bounds and exact risk formulas.
    ///
    /// Output JSON: {schema_version, problem, order, n, r, beta, ...bound values}.
    Lower(LowerArgs),
    /// Differential-privacy conversions, mechanism draws, curves and audits.
    ///
    /// Output JSON, shape depending on --action.
    Dp(DpArgs),
    /// Exact binomial oracles and maximal-coupling checks.
    ///
    /// Output JSON: {schema_version, which, exact, bound, pass, ...}.
    Oracle(OracleArgs),
    /// Pointwise wavelet estimate on simulated regression data.
    ///
    /// Output JSON: {schema_version, fhat_x0, truth, L, T, coeff_table_csv_path | coeff_table_csv}.
    WaveletDemo(WaveletArgs),
    /// Render sweep CSVs as a log-log SVG with transition markers.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorId {
    SampleMean,
    ConstantZero,
    ShrinkageWorst,
    ShrinkageRefined,
    ExactWorstBounded,
    AvgBounded,
    NaiveAvgBounded,
    HeavyWorst,
    HeavyAvg,
    SparseSoft,
    HardThreshold,
    SoftThreshold,
    WaveletWorst,
    WaveletAvg,
    WaveletBaseline,
    Laplace,
}

/// Parameters shared by every estimator constructor.
#[derive(Args, Debug, Clone, Serialize)]
pub struct EstimatorArgs {
    #[arg(long, value_enum)]
    pub estimator: EstimatorId,
    /// Sample size the estimator is built for.
    #[arg(long)]
    pub n: usize,
    /// Radius of the parameter / moment bound.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Stability budget beta_n.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Dimension.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Stability order the estimator is tuned for (refined shrinkage).
    #[arg(long = "est-p", default_value = "inf")]
    pub est_p: String,
    /// Moment order for heavy-tail estimators.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    /// Sparsity.
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// Threshold for classical thresholding.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Privacy budget for the Laplace mechanism (base: exact-worst-bounded).
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Evaluation point for wavelet estimators.
    #[arg(long, default_value_t = 0.3)]
    pub x0: f64,
    /// Smoothness nu for wavelet estimators.
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
}

fn parse_order(s: &str) -> CliResult<StabilityOrder> {
    s.parse::<StabilityOrder>().map_err(|e| usage(e.to_string()))
}

fn wavelet_spec(a: &EstimatorArgs, mode: WaveletMode) -> WaveletEstimatorSpec {
    WaveletEstimatorSpec {
        basis: WaveletBasis::haar(),
        x0: a.x0,
        nu: a.nu,
        smoothness: a.nu,
        n: a.n,
        beta: a.beta,
        mode,
        constants: WaveletConstants::default(),
    }
}

fn build_estimator(a: &EstimatorArgs) -> CliResult<EstimatorHandle> {
    let bounded = |order| BoundedMeanSpec { r: a.r, n: a.n, beta: a.beta, order, d: a.d };
    let heavy = |mode| HeavyTailSpec { r: a.r, k: a.k, n: a.n, beta: a.beta, mode, d: a.d };
    Ok(match a.estimator {
        EstimatorId::SampleMean => EstimatorHandle::sample_mean(a.d),
        EstimatorId::ConstantZero => EstimatorHandle::constant_zero(a.d),
        EstimatorId::ShrinkageWorst => shrinkage_bounded(&bounded(StabilityOrder::Inf), ShrinkageRule::Worst)?,
        EstimatorId::ShrinkageRefined => shrinkage_bounded(&bounded(parse_order(&a.est_p)?), ShrinkageRule::Refined)?,
        EstimatorId::ExactWorstBounded => exact_worst_bounded(a.n, a.r, a.beta, a.d)?,
        EstimatorId::AvgBounded => {
            one_dim(a)?;
            avg_bounded(a.n, a.r, a.beta)?
        }
        EstimatorId::NaiveAvgBounded => {
            one_dim(a)?;
            naive_avg_bounded(a.n, a.r, a.beta)?
        }
        EstimatorId::HeavyWorst => heavy_tail_estimator(&heavy(HeavyMode::WorstCase))?,
        EstimatorId::HeavyAvg => heavy_tail_estimator(&heavy(HeavyMode::AverageCase))?,
        EstimatorId::SparseSoft => sparse_soft(&SparseMeanSpec { r: a.r, s: a.s, d: a.d, n: a.n, beta: a.beta })?,
        EstimatorId::HardThreshold => classical_thresholds(a.tau, a.d)?.0,
        EstimatorId::SoftThreshold => classical_thresholds(a.tau, a.d)?.1,
        EstimatorId::WaveletWorst => wavelet_estimator(&wavelet_spec(a, WaveletMode::Worst))?,
        EstimatorId::WaveletAvg => wavelet_estimator(&wavelet_spec(a, WaveletMode::Avg))?,
        EstimatorId::WaveletBaseline => wavelet_estimator(&wavelet_spec(a, WaveletMode::Baseline))?,
        EstimatorId::Laplace => {
            let base = exact_worst_bounded(a.n, a.r, a.beta, a.d)?;
            laplace_mechanism(&base, PrivacyBudget::new(a.eps)?)?
        }
    })
}

fn one_dim(a: &EstimatorArgs) -> CliResult<()> {
    if a.d != 1 {
        return Err(usage(format!("{:?} is one-dimensional; got --d {}", a.estimator, a.d)));
    }
    Ok(())
}

fn is_heavy(id: EstimatorId) -> bool {
    matches!(id, EstimatorId::HeavyWorst | EstimatorId::HeavyAvg)
}

fn is_wavelet(id: EstimatorId) -> bool {
    matches!(id, EstimatorId::WaveletWorst | EstimatorId::WaveletAvg | EstimatorId::WaveletBaseline)
}

fn is_cube(id: EstimatorId) -> bool {
    matches!(id, EstimatorId::SparseSoft | EstimatorId::HardThreshold | EstimatorId::SoftThreshold)
}

#[derive(Args, Debug, Serialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// Stability order to certify: a number >= 1 or `inf`.
    #[arg(long, default_value = "inf")]
    pub p: String,
    /// JSON file with {random_restarts, ascent_iters, corner_enumeration_limit, per_coordinate_grid}.
    #[arg(long)]
    pub budget_file: Option<PathBuf>,
    /// Search box for unbounded domains (heavy-tail inputs, regression responses).
    #[arg(long = "box", default_value_t = 50.0)]
    pub search_box: f64,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the witness dataset(s) here as CSV instead of inlining them.
    #[arg(long)]
    pub witness_out: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 3 if the found supremum exceeds the certificate.
    #[arg(long)]
    pub assert: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// CSV with columns x0..x{d-1} (or x,y for regression).
    #[arg(long)]
    pub data: PathBuf,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemArg {
    Bounded,
    Heavy,
    Sparse,
    Nonparametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Exact,
    Mc,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    /// Estimation problem.
    #[arg(long, value_enum)]
    pub problem: ProblemArg,
    /// Stability order: a number >= 1 or `inf`.
    #[arg(long, default_value = "inf")]
    pub p: String,
    /// Sample size.
    #[arg(long)]
    pub n: usize,
    /// Radius of the parameter / moment bound.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Smallest budget; defaults to r/(50n).
    #[arg(long)]
    pub grid_lo: Option<f64>,
    /// Largest budget; defaults to 10r/n.
    #[arg(long)]
    pub grid_hi: Option<f64>,
    /// Grid points.
    #[arg(long, default_value_t = 30)]
    pub points: usize,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 2000)]
    pub reps: usize,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Distributions per extremal family.
    #[arg(long, default_value_t = 41)]
    pub family_points: usize,
    /// `exact` enumerates two-point families where possible; `mc` always simulates.
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    /// Moment order for the heavy-tail problem.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    /// Sparsity.
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// Dimension.
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    /// Smoothness nu of the regression class.
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    /// Evaluation point in (0, 1).
    #[arg(long, default_value_t = 0.3)]
    pub x0: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct LowerArgs {
    /// `bounded` or `heavy`.
    #[arg(long, value_enum)]
    pub problem: ProblemArg,
    /// Stability order: a number >= 1 or `inf`.
    #[arg(long, default_value = "inf")]
    pub p: String,
    /// Sample size.
    #[arg(long)]
    pub n: usize,
    /// Radius of the parameter / moment bound.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Stability budget beta_n.
    #[arg(long)]
    pub beta: f64,
    /// Parameter separation for the bounded two-point pair; defaults to 2r.
    #[arg(long)]
    pub delta_theta: Option<f64>,
    /// Moment order for the heavy-tail problem.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    /// Moved mass in the heavy-tail pair.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Points in the eta grid.
    #[arg(long, default_value_t = 200)]
    pub eta_points: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DpAction {
    Mechanism,
    Convert,
    Curves,
    Audit,
}

#[derive(Args, Debug, Serialize)]
pub struct DpArgs {
    /// What to compute.
    #[arg(long, value_enum)]
    pub action: DpAction,
    /// Privacy budget epsilon.
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Radius of the parameter / moment bound.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Sample size.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Worst-case budget of the base estimator; defaults to 2r/n.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Dataset for `mechanism`; defaults to n copies of r.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// `bounded` or `heavy` for `curves`.
    #[arg(long, value_enum, default_value_t = ProblemArg::Bounded)]
    pub problem: ProblemArg,
    /// Moment order for the heavy-tail problem.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    /// Smallest epsilon in the curve grid; defaults to 0.1/n.
    #[arg(long)]
    pub eps_lo: Option<f64>,
    /// Largest epsilon in the curve grid.
    #[arg(long, default_value_t = 5.0)]
    pub eps_hi: f64,
    /// Grid points.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Constant in the stability lower bound.
    #[arg(long, default_value_t = stable_est::dpbridge::DEFAULT_C0)]
    pub c0: f64,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,
    /// Histogram bins for the audit.
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 3 if an audit fails.
    #[arg(long)]
    pub assert: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleWhich {
    BinomLog,
    BinomRatio,
    BinomMoment,
    Coupling,
}

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    /// Which check to run.
    #[arg(long, value_enum)]
    pub which: OracleWhich,
    /// Sample size.
    #[arg(long)]
    pub n: usize,
    /// Success probability of the binomial.
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Power p (binom-ratio) or moment m (binom-moment).
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Coupling: probability of +r under each law.
    #[arg(long, default_value_t = 0.5)]
    pub prob1: f64,
    #[arg(long, default_value_t = 0.6)]
    pub prob2: f64,
    /// Radius of the parameter / moment bound.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 3 if the check fails.
    #[arg(long)]
    pub assert: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Worst,
    Avg,
    Baseline,
}

#[derive(Args, Debug, Serialize)]
pub struct WaveletArgs {
    /// `haar`, `db2`, `db3` or `db4`.
    #[arg(long, default_value = "haar")]
    pub basis: String,
    /// Sample size.
    #[arg(long)]
    pub n: usize,
    /// Smoothness nu of the regression class.
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    /// Evaluation point in (0, 1).
    #[arg(long, default_value_t = 0.3)]
    pub x0: f64,
    /// Estimator mode.
    #[arg(long, value_enum, default_value_t = ModeArg::Baseline)]
    pub mode: ModeArg,
    /// Stability budget beta_n.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the coefficient table here instead of inlining it.
    #[arg(long)]
    pub coeff_out: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PlotArgs {
    /// Sweep CSV; repeat for several curves.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Legend label per input (defaults to the file stem).
    #[arg(long = "label")]
    pub labels: Vec<String>,
    /// Stability order per input, used for transition markers.
    #[arg(long = "order")]
    pub orders: Vec<String>,
    /// Estimation problem.
    #[arg(long, value_enum, default_value_t = ProblemArg::Bounded)]
    pub problem: ProblemArg,
    /// Sample size.
    #[arg(long)]
    pub n: usize,
    /// Radius of the parameter / moment bound.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Sparsity.
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: PathBuf,
}

/// Splices `--config FILE` defaults in after the subcommand so that later
/// (explicit) flags override them.
pub fn expand_config(argv: Vec<String>) -> CliResult<Vec<String>> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let mut argv = argv;
    let path = if let Some(v) = argv[pos].strip_prefix("--config=") {
        let v = v.to_string();
        argv.remove(pos);
        v
    } else {
        if pos + 1 >= argv.len() {
            return Err(usage("--config needs a file path"));
        }
        let v = argv.remove(pos + 1);
        argv.remove(pos);
        v
    };
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
    let obj: serde_json::Map<String, Value> =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {path} is not a JSON object: {e}")))?;
    let mut extra = Vec::new();
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => extra.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                for it in items {
                    extra.push(flag.clone());
                    extra.push(scalar(&it));
                }
            }
            other => {
                extra.push(flag);
                extra.push(scalar(&other));
            }
        }
    }
    if argv.len() < 2 {
        return Err(usage("missing subcommand"));
    }
    let tail = argv.split_off(2);
    argv.extend(extra);
    argv.extend(tail);
    Ok(argv)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let cmd = Cli::command().args_override_self(true).mut_subcommands(|c| c.args_override_self(true));
    let cli = match cmd.try_get_matches_from(&argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("usage error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return EXIT_USAGE;
            }
        }
    }
    eprintln!("config: {}", serde_json::to_string(&cli).unwrap_or_default());
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Certify(a) => cmd_certify(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Lower(a) => cmd_lower(a),
        Command::Dp(a) => cmd_dp(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::WaveletDemo(a) => cmd_wavelet(a),
        Command::Plot(a) => cmd_plot(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).context("writing stdout")?;
            if !text.ends_with('\n') {
                so.write_all(b"\n").context("writing stdout")?;
            }
        }
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, v: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).context("serializing output")?;
    emit(out, &text)
}

fn certify_domain(a: &CertifyArgs) -> SearchDomain {
    let e = &a.est;
    if is_heavy(e.estimator) {
        SearchDomain::unbounded(e.n, e.d, a.search_box)
    } else if is_wavelet(e.estimator) {
        let b = a.search_box;
        let hints = vec![vec![e.x0, b], vec![e.x0, -b], vec![0.9, b], vec![0.9, -b]];
        SearchDomain::regression(e.n, b).with_hints(hints)
    } else if is_cube(e.estimator) {
        SearchDomain::cube(e.n, e.d, e.r)
    } else {
        SearchDomain::ball(e.n, e.d, e.r)
    }
}

fn cmd_certify(a: &CertifyArgs) -> CliResult<()> {
    let order = parse_order(&a.p)?;
    let est = build_estimator(&a.est)?;
    let budget: SearchBudget = match &a.budget_file {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("bad budget file: {e}")))?
        }
        None => SearchBudget::default(),
    };
    let rep = certify_sup(&est, &certify_domain(a), order, &budget, Seed(a.seed))?;
    let witness_csv = match &rep.witness {
        Witness::Sample(ds) => ds.to_csv_string(),
        Witness::Pair(x, y) => format!("{}\n{}", x.to_csv_string(), y.to_csv_string()),
    };
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "estimator": est.id(),
        "order": rep.order,
        "found_sup": rep.found_sup,
        "budget_claim": rep.budget_claim,
        "budget_satisfied": rep.budget_satisfied,
        "evaluations": rep.evaluations,
        "strategy": rep.strategy,
    });
    match &a.witness_out {
        Some(p) => {
            fs::write(p, &witness_csv).with_context(|| format!("writing {}", p.display()))?;
            v["witness_csv_path"] = json!(p.display().to_string());
        }
        None => v["witness_csv"] = json!(witness_csv),
    }
    emit_json(a.out.as_deref(), &v)?;
    if a.assert && !rep.budget_satisfied {
        return Err(CliError::Assert(format!("found {} exceeds claim {:?}", rep.found_sup, rep.budget_claim)));
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let est = build_estimator(&a.est)?;
    let file = fs::File::open(&a.data).map_err(|e| usage(format!("cannot open {}: {e}", a.data.display())))?;
    let (radius, norm) = if is_heavy(a.est.estimator) || is_wavelet(a.est.estimator) {
        (f64::INFINITY, NormKind::L2)
    } else if is_cube(a.est.estimator) {
        (a.est.r, NormKind::LInf)
    } else {
        (a.est.r, NormKind::L2)
    };
    let ds = Dataset::read_csv(file, radius, norm)?;
    let estimate = est.evaluate(&ds, Seed(a.seed))?;
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "estimator": est.id(),
        "estimate": estimate,
        "spec_echo": &a.est,
        "certified": est.certified().map(|c| json!({"p": c.order, "beta": c.beta})),
    });
    emit_json(a.out.as_deref(), &v)
}

fn cmd_sweep(a: &SweepArgs) -> CliResult<()> {
    let order = parse_order(&a.p)?;
    let problem = match a.problem {
        ProblemArg::Bounded => SweepProblem::Bounded,
        ProblemArg::Heavy => SweepProblem::Heavy { k: a.k },
        ProblemArg::Sparse => SweepProblem::Sparse { s: a.s, d: a.d },
        ProblemArg::Nonparametric => SweepProblem::Nonparametric { nu: a.nu, x0: a.x0, sigma: a.sigma },
    };
    if a.n == 0 || a.points == 0 {
        return Err(usage("--n and --points must be positive"));
    }
    let nf = a.n as f64;
    let lo = a.grid_lo.unwrap_or(a.r / (50.0 * nf));
    let hi = a.grid_hi.unwrap_or(10.0 * a.r / nf);
    if !(lo > 0.0 && hi > lo) {
        return Err(usage("need 0 < grid-lo < grid-hi"));
    }
    let mut cfg = SweepConfig::new(problem, order, log_grid(lo, hi, a.points), a.n, a.r);
    cfg.reps = a.reps;
    cfg.seed = Seed(a.seed);
    cfg.family_points = a.family_points;
    cfg.method = match a.method {
        MethodArg::Exact => RiskMethod::ExactWhenAvailable,
        MethodArg::Mc => RiskMethod::MonteCarlo,
    };
    let curve = sweep(&cfg, Exec::default())?;
    emit(a.out.as_deref(), &curve.to_csv_string())
}

fn cmd_lower(a: &LowerArgs) -> CliResult<()> {
    let order = parse_order(&a.p)?;
    let etas = eta_grid(0.0, 0.5, a.eta_points.max(2));
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "order": order,
        "n": a.n,
        "r": a.r,
        "beta": a.beta,
    });
    match a.problem {
        ProblemArg::Bounded => {
            let dt = a.delta_theta.unwrap_or(2.0 * a.r);
            let lp = lower_lp(dt, a.n, order, a.beta, true, &etas)?;
            v["problem"] = json!("bounded");
            v["delta_theta"] = json!(dt);
            v["lower_lp"] = serde_json::to_value(lp).context("serializing")?;
            v["exact_worst_risk"] = json!(exact_risk_worst_bounded(a.n, a.r, a.beta));
            v["rate_avg"] = json!(rate_avg_bounded(a.n, a.r, a.beta));
            v["avg_corollary"] = json!(lower_avg_corollary(dt, a.n, a.beta));
            let (s, e) = lower_avg_sharper_sup(dt, a.n, a.beta, a.eta_points.max(2));
            v["avg_sharper"] = json!({"value": s, "eta": e});
        }
        ProblemArg::Heavy => {
            let inst = TwoPointInstance::heavy(a.r, a.k, a.eps)?;
            let tv = tv_discrete(&inst.p1, &inst.p2)?;
            v["problem"] = json!("heavy");
            v["delta_theta"] = json!(inst.delta_theta);
            v["tv"] = json!(tv);
            v["lower_worst"] = json!(lower_worst(inst.delta_theta, a.n as f64 * tv, a.beta));
            v["lower_lp"] =
                serde_json::to_value(lower_lp(inst.delta_theta, a.n, order, a.beta, inst.mixable, &etas)?).context("serializing")?;
        }
        _ => return Err(usage("lower supports --problem bounded or heavy")),
    }
    emit_json(a.out.as_deref(), &v)
}

fn cmd_dp(a: &DpArgs) -> CliResult<()> {
    let beta = a.beta.unwrap_or(2.0 * a.r / a.n.max(1) as f64);
    let v = match a.action {
        DpAction::Convert => {
            let c = dp_to_stability(a.eps, a.r)?;
            json!({"schema_version": SCHEMA_VERSION, "eps": a.eps, "r": a.r, "beta": c.beta, "simple_beta": c.simple_beta})
        }
        DpAction::Mechanism => {
            let base = exact_worst_bounded(a.n, a.r, beta, 1)?;
            let m = laplace_mechanism(&base, PrivacyBudget::new(a.eps)?)?;
            let ds = match &a.data {
                Some(p) => {
                    let f = fs::File::open(p).map_err(|e| usage(format!("cannot open {}: {e}", p.display())))?;
                    Dataset::read_csv(f, a.r, NormKind::L2)?
                }
                None => Dataset::scalar(&vec![a.r; a.n], a.r)?,
            };
            json!({
                "schema_version": SCHEMA_VERSION,
                "eps": a.eps,
                "beta": beta,
                "noise_scale": beta / a.eps,
                "base_output": base.evaluate(&ds, Seed(a.seed))?[0],
                "output": m.evaluate(&ds, Seed(a.seed))?[0],
            })
        }
        DpAction::Curves => {
            let problem = match a.problem {
                ProblemArg::Bounded => PrivacyProblem::Bounded,
                ProblemArg::Heavy => PrivacyProblem::Heavy { k: a.k },
                _ => return Err(usage("curves support --problem bounded or heavy")),
            };
            let lo = a.eps_lo.unwrap_or(0.1 / a.n.max(1) as f64);
            if !(lo > 0.0 && a.eps_hi > lo) {
                return Err(usage("need 0 < eps-lo < eps-hi"));
            }
            let c = prop1_curves(problem, a.n, a.r, &log_grid(lo, a.eps_hi, a.points.max(2)), a.c0)?;
            let mut v = serde_json::to_value(c).context("serializing")?;
            v["schema_version"] = json!(SCHEMA_VERSION);
            v
        }
        DpAction::Audit => {
            let base = exact_worst_bounded(a.n, a.r, beta, 1)?;
            let m = laplace_mechanism(&base, PrivacyBudget::new(a.eps)?)?;
            let ds = Dataset::scalar(&vec![a.r; a.n], a.r)?;
            let nb = ds.replace_point(0, &[-a.r])?;
            let cfg = AuditConfig { reps: a.reps, bins: a.bins, ..Default::default() };
            let rep = dp_audit(&m, &ds, &nb, a.eps, cfg, Seed(a.seed), Exec::default())?;
            let mut v = serde_json::to_value(rep).context("serializing")?;
            v["schema_version"] = json!(SCHEMA_VERSION);
            v["beta"] = json!(beta);
            if a.assert && !rep.pass {
                emit_json(a.out.as_deref(), &v)?;
                return Err(CliError::Assert("dp audit failed".into()));
            }
            v
        }
    };
    emit_json(a.out.as_deref(), &v)
}

fn cmd_oracle(a: &OracleArgs) -> CliResult<()> {
    let mut v = match a.which {
        OracleWhich::BinomLog => serde_json::to_value(binom_log_oracle(a.n, a.q)?),
        OracleWhich::BinomRatio => serde_json::to_value(binom_ratio_oracle(a.n, a.q, a.p)?),
        OracleWhich::BinomMoment => serde_json::to_value(binom_moment_check(a.n, a.q, a.p)?),
        OracleWhich::Coupling => {
            let p1 = DistributionSpec::BinaryPmR { r: a.r, prob_plus: a.prob1 };
            let p2 = DistributionSpec::BinaryPmR { r: a.r, prob_plus: a.prob2 };
            let tv = tv_discrete(&p1, &p2)?;
            let (x, y) = maximal_coupling_sample(&p1, &p2, a.n, Seed(a.seed))?;
            let rate = x.hamming(&y)? as f64 / a.n as f64;
            let se = (tv * (1.0 - tv) / a.n as f64).sqrt();
            Ok(json!({"exact": rate, "bound": tv, "pass": (rate - tv).abs() <= 4.0 * se + 1e-12, "tv": tv}))
        }
    }
    .context("serializing")?;
    v["schema_version"] = json!(SCHEMA_VERSION);
    v["which"] = serde_json::to_value(a.which).context("serializing")?;
    let pass = v["pass"].as_bool().unwrap_or(false);
    emit_json(a.out.as_deref(), &v)?;
    if a.assert && !pass {
        return Err(CliError::Assert("oracle check failed".into()));
    }
    Ok(())
}

fn parse_basis(s: &str) -> CliResult<WaveletBasis> {
    match s {
        "haar" => Ok(WaveletBasis::haar()),
        "db2" | "db3" | "db4" => Ok(WaveletBasis::daubechies(s[2..].parse().expect("digit"), 0)?),
        _ => Err(usage(format!("unknown basis `{s}` (haar, db2, db3, db4)"))),
    }
}

fn cmd_wavelet(a: &WaveletArgs) -> CliResult<()> {
    let basis = parse_basis(&a.basis)?;
    let mode = match a.mode {
        ModeArg::Worst => WaveletMode::Worst,
        ModeArg::Avg => WaveletMode::Avg,
        ModeArg::Baseline => WaveletMode::Baseline,
    };
    let spec = WaveletEstimatorSpec {
        basis: basis.clone(),
        x0: a.x0,
        nu: a.nu,
        smoothness: a.nu,
        n: a.n,
        beta: a.beta,
        mode,
        constants: WaveletConstants::default(),
    };
    let est = wavelet_estimator(&spec)?;
    let (f, truth) = besov_test_functions(a.nu, 1, basis.regularity, a.x0)?.remove(0);
    let dist = DistributionSpec::Regression { f, sigma: a.sigma, x0: a.x0 };
    let ds = dist.sample(a.n, Seed(a.seed))?;
    let fhat = est.evaluate(&ds, Seed(a.seed))?[0];
    let level = spec.level();
    let table = match level {
        Some(l) => empirical_coeffs(&basis, &ds, l, spec.clip_level())?.to_csv_string(),
        None => String::new(),
    };
    let t = spec.clip_level();
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "fhat_x0": fhat,
        "truth": truth,
        "L": level,
        "T": if t.is_finite() { json!(t) } else { Value::Null },
    });
    match &a.coeff_out {
        Some(p) => {
            fs::write(p, &table).with_context(|| format!("writing {}", p.display()))?;
            v["coeff_table_csv_path"] = json!(p.display().to_string());
        }
        None => v["coeff_table_csv"] = json!(table),
    }
    emit_json(a.out.as_deref(), &v)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn fmt_num(v: f64) -> String {
    format!("{v:.2}")
}

/// Log-log SVG of sweep curves with dashed transition markers.
pub fn render_svg(curves: &[(String, Vec<RiskRow>)], markers: &[(String, f64)]) -> CliResult<String> {
    let pts: Vec<(f64, f64)> = curves
        .iter()
        .flat_map(|(_, rows)| rows.iter().filter(|r| r.beta > 0.0 && r.sup_mse > 0.0).map(|r| (r.beta.log10(), r.sup_mse.log10())))
        .collect();
    if pts.is_empty() {
        return Err(usage("no positive points to plot"));
    }
    let (mut x0, mut x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let (mut y0, mut y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (w, h, ml, mr, mt, mb) = (720.0, 480.0, 80.0, 170.0, 30.0, 60.0);
    let pw = w - ml - mr;
    let ph = h - mt - mb;
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (y1 - y) / (y1 - y0) * ph;
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    s.push_str(&format!("<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    for d in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let x = sx(d as f64);
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/><text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">1e{d}</text>\n",
            fmt_num(x),
            fmt_num(mt + ph),
            fmt_num(mt + ph + 5.0),
            fmt_num(mt + ph + 20.0)
        ));
    }
    for d in (y0.ceil() as i64)..=(y1.floor() as i64) {
        let y = sy(d as f64);
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/><text x=\"{3}\" y=\"{4}\" text-anchor=\"end\">1e{d}</text>\n",
            fmt_num(ml - 5.0),
            fmt_num(y),
            fmt_num(ml),
            fmt_num(ml - 8.0),
            fmt_num(y + 4.0)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">stability budget beta (log scale)</text>\n",
        fmt_num(ml + pw / 2.0),
        fmt_num(h - 15.0)
    ));
    s.push_str(&format!(
        "<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">witnessed sup-risk (log scale)</text>\n",
        fmt_num(mt + ph / 2.0)
    ));
    for (i, (label, beta)) in markers.iter().enumerate() {
        let lx = beta.log10();
        if !(lx >= x0 && lx <= x1) {
            continue;
        }
        let x = fmt_num(sx(lx));
        s.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"{}\" stroke-dasharray=\"5,4\"><title>{}</title></line>\n",
            fmt_num(mt),
            fmt_num(mt + ph),
            PALETTE[i % PALETTE.len()],
            escape(label)
        ));
    }
    for (i, (label, rows)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = rows
            .iter()
            .filter(|r| r.beta > 0.0 && r.sup_mse > 0.0)
            .map(|r| format!("{},{}", fmt_num(sx(r.beta.log10())), fmt_num(sy(r.sup_mse.log10()))))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            coords.join(" ")
        ));
        let ly = mt + 15.0 + 20.0 * i as f64;
        let lx = ml + pw + 15.0;
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{3}\" y=\"{4}\">{5}</text>\n",
            fmt_num(lx),
            fmt_num(ly),
            fmt_num(lx + 25.0),
            fmt_num(lx + 30.0),
            fmt_num(ly + 4.0),
            escape(label)
        ));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn cmd_plot(a: &PlotArgs) -> CliResult<()> {
    if !a.labels.is_empty() && a.labels.len() != a.inputs.len() {
        return Err(usage("give one --label per --input or none"));
    }
    if !a.orders.is_empty() && a.orders.len() != a.inputs.len() {
        return Err(usage("give one --order per --input or none"));
    }
    let mut curves = Vec::new();
    for (i, p) in a.inputs.iter().enumerate() {
        let f = fs::File::open(p).map_err(|e| usage(format!("cannot open {}: {e}", p.display())))?;
        let rows = RiskCurve::read_csv_rows(f).map_err(|e| usage(format!("{}: schema mismatch: {e}", p.display())))?;
        if rows.is_empty() {
            return Err(usage(format!("{} has no rows", p.display())));
        }
        let label = a
            .labels
            .get(i)
            .cloned()
            .unwrap_or_else(|| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
        curves.push((label, rows));
    }
    let problem = match a.problem {
        ProblemArg::Bounded => Problem::Bounded,
        ProblemArg::Heavy => Problem::Heavy,
        ProblemArg::Sparse => Problem::Sparse,
        ProblemArg::Nonparametric => Problem::Nonparametric,
    };
    let mut markers = Vec::new();
    for o in &a.orders {
        let order = parse_order(o)?;
        if let Some(t) = phase_threshold(problem, order, a.n, a.r, a.s) {
            markers.push((format!("transition p={order}"), t));
        }
    }
    let svg = render_svg(&curves, &markers)?;
    emit(Some(&a.out), &svg)
}
