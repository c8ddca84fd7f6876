//! Monte Carlo and exact risk evaluation, witnessed sup-risk over extremal
//! subfamilies, stability-budget sweeps and log-log slope fits.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    binom_pmf, exact_risk_worst_bounded, lower_avg_sharper_sup, lower_lp, lower_worst, eta_grid,
    rate_avg_bounded,
};
use crate::dataset::{Dataset, DatasetKind};
use crate::distribution::{DistributionSpec, RegressionFn};
use crate::error::{Error, Result};
use crate::estimator::EstimatorHandle;
use crate::estimators::{
    avg_bounded, exact_worst_bounded, heavy_tail_estimator, shrinkage_bounded, sparse_soft, wavelet_estimator,
    BoundedMeanSpec, HeavyMode, HeavyTailSpec, ShrinkageRule, SparseMeanSpec, WaveletConstants,
    WaveletEstimatorSpec, WaveletMode,
};
use crate::par::{map_range, map_slice, Exec};
use crate::seed::Seed;
use crate::stability::StabilityOrder;
use crate::wavelet::{besov_test_functions, WaveletBasis};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mse: f64,
    /// Sample standard deviation over `√reps`; zero for exact evaluations.
    pub std_error: f64,
    pub reps: usize,
    pub seed: Seed,
}

fn sq_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Monte Carlo estimate of `E‖θ̂ − θ(P)‖²`.
pub fn mc_risk(est: &EstimatorHandle, dist: &DistributionSpec, n: usize, reps: usize, seed: Seed, exec: Exec) -> Result<RiskEstimate> {
    if reps < 2 {
        return Err(Error::InsufficientReps { needed: 2, got: reps });
    }
    let theta = dist.target()?;
    if theta.len() != est.target_dim() {
        return Err(Error::DimensionMismatch { expected: est.target_dim(), got: theta.len() });
    }
    let errs: Vec<Result<f64>> = map_range(exec, reps, |i| {
        let s = seed.derive(i as u64);
        let ds = dist.sample(n, s)?;
        Ok(sq_err(&est.evaluate_unchecked(&ds, s.derive_label("xi")), &theta))
    });
    let errs: Vec<f64> = errs.into_iter().collect::<Result<_>>()?;
    let m = errs.len() as f64;
    let mse = errs.iter().sum::<f64>() / m;
    let var = errs.iter().map(|e| (e - mse).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(RiskEstimate { mse, std_error: (var / m).sqrt(), reps, seed })
}

/// Exact risk on a two-point law by enumerating the count of the second atom.
///
/// Valid for deterministic, permutation-invariant estimators (all shipped
/// sample-based estimators are). Counts with probability below `1e-16` are skipped.
pub fn exact_two_point_risk(est: &EstimatorHandle, dist: &DistributionSpec, n: usize) -> Result<f64> {
    if est.is_randomized() {
        return Err(Error::InvalidArgument("exact risk needs a deterministic estimator".into()));
    }
    let (support, probs) = dist.as_discrete()?;
    if support.len() != 2 || support[0].len() != 1 || est.target_dim() != 1 {
        return Err(Error::InvalidArgument("exact risk needs a one-dimensional two-point law".into()));
    }
    let theta = dist.target()?[0];
    let (a, b) = (support[0][0], support[1][0]);
    let (radius, norm) = dist.domain();
    let mut risk = 0.0;
    for k in 0..=n {
        let w = binom_pmf(n as u64, k as u64, probs[1]);
        if w < 1e-16 {
            continue;
        }
        let out = match est.mean_map() {
            Some(g) => g(&[(a * (n - k) as f64 + b * k as f64) / n as f64])[0],
            None => {
                let mut data = vec![a; n];
                data[n - k..].iter_mut().for_each(|v| *v = b);
                let ds = Dataset::from_flat(data, n, 1, radius, norm, DatasetKind::VectorSample)?;
                est.evaluate_unchecked(&ds, Seed(0))[0]
            }
        };
        risk += w * (out - theta).powi(2);
    }
    Ok(risk)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RiskMethod {
    #[default]
    MonteCarlo,
    /// Exact enumeration where the family allows it, Monte Carlo elsewhere.
    ExactWhenAvailable,
}

/// A parametrized subfamily of distributions, indexed by a scalar.
#[derive(Debug, Clone)]
pub struct Family {
    pub name: String,
    pub members: Vec<(f64, DistributionSpec)>,
}

impl Family {
    /// Binary `±r` laws indexed by their mean on a uniform grid over `[-r, r]`.
    pub fn binary(r: f64, points: usize) -> Self {
        let members = eta_grid(-r, r, points.max(2)).into_iter().map(|t| (t, DistributionSpec::binary_with_mean(r, t))).collect();
        Family { name: "binary".into(), members }
    }

    /// Two-point heavy-tail laws indexed by the moved mass `ε`.
    pub fn heavy(r: f64, k: f64, eps: &[f64]) -> Self {
        let members = eps.iter().map(|&e| (e, DistributionSpec::HeavyTwoPoint { r, k, eps: e })).collect();
        Family { name: "heavy-two-point".into(), members }
    }

    /// `s` active coordinates with common mean `a`, on a uniform grid of `a` over `[0, r]`.
    pub fn sparse(d: usize, s: usize, r: f64, points: usize) -> Self {
        let members = eta_grid(0.0, r, points.max(2))
            .into_iter()
            .map(|a| (a, DistributionSpec::SparseMean { d, s, r, active: (0..s.min(d)).map(|j| (j, a)).collect() }))
            .collect();
        Family { name: "sparse".into(), members }
    }

    /// Regression laws built from fixed functions, indexed by position.
    pub fn regression(fs: Vec<RegressionFn>, sigma: f64, x0: f64) -> Self {
        let members = fs
            .into_iter()
            .enumerate()
            .map(|(i, f)| (i as f64, DistributionSpec::Regression { f, sigma, x0 }))
            .collect();
        Family { name: "regression".into(), members }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupRisk {
    pub sup_mse: f64,
    pub std_error: f64,
    pub argmax_param: f64,
    pub members: Vec<(f64, RiskEstimate)>,
}

/// Largest risk over the family; every member shares the same replicate seeds.
pub fn sup_risk(
    est: &EstimatorHandle,
    family: &Family,
    n: usize,
    reps: usize,
    seed: Seed,
    method: RiskMethod,
    exec: Exec,
) -> Result<SupRisk> {
    if family.members.is_empty() {
        return Err(Error::InvalidArgument("empty family".into()));
    }
    let exact_ok = method == RiskMethod::ExactWhenAvailable && !est.is_randomized();
    let per: Vec<Result<(f64, RiskEstimate)>> = if exact_ok && family.members.iter().all(|(_, d)| is_two_point(d)) {
        map_slice(exec, &family.members, |(p, d)| {
            Ok((*p, RiskEstimate { mse: exact_two_point_risk(est, d, n)?, std_error: 0.0, reps: 0, seed }))
        })
    } else {
        family.members.iter().map(|(p, d)| Ok((*p, mc_risk(est, d, n, reps, seed, exec)?))).collect()
    };
    let members: Vec<(f64, RiskEstimate)> = per.into_iter().collect::<Result<_>>()?;
    let best = members.iter().fold(&members[0], |a, b| if b.1.mse > a.1.mse { b } else { a });
    Ok(SupRisk { sup_mse: best.1.mse, std_error: best.1.std_error, argmax_param: best.0, members: members.clone() })
}

fn is_two_point(d: &DistributionSpec) -> bool {
    matches!(d, DistributionSpec::BinaryPmR { .. } | DistributionSpec::HeavyTwoPoint { .. })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SweepProblem {
    Bounded,
    Heavy { k: f64 },
    Sparse { s: usize, d: usize },
    Nonparametric { nu: f64, x0: f64, sigma: f64 },
}

impl SweepProblem {
    pub fn name(&self) -> &'static str {
        match self {
            SweepProblem::Bounded => "bounded",
            SweepProblem::Heavy { .. } => "heavy",
            SweepProblem::Sparse { .. } => "sparse",
            SweepProblem::Nonparametric { .. } => "nonparametric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub beta: f64,
    pub sup_mse: f64,
    /// 95% half-width.
    pub ci: f64,
    pub bound_lower: Option<f64>,
    pub bound_upper: Option<f64>,
    pub argmax_param: f64,
}

/// Witnessed sup-risk against the stability budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCurve {
    pub schema_version: u32,
    pub problem: String,
    pub n: usize,
    pub r: f64,
    pub order: StabilityOrder,
    pub rows: Vec<RiskRow>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    beta: f64,
    sup_mse: f64,
    ci: f64,
    bound_lower: Option<f64>,
    bound_upper: Option<f64>,
    argmax_param: f64,
    schema_version: u32,
}

impl RiskCurve {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(CsvRow {
                beta: r.beta,
                sup_mse: r.sup_mse,
                ci: r.ci,
                bound_lower: r.bound_lower,
                bound_upper: r.bound_upper,
                argmax_param: r.argmax_param,
                schema_version: self.schema_version,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        wr.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Rows only; curve metadata is not stored in the CSV.
    pub fn read_csv_rows<R: std::io::Read>(r: R) -> Result<Vec<RiskRow>> {
        let mut rd = csv::Reader::from_reader(r);
        let mut rows = Vec::new();
        for rec in rd.deserialize::<CsvRow>() {
            let c = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if c.schema_version != SCHEMA_VERSION {
                return Err(Error::Parse(format!("unsupported schema_version {}", c.schema_version)));
            }
            rows.push(RiskRow {
                beta: c.beta,
                sup_mse: c.sup_mse,
                ci: c.ci,
                bound_lower: c.bound_lower,
                bound_upper: c.bound_upper,
                argmax_param: c.argmax_param,
            });
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub problem: SweepProblem,
    pub order: StabilityOrder,
    pub betas: Vec<f64>,
    pub n: usize,
    pub r: f64,
    pub reps: usize,
    pub seed: Seed,
    pub method: RiskMethod,
    /// Size of the distribution grid inside each family.
    pub family_points: usize,
}

impl SweepConfig {
    pub fn new(problem: SweepProblem, order: StabilityOrder, betas: Vec<f64>, n: usize, r: f64) -> Self {
        SweepConfig {
            problem,
            order,
            betas,
            n,
            r,
            reps: 2000,
            seed: Seed(1),
            method: RiskMethod::ExactWhenAvailable,
            family_points: 41,
        }
    }
}

/// `points` values log-spaced over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

/// Default budget grid: 30 points log-spaced over `[r/(50n), 10r/n]`.
pub fn default_beta_grid(n: usize, r: f64) -> Vec<f64> {
    log_grid(r / (50.0 * n as f64), 10.0 * r / n as f64, 30)
}

/// The estimator a sweep uses for a given problem, order and budget.
pub fn sweep_estimator(problem: SweepProblem, order: StabilityOrder, n: usize, r: f64, beta: f64) -> Result<EstimatorHandle> {
    match problem {
        SweepProblem::Bounded => match order {
            StabilityOrder::Inf => exact_worst_bounded(n, r, beta, 1),
            StabilityOrder::P(p) if p == 1.0 => avg_bounded(n, r, beta),
            _ => shrinkage_bounded(&BoundedMeanSpec { r, n, beta, order, d: 1 }, ShrinkageRule::Refined),
        },
        SweepProblem::Heavy { k } => {
            let mode = if order.is_inf() { HeavyMode::WorstCase } else { HeavyMode::AverageCase };
            heavy_tail_estimator(&HeavyTailSpec { r, k, n, beta, mode, d: 1 })
        }
        SweepProblem::Sparse { s, d } => sparse_soft(&SparseMeanSpec { r, s, d, n, beta }),
        SweepProblem::Nonparametric { nu, x0, .. } => {
            let mode = if order.is_inf() { WaveletMode::Worst } else { WaveletMode::Avg };
            wavelet_estimator(&WaveletEstimatorSpec {
                basis: WaveletBasis::haar(),
                x0,
                nu,
                smoothness: nu,
                n,
                beta,
                mode,
                constants: WaveletConstants::default(),
            })
        }
    }
}

fn family_for(cfg: &SweepConfig) -> Result<Family> {
    let n = cfg.n as f64;
    Ok(match cfg.problem {
        SweepProblem::Bounded => Family::binary(cfg.r, cfg.family_points),
        SweepProblem::Heavy { k } => Family::heavy(cfg.r, k, &log_grid(1.0 / (n * n), 1.0, cfg.family_points)),
        SweepProblem::Sparse { s, d } => Family::sparse(d, s, cfg.r, cfg.family_points),
        SweepProblem::Nonparametric { nu, x0, sigma } => {
            let fs = besov_test_functions(nu, 5, WaveletBasis::haar().regularity, x0)?;
            Family::regression(fs.into_iter().map(|(f, _)| f).collect(), sigma, x0)
        }
    })
}

fn overlays(cfg: &SweepConfig, beta: f64) -> Result<(Option<f64>, Option<f64>)> {
    let (n, r) = (cfg.n, cfg.r);
    let nf = n as f64;
    let floor = r * r / (nf.sqrt() + 1.0).powi(2);
    Ok(match (cfg.problem, cfg.order) {
        (SweepProblem::Bounded, StabilityOrder::Inf) => {
            let v = exact_risk_worst_bounded(n, r, beta);
            (Some(v), Some(v))
        }
        (SweepProblem::Bounded, StabilityOrder::P(p)) if p == 1.0 => {
            (Some(lower_avg_sharper_sup(2.0 * r, n, beta, 200).0.max(floor)), Some(rate_avg_bounded(n, r, beta)))
        }
        (SweepProblem::Bounded, order @ StabilityOrder::P(p)) => {
            let lo = lower_lp(2.0 * r, n, order, beta, true, &eta_grid(0.0, 0.5, 201))?.value.max(floor);
            let c = (nf * beta / (2f64.powf(1.0 - 1.0 / p) * r)).min(1.0);
            (Some(lo), Some((c * c * r * r / nf).max((1.0 - c).powi(2) * r * r)))
        }
        (SweepProblem::Heavy { k }, StabilityOrder::Inf) => {
            let lo = log_grid(1.0 / (nf * nf), 1.0, 400)
                .into_iter()
                .map(|e| lower_worst(r * e.powf(1.0 - 1.0 / k), nf * e, beta))
                .fold(0.0, f64::max);
            let tail = if beta > 0.0 { (r.powf(2.0 * k) / (nf * beta).powf(2.0 * (k - 1.0))).min(r * r) } else { r * r };
            (Some(lo), Some(r * r / nf + tail))
        }
        _ => (None, None),
    })
}

/// One row per budget: instantiate the estimator, take the witnessed sup-risk
/// over the problem's extremal family and attach the bound overlays.
pub fn sweep(cfg: &SweepConfig, exec: Exec) -> Result<RiskCurve> {
    if cfg.betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("beta grid must be strictly increasing".into()));
    }
    let family = family_for(cfg)?;
    let mut rows = Vec::with_capacity(cfg.betas.len());
    for &beta in &cfg.betas {
        let est = sweep_estimator(cfg.problem, cfg.order, cfg.n, cfg.r, beta)?;
        let sr = sup_risk(&est, &family, cfg.n, cfg.reps, cfg.seed, cfg.method, exec)?;
        let (bound_lower, bound_upper) = overlays(cfg, beta)?;
        rows.push(RiskRow {
            beta,
            sup_mse: sr.sup_mse,
            ci: 1.96 * sr.std_error,
            bound_lower,
            bound_upper,
            argmax_param: sr.argmax_param,
        });
    }
    Ok(RiskCurve {
        schema_version: SCHEMA_VERSION,
        problem: cfg.problem.name().into(),
        n: cfg.n,
        r: cfg.r,
        order: cfg.order,
        rows,
    })
}

/// Least-squares slope of `log y` on `log x`, with the `R²` of the fit.
pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument("slope fit needs at least 3 points".into()));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveValues);
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("x values are all equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::linear_shrinkage_risk;
    use rand::Rng;

    #[test]
    fn point_mass_constant_zero() {
        let d = DistributionSpec::Discrete { support: vec![vec![1.0]], probs: vec![1.0] };
        let r = mc_risk(&EstimatorHandle::constant_zero(1), &d, 5, 10, Seed(1), Exec::default()).unwrap();
        assert_eq!(r.mse, 1.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn sample_mean_binary() {
        let d = DistributionSpec::BinaryPmR { r: 1.0, prob_plus: 0.5 };
        let r = mc_risk(&EstimatorHandle::sample_mean(1), &d, 100, 4000, Seed(2), Exec::default()).unwrap();
        assert!((r.mse - 0.01).abs() < 4.0 * r.std_error, "{r:?}");
        let ex = exact_two_point_risk(&EstimatorHandle::sample_mean(1), &d, 100).unwrap();
        assert!((ex - 0.01).abs() < 1e-12);
    }

    #[test]
    fn std_error_halves_with_four_times_reps() {
        let d = DistributionSpec::BinaryPmR { r: 1.0, prob_plus: 0.3 };
        let e = EstimatorHandle::sample_mean(1);
        let a = mc_risk(&e, &d, 20, 2000, Seed(3), Exec::default()).unwrap();
        let b = mc_risk(&e, &d, 20, 8000, Seed(4), Exec::default()).unwrap();
        let ratio = a.std_error / b.std_error;
        assert!((ratio / 2.0 - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn exact_worst_estimator_constant_risk_region() {
        let n = 100;
        let beta = 2.0 / (n as f64 * (1.0 + 0.1));
        let e = exact_worst_bounded(n, 1.0, beta, 1).unwrap();
        let s = sup_risk(&e, &Family::binary(1.0, 41), n, 0, Seed(1), RiskMethod::ExactWhenAvailable, Exec::default()).unwrap();
        assert!((s.sup_mse - 1.0 / 121.0).abs() < 1e-9, "{}", s.sup_mse);
    }

    #[test]
    fn sup_risk_examples() {
        let fam = Family::binary(1.0, 41);
        let z = sup_risk(&EstimatorHandle::constant_zero(1), &fam, 10, 0, Seed(1), RiskMethod::ExactWhenAvailable, Exec::default()).unwrap();
        assert_eq!(z.sup_mse, 1.0);
        assert_eq!(z.argmax_param.abs(), 1.0);
        let m = sup_risk(&EstimatorHandle::sample_mean(1), &fam, 10, 0, Seed(1), RiskMethod::ExactWhenAvailable, Exec::default()).unwrap();
        assert!(m.argmax_param.abs() < 1e-12);
        for c in [0.3, 0.8] {
            let e = EstimatorHandle::sample_mean(1).scaled(c);
            let s = sup_risk(&e, &fam, 10, 0, Seed(1), RiskMethod::ExactWhenAvailable, Exec::default()).unwrap();
            let analytic = fam.members.iter().map(|(t, _)| linear_shrinkage_risk(10, 1.0, c, *t)).fold(0.0, f64::max);
            assert!((s.sup_mse - analytic).abs() < 1e-12);
            let mc = sup_risk(&e, &fam, 10, 4000, Seed(5), RiskMethod::MonteCarlo, Exec::default()).unwrap();
            assert!((mc.sup_mse - analytic).abs() < 4.0 * 1.96 * mc.std_error + 1e-12);
        }
    }

    #[test]
    fn exact_path_matches_mc_for_truncated_mean() {
        let e = heavy_tail_estimator(&HeavyTailSpec { r: 1.0, k: 2.0, n: 50, beta: 0.1, mode: HeavyMode::WorstCase, d: 1 }).unwrap();
        let d = DistributionSpec::HeavyTwoPoint { r: 1.0, k: 2.0, eps: 0.05 };
        let ex = exact_two_point_risk(&e, &d, 50).unwrap();
        let mc = mc_risk(&e, &d, 50, 20_000, Seed(8), Exec::default()).unwrap();
        assert!((ex - mc.mse).abs() < 4.0 * mc.std_error + 1e-12, "{ex} {mc:?}");
    }

    #[test]
    fn bounded_sweep_shape() {
        let (n, r) = (200, 1.0);
        let mut cfg = SweepConfig::new(SweepProblem::Bounded, StabilityOrder::Inf, default_beta_grid(n, r), n, r);
        cfg.family_points = 21;
        let c = sweep(&cfg, Exec::default()).unwrap();
        for w in c.rows.windows(2) {
            assert!(w[1].sup_mse <= w[0].sup_mse + 2.0 * (w[0].ci + w[1].ci) + 1e-12);
        }
        for row in &c.rows {
            if row.beta >= 2.0 * r / n as f64 {
                assert!(row.sup_mse <= 1.2 / n as f64);
            }
            if row.beta <= r / (10.0 * n as f64) {
                assert!(row.sup_mse >= 0.5);
            }
        }
        let csv = c.to_csv_string();
        assert!(csv.starts_with("beta,sup_mse,ci,bound_lower,bound_upper,argmax_param,schema_version"));
        assert_eq!(RiskCurve::read_csv_rows(csv.as_bytes()).unwrap(), c.rows);
        cfg.betas = vec![0.1, 0.05];
        assert!(sweep(&cfg, Exec::default()).is_err());
    }

    #[test]
    fn slope_examples() {
        let xs: Vec<f64> = (1..10).map(|i| i as f64).collect();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((slope_fit(&xs, &sq).unwrap().0 - 2.0).abs() < 1e-9);
        assert!(slope_fit(&xs, &vec![3.0; 9]).unwrap().0.abs() < 1e-12);
        let mut rng = Seed(11).rng();
        let noisy: Vec<f64> = xs.iter().map(|x| x.powi(-2) * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0))).collect();
        assert!((slope_fit(&xs, &noisy).unwrap().0 + 2.0).abs() < 0.05);
        assert!(matches!(slope_fit(&[1.0, 0.0, 2.0], &[1.0, 1.0, 1.0]), Err(Error::NonPositiveValues)));
        assert!(slope_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }
}
