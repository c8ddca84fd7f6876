//! Lower-bound and exact-risk formulas, with exact binomial oracles for the
//! inequalities they rest on.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::dataset::{Dataset, DatasetKind, NormKind};
use crate::distribution::DistributionSpec;
use crate::error::{Error, Result};
use crate::seed::Seed;
use crate::stability::StabilityOrder;

/// Two distributions used in a two-point (Le Cam style) argument.
#[derive(Debug, Clone)]
pub struct TwoPointInstance {
    pub p1: DistributionSpec,
    pub p2: DistributionSpec,
    pub delta_theta: f64,
    /// Whether every mixture `(1 − t) P1 + t P2` stays in the class.
    pub mixable: bool,
}

impl TwoPointInstance {
    pub fn new(p1: DistributionSpec, p2: DistributionSpec, mixable: bool) -> Result<Self> {
        let (a, b) = (p1.target()?, p2.target()?);
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
        }
        let delta_theta = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        Ok(TwoPointInstance { p1, p2, delta_theta, mixable })
    }

    /// The heavy-tail construction: a point mass at 0 against moving mass `eps` to `r eps^{-1/k}`.
    pub fn heavy(r: f64, k: f64, eps: f64) -> Result<Self> {
        Self::new(
            DistributionSpec::Discrete { support: vec![vec![0.0]], probs: vec![1.0] },
            DistributionSpec::HeavyTwoPoint { r, k, eps },
            true,
        )
    }
}

fn merged_support(p1: &DistributionSpec, p2: &DistributionSpec) -> Result<(Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    let (s1, w1) = p1.as_discrete()?;
    let (s2, w2) = p2.as_discrete()?;
    if s1[0].len() != s2[0].len() {
        return Err(Error::DimensionMismatch { expected: s1[0].len(), got: s2[0].len() });
    }
    let mut support: Vec<Vec<f64>> = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let slot = |x: &Vec<f64>, support: &mut Vec<Vec<f64>>, a: &mut Vec<f64>, b: &mut Vec<f64>| {
        if let Some(i) = support.iter().position(|s| s == x) {
            i
        } else {
            support.push(x.clone());
            a.push(0.0);
            b.push(0.0);
            support.len() - 1
        }
    };
    for (x, w) in s1.iter().zip(&w1) {
        let i = slot(x, &mut support, &mut a, &mut b);
        a[i] += w;
    }
    for (x, w) in s2.iter().zip(&w2) {
        let i = slot(x, &mut support, &mut a, &mut b);
        b[i] += w;
    }
    Ok((support, a, b))
}

/// Total variation distance between two finitely supported distributions.
pub fn tv_discrete(p1: &DistributionSpec, p2: &DistributionSpec) -> Result<f64> {
    let (_, a, b) = merged_support(p1, p2)?;
    Ok(0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

fn draw(weights: &[f64], total: f64, u: f64) -> usize {
    let mut acc = 0.0;
    let target = u * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            acc += w;
            if target < acc {
                return i;
            }
        }
    }
    last
}

/// Coupled samples whose coordinates disagree with probability exactly `TV(P1, P2)`.
pub fn maximal_coupling_sample(p1: &DistributionSpec, p2: &DistributionSpec, n: usize, seed: Seed) -> Result<(Dataset, Dataset)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let (support, a, b) = merged_support(p1, p2)?;
    let overlap: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
    let only1: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).max(0.0)).collect();
    let only2: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (y - x).max(0.0)).collect();
    let common: f64 = overlap.iter().sum();
    let tv = 1.0 - common;
    let d = support[0].len();
    let mut rng = seed.rng();
    let (mut x1, mut x2) = (Vec::with_capacity(n * d), Vec::with_capacity(n * d));
    for _ in 0..n {
        if rng.random::<f64>() < common {
            let i = draw(&overlap, common, rng.random());
            x1.extend_from_slice(&support[i]);
            x2.extend_from_slice(&support[i]);
        } else {
            let i = draw(&only1, tv, rng.random());
            let j = draw(&only2, tv, rng.random());
            x1.extend_from_slice(&support[i]);
            x2.extend_from_slice(&support[j]);
        }
    }
    let radius = support.iter().map(|s| crate::dataset::l2_norm(s)).fold(0.0, f64::max).max(1.0);
    Ok((
        Dataset::from_flat(x1, n, d, radius, NormKind::L2, DatasetKind::VectorSample)?,
        Dataset::from_flat(x2, n, d, radius, NormKind::L2, DatasetKind::VectorSample)?,
    ))
}

/// Worst-case stability lower bound `[(Δθ − E d_Ham · β)_+ / 2]²`.
pub fn lower_worst(delta_theta: f64, e_dham: f64, beta: f64) -> f64 {
    ((delta_theta - e_dham * beta).max(0.0) / 2.0).powi(2)
}

/// Uniform grid of `points` values on `[lo, hi]`.
pub fn eta_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerLp {
    /// General two-point branch.
    pub general: f64,
    /// Branch for linear functionals with mixable pairs, maximized over the η grid.
    pub linear: Option<f64>,
    pub argmax_eta: Option<f64>,
    /// Largest applicable branch.
    pub value: f64,
}

/// The linear-functional expression at a single `η` (before the outer square).
fn linear_term(delta_theta: f64, n: usize, order: StabilityOrder, beta: f64, eta: f64) -> f64 {
    let n1 = n as f64 + 1.0;
    let penalty = match order {
        StabilityOrder::Inf => n1 * beta,
        StabilityOrder::P(p) => {
            let a = if eta == 0.0 { f64::INFINITY } else { (1.0 - 2.0 * eta + p / (2.0 * n1)) / (2.0 * eta).powf(1.0 / p) };
            2f64.powf(1.0 / p) * n1 * beta * a.min(n1.powf(1.0 / p))
        }
    };
    ((1.0 - 2.0 * eta) * delta_theta - penalty) / 2.0
}

/// ℓp stability lower bound. Both branches are reported; `value` is their max
/// (the linear branch only when `linear` is set).
pub fn lower_lp(delta_theta: f64, n: usize, order: StabilityOrder, beta: f64, linear: bool, etas: &[f64]) -> Result<LowerLp> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let log_factor = match order {
        StabilityOrder::Inf => 1.0,
        StabilityOrder::P(p) => ((n as f64).ln() + 1.0).powf(1.0 / p),
    };
    let general = ((delta_theta - (n as f64 + 1.0) * log_factor * beta).max(0.0) / 2.0).powi(2);
    let (lin, arg) = if linear {
        let mut best = (0.0, None);
        for &eta in etas {
            if !(0.0..=0.5).contains(&eta) {
                return Err(Error::EtaOutOfRange(eta));
            }
            let v = linear_term(delta_theta, n, order, beta, eta).max(0.0).powi(2);
            if best.1.is_none() || v > best.0 {
                best = (v, Some(eta));
            }
        }
        (Some(best.0), best.1)
    } else {
        (None, None)
    };
    Ok(LowerLp { general, linear: lin, argmax_eta: arg, value: general.max(lin.unwrap_or(0.0)) })
}

/// Average-case (p = 1) lower bound for linear functionals at `η = 1/4` in its simplified form
/// `(Δθ/4 − 2(n+1)β)_+²`.
pub fn lower_avg_corollary(delta_theta: f64, n: usize, beta: f64) -> f64 {
    (delta_theta / 4.0 - 2.0 * (n as f64 + 1.0) * beta).max(0.0).powi(2)
}

/// Sharper average-case bound at one `η ∈ [1/4, 1/2]`:
/// `((1 − 2η)Δθ − nβ log(1/η − 1) − 6β)_+²`.
pub fn lower_avg_sharper(delta_theta: f64, n: usize, beta: f64, eta: f64) -> Result<f64> {
    if !(0.25..=0.5).contains(&eta) {
        return Err(Error::EtaOutOfRange(eta));
    }
    let v = (1.0 - 2.0 * eta) * delta_theta - n as f64 * beta * (1.0 / eta - 1.0).ln() - 6.0 * beta;
    Ok(v.max(0.0).powi(2))
}

/// Maximum of [`lower_avg_sharper`] over a uniform `η` grid on `[1/4, 1/2]`; returns `(value, η)`.
pub fn lower_avg_sharper_sup(delta_theta: f64, n: usize, beta: f64, points: usize) -> (f64, f64) {
    eta_grid(0.25, 0.5, points.max(2))
        .into_iter()
        .map(|e| (lower_avg_sharper(delta_theta, n, beta, e).expect("grid inside range"), e))
        .fold((f64::NEG_INFINITY, 0.25), |a, b| if b.0 > a.0 { b } else { a })
}

/// Exact minimax risk over `[-r, r]` under worst-case stability `β`.
pub fn exact_risk_worst_bounded(n: usize, r: f64, beta: f64) -> f64 {
    let floor = r * r / ((n as f64).sqrt() + 1.0).powi(2);
    if beta <= 0.0 {
        return r * r;
    }
    let a = (2.0 * r / (n as f64 * beta) - 1.0).max(0.0);
    ((a / (1.0 + a)).powi(2) * r * r).max(floor)
}

/// Rate of the average-case bounded-mean risk: `(δ/(1+δ))³ r² ∨ r²/n`, `δ = (r/(nβ) − 1)_+`.
pub fn rate_avg_bounded(n: usize, r: f64, beta: f64) -> f64 {
    let floor = r * r / n as f64;
    if beta <= 0.0 {
        return r * r;
    }
    let d = (r / (n as f64 * beta) - 1.0).max(0.0);
    ((d / (1.0 + d)).powi(3) * r * r).max(floor)
}

/// Risk of `c · X̄` under the binary `±r` law with mean `θ`: `c²(r² − θ²)/n + (1 − c)²θ²`.
pub fn linear_shrinkage_risk(n: usize, r: f64, c: f64, theta: f64) -> f64 {
    c * c * (r * r - theta * theta) / n as f64 + (1.0 - c).powi(2) * theta * theta
}

/// Binomial(n, q) pmf at `k`, computed in log space.
pub fn binom_pmf(n: u64, k: u64, q: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if q <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if q >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, k) + k as f64 * q.ln() + (n - k) as f64 * (-q).ln_1p()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub exact: f64,
    pub bound: f64,
    pub pass: bool,
}

impl OracleResult {
    fn new(exact: f64, bound: f64) -> Self {
        OracleResult { exact, bound, pass: exact <= bound * (1.0 + 1e-12) + 1e-12 || exact == f64::NEG_INFINITY }
    }
}

/// Exact value and bound for `E[log((n − T1 + T2)/(T2 + 1)) + 1/(T2 + 1)]`,
/// `T1 ~ Bin(n, q)`, `T2 | T1 ~ Bin(T1, 1/2)`.
///
/// The event `T1 = n, T2 = 0` makes the log term `−∞` whenever `q > 0`, so the
/// unconditional value is `−∞` then. `conditional_worst_gap` carries the finite
/// part of the check: the largest `E[· | T1] − (log(2n/(T1+1) − 1) + 2/(T1+1))`
/// over `T1 ≤ n − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomLogResult {
    pub exact: f64,
    pub bound: f64,
    pub conditional_worst_gap: f64,
    pub pass: bool,
}

pub const BINOM_LOG_CAP: usize = 60;
pub const BINOM_SUM_CAP: usize = 200;

pub fn binom_log_oracle(n: usize, q: f64) -> Result<BinomLogResult> {
    if n > BINOM_LOG_CAP {
        return Err(Error::NTooLarge { n, cap: BINOM_LOG_CAP });
    }
    if n == 0 || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument("need n >= 1 and q in [0, 1]".into()));
    }
    let nf = n as f64;
    let mut exact = 0.0;
    let mut worst_gap = f64::NEG_INFINITY;
    for t1 in 0..=n {
        let w1 = binom_pmf(n as u64, t1 as u64, q);
        let mut cond = 0.0;
        for t2 in 0..=t1 {
            let w2 = binom_pmf(t1 as u64, t2 as u64, 0.5);
            let num = (n - t1 + t2) as f64;
            let v = if num == 0.0 { f64::NEG_INFINITY } else { (num / (t2 as f64 + 1.0)).ln() } + 1.0 / (t2 as f64 + 1.0);
            if w2 > 0.0 {
                cond += w2 * v;
            }
        }
        if w1 > 0.0 {
            exact += w1 * cond;
        }
        if t1 < n {
            let cb = (2.0 * nf / (t1 as f64 + 1.0) - 1.0).ln() + 2.0 / (t1 as f64 + 1.0);
            worst_gap = worst_gap.max(cond - cb);
        }
    }
    let bound = if q == 0.0 { f64::INFINITY } else { (2.0 * nf / (q * (nf + 1.0)) - 1.0).ln() + 2.0 / (q * (nf + 1.0)) };
    let base = OracleResult::new(exact, bound);
    Ok(BinomLogResult {
        exact,
        bound,
        conditional_worst_gap: worst_gap,
        pass: base.pass && (n == 0 || worst_gap <= 1e-12 || worst_gap == f64::NEG_INFINITY),
    })
}

/// `E[(n − T1)^p / (T1 + 1)]` against `((n+1)(1−q) + p/2)^p / ((n+1)q) ∧ n^p`.
pub fn binom_ratio_oracle(n: usize, q: f64, p: f64) -> Result<OracleResult> {
    if n > BINOM_SUM_CAP {
        return Err(Error::NTooLarge { n, cap: BINOM_SUM_CAP });
    }
    if !(0.0..=1.0).contains(&q) || !(p > 0.0) {
        return Err(Error::InvalidArgument("need q in [0, 1] and p > 0".into()));
    }
    let nf = n as f64;
    let exact: f64 = (0..=n)
        .map(|k| binom_pmf(n as u64, k as u64, q) * (nf - k as f64).powf(p) / (k as f64 + 1.0))
        .sum();
    let first = ((nf + 1.0) * (1.0 - q) + p / 2.0).powf(p) / ((nf + 1.0) * q);
    let bound = first.min(nf.powf(p));
    Ok(OracleResult::new(exact, bound))
}

/// Raw moment `E[X^m]`, `X ~ Bin(n, q)`, against `(nq + m/2)^m`.
pub fn binom_moment_check(n: usize, q: f64, m: f64) -> Result<OracleResult> {
    if n > BINOM_SUM_CAP {
        return Err(Error::NTooLarge { n, cap: BINOM_SUM_CAP });
    }
    if !(0.0..=1.0).contains(&q) || !(m >= 1.0) {
        return Err(Error::InvalidArgument("need q in [0, 1] and m >= 1".into()));
    }
    let exact: f64 = (0..=n).map(|k| binom_pmf(n as u64, k as u64, q) * (k as f64).powf(m)).sum();
    let bound = (n as f64 * q + m / 2.0).powf(m);
    Ok(OracleResult::new(exact, bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Bounded,
    Heavy,
    Sparse,
    Nonparametric,
}

impl std::str::FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded" => Ok(Problem::Bounded),
            "heavy" => Ok(Problem::Heavy),
            "sparse" => Ok(Problem::Sparse),
            "nonparametric" => Ok(Problem::Nonparametric),
            _ => Err(Error::Parse(format!("unknown problem `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionKind {
    Sharp,
    Gradual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEntry {
    pub problem: Problem,
    /// `"inf"`, `"1"`, or `"p"` for the whole range.
    pub order: String,
    pub kind: TransitionKind,
    pub threshold: String,
}

/// Where the stability/accuracy trade-off changes regime for each problem.
pub fn phase_catalog() -> Vec<PhaseEntry> {
    let e = |problem, order: &str, kind, threshold: &str| PhaseEntry {
        problem,
        order: order.into(),
        kind,
        threshold: threshold.into(),
    };
    vec![
        e(Problem::Bounded, "inf", TransitionKind::Sharp, "2r/n"),
        e(Problem::Bounded, "1", TransitionKind::Sharp, "r/n"),
        e(Problem::Bounded, "p", TransitionKind::Sharp, "2^(1-1/p) r/n"),
        e(Problem::Heavy, "inf", TransitionKind::Gradual, "none"),
        e(Problem::Heavy, "1", TransitionKind::Sharp, "24r/n"),
        e(Problem::Sparse, "p", TransitionKind::Sharp, "4*sqrt(2) r sqrt(s)/n"),
        e(Problem::Nonparametric, "inf", TransitionKind::Gradual, "none"),
        e(Problem::Nonparametric, "1", TransitionKind::Sharp, "log^2(n)/n"),
    ]
}

/// Numeric transition location, or `None` for gradual transitions.
pub fn phase_threshold(problem: Problem, order: StabilityOrder, n: usize, r: f64, s: usize) -> Option<f64> {
    let nf = n as f64;
    match (problem, order) {
        (Problem::Bounded, StabilityOrder::Inf) => Some(2.0 * r / nf),
        (Problem::Bounded, StabilityOrder::P(p)) => Some(2f64.powf(1.0 - 1.0 / p) * r / nf),
        (Problem::Heavy, StabilityOrder::Inf) => None,
        (Problem::Heavy, _) => Some(24.0 * r / nf),
        (Problem::Sparse, _) => Some(4.0 * 2f64.sqrt() * r * (s as f64).sqrt() / nf),
        (Problem::Nonparametric, StabilityOrder::Inf) => None,
        (Problem::Nonparametric, _) => Some(nf.ln().powi(2) / nf),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tv_examples() {
        let a = DistributionSpec::BinaryPmR { r: 1.0, prob_plus: 0.3 };
        assert_eq!(tv_discrete(&a, &a).unwrap(), 0.0);
        let b = DistributionSpec::Discrete { support: vec![vec![5.0]], probs: vec![1.0] };
        assert_eq!(tv_discrete(&a, &b).unwrap(), 1.0);
        let h = TwoPointInstance::heavy(1.0, 2.0, 0.07).unwrap();
        assert!((tv_discrete(&h.p1, &h.p2).unwrap() - 0.07).abs() < 1e-15);
        assert!((h.delta_theta - 0.07f64.sqrt()).abs() < 1e-15);
        let sp = DistributionSpec::SparseMean { d: 3, s: 1, r: 1.0, active: vec![] };
        assert!(matches!(tv_discrete(&a, &sp), Err(Error::NonDiscreteInput)));
    }

    #[test]
    fn coupling_identical_has_no_mismatch() {
        let a = DistributionSpec::BinaryPmR { r: 1.0, prob_plus: 0.3 };
        let (x, y) = maximal_coupling_sample(&a, &a, 500, Seed(3)).unwrap();
        assert_eq!(x.hamming(&y).unwrap(), 0);
    }

    #[test]
    fn lower_worst_examples() {
        assert_eq!(lower_worst(2.0, 5.0, 0.0), 1.0);
        assert_eq!(lower_worst(2.0, 5.0, 0.4), 0.0);
        assert!((lower_worst(2.0, 5.0, 0.2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn lower_lp_examples() {
        let g = eta_grid(0.0, 0.5, 200);
        let v = lower_lp(2.0, 10, StabilityOrder::P(1.0), 0.0, false, &g).unwrap();
        assert_eq!(v.general, 1.0);
        assert!((lower_avg_corollary(2.0, 10, 0.01) - 0.0784).abs() < 1e-12);
        let v = lower_lp(2.0, 10, StabilityOrder::P(1.0), 0.01, true, &[0.25]).unwrap();
        assert!(v.linear.unwrap() >= lower_avg_corollary(2.0, 10, 0.01));
    }

    #[test]
    fn sharper_examples() {
        assert_eq!(lower_avg_sharper(2.0, 10, 0.1, 0.5).unwrap(), 0.0);
        assert_eq!(lower_avg_sharper(2.0, 10, 0.0, 0.25).unwrap(), 1.0);
        let (r, n) = (1.5, 40usize);
        let v = lower_avg_sharper(2.0 * r, n, r / (2.0 * n as f64), 0.25).unwrap();
        let want = r * r * (1.0 - 3f64.ln() / 2.0 - 3.0 / n as f64).max(0.0).powi(2);
        assert!((v - want).abs() < 1e-12);
        assert!(matches!(lower_avg_sharper(1.0, 10, 0.1, 0.2), Err(Error::EtaOutOfRange(_))));
    }

    #[test]
    fn exact_risk_examples() {
        assert!((exact_risk_worst_bounded(100, 1.0, 0.05) - 1.0 / 121.0).abs() < 1e-15);
        assert_eq!(exact_risk_worst_bounded(100, 1.0, 0.0), 1.0);
        assert!((exact_risk_worst_bounded(100, 1.0, 2.0 / 150.0) - 1.0 / 9.0).abs() < 1e-12);
        assert!((rate_avg_bounded(100, 1.0, 0.02) - 0.01).abs() < 1e-15);
        assert!((rate_avg_bounded(100, 1.0, 0.005) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn rate_branches_meet_near_cube_root() {
        let n = 1_000_000usize;
        let d = (n as f64).powf(-1.0 / 3.0);
        let beta = 1.0 / ((1.0 + d) * n as f64);
        let v = rate_avg_bounded(n, 1.0, beta);
        assert!(v >= 1.0 / n as f64 && v <= 2.0 / n as f64);
    }

    #[test]
    fn ratio_oracle_small_case() {
        let r = binom_ratio_oracle(4, 0.5, 1.0).unwrap();
        let want: f64 = (0..=4u64)
            .map(|k| {
                let c = [1.0, 4.0, 6.0, 4.0, 1.0][k as usize];
                c / 16.0 * (4.0 - k as f64) / (k as f64 + 1.0)
            })
            .sum();
        assert!((r.exact - want).abs() < 1e-14);
        assert!(r.pass);
        let one = binom_ratio_oracle(10, 1.0, 2.0).unwrap();
        assert_eq!(one.exact, 0.0);
        let zero = binom_ratio_oracle(10, 0.0, 2.0).unwrap();
        assert_eq!(zero.exact, 100.0);
        assert_eq!(zero.bound, 100.0);
    }

    #[test]
    fn moment_examples() {
        let m1 = binom_moment_check(20, 0.3, 1.0).unwrap();
        assert!((m1.exact - 6.0).abs() < 1e-12 && m1.pass);
        let full = binom_moment_check(7, 1.0, 3.0).unwrap();
        assert!((full.exact - 343.0).abs() < 1e-9);
        let m3 = binom_moment_check(10, 0.3, 3.0).unwrap();
        let want: f64 = (0..=10u64).map(|k| binom_pmf(10, k, 0.3) * (k as f64).powi(3)).sum();
        assert!((m3.exact - want).abs() < 1e-12);
    }

    #[test]
    fn log_oracle_structure() {
        let r = binom_log_oracle(1, 1.0).unwrap();
        assert_eq!(r.exact, f64::NEG_INFINITY);
        assert!(r.pass);
        let r = binom_log_oracle(10, 0.4).unwrap();
        assert_eq!(r.exact, f64::NEG_INFINITY);
        assert!(r.conditional_worst_gap <= 0.0);
        assert!(matches!(binom_log_oracle(61, 0.5), Err(Error::NTooLarge { .. })));
    }

    #[test]
    fn catalog() {
        let c = phase_catalog();
        assert!(c.iter().any(|e| e.problem == Problem::Heavy && e.order == "inf" && e.kind == TransitionKind::Gradual));
        assert_eq!(phase_threshold(Problem::Bounded, StabilityOrder::Inf, 10, 1.0, 1), Some(0.2));
        let s = phase_threshold(Problem::Sparse, StabilityOrder::Inf, 100, 1.0, 4).unwrap();
        assert!((s - 8.0 * 2f64.sqrt() / 100.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn exact_risk_monotone_and_bounded(n in 1usize..500, b1 in 0.0f64..1.0, b2 in 0.0f64..1.0) {
            let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
            let (a, b) = (exact_risk_worst_bounded(n, 1.0, lo), exact_risk_worst_bounded(n, 1.0, hi));
            prop_assert!(b <= a);
            let floor = 1.0 / ((n as f64).sqrt() + 1.0).powi(2);
            prop_assert!(a <= 1.0 && b >= floor - 1e-15);
        }

        #[test]
        fn linear_branch_dominates_corollary(n in 1usize..200, dt in 0.0f64..4.0, beta in 0.0f64..0.05) {
            let g = eta_grid(0.0, 0.5, 201);
            let v = lower_lp(dt, n, StabilityOrder::P(1.0), beta, true, &g).unwrap();
            prop_assert!(v.linear.unwrap() >= lower_avg_corollary(dt, n, beta) - 1e-12);
        }

        #[test]
        fn pmf_sums_to_one(n in 0u64..200, q in 0.0f64..1.0) {
            let s: f64 = (0..=n).map(|k| binom_pmf(n, k, q)).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
