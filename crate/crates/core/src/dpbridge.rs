//! Conversions between worst-case stability and differential privacy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::exact_risk_worst_bounded;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{EstimatorHandle, DEFAULT_SEED_DRAWS};
use crate::par::{map_range, Exec};
use crate::seed::Seed;
use crate::stability::StabilityOrder;

/// A pure ε-DP budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget(f64);

impl PrivacyBudget {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("privacy budget must be finite and positive, got {eps}")));
        }
        Ok(PrivacyBudget(eps))
    }

    pub fn eps(self) -> f64 {
        self.0
    }
}

/// One Laplace(scale) draw by inverse CDF.
pub fn laplace_draw<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    let a = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
    -scale * u.signum() * a.ln()
}

pub fn laplace_cdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale).exp()
    } else {
        1.0 - 0.5 * (-x / scale).exp()
    }
}

/// `base + Laplace(β/ε)`, where `β` is the base's worst-case certificate.
pub fn laplace_mechanism(base: &EstimatorHandle, eps: PrivacyBudget) -> Result<EstimatorHandle> {
    let cert = match base.certified() {
        Some(c) if c.order.is_inf() => c,
        _ => return Err(Error::UncertifiedBase),
    };
    if base.target_dim() != 1 {
        return Err(Error::MultiDimUnsupported);
    }
    let scale = cert.beta / eps.eps();
    let inner = base.clone();
    let id = format!("laplace({}, eps={})", base.id(), eps.eps());
    Ok(EstimatorHandle::randomized(id, 1, DEFAULT_SEED_DRAWS, move |ds: &Dataset, seed: Seed| {
        let centre = inner.evaluate_unchecked(ds, Seed(0))[0];
        let mut rng = seed.derive_label("laplace").rng();
        vec![centre + laplace_draw(&mut rng, scale)]
    })
    .with_certificate(StabilityOrder::Inf, cert.beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityFromDp {
    /// `r(e^ε − 1)`.
    pub beta: f64,
    /// `2rε`, a valid simplification when `ε < 1`.
    pub simple_beta: Option<f64>,
}

/// Worst-case stability implied by ε-DP of a mechanism with outputs in `[-r, r]`.
pub fn dp_to_stability(eps: f64, r: f64) -> Result<StabilityFromDp> {
    if !(eps > 0.0) || !(r > 0.0) {
        return Err(Error::InvalidArgument("need eps > 0 and r > 0".into()));
    }
    Ok(StabilityFromDp { beta: r * eps.exp_m1(), simple_beta: (eps < 1.0).then(|| 2.0 * r * eps) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PrivacyProblem {
    Bounded,
    Heavy { k: f64 },
}

/// One ε grid point. All `*_rate` fields use unit constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpRow {
    pub eps: f64,
    /// `R_{n,∞}(r(e^ε − 1))`: the stability curve evaluated at the converted budget.
    pub lower_from_stability: f64,
    /// `inf_β (R_{n,∞}(β) + 2β²/ε²)` over a log grid.
    pub upper_from_stability: f64,
    pub argmin_beta: f64,
    pub dp_lower_rate: f64,
    pub dp_rate: f64,
}

/// One `β` grid point, taken as `β = r(e^ε − 1)` so that `log(1 + β/r) = ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub beta: f64,
    pub lower: f64,
    /// Exact minimax value (bounded) or its rate (heavy).
    pub value: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Curves {
    pub problem: PrivacyProblem,
    pub n: usize,
    pub r: f64,
    pub c0: f64,
    /// False only for the bounded stability value, which is exact.
    pub rate_only: bool,
    pub dp: Vec<DpRow>,
    pub stability: Vec<StabilityRow>,
}

/// Constant used in the privacy-to-stability lower bound.
pub const DEFAULT_C0: f64 = 0.25;

fn heavy_stability_rate(n: usize, r: f64, k: f64, beta: f64) -> f64 {
    let nf = n as f64;
    let tail = if beta <= 0.0 { r * r } else { (r.powf(2.0 * k) / (nf * beta).powf(2.0 * (k - 1.0))).min(r * r) };
    r * r / nf + tail
}

fn stability_curve(problem: PrivacyProblem, n: usize, r: f64, beta: f64) -> f64 {
    match problem {
        PrivacyProblem::Bounded => exact_risk_worst_bounded(n, r, beta),
        PrivacyProblem::Heavy { k } => heavy_stability_rate(n, r, k, beta),
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1).max(1) as f64).exp()).collect()
}

pub fn prop1_curves(problem: PrivacyProblem, n: usize, r: f64, eps_grid: &[f64], c0: f64) -> Result<Prop1Curves> {
    if n == 0 || !(r > 0.0) || eps_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("need n >= 1, r > 0 and a positive finite eps grid".into()));
    }
    if let PrivacyProblem::Heavy { k } = problem {
        if !(k >= 2.0) {
            return Err(Error::InvalidArgument("heavy-tail curves need k >= 2".into()));
        }
    }
    let nf = n as f64;
    let mut betas = log_grid(1e-4 * r / nf, 10.0 * r, 600);
    betas.push(2.0 * r / nf);
    let mut dp = Vec::with_capacity(eps_grid.len());
    let mut stability = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let mut cands = betas.clone();
        cands.push(r * eps);
        if let PrivacyProblem::Heavy { k } = problem {
            cands.push(r / nf * (nf * eps).powf(1.0 / k));
        }
        let (upper, argmin) = cands
            .iter()
            .map(|&b| (stability_curve(problem, n, r, b) + 2.0 * b * b / (eps * eps), b))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
        let conv = r * eps.exp_m1();
        let (dp_lower_rate, dp_rate) = match problem {
            PrivacyProblem::Bounded => {
                let a = (2.0 / (nf * eps.exp_m1()) - 1.0).max(0.0);
                (r * r / nf + (a / (1.0 + a)).powi(2) * r * r, r * r / nf + (r * r / (nf * nf * eps * eps)).min(r * r))
            }
            PrivacyProblem::Heavy { k } => (
                r * r / nf + (r * r / (nf * eps.exp_m1()).powf(2.0 * (k - 1.0))).min(r * r),
                r * r / nf + (r * r / (nf * eps).powf(2.0 - 2.0 / k)).min(r * r),
            ),
        };
        dp.push(DpRow {
            eps,
            lower_from_stability: stability_curve(problem, n, r, conv),
            upper_from_stability: upper,
            argmin_beta: argmin,
            dp_lower_rate,
            dp_rate,
        });
        let beta = conv;
        let (lower, upper) = match problem {
            PrivacyProblem::Bounded => (
                c0 * r * r / nf + (c0 * r * r - 2.0 * beta * beta * nf * nf).max(0.0),
                r * r / nf + (r * r / (nf * nf * eps * eps)).min(r * r),
            ),
            PrivacyProblem::Heavy { k } => (
                heavy_stability_rate(n, r, k, beta),
                r * r / nf + (r * r / (nf * eps).powf(2.0 - 2.0 / k)).min(r * r),
            ),
        };
        stability.push(StabilityRow { beta, lower, value: stability_curve(problem, n, r, beta), upper });
    }
    Ok(Prop1Curves {
        problem,
        n,
        r,
        c0,
        rate_only: !matches!(problem, PrivacyProblem::Bounded),
        dp,
        stability,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub bins: usize,
    pub reps: usize,
    /// Bins where both counts fall below this are ignored.
    pub min_count: usize,
    /// Standard errors of slack added per bin.
    pub z: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { bins: 40, reps: 100_000, min_count: 200, z: 4.0 }
    }
}

pub const MIN_AUDIT_REPS: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub eps: f64,
    /// Largest unsmoothed `|log(c1/c2)|` over counted bins; may be infinite.
    pub max_log_ratio: f64,
    /// Largest smoothed ratio minus its slack.
    pub max_excess: f64,
    pub bins_used: usize,
    pub pass: bool,
}

/// Binned check of `P(M(D) ∈ S) ≤ e^ε P(M(D') ∈ S)` on one neighboring pair.
pub fn dp_audit(
    mech: &EstimatorHandle,
    ds: &Dataset,
    neighbor: &Dataset,
    eps: f64,
    cfg: AuditConfig,
    seed: Seed,
    exec: Exec,
) -> Result<AuditReport> {
    if mech.target_dim() != 1 {
        return Err(Error::MultiDimUnsupported);
    }
    if cfg.reps < MIN_AUDIT_REPS {
        return Err(Error::InsufficientReps { needed: MIN_AUDIT_REPS, got: cfg.reps });
    }
    let h = ds.hamming(neighbor)?;
    if h > 1 {
        return Err(Error::HammingDistanceExceeded(h));
    }
    let draws = |d: &Dataset| map_range(exec, cfg.reps, |i| mech.evaluate_unchecked(d, seed.derive(i as u64))[0]);
    let a = draws(ds);
    let b = draws(neighbor);
    let lo = a.iter().chain(&b).cloned().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(&b).cloned().fold(f64::NEG_INFINITY, f64::max);
    let bins = cfg.bins.max(1);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let hist = |xs: &[f64]| {
        let mut c = vec![0usize; bins];
        for &x in xs {
            let i = (((x - lo) / width) as usize).min(bins - 1);
            c[i] += 1;
        }
        c
    };
    let (ca, cb) = (hist(&a), hist(&b));
    let mut max_log_ratio: f64 = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut used = 0;
    for (&x, &y) in ca.iter().zip(&cb) {
        if x.max(y) < cfg.min_count {
            continue;
        }
        used += 1;
        let raw = if x == y {
            0.0
        } else if x == 0 || y == 0 {
            f64::INFINITY
        } else {
            (x as f64 / y as f64).ln().abs()
        };
        max_log_ratio = max_log_ratio.max(raw);
        let (sx, sy) = (x as f64 + 0.5, y as f64 + 0.5);
        let slack = cfg.z * (1.0 / sx + 1.0 / sy).sqrt();
        max_excess = max_excess.max((sx / sy).ln().abs() - eps - slack);
    }
    Ok(AuditReport { eps, max_log_ratio, max_excess, bins_used: used, pass: max_excess <= 0.0 })
}

/// Kolmogorov–Smirnov distance to the Laplace(scale) CDF, and the 1% critical value `1.628/√m`.
pub fn ks_laplace(samples: &[f64], scale: f64) -> (f64, f64) {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = laplace_cdf(x, scale);
            (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
        })
        .fold(0.0, f64::max);
    (d, 1.628 / m.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::exact_worst_bounded;

    fn base() -> EstimatorHandle {
        exact_worst_bounded(50, 1.0, 0.04, 1).unwrap()
    }

    #[test]
    fn conversion_examples() {
        assert!((dp_to_stability(2f64.ln(), 1.0).unwrap().beta - 1.0).abs() < 1e-15);
        let c = dp_to_stability(0.1, 1.0).unwrap();
        assert!((c.beta - 0.105_170_918_075_647_6).abs() < 1e-12);
        assert_eq!(c.simple_beta, Some(0.2));
        assert!(c.beta <= 0.2);
        assert!(dp_to_stability(1e-12, 1.0).unwrap().beta < 1e-11);
    }

    #[test]
    fn mechanism_errors() {
        let unc = EstimatorHandle::sample_mean(1);
        assert!(matches!(laplace_mechanism(&unc, PrivacyBudget::new(1.0).unwrap()), Err(Error::UncertifiedBase)));
        let avg = EstimatorHandle::sample_mean(1).with_certificate(StabilityOrder::P(1.0), 0.1);
        assert!(matches!(laplace_mechanism(&avg, PrivacyBudget::new(1.0).unwrap()), Err(Error::UncertifiedBase)));
        let two = EstimatorHandle::sample_mean(2).with_certificate(StabilityOrder::Inf, 0.1);
        assert!(matches!(laplace_mechanism(&two, PrivacyBudget::new(1.0).unwrap()), Err(Error::MultiDimUnsupported)));
        assert!(PrivacyBudget::new(0.0).is_err());
    }

    #[test]
    fn mechanism_noise() {
        let ds = Dataset::scalar(&[0.5; 50], 1.0).unwrap();
        let b = base();
        let centre = b.evaluate(&ds, Seed(0)).unwrap()[0];
        let m = laplace_mechanism(&b, PrivacyBudget::new(1e12).unwrap()).unwrap();
        assert!((m.evaluate(&ds, Seed(4)).unwrap()[0] - centre).abs() < 1e-12);
        let m = laplace_mechanism(&b, PrivacyBudget::new(0.5).unwrap()).unwrap();
        assert_eq!(m.evaluate(&ds, Seed(4)).unwrap(), m.evaluate(&ds, Seed(4)).unwrap());
        let xs: Vec<f64> = (0..100_000).map(|i| m.evaluate(&ds, Seed(i)).unwrap()[0] - centre).collect();
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        let want = 2.0 * (0.04f64 / 0.5).powi(2);
        assert!((var / want - 1.0).abs() < 0.05, "{var} vs {want}");
        let (d, crit) = ks_laplace(&xs, 0.08);
        assert!(d < crit, "{d} {crit}");
    }

    #[test]
    fn audit_examples() {
        let ds = Dataset::scalar(&[0.5; 50], 1.0).unwrap();
        let nb = ds.replace_point(0, &[-1.0]).unwrap();
        let cfg = AuditConfig { reps: 20_000, ..Default::default() };
        let m = laplace_mechanism(&base(), PrivacyBudget::new(1.0).unwrap()).unwrap();
        let same = dp_audit(&m, &ds, &ds, 1.0, cfg, Seed(1), Exec::default()).unwrap();
        assert_eq!(same.max_log_ratio, 0.0);
        let ok = dp_audit(&m, &ds, &nb, 1.0, cfg, Seed(2), Exec::default()).unwrap();
        assert!(ok.pass, "{ok:?}");
        let det = dp_audit(&base(), &ds, &nb, 1.0, cfg, Seed(3), Exec::default()).unwrap();
        assert!(det.max_log_ratio.is_infinite() && !det.pass);
        let few = AuditConfig { reps: 10, ..Default::default() };
        assert!(matches!(dp_audit(&m, &ds, &nb, 1.0, few, Seed(3), Exec::default()), Err(Error::InsufficientReps { .. })));
    }

    #[test]
    fn bounded_curves_ordering() {
        let n = 100;
        let grid = log_grid(0.1 / n as f64, 5.0, 20);
        let c = prop1_curves(PrivacyProblem::Bounded, n, 1.0, &grid, DEFAULT_C0).unwrap();
        for s in &c.stability {
            assert!(s.lower <= s.value && s.value <= s.upper, "{s:?}");
        }
        for d in &c.dp {
            assert!(d.lower_from_stability <= d.upper_from_stability + 1e-15, "{d:?}");
        }
        let big = prop1_curves(PrivacyProblem::Bounded, n, 1.0, &[1e6], DEFAULT_C0).unwrap();
        assert!((big.dp[0].upper_from_stability - 1.0 / 121.0).abs() < 1e-3);
    }

    #[test]
    fn dp_lower_is_loose_at_two_over_n() {
        let n = 1000;
        let c = prop1_curves(PrivacyProblem::Bounded, n, 1.0, &[2.0 / n as f64], DEFAULT_C0).unwrap();
        assert!(c.dp[0].dp_lower_rate < 3.0 / n as f64);
        assert!(c.dp[0].dp_rate > 0.2);
        let b = c.dp[0].argmin_beta;
        assert!(b > 0.5 / n as f64 && b < 4.0 / n as f64, "{b}");
    }

    #[test]
    fn heavy_curves_are_rate_only() {
        let c = prop1_curves(PrivacyProblem::Heavy { k: 2.0 }, 100, 1.0, &[0.1, 1.0], DEFAULT_C0).unwrap();
        assert!(c.rate_only);
        assert!(prop1_curves(PrivacyProblem::Heavy { k: 1.5 }, 100, 1.0, &[0.1], DEFAULT_C0).is_err());
    }
}
