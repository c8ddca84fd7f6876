use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimatorHandle;
use crate::stability::StabilityOrder;

/// Mean estimation over the ℓ2 ball of radius `r` in `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedMeanSpec {
    pub r: f64,
    pub n: usize,
    pub beta: f64,
    pub order: StabilityOrder,
    pub d: usize,
}

impl BoundedMeanSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) || self.n == 0 || self.d == 0 || !(self.beta >= 0.0) {
            return Err(Error::InvalidArgument("need r > 0, n >= 1, d >= 1, beta >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShrinkageRule {
    /// `c = nβ/(2r) ∧ 1`, worst-case stable.
    Worst,
    /// `c = nβ/(2^{1−1/p} r) ∧ 1`, ℓp stable.
    Refined,
}

/// `c · X̄` with the shrinkage factor chosen by `rule`.
pub fn shrinkage_bounded(spec: &BoundedMeanSpec, rule: ShrinkageRule) -> Result<EstimatorHandle> {
    spec.validate()?;
    let nb = spec.n as f64 * spec.beta;
    let (c, order) = match rule {
        ShrinkageRule::Worst => ((nb / (2.0 * spec.r)).min(1.0), StabilityOrder::Inf),
        ShrinkageRule::Refined => {
            let inv_p = match spec.order {
                StabilityOrder::Inf => 0.0,
                StabilityOrder::P(p) => 1.0 / p,
            };
            ((nb / (2f64.powf(1.0 - inv_p) * spec.r)).min(1.0), spec.order)
        }
    };
    let id = match rule {
        ShrinkageRule::Worst => "shrinkage-worst",
        ShrinkageRule::Refined => "shrinkage-refined",
    };
    Ok(EstimatorHandle::from_mean_map(id, spec.d, move |m| m.iter().map(|v| c * v).collect())
        .with_certificate(order, spec.beta))
}

fn check_scalar(n: usize, r: f64, beta: f64, d: usize) -> Result<()> {
    if d != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: d });
    }
    BoundedMeanSpec { r, n, beta, order: StabilityOrder::Inf, d }.validate()
}

/// `(nβ/(2r) ∧ 1/(1 + 1/√n)) X̄`, the exact minimax worst-case-stable estimator (d = 1).
pub fn exact_worst_bounded(n: usize, r: f64, beta: f64, d: usize) -> Result<EstimatorHandle> {
    check_scalar(n, r, beta, d)?;
    let c = (n as f64 * beta / (2.0 * r)).min(1.0 / (1.0 + 1.0 / (n as f64).sqrt()));
    Ok(EstimatorHandle::from_mean_map("exact-worst-bounded", 1, move |m| vec![c * m[0]])
        .with_certificate(StabilityOrder::Inf, beta))
}

/// `δ = (r/(nβ) − 1)_+`, infinite at `β = 0`.
fn delta(n: usize, r: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        f64::INFINITY
    } else {
        (r / (n as f64 * beta) - 1.0).max(0.0)
    }
}

/// Magnitude-adaptive shrinkage, average-case stable (d = 1):
/// `(1 − (δ ∧ 1)((2r√δ + 2r/√n)/|X̄| ∧ 1)) X̄`.
pub fn avg_bounded(n: usize, r: f64, beta: f64) -> Result<EstimatorHandle> {
    check_scalar(n, r, beta, 1)?;
    let dl = delta(n, r, beta);
    let dcap = dl.min(1.0);
    let cap = if dl.is_finite() { 2.0 * r * dl.sqrt() + 2.0 * r / (n as f64).sqrt() } else { f64::INFINITY };
    Ok(EstimatorHandle::from_mean_map("avg-bounded", 1, move |m| {
        let x = m[0];
        let ratio = if x == 0.0 { 1.0 } else { (cap / x.abs()).min(1.0) };
        vec![(1.0 - dcap * ratio) * x]
    })
    .with_certificate(StabilityOrder::P(1.0), beta))
}

/// `(1 − δ ∧ 1) X̄`, the plain shrinkage baseline for the average-case problem (d = 1).
pub fn naive_avg_bounded(n: usize, r: f64, beta: f64) -> Result<EstimatorHandle> {
    check_scalar(n, r, beta, 1)?;
    let c = 1.0 - delta(n, r, beta).min(1.0);
    Ok(EstimatorHandle::from_mean_map("naive-avg-bounded", 1, move |m| vec![c * m[0]])
        .with_certificate(StabilityOrder::P(1.0), beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: usize, beta: f64) -> BoundedMeanSpec {
        BoundedMeanSpec { r: 1.0, n, beta, order: StabilityOrder::Inf, d: 1 }
    }

    #[test]
    fn shrinkage_examples() {
        let e = shrinkage_bounded(&spec(10, 0.1), ShrinkageRule::Worst).unwrap();
        assert_eq!(e.mean_map().unwrap()(&[0.8]), vec![0.4]);
        let e = shrinkage_bounded(&spec(10, 0.3), ShrinkageRule::Worst).unwrap();
        assert_eq!(e.mean_map().unwrap()(&[0.8]), vec![0.8]);
        let e = shrinkage_bounded(&spec(10, 0.0), ShrinkageRule::Worst).unwrap();
        assert_eq!(e.mean_map().unwrap()(&[0.8]), vec![0.0]);
        let mut s = spec(10, 0.1);
        s.order = StabilityOrder::P(1.0);
        let e = shrinkage_bounded(&s, ShrinkageRule::Refined).unwrap();
        assert_eq!(e.mean_map().unwrap()(&[0.5]), vec![0.5]);
    }

    #[test]
    fn exact_worst_examples() {
        let e = exact_worst_bounded(100, 1.0, 0.01, 1).unwrap();
        assert!((e.mean_map().unwrap()(&[1.0])[0] - 0.5).abs() < 1e-15);
        let e = exact_worst_bounded(100, 1.0, 1.0, 1).unwrap();
        assert!((e.mean_map().unwrap()(&[1.0])[0] - 1.0 / 1.1).abs() < 1e-15);
        assert!(matches!(exact_worst_bounded(10, 1.0, 0.1, 2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn avg_examples() {
        let id = avg_bounded(100, 1.0, 0.01).unwrap();
        assert_eq!(id.mean_map().unwrap()(&[0.3]), vec![0.3]);
        let z = avg_bounded(100, 1.0, 0.005).unwrap();
        assert_eq!(z.mean_map().unwrap()(&[0.3]), vec![0.0]);
        let zero = avg_bounded(100, 1.0, 0.0).unwrap();
        assert_eq!(zero.mean_map().unwrap()(&[0.9]), vec![0.0]);
        // δ = 0.5, large |X̄|: independent re-evaluation of the formula.
        let e = avg_bounded(100, 1.0, 1.0 / 150.0).unwrap();
        let x = 2.0;
        let dl: f64 = 1.0 / (100.0 * (1.0 / 150.0)) - 1.0;
        let want = (1.0 - dl * 2.0 * (dl.sqrt() + 0.1) / x) * x;
        assert!((e.mean_map().unwrap()(&[x])[0] - want).abs() < 1e-12);
        assert_eq!(e.mean_map().unwrap()(&[0.0]), vec![0.0]);
    }

    #[test]
    fn naive_examples() {
        let e = naive_avg_bounded(10, 1.0, 0.05).unwrap();
        assert_eq!(e.mean_map().unwrap()(&[0.7]), vec![0.0]);
        let e = naive_avg_bounded(10, 1.0, 0.1).unwrap();
        assert_eq!(e.mean_map().unwrap()(&[0.7]), vec![0.7]);
        let e = naive_avg_bounded(10, 1.0, 1.0 / 13.0).unwrap();
        assert!((e.mean_map().unwrap()(&[1.0])[0] - 0.7).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn exact_worst_factor_monotone(b1 in 0.0f64..1.0, b2 in 0.0f64..1.0) {
            let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
            let f = |b| exact_worst_bounded(50, 1.0, b, 1).unwrap().mean_map().unwrap()(&[1.0])[0];
            prop_assert!(f(lo) <= f(hi));
        }
    }
}
