use serde::{Deserialize, Serialize};

use crate::dataset::l2_norm;
use crate::error::{Error, Result};
use crate::estimator::EstimatorHandle;
use crate::stability::StabilityOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeavyMode {
    WorstCase,
    AverageCase,
}

/// Mean estimation under a k-th moment bound `(E‖X‖^k)^{1/k} ≤ r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeavyTailSpec {
    pub r: f64,
    pub k: f64,
    pub n: usize,
    pub beta: f64,
    pub mode: HeavyMode,
    pub d: usize,
}

impl HeavyTailSpec {
    /// Truncation level; `None` means no truncation.
    pub fn rho(&self) -> Option<f64> {
        let n = self.n as f64;
        let moment_cap = self.r * n.powf(1.0 / self.k);
        match self.mode {
            HeavyMode::WorstCase => {
                let s = n * self.beta / 2.0;
                Some(if self.k < 2.0 { s.min(moment_cap) } else { s })
            }
            HeavyMode::AverageCase => (self.k < 2.0).then_some(moment_cap),
        }
    }
}

/// Truncated mean (worst case) or self-normalized, outer-shrunk truncated mean (average case).
pub fn heavy_tail_estimator(spec: &HeavyTailSpec) -> Result<EstimatorHandle> {
    if !(spec.r > 0.0) || !(spec.k >= 1.0) || spec.n == 0 || !(spec.beta >= 0.0) || spec.d == 0 {
        return Err(Error::InvalidArgument("need r > 0, k >= 1, n >= 1, beta >= 0, d >= 1".into()));
    }
    let rho = spec.rho();
    let d = spec.d;
    let keep = move |p: &[f64]| rho.is_none_or(|t| l2_norm(p) <= t);
    match spec.mode {
        HeavyMode::WorstCase => Ok(EstimatorHandle::new("heavy-worst", d, move |ds| {
            let mut m = vec![0.0; d];
            for p in ds.points().filter(|p| keep(p)) {
                m.iter_mut().zip(p).for_each(|(a, b)| *a += b);
            }
            let inv = 1.0 / ds.len() as f64;
            m.iter_mut().for_each(|a| *a *= inv);
            m
        })
        .with_certificate(StabilityOrder::Inf, spec.beta)),
        HeavyMode::AverageCase => {
            let (r, beta) = (spec.r, spec.beta);
            Ok(EstimatorHandle::new("heavy-avg", d, move |ds| {
                let n = ds.len() as f64;
                let mut m = vec![0.0; d];
                let mut total = 0.0;
                for p in ds.points().filter(|p| keep(p)) {
                    m.iter_mut().zip(p).for_each(|(a, b)| *a += b);
                    total += l2_norm(p);
                }
                let outer = (beta * n / (24.0 * r)).min(1.0);
                let inner = if total > 0.0 { (2.0 * n * r / total).min(1.0) } else { 1.0 };
                let f = outer * inner / n;
                m.iter_mut().for_each(|a| *a *= f);
                m
            })
            .with_certificate(StabilityOrder::P(1.0), spec.beta))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::seed::Seed;

    fn spec(mode: HeavyMode, beta: f64) -> HeavyTailSpec {
        HeavyTailSpec { r: 1.0, k: 2.0, n: 4, beta, mode, d: 1 }
    }

    #[test]
    fn worst_case_truncation() {
        // rho = nβ/2 = 1
        let e = heavy_tail_estimator(&spec(HeavyMode::WorstCase, 0.5)).unwrap();
        let ds = Dataset::scalar(&[0.5, -0.5, 0.25, 0.75], f64::INFINITY).unwrap();
        assert_eq!(e.evaluate(&ds, Seed(0)).unwrap(), ds.mean());
        let ds = Dataset::scalar(&[0.5, -0.5, 0.25, 7.0], f64::INFINITY).unwrap();
        assert_eq!(e.evaluate(&ds, Seed(0)).unwrap(), vec![0.0625]);
    }

    #[test]
    fn rho_rules() {
        let mut s = spec(HeavyMode::WorstCase, 0.5);
        s.k = 1.5;
        s.n = 100;
        assert_eq!(s.rho(), Some(25.0f64.min(100f64.powf(1.0 / 1.5))));
        s.mode = HeavyMode::AverageCase;
        assert_eq!(s.rho(), Some(100f64.powf(1.0 / 1.5)));
        s.k = 2.0;
        assert_eq!(s.rho(), None);
    }

    #[test]
    fn average_case_plain_mean_when_small() {
        let e = heavy_tail_estimator(&spec(HeavyMode::AverageCase, 6.0)).unwrap();
        let ds = Dataset::scalar(&[0.5, -0.5, 1.25, 2.0], f64::INFINITY).unwrap();
        assert!((e.evaluate(&ds, Seed(0)).unwrap()[0] - ds.mean()[0]).abs() < 1e-15);
        let big = Dataset::scalar(&[100.0, 0.0, 0.0, 0.0], f64::INFINITY).unwrap();
        // Self-normalization: 2nr / Σ‖Y‖ = 8/100.
        assert!((e.evaluate(&big, Seed(0)).unwrap()[0] - 25.0 * 0.08).abs() < 1e-12);
    }
}
