use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimatorHandle;
use crate::stability::StabilityOrder;

/// s-sparse mean estimation over the ℓ∞ cube of radius `r` in `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseMeanSpec {
    pub r: f64,
    pub s: usize,
    pub d: usize,
    pub n: usize,
    pub beta: f64,
}

impl SparseMeanSpec {
    /// `c = 1 ∧ nβ/(4√(2s) r)`.
    pub fn shrink(&self) -> f64 {
        (self.n as f64 * self.beta / (4.0 * (2.0 * self.s as f64).sqrt() * self.r)).min(1.0)
    }
}

/// `c · sign(x_j)(|x_j| − |x|_{(s+1)})_+`. Entries tied with the `(s+1)`-th
/// largest magnitude map to zero, so at most `s` outputs are nonzero.
pub fn soft_threshold_at_order_stat(x: &[f64], s: usize, c: f64) -> Vec<f64> {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let tau = if s < mags.len() {
        let (_, nth, _) = mags.select_nth_unstable_by(s, |a, b| b.total_cmp(a));
        *nth
    } else {
        0.0
    };
    x.iter().map(|&v| c * v.signum() * (v.abs() - tau).max(0.0)).collect()
}

pub fn sparse_soft(spec: &SparseMeanSpec) -> Result<EstimatorHandle> {
    if spec.s == 0 || spec.d <= spec.s {
        return Err(Error::DimensionTooSmall { d: spec.d, s: spec.s });
    }
    if !(spec.r > 0.0) || spec.n == 0 || !(spec.beta >= 0.0) {
        return Err(Error::InvalidArgument("need r > 0, n >= 1, beta >= 0".into()));
    }
    let (s, c) = (spec.s, spec.shrink());
    Ok(EstimatorHandle::from_mean_map("sparse-soft", spec.d, move |m| soft_threshold_at_order_stat(m, s, c))
        .with_certificate(StabilityOrder::Inf, spec.beta))
}

/// Fixed-threshold hard and soft thresholding of the sample mean.
pub fn classical_thresholds(tau: f64, d: usize) -> Result<(EstimatorHandle, EstimatorHandle)> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be nonnegative, got {tau}")));
    }
    let hard = EstimatorHandle::from_mean_map("hard-threshold", d, move |m| {
        m.iter().map(|&v| if v.abs() >= tau { v } else { 0.0 }).collect()
    });
    let soft = EstimatorHandle::from_mean_map("soft-threshold", d, move |m| {
        m.iter().map(|&v| v.signum() * (v.abs() - tau).max(0.0)).collect()
    });
    Ok((hard, soft))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_example() {
        assert_eq!(soft_threshold_at_order_stat(&[3.0, 1.0, 1.0, 0.0, 0.0], 2, 1.0), vec![2.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(soft_threshold_at_order_stat(&[0.0; 6], 2, 1.0), vec![0.0; 6]);
        assert_eq!(soft_threshold_at_order_stat(&[-3.0, 2.0, 0.5], 1, 0.5), vec![-0.5, 0.0, 0.0]);
    }

    #[test]
    fn dimension_check() {
        let spec = SparseMeanSpec { r: 1.0, s: 3, d: 3, n: 10, beta: 1.0 };
        assert!(matches!(sparse_soft(&spec), Err(Error::DimensionTooSmall { .. })));
    }

    #[test]
    fn classical_examples() {
        let (hard, soft) = classical_thresholds(0.0, 3).unwrap();
        assert_eq!(soft.mean_map().unwrap()(&[0.2, -0.4, 0.0]), vec![0.2, -0.4, 0.0]);
        let (hard2, _) = classical_thresholds(0.5, 1).unwrap();
        let below = hard2.mean_map().unwrap()(&[0.5 - 1e-9])[0];
        let above = hard2.mean_map().unwrap()(&[0.5 + 1e-9])[0];
        assert!((above - below - 0.5).abs() < 1e-6);
        drop(hard);
    }

    proptest! {
        #[test]
        fn at_most_s_nonzero(x in prop::collection::vec(-1.0f64..1.0, 3..30), s in 1usize..3) {
            let out = soft_threshold_at_order_stat(&x, s, 1.0);
            prop_assert!(out.iter().filter(|v| **v != 0.0).count() <= s);
        }

        #[test]
        fn ties_stay_sparse(v in 0.0f64..1.0, d in 3usize..12, s in 1usize..3) {
            let out = soft_threshold_at_order_stat(&vec![v; d], s, 1.0);
            prop_assert!(out.iter().all(|x| *x == 0.0));
        }

        #[test]
        fn soft_is_one_lipschitz(a in -2.0f64..2.0, b in -2.0f64..2.0, tau in 0.0f64..1.0) {
            let (_, soft) = classical_thresholds(tau, 1).unwrap();
            let g = soft.mean_map().unwrap();
            prop_assert!((g(&[a])[0] - g(&[b])[0]).abs() <= (a - b).abs() + 1e-15);
        }
    }
}
