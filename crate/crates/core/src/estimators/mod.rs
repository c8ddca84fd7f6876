//! Stability-constrained estimators and classical baselines.

mod bounded;
mod heavy;
mod sparse;
mod wavelet_est;

pub use bounded::{avg_bounded, exact_worst_bounded, naive_avg_bounded, shrinkage_bounded, BoundedMeanSpec, ShrinkageRule};
pub use heavy::{heavy_tail_estimator, HeavyMode, HeavyTailSpec};
pub use sparse::{classical_thresholds, soft_threshold_at_order_stat, sparse_soft, SparseMeanSpec};
pub use wavelet_est::{wavelet_estimator, WaveletConstants, WaveletEstimatorSpec, WaveletMode};
