//! Stability-constrained mean and regression estimators, stability
//! certification by exact evaluation and adversarial search, lower-bound
//! formulas, a differential-privacy bridge, and Monte Carlo risk sweeps.

pub mod bounds;
pub mod dataset;
pub mod distribution;
pub mod dpbridge;
pub mod error;
pub mod estimator;
pub mod estimators;
pub mod par;
pub mod risk;
pub mod seed;
pub mod stability;
pub mod wavelet;

pub use dataset::{Dataset, DatasetKind, NormKind};
pub use distribution::{DistributionSpec, RegressionFn};
pub use error::{Error, Result};
pub use estimator::{Certificate, EstimatorHandle};
pub use par::Exec;
pub use seed::Seed;
pub use stability::{SearchBudget, SearchDomain, StabilityOrder, StabilityReport, Witness};
