//! The estimator interface.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed::Seed;
use crate::stability::StabilityOrder;

pub type EvalFn = dyn Fn(&Dataset, Seed) -> Vec<f64> + Send + Sync;
pub type MeanMap = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Default number of seed draws used to approximate `E_ξ` for randomized estimators.
pub const DEFAULT_SEED_DRAWS: usize = 64;

/// A stability claim: the estimator is `beta`-stable in order `order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub order: StabilityOrder,
    pub beta: f64,
}

/// A map from datasets (plus a seed) to `R^d`.
///
/// Estimators that depend on the data only through the sample mean may also
/// carry `mean_map`, which lets the stability search skip dataset construction.
#[derive(Clone)]
pub struct EstimatorHandle {
    id: String,
    dim: usize,
    certified: Option<Certificate>,
    randomized: bool,
    seed_draws: usize,
    eval: Arc<EvalFn>,
    mean_map: Option<Arc<MeanMap>>,
}

impl fmt::Debug for EstimatorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EstimatorHandle")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("certified", &self.certified)
            .field("randomized", &self.randomized)
            .finish()
    }
}

impl EstimatorHandle {
    /// Deterministic estimator from an arbitrary dataset map.
    pub fn new(id: impl Into<String>, dim: usize, f: impl Fn(&Dataset) -> Vec<f64> + Send + Sync + 'static) -> Self {
        EstimatorHandle {
            id: id.into(),
            dim,
            certified: None,
            randomized: false,
            seed_draws: 1,
            eval: Arc::new(move |ds, _| f(ds)),
            mean_map: None,
        }
    }

    /// Deterministic estimator that is a function of the sample mean only.
    pub fn from_mean_map(
        id: impl Into<String>,
        dim: usize,
        g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        let g: Arc<MeanMap> = Arc::new(g);
        let g2 = g.clone();
        EstimatorHandle {
            id: id.into(),
            dim,
            certified: None,
            randomized: false,
            seed_draws: 1,
            eval: Arc::new(move |ds, _| g2(&ds.mean())),
            mean_map: Some(g),
        }
    }

    /// Randomized estimator; `E_ξ` is approximated with `seed_draws` draws.
    pub fn randomized(
        id: impl Into<String>,
        dim: usize,
        seed_draws: usize,
        f: impl Fn(&Dataset, Seed) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        EstimatorHandle {
            id: id.into(),
            dim,
            certified: None,
            randomized: true,
            seed_draws: seed_draws.max(1),
            eval: Arc::new(f),
            mean_map: None,
        }
    }

    /// Plain sample mean in dimension `dim`.
    pub fn sample_mean(dim: usize) -> Self {
        Self::from_mean_map("sample-mean", dim, |m| m.to_vec())
    }

    /// Always returns the zero vector.
    pub fn constant_zero(dim: usize) -> Self {
        Self::from_mean_map("constant-zero", dim, move |_| vec![0.0; dim])
    }

    pub fn with_certificate(mut self, order: StabilityOrder, beta: f64) -> Self {
        self.certified = Some(Certificate { order, beta });
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// `c · θ̂`; any certificate is rescaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let eval = self.eval.clone();
        let mut out = self.clone();
        out.id = format!("{}*{c}", self.id);
        out.eval = Arc::new(move |ds, s| eval(ds, s).into_iter().map(|v| c * v).collect());
        out.mean_map = self.mean_map.clone().map(|g| {
            let h: Arc<MeanMap> = Arc::new(move |m| g(m).into_iter().map(|v| c * v).collect());
            h
        });
        out.certified = self.certified.map(|cert| Certificate { beta: cert.beta * c.abs(), ..cert });
        out
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn target_dim(&self) -> usize {
        self.dim
    }

    pub fn certified(&self) -> Option<Certificate> {
        self.certified
    }

    pub fn is_randomized(&self) -> bool {
        self.randomized
    }

    /// Every shipped estimator is defined for any sample size.
    pub fn accepts_n_plus_one(&self) -> bool {
        true
    }

    /// Number of seeds averaged to approximate `E_ξ` (1 for deterministic estimators).
    pub fn seed_draws(&self) -> usize {
        if self.randomized {
            self.seed_draws
        } else {
            1
        }
    }

    pub fn mean_map(&self) -> Option<&Arc<MeanMap>> {
        self.mean_map.as_ref()
    }

    pub fn evaluate(&self, ds: &Dataset, seed: Seed) -> Result<Vec<f64>> {
        let out = self.evaluate_unchecked(ds, seed);
        if out.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: out.len() });
        }
        Ok(out)
    }

    pub(crate) fn evaluate_unchecked(&self, ds: &Dataset, seed: Seed) -> Vec<f64> {
        (self.eval)(ds, seed)
    }
}
