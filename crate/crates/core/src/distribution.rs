//! Data-generating distributions and their target parameters.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{Dataset, DatasetKind, NormKind};
use crate::error::{Error, Result};
use crate::seed::Seed;

/// A named scalar function on `[0, 1]`, used as a regression mean.
#[derive(Clone)]
pub struct RegressionFn {
    pub name: String,
    /// Bound on `sup |f|`, used to size search boxes and clip levels.
    pub sup_abs: f64,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl RegressionFn {
    pub fn new(name: impl Into<String>, sup_abs: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RegressionFn { name: name.into(), sup_abs, f: Arc::new(f) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for RegressionFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegressionFn").field("name", &self.name).field("sup_abs", &self.sup_abs).finish()
    }
}

#[derive(Debug, Clone)]
pub enum DistributionSpec {
    /// Finite support in `R^d`.
    Discrete { support: Vec<Vec<f64>>, probs: Vec<f64> },
    /// `+r` with probability `prob_plus`, else `-r`.
    BinaryPmR { r: f64, prob_plus: f64 },
    /// `0` with probability `1 - eps`, `r * eps^(-1/k)` with probability `eps`.
    /// Its k-th absolute moment is exactly `r^k`.
    HeavyTwoPoint { r: f64, k: f64, eps: f64 },
    /// Independent `±r` coordinates with mean `theta_j` on the listed
    /// coordinates and zero elsewhere.
    SparseMean { d: usize, s: usize, r: f64, active: Vec<(usize, f64)> },
    /// `X ~ U[0,1]`, `Y = f(X) + sigma * N(0,1)`; target `f(x0)`.
    Regression { f: RegressionFn, sigma: f64, x0: f64 },
}

const PROB_TOL: f64 = 1e-12;

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        match self {
            DistributionSpec::Discrete { support, probs } => {
                if support.is_empty() || support.len() != probs.len() {
                    return bad("support and probabilities must be nonempty and of equal length".into());
                }
                let d = support[0].len();
                if d == 0 || support.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
                    return bad("support points must be finite and share one dimension".into());
                }
                if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return bad("probabilities must lie in [0, 1]".into());
                }
                let s: f64 = probs.iter().sum();
                if (s - 1.0).abs() > PROB_TOL {
                    return bad(format!("probabilities sum to {s}"));
                }
            }
            DistributionSpec::BinaryPmR { r, prob_plus } => {
                if !(*r > 0.0 && r.is_finite()) || !(0.0..=1.0).contains(prob_plus) {
                    return bad("need r > 0 and prob_plus in [0, 1]".into());
                }
            }
            DistributionSpec::HeavyTwoPoint { r, k, eps } => {
                if !(*r > 0.0 && r.is_finite()) || !(*k >= 1.0) || !(*eps > 0.0 && *eps <= 1.0) {
                    return bad("need r > 0, k >= 1, eps in (0, 1]".into());
                }
            }
            DistributionSpec::SparseMean { d, s, r, active } => {
                if *s == 0 || active.len() > *s || !(*r > 0.0) {
                    return bad("need s >= 1, at most s active coordinates, r > 0".into());
                }
                for &(j, t) in active {
                    if j >= *d || t.abs() > *r {
                        return bad(format!("active coordinate ({j}, {t}) out of range"));
                    }
                }
                let mut idx: Vec<usize> = active.iter().map(|a| a.0).collect();
                idx.sort_unstable();
                idx.dedup();
                if idx.len() != active.len() {
                    return bad("duplicate active coordinate".into());
                }
            }
            DistributionSpec::Regression { sigma, x0, .. } => {
                if !(*sigma >= 0.0) {
                    return bad("noise level must be nonnegative".into());
                }
                if !(*x0 > 0.0 && *x0 < 1.0) {
                    return Err(Error::PointOutOfRange(*x0));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            DistributionSpec::Discrete { support, .. } => support.first().map_or(0, |p| p.len()),
            DistributionSpec::BinaryPmR { .. } | DistributionSpec::HeavyTwoPoint { .. } => 1,
            DistributionSpec::SparseMean { d, .. } => *d,
            DistributionSpec::Regression { .. } => 2,
        }
    }

    /// Binary family indexed by its mean `theta ∈ [-r, r]`.
    pub fn binary_with_mean(r: f64, theta: f64) -> Self {
        DistributionSpec::BinaryPmR { r, prob_plus: ((1.0 + theta / r) / 2.0).clamp(0.0, 1.0) }
    }

    /// The target parameter `θ(P)`.
    pub fn target(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match self {
            DistributionSpec::Discrete { support, probs } => {
                let mut m = vec![0.0; support[0].len()];
                for (p, &w) in support.iter().zip(probs) {
                    for (a, b) in m.iter_mut().zip(p) {
                        *a += w * b;
                    }
                }
                m
            }
            DistributionSpec::BinaryPmR { r, prob_plus } => vec![r * (2.0 * prob_plus - 1.0)],
            DistributionSpec::HeavyTwoPoint { r, k, eps } => vec![r * eps.powf(1.0 - 1.0 / k)],
            DistributionSpec::SparseMean { d, active, .. } => {
                let mut m = vec![0.0; *d];
                for &(j, t) in active {
                    m[j] = t;
                }
                m
            }
            DistributionSpec::Regression { f, x0, .. } => vec![f.eval(*x0)],
        })
    }

    /// As a discrete distribution, when it has finite support.
    pub fn as_discrete(&self) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        self.validate()?;
        match self {
            DistributionSpec::Discrete { support, probs } => Ok((support.clone(), probs.clone())),
            DistributionSpec::BinaryPmR { r, prob_plus } => {
                Ok((vec![vec![*r], vec![-*r]], vec![*prob_plus, 1.0 - prob_plus]))
            }
            DistributionSpec::HeavyTwoPoint { r, k, eps } => {
                Ok((vec![vec![0.0], vec![r * eps.powf(-1.0 / k)]], vec![1.0 - eps, *eps]))
            }
            _ => Err(Error::NonDiscreteInput),
        }
    }

    /// Domain radius and norm the samples are guaranteed to respect.
    pub fn domain(&self) -> (f64, NormKind) {
        match self {
            DistributionSpec::Discrete { support, .. } => {
                let r = support.iter().map(|p| crate::dataset::l2_norm(p)).fold(0.0, f64::max);
                (if r > 0.0 { r } else { 1.0 }, NormKind::L2)
            }
            DistributionSpec::BinaryPmR { r, .. } => (*r, NormKind::L2),
            DistributionSpec::HeavyTwoPoint { .. } | DistributionSpec::Regression { .. } => {
                (f64::INFINITY, NormKind::L2)
            }
            DistributionSpec::SparseMean { r, .. } => (*r, NormKind::LInf),
        }
    }

    /// `n` i.i.d. draws, deterministic in `(self, n, seed)`.
    pub fn sample(&self, n: usize, seed: Seed) -> Result<Dataset> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let mut rng = seed.rng();
        let (radius, norm) = self.domain();
        match self {
            DistributionSpec::Regression { f, sigma, .. } => {
                let mut xs = Vec::with_capacity(n);
                let mut ys = Vec::with_capacity(n);
                for _ in 0..n {
                    let x: f64 = rng.random();
                    let z: f64 = StandardNormal.sample(&mut rng);
                    xs.push(x);
                    ys.push(f.eval(x) + sigma * z);
                }
                Dataset::regression(&xs, &ys, f64::INFINITY)
            }
            DistributionSpec::SparseMean { d, r, active, .. } => {
                let mut theta = vec![0.0; *d];
                for &(j, t) in active {
                    theta[j] = t;
                }
                let mut data = Vec::with_capacity(n * d);
                for _ in 0..n {
                    for &t in &theta {
                        let p = (1.0 + t / r) / 2.0;
                        data.push(if rng.random::<f64>() < p { *r } else { -*r });
                    }
                }
                Dataset::from_flat(data, n, *d, *r, NormKind::LInf, DatasetKind::VectorSample)
            }
            _ => {
                let (support, probs) = self.as_discrete()?;
                let d = support[0].len();
                let cdf: Vec<f64> = probs
                    .iter()
                    .scan(0.0, |acc, &p| {
                        *acc += p;
                        Some(*acc)
                    })
                    .collect();
                let mut data = Vec::with_capacity(n * d);
                for _ in 0..n {
                    let u: f64 = rng.random();
                    let idx = pick(&cdf, &probs, u);
                    data.extend_from_slice(&support[idx]);
                }
                Dataset::from_flat(data, n, d, radius, norm, DatasetKind::VectorSample)
            }
        }
    }
}

/// Inverse-CDF lookup that never lands on a zero-probability atom.
fn pick(cdf: &[f64], probs: &[f64], u: f64) -> usize {
    let mut idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
    while probs[idx] == 0.0 && idx > 0 {
        idx -= 1;
    }
    while probs[idx] == 0.0 && idx + 1 < probs.len() {
        idx += 1;
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_cases() {
        let d = DistributionSpec::BinaryPmR { r: 1.0, prob_plus: 1.0 };
        assert_eq!(d.sample(3, Seed(9)).unwrap().as_flat(), &[1.0, 1.0, 1.0]);
        let pm = DistributionSpec::Discrete { support: vec![vec![0.0]], probs: vec![1.0] };
        assert_eq!(pm.sample(5, Seed(1)).unwrap().as_flat(), &[0.0; 5]);
    }

    #[test]
    fn clt_band() {
        let d = DistributionSpec::BinaryPmR { r: 1.0, prob_plus: 0.5 };
        let n = 100_000;
        let m = d.sample(n, Seed(7)).unwrap().mean()[0];
        assert!(m.abs() <= 3.0 / (n as f64).sqrt(), "mean {m}");
    }

    #[test]
    fn reproducible() {
        let d = DistributionSpec::HeavyTwoPoint { r: 1.0, k: 2.0, eps: 0.1 };
        assert_eq!(d.sample(50, Seed(3)).unwrap(), d.sample(50, Seed(3)).unwrap());
    }

    #[test]
    fn validation() {
        let bad = DistributionSpec::Discrete { support: vec![vec![0.0], vec![1.0]], probs: vec![0.5, 0.6] };
        assert!(matches!(bad.sample(1, Seed(0)), Err(Error::InvalidDistribution(_))));
        let sp = DistributionSpec::SparseMean { d: 5, s: 1, r: 1.0, active: vec![(0, 0.5), (1, 0.5)] };
        assert!(sp.validate().is_err());
    }

    #[test]
    fn heavy_moment_and_target() {
        let (r, k, eps) = (1.5, 1.5, 0.05);
        let d = DistributionSpec::HeavyTwoPoint { r, k, eps };
        let (sup, p) = d.as_discrete().unwrap();
        let mom: f64 = sup.iter().zip(&p).map(|(x, w)| w * x[0].abs().powf(k)).sum();
        assert!((mom.powf(1.0 / k) - r).abs() < 1e-12);
        assert!((d.target().unwrap()[0] - r * eps.powf(1.0 - 1.0 / k)).abs() < 1e-15);
    }

    #[test]
    fn sparse_sample_means() {
        let d = DistributionSpec::SparseMean { d: 4, s: 1, r: 1.0, active: vec![(2, 0.6)] };
        let ds = d.sample(20_000, Seed(11)).unwrap();
        let m = ds.mean();
        assert!((m[2] - 0.6).abs() < 0.03);
        assert!(m[0].abs() < 0.03);
    }
}
