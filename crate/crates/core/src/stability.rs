//! Stability metrics and adversarial certification of their suprema.
//!
//! `lp_statistic` and `worst_case_gap` are exact for a fixed dataset.
//! `certify_sup` searches the domain and returns the largest value it found
//! together with the configuration that attains it; it is a lower estimate of
//! the true supremum, never a proof.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::{l2_norm, Dataset, DatasetKind, NormKind};
use crate::error::{Error, Result};
use crate::estimator::EstimatorHandle;
use crate::par::{map_range, Exec};
use crate::seed::Seed;

/// Stability order `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilityOrder {
    P(f64),
    Inf,
}

impl StabilityOrder {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(StabilityOrder::Inf)
        } else if p >= 1.0 && p.is_finite() {
            Ok(StabilityOrder::P(p))
        } else {
            Err(Error::InvalidArgument(format!("stability order must be in [1, inf], got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            StabilityOrder::P(p) => p,
            StabilityOrder::Inf => f64::INFINITY,
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, StabilityOrder::Inf)
    }

    /// True when stability of order `self` implies stability of order `other`.
    pub fn implies(self, other: StabilityOrder) -> bool {
        self.value() >= other.value()
    }
}

impl fmt::Display for StabilityOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityOrder::P(p) => write!(f, "{p}"),
            StabilityOrder::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for StabilityOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(StabilityOrder::Inf),
            t => StabilityOrder::new(t.parse::<f64>().map_err(|e| Error::Parse(format!("order `{s}`: {e}")))?),
        }
    }
}

impl Serialize for StabilityOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StabilityOrder::P(p) => s.serialize_f64(*p),
            StabilityOrder::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for StabilityOrder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => StabilityOrder::new(p),
            Raw::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub random_restarts: usize,
    pub ascent_iters: usize,
    /// Largest `n + 1` for which the ±r corner patterns are enumerated.
    pub corner_enumeration_limit: usize,
    pub per_coordinate_grid: usize,
}

impl Default for SearchBudget {
    /// About 10^4 objective evaluations.
    fn default() -> Self {
        SearchBudget { random_restarts: 10, ascent_iters: 50, corner_enumeration_limit: 24, per_coordinate_grid: 20 }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.random_restarts == 0
            || self.ascent_iters == 0
            || self.corner_enumeration_limit == 0
            || self.per_coordinate_grid == 0
        {
            return Err(Error::InvalidArgument("search budget fields must be positive".into()));
        }
        Ok(())
    }

    pub fn evaluations(&self) -> usize {
        self.random_restarts * self.ascent_iters * self.per_coordinate_grid
    }
}

/// The class of datasets searched over.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchDomain {
    /// Sample size the estimator is built for; the ℓp statistic uses `n + 1` points.
    pub n: usize,
    pub dim: usize,
    pub radius: f64,
    pub norm: NormKind,
    pub kind: DatasetKind,
    /// Radius used in place of an infinite `radius` (for regression: bound on `|y|`).
    pub search_box: Option<f64>,
    /// Extra candidate points tried during the search.
    pub hints: Vec<Vec<f64>>,
}

impl SearchDomain {
    pub fn ball(n: usize, dim: usize, r: f64) -> Self {
        SearchDomain { n, dim, radius: r, norm: NormKind::L2, kind: DatasetKind::VectorSample, search_box: None, hints: vec![] }
    }

    pub fn cube(n: usize, dim: usize, r: f64) -> Self {
        SearchDomain { norm: NormKind::LInf, ..Self::ball(n, dim, r) }
    }

    /// Unbounded vector domain searched inside the ℓ2 ball of radius `search_box`.
    pub fn unbounded(n: usize, dim: usize, search_box: f64) -> Self {
        SearchDomain { radius: f64::INFINITY, search_box: Some(search_box), ..Self::ball(n, dim, 1.0) }
    }

    /// Regression pairs with `|y| ≤ y_box` during the search.
    pub fn regression(n: usize, y_box: f64) -> Self {
        SearchDomain {
            n,
            dim: 2,
            radius: f64::INFINITY,
            norm: NormKind::LInf,
            kind: DatasetKind::RegressionPairs,
            search_box: Some(y_box),
            hints: vec![],
        }
    }

    pub fn with_hints(mut self, hints: Vec<Vec<f64>>) -> Self {
        self.hints = hints;
        self
    }

    fn effective_radius(&self) -> Result<f64> {
        if self.radius.is_finite() {
            Ok(self.radius)
        } else {
            match self.search_box {
                Some(b) if b > 0.0 && b.is_finite() => Ok(b),
                _ => Err(Error::UnboundedDomain),
            }
        }
    }

    fn coord_range(&self, j: usize, big_r: f64) -> (f64, f64) {
        match self.kind {
            DatasetKind::RegressionPairs if j == 0 => (0.0, 1.0),
            _ => (-big_r, big_r),
        }
    }

    fn project(&self, p: &mut [f64], big_r: f64) {
        match self.kind {
            DatasetKind::RegressionPairs => {
                p[0] = p[0].clamp(0.0, 1.0);
                p[1] = p[1].clamp(-big_r, big_r);
            }
            DatasetKind::VectorSample => match self.norm {
                NormKind::LInf => p.iter_mut().for_each(|v| *v = v.clamp(-big_r, big_r)),
                NormKind::L2 => {
                    let nr = l2_norm(p);
                    if nr > big_r {
                        let s = big_r / nr;
                        p.iter_mut().for_each(|v| *v *= s);
                    }
                }
            },
        }
    }

    fn dataset(&self, flat: Vec<f64>, rows: usize, big_r: f64) -> Dataset {
        let radius = if self.radius.is_finite() { self.radius } else { big_r };
        let radius = if self.kind == DatasetKind::RegressionPairs { big_r } else { radius };
        Dataset::from_flat(flat, rows, self.dim, radius, self.norm, self.kind)
            .expect("search configurations are projected into the domain")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    /// A dataset of size `n + 1` (orders `p < ∞`).
    Sample(Dataset),
    /// Two datasets of size `n` differing in one point.
    Pair(Dataset, Dataset),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub order: StabilityOrder,
    pub found_sup: f64,
    pub witness: Witness,
    pub budget_claim: Option<f64>,
    pub budget_satisfied: bool,
    pub evaluations: usize,
    pub strategy: String,
}

/// Relative slack allowed when comparing a found supremum to its claim.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

fn draw_seeds(est: &EstimatorHandle, seed: Seed) -> Vec<Seed> {
    if est.is_randomized() {
        (0..est.seed_draws()).map(|m| seed.derive(m as u64)).collect()
    } else {
        vec![seed]
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `E_ξ ‖θ̂(ds1; ξ) − θ̂(ds2; ξ)‖₂` for datasets at Hamming distance at most 1.
pub fn worst_case_gap(est: &EstimatorHandle, ds1: &Dataset, ds2: &Dataset) -> Result<f64> {
    worst_case_gap_seeded(est, ds1, ds2, Seed(0))
}

pub fn worst_case_gap_seeded(est: &EstimatorHandle, ds1: &Dataset, ds2: &Dataset, seed: Seed) -> Result<f64> {
    let h = ds1.hamming(ds2)?;
    if h > 1 {
        return Err(Error::HammingDistanceExceeded(h));
    }
    let seeds = draw_seeds(est, seed);
    let mut acc = 0.0;
    for &s in &seeds {
        acc += dist(&est.evaluate(ds1, s)?, &est.evaluate(ds2, s)?);
    }
    Ok(acc / seeds.len() as f64)
}

/// Leave-one-out outputs `θ̂(D^{\i}; ξ)` for `i = 0..=n`.
fn loo_outputs(est: &EstimatorHandle, ds: &Dataset, seed: Seed) -> Result<Vec<Vec<f64>>> {
    let m = ds.len();
    if m < 2 {
        return Err(Error::InvalidArgument("leave-one-out needs at least two points".into()));
    }
    if let (Some(g), false) = (est.mean_map(), est.is_randomized()) {
        let d = ds.dim();
        let mut sum = vec![0.0; d];
        for p in ds.points() {
            for (a, b) in sum.iter_mut().zip(p) {
                *a += b;
            }
        }
        let inv = 1.0 / (m - 1) as f64;
        let mut buf = vec![0.0; d];
        return Ok(ds
            .points()
            .map(|p| {
                for j in 0..d {
                    buf[j] = (sum[j] - p[j]) * inv;
                }
                g(&buf)
            })
            .collect());
    }
    (0..m).map(|i| est.evaluate(&ds.drop_point(i)?, seed)).collect()
}

/// Matrix of `E_ξ ‖θ̂(D^{\i}) − θ̂(D^{\j})‖^q`, upper triangle only, with `q = 1` for `p = ∞`.
fn loo_gap_matrix(est: &EstimatorHandle, ds: &Dataset, order: StabilityOrder, seed: Seed) -> Result<Vec<f64>> {
    let m = ds.len();
    let q = match order {
        StabilityOrder::P(p) => p,
        StabilityOrder::Inf => 1.0,
    };
    let seeds = draw_seeds(est, seed);
    let mut g = vec![0.0; m * m];
    for &s in &seeds {
        let outs = loo_outputs(est, ds, s)?;
        for i in 0..m {
            for j in (i + 1)..m {
                let v = dist(&outs[i], &outs[j]);
                g[i * m + j] += if q == 1.0 { v } else { v.powf(q) };
            }
        }
    }
    let inv = 1.0 / seeds.len() as f64;
    g.iter_mut().for_each(|v| *v *= inv);
    Ok(g)
}

/// The ℓp stability statistic of a fixed dataset of size `n + 1`.
pub fn lp_statistic(est: &EstimatorHandle, ds: &Dataset, order: StabilityOrder) -> Result<f64> {
    lp_statistic_seeded(est, ds, order, Seed(0))
}

pub fn lp_statistic_seeded(est: &EstimatorHandle, ds: &Dataset, order: StabilityOrder, seed: Seed) -> Result<f64> {
    let m = ds.len();
    let g = loo_gap_matrix(est, ds, order, seed)?;
    Ok(match order {
        StabilityOrder::Inf => g.iter().fold(0.0, |a: f64, &b| a.max(b)),
        StabilityOrder::P(p) => {
            let s: f64 = 2.0 * g.iter().sum::<f64>() / (m * m) as f64;
            if p == 1.0 {
                s
            } else {
                s.powf(1.0 / p)
            }
        }
    })
}

/// Exact supremum of the ℓp statistic of the one-dimensional sample mean over `[-r, r]`.
pub fn closed_form_mean_stability(n: usize, r: f64, order: StabilityOrder) -> f64 {
    let nf = n as f64;
    match order {
        StabilityOrder::Inf => 2.0 * r / nf,
        StabilityOrder::P(p) => {
            let n1 = nf + 1.0;
            // m(n+1-m) is maximized at the middle count.
            let m = ((n + 1) / 2) as f64;
            let inner = 2.0 * m * (n1 - m) / (n1 * n1);
            if p == 1.0 {
                inner * 2.0 * r / nf
            } else {
                inner.powf(1.0 / p) * 2.0 * r / nf
            }
        }
    }
}

/// Exhaustive search over all `2^{n+1}` sign patterns in `{-r, r}^{n+1}` (d = 1).
pub fn corner_brute_force(est: &EstimatorHandle, n: usize, r: f64, order: StabilityOrder) -> Result<(f64, Dataset)> {
    let m = n + 1;
    if m > 24 {
        return Err(Error::NTooLarge { n: m, cap: 24 });
    }
    let mut best = (-1.0, None);
    for mask in 0u32..(1u32 << m) {
        let vals: Vec<f64> = (0..m).map(|i| if mask >> i & 1 == 1 { r } else { -r }).collect();
        let ds = Dataset::scalar(&vals, r)?;
        let v = lp_statistic(est, &ds, order)?;
        if v > best.0 {
            best = (v, Some(ds));
        }
    }
    Ok((best.0, best.1.expect("at least one pattern")))
}

/// Returns `(a, b)`: the pairwise average-case statistic and the
/// drop-one-at-random statistic with `θ̂(D_{n+1})` set to the mean of the
/// leave-one-out outputs. Always `b ≤ a ≤ 2b`.
pub fn two_notion_gap_check(est: &EstimatorHandle, ds: &Dataset) -> Result<(f64, f64)> {
    let a = lp_statistic(est, ds, StabilityOrder::P(1.0))?;
    let seeds = draw_seeds(est, Seed(0));
    let m = ds.len();
    let mut b = 0.0;
    for &s in &seeds {
        let outs = loo_outputs(est, ds, s)?;
        let d = outs[0].len();
        let mut center = vec![0.0; d];
        for o in &outs {
            for (c, v) in center.iter_mut().zip(o) {
                *c += v / m as f64;
            }
        }
        b += outs.iter().map(|o| dist(o, &center)).sum::<f64>() / m as f64;
    }
    Ok((a, b / seeds.len() as f64))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Layout {
    /// `n + 1` points; objective is the ℓp statistic.
    Sample,
    /// `n + 1` points; objective is the gap between leaving out point 0 and
    /// leaving out point 1. By exchangeability this covers every neighbour pair.
    Pair,
    /// Points `x, x', y`: neighbours `(x, y, …, y)` and `(x', y, …, y)`.
    /// Complete for estimators that depend on the data only through the mean.
    PairMean,
}

struct Search<'a> {
    est: &'a EstimatorHandle,
    dom: &'a SearchDomain,
    order: StabilityOrder,
    layout: Layout,
    big_r: f64,
    seed: Seed,
}

impl Search<'_> {
    fn rows(&self) -> usize {
        match self.layout {
            Layout::Sample | Layout::Pair => self.dom.n + 1,
            Layout::PairMean => 3,
        }
    }

    fn objective(&self, pts: &[Vec<f64>]) -> f64 {
        match self.layout {
            Layout::Sample => {
                let ds = self.dom.dataset(pts.concat(), pts.len(), self.big_r);
                lp_statistic_seeded(self.est, &ds, self.order, self.seed).unwrap_or(0.0)
            }
            Layout::Pair => {
                let (a, b) = self.pair_datasets(pts);
                worst_case_gap_seeded(self.est, &a, &b, self.seed).unwrap_or(0.0)
            }
            Layout::PairMean => {
                let g = self.est.mean_map().expect("mean layout requires a mean map");
                let n = self.dom.n as f64;
                let m1: Vec<f64> = (0..self.dom.dim).map(|j| (pts[0][j] + (n - 1.0) * pts[2][j]) / n).collect();
                let m2: Vec<f64> = (0..self.dom.dim).map(|j| (pts[1][j] + (n - 1.0) * pts[2][j]) / n).collect();
                dist(&g(&m1), &g(&m2))
            }
        }
    }

    fn pair_datasets(&self, pts: &[Vec<f64>]) -> (Dataset, Dataset) {
        match self.layout {
            Layout::PairMean => {
                let n = self.dom.n;
                let mut a = Vec::with_capacity(n * self.dom.dim);
                a.extend_from_slice(&pts[0]);
                for _ in 1..n {
                    a.extend_from_slice(&pts[2]);
                }
                let mut b = a.clone();
                b[..self.dom.dim].copy_from_slice(&pts[1]);
                (self.dom.dataset(a, n, self.big_r), self.dom.dataset(b, n, self.big_r))
            }
            _ => {
                // Leaving out point 1 keeps point 0 first and vice versa.
                let rest: Vec<f64> = pts[2..].concat();
                let a = [pts[0].clone(), rest.clone()].concat();
                let b = [pts[1].clone(), rest].concat();
                let n = pts.len() - 1;
                (self.dom.dataset(a, n, self.big_r), self.dom.dataset(b, n, self.big_r))
            }
        }
    }

    fn witness(&self, pts: &[Vec<f64>]) -> Witness {
        match self.layout {
            Layout::Sample => Witness::Sample(self.dom.dataset(pts.concat(), pts.len(), self.big_r)),
            _ => {
                let (a, b) = self.pair_datasets(pts);
                Witness::Pair(a, b)
            }
        }
    }

    /// One-dimensional ±R configurations, reduced to the count of `+R` points.
    fn corner_configs(&self) -> Vec<Vec<Vec<f64>>> {
        let r = self.big_r;
        let rows = self.rows();
        match self.layout {
            Layout::Sample => (0..=rows)
                .map(|m| (0..rows).map(|i| vec![if i < m { r } else { -r }]).collect())
                .collect(),
            Layout::Pair => (0..=rows - 2)
                .map(|m| {
                    let mut v = vec![vec![-r], vec![r]];
                    v.extend((0..rows - 2).map(|i| vec![if i < m { r } else { -r }]));
                    v
                })
                .collect(),
            Layout::PairMean => {
                let k = self.dom.n - 1;
                (0..=k)
                    .map(|m| {
                        let y = if k == 0 { 0.0 } else { r * (2.0 * m as f64 - k as f64) / k as f64 };
                        vec![vec![-r], vec![r], vec![y]]
                    })
                    .collect()
            }
        }
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = self.dom.dim;
        let r = self.big_r;
        if self.dom.kind == DatasetKind::RegressionPairs {
            let y = if rng.random::<bool>() { r } else { -r } * if rng.random::<f64>() < 0.5 { 1.0 } else { rng.random() };
            return vec![rng.random(), y];
        }
        match self.dom.norm {
            NormKind::LInf => (0..d)
                .map(|_| if rng.random::<f64>() < 0.5 { if rng.random() { r } else { -r } } else { rng.random_range(-r..=r) })
                .collect(),
            NormKind::L2 => {
                let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                let nr = l2_norm(&v).max(f64::MIN_POSITIVE);
                let scale = if rng.random::<f64>() < 0.5 { r } else { r * rng.random::<f64>() };
                v.iter_mut().for_each(|x| *x *= scale / nr);
                v
            }
        }
    }

    fn axis_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = self.dom.dim;
        let mut v = vec![0.0; d];
        if self.dom.kind == DatasetKind::RegressionPairs {
            return self.random_point(rng);
        }
        let sign = if rng.random() { 1.0 } else { -1.0 };
        if self.dom.norm == NormKind::LInf && rng.random::<f64>() < 0.5 {
            v.iter_mut().for_each(|x| *x = sign * self.big_r);
        } else {
            v[rng.random_range(0..d)] = sign * self.big_r;
        }
        v
    }

    /// Configurations with all points on a common ±corner; catches estimators
    /// whose sensitivity is largest when every coordinate moves together.
    fn same_sign_configs(&self) -> Vec<Vec<Vec<f64>>> {
        if self.dom.kind == DatasetKind::RegressionPairs {
            return vec![];
        }
        let d = self.dom.dim;
        let c = match self.dom.norm {
            NormKind::LInf => self.big_r,
            NormKind::L2 => self.big_r / (d as f64).sqrt(),
        };
        let plus = vec![c; d];
        let minus = vec![-c; d];
        let rows = self.rows();
        let mut out = Vec::new();
        for fill in [&plus, &minus] {
            let mut v = vec![minus.clone(), plus.clone()];
            v.extend((2..rows).map(|_| fill.clone()));
            out.push(v);
        }
        out
    }

    fn initial(&self, restart: usize, rng: &mut ChaCha8Rng, seeds: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
        if restart < seeds.len() {
            return seeds[restart].clone();
        }
        let rows = self.rows();
        (0..rows)
            .map(|_| {
                let u: f64 = rng.random();
                if u < 0.2 && !self.dom.hints.is_empty() {
                    self.dom.hints[rng.random_range(0..self.dom.hints.len())].clone()
                } else if u < 0.5 {
                    self.axis_point(rng)
                } else {
                    self.random_point(rng)
                }
            })
            .map(|mut p| {
                self.dom.project(&mut p, self.big_r);
                p
            })
            .collect()
    }

    /// Coordinatewise hill-climbing from `start`; returns (value, config, evaluations).
    fn climb(&self, start: Vec<Vec<f64>>, iters: usize, grid: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<Vec<f64>>, usize) {
        let mut cur = start;
        let mut val = self.objective(&cur);
        let mut evals = 1;
        let rows = cur.len();
        let d = self.dom.dim;
        for _ in 0..iters {
            let i = match self.layout {
                Layout::Pair if rng.random::<f64>() < 0.5 => rng.random_range(0..2),
                _ => rng.random_range(0..rows),
            };
            let coordinate_move = rng.random::<f64>() < 0.6;
            let j = rng.random_range(0..d);
            let mut best: Option<(f64, Vec<f64>)> = None;
            for g in 0..grid {
                let mut cand = cur[i].clone();
                if coordinate_move {
                    let (lo, hi) = self.dom.coord_range(j, self.big_r);
                    cand[j] = match g {
                        0 => lo,
                        1 => hi,
                        2 if !self.dom.hints.is_empty() => {
                            self.dom.hints[rng.random_range(0..self.dom.hints.len())][j]
                        }
                        _ => rng.random_range(lo..=hi),
                    };
                } else {
                    cand = match g % 4 {
                        0 => self.axis_point(rng),
                        1 if !self.dom.hints.is_empty() => {
                            self.dom.hints[rng.random_range(0..self.dom.hints.len())].clone()
                        }
                        2 => cur[rng.random_range(0..rows)].iter().map(|v| -v).collect(),
                        _ => self.random_point(rng),
                    };
                }
                self.dom.project(&mut cand, self.big_r);
                let saved = std::mem::replace(&mut cur[i], cand);
                let v = self.objective(&cur);
                evals += 1;
                let cand = std::mem::replace(&mut cur[i], saved);
                if v > val && best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, cand));
                }
            }
            if let Some((v, p)) = best {
                val = v;
                cur[i] = p;
            }
        }
        (val, cur, evals)
    }
}

/// Searches the domain for the supremum of the requested stability statistic.
pub fn certify_sup(
    est: &EstimatorHandle,
    domain: &SearchDomain,
    order: StabilityOrder,
    budget: &SearchBudget,
    seed: Seed,
) -> Result<StabilityReport> {
    certify_sup_with(est, domain, order, budget, seed, Exec::default())
}

pub fn certify_sup_with(
    est: &EstimatorHandle,
    domain: &SearchDomain,
    order: StabilityOrder,
    budget: &SearchBudget,
    seed: Seed,
    exec: Exec,
) -> Result<StabilityReport> {
    budget.validate()?;
    let big_r = domain.effective_radius()?;
    if domain.n < 1 || domain.dim == 0 {
        return Err(Error::InvalidArgument("search domain needs n >= 1 and dim >= 1".into()));
    }
    if domain.kind == DatasetKind::RegressionPairs && domain.dim != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: domain.dim });
    }
    let layout = match order {
        StabilityOrder::P(_) => Layout::Sample,
        StabilityOrder::Inf if est.mean_map().is_some() && !est.is_randomized() && domain.n >= 2 => Layout::PairMean,
        StabilityOrder::Inf => Layout::Pair,
    };
    if layout != Layout::PairMean && domain.n < 1 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let search = Search { est, dom: domain, order, layout, big_r, seed: seed.derive_label("xi") };

    let mut best_val = -1.0;
    let mut best_cfg: Option<Vec<Vec<f64>>> = None;
    let mut evaluations = 0;
    let mut strategy = Vec::new();

    let enumerate = domain.dim == 1
        && domain.kind == DatasetKind::VectorSample
        && domain.n + 1 <= budget.corner_enumeration_limit;
    if enumerate {
        strategy.push("corner-enumeration");
        let cfgs = search.corner_configs();
        let vals = map_range(exec, cfgs.len(), |k| search.objective(&cfgs[k]));
        evaluations += cfgs.len();
        for (v, c) in vals.into_iter().zip(cfgs) {
            if v > best_val {
                best_val = v;
                best_cfg = Some(c);
            }
        }
    }

    let mut seeds: Vec<Vec<Vec<f64>>> = best_cfg.iter().cloned().collect();
    seeds.extend(search.same_sign_configs());
    strategy.push("hill-climb");
    let runs = map_range(exec, budget.random_restarts, |k| {
        let mut rng = seed.derive(k as u64).rng();
        let start = search.initial(k, &mut rng, &seeds);
        search.climb(start, budget.ascent_iters, budget.per_coordinate_grid, &mut rng)
    });
    for (v, cfg, e) in runs {
        evaluations += e;
        if v > best_val {
            best_val = v;
            best_cfg = Some(cfg);
        }
    }

    let cfg = best_cfg.expect("at least one restart");
    let witness = search.witness(&cfg);
    let found_sup = match &witness {
        Witness::Sample(ds) => lp_statistic_seeded(est, ds, order, search.seed)?,
        Witness::Pair(a, b) => worst_case_gap_seeded(est, a, b, search.seed)?,
    };
    let budget_claim = est.certified().filter(|c| c.order.implies(order)).map(|c| c.beta);
    let budget_satisfied = budget_claim.is_none_or(|b| found_sup <= b * (1.0 + BUDGET_TOLERANCE));
    Ok(StabilityReport {
        order,
        found_sup,
        witness,
        budget_claim,
        budget_satisfied,
        evaluations,
        strategy: strategy.join("+"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mean() -> EstimatorHandle {
        EstimatorHandle::sample_mean(1)
    }

    #[test]
    fn order_parsing() {
        assert_eq!("inf".parse::<StabilityOrder>().unwrap(), StabilityOrder::Inf);
        assert_eq!("2".parse::<StabilityOrder>().unwrap(), StabilityOrder::P(2.0));
        assert!("0.5".parse::<StabilityOrder>().is_err());
        let js = serde_json::to_string(&StabilityOrder::Inf).unwrap();
        assert_eq!(js, "\"inf\"");
        assert_eq!(serde_json::from_str::<StabilityOrder>("1.0").unwrap(), StabilityOrder::P(1.0));
    }

    #[test]
    fn worst_case_gap_examples() {
        let mut v = vec![0.3; 10];
        v[0] = -1.0;
        let a = Dataset::scalar(&v, 1.0).unwrap();
        let b = a.replace_point(0, &[1.0]).unwrap();
        assert!((worst_case_gap(&mean(), &a, &b).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(worst_case_gap(&mean(), &a, &a).unwrap(), 0.0);
        assert_eq!(worst_case_gap(&EstimatorHandle::constant_zero(1), &a, &b).unwrap(), 0.0);
        let c = b.replace_point(1, &[0.9]).unwrap();
        assert!(matches!(worst_case_gap(&mean(), &a, &c), Err(Error::HammingDistanceExceeded(2))));
    }

    #[test]
    fn lp_statistic_half_and_half() {
        let v: Vec<f64> = (0..12).map(|i| if i < 6 { 1.0 } else { -1.0 }).collect();
        let ds = Dataset::scalar(&v, 1.0).unwrap();
        let s = lp_statistic(&mean(), &ds, StabilityOrder::P(1.0)).unwrap();
        assert!((s - 1.0 / 11.0).abs() < 1e-15);
        let same = Dataset::scalar(&[0.4; 7], 1.0).unwrap();
        assert_eq!(lp_statistic(&mean(), &same, StabilityOrder::P(3.0)).unwrap(), 0.0);
    }

    #[test]
    fn lp_inf_matches_range_over_n() {
        let v = [0.1, -0.7, 0.55, 0.9, -0.2];
        let ds = Dataset::scalar(&v, 1.0).unwrap();
        let s = lp_statistic(&mean(), &ds, StabilityOrder::Inf).unwrap();
        let mut oracle: f64 = 0.0;
        for a in v {
            for b in v {
                oracle = oracle.max((a - b).abs() / 4.0);
            }
        }
        assert!((s - oracle).abs() < 1e-15);
    }

    #[test]
    fn closed_form_values() {
        assert!((closed_form_mean_stability(10, 1.0, StabilityOrder::Inf) - 0.2).abs() < 1e-15);
        assert!((closed_form_mean_stability(11, 1.0, StabilityOrder::P(1.0)) - 1.0 / 11.0).abs() < 1e-15);
        assert!((closed_form_mean_stability(10, 1.0, StabilityOrder::P(1.0)) - 12.0 / 121.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_enumeration_general_p() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let oracle = (0..=11)
                .map(|m| (2.0 * m as f64 * (11 - m) as f64 * 2f64.powf(p) / (121.0 * 10f64.powf(p))).powf(1.0 / p))
                .fold(0.0, f64::max);
            let cf = closed_form_mean_stability(10, 1.0, StabilityOrder::P(p));
            assert!((cf - oracle).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn certify_mean_inf() {
        let rep = certify_sup(&mean(), &SearchDomain::ball(10, 1, 1.0), StabilityOrder::Inf, &SearchBudget::default(), Seed(1))
            .unwrap();
        assert!((rep.found_sup - 0.2).abs() < 1e-12);
        match &rep.witness {
            Witness::Pair(a, b) => assert_eq!((a.point(0)[0] - b.point(0)[0]).abs(), 2.0),
            _ => panic!("expected pair witness"),
        }
    }

    #[test]
    fn certify_mean_p1_odd() {
        let rep = certify_sup(&mean(), &SearchDomain::ball(11, 1, 1.0), StabilityOrder::P(1.0), &SearchBudget::default(), Seed(2))
            .unwrap();
        assert!((rep.found_sup - 1.0 / 11.0).abs() < 1e-12);
        let Witness::Sample(ds) = &rep.witness else { panic!() };
        assert_eq!(ds.points().filter(|p| p[0] == 1.0).count(), 6);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let shrunk = mean().scaled(0.7);
        for n in [3usize, 6, 9, 11] {
            for p in [1.0, 2.0] {
                let order = StabilityOrder::P(p);
                let budget = SearchBudget { random_restarts: 1, ascent_iters: 1, ..Default::default() };
                let rep = certify_sup(&shrunk, &SearchDomain::ball(n, 1, 1.0), order, &budget, Seed(0)).unwrap();
                let (bf, _) = corner_brute_force(&shrunk, n, 1.0, order).unwrap();
                assert!((rep.found_sup - bf).abs() <= 1e-12 * bf, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn two_notions() {
        let z = EstimatorHandle::constant_zero(1);
        let v: Vec<f64> = (0..12).map(|i| if i < 6 { 1.0 } else { -1.0 }).collect();
        let ds = Dataset::scalar(&v, 1.0).unwrap();
        assert_eq!(two_notion_gap_check(&z, &ds).unwrap(), (0.0, 0.0));
        let (a, b) = two_notion_gap_check(&mean(), &ds).unwrap();
        assert!((a - 1.0 / 11.0).abs() < 1e-15);
        assert!(b <= a + 1e-15 && a <= 2.0 * b + 1e-12);
    }

    #[test]
    fn inf_pair_and_loo_notions_agree_for_mean() {
        let budget = SearchBudget::default();
        let pair = certify_sup(&mean(), &SearchDomain::ball(8, 1, 1.0), StabilityOrder::Inf, &budget, Seed(4)).unwrap();
        let (bf, _) = corner_brute_force(&mean(), 8, 1.0, StabilityOrder::Inf).unwrap();
        assert!((pair.found_sup - bf).abs() < 1e-12);
    }

    #[test]
    fn unbounded_without_box_errors() {
        let mut dom = SearchDomain::unbounded(5, 1, 1.0);
        dom.search_box = None;
        let r = certify_sup(&mean(), &dom, StabilityOrder::Inf, &SearchBudget::default(), Seed(0));
        assert!(matches!(r, Err(Error::UnboundedDomain)));
    }

    #[test]
    fn triangle_on_chain() {
        let est = EstimatorHandle::new("cubic", 1, |ds| vec![ds.mean()[0].powi(3)]);
        let a = Dataset::scalar(&[0.2, -0.4, 0.9], 1.0).unwrap();
        let b = a.replace_point(1, &[1.0]).unwrap();
        let c = b.replace_point(1, &[-1.0]).unwrap();
        let ac = worst_case_gap(&est, &a, &c).unwrap();
        assert!(ac <= worst_case_gap(&est, &a, &b).unwrap() + worst_case_gap(&est, &b, &c).unwrap() + 1e-15);
    }

    proptest! {
        #[test]
        fn monotone_in_p(vals in prop::collection::vec(-1.0f64..1.0, 2..15), p in 1.0f64..4.0, dq in 0.0f64..3.0) {
            let ds = Dataset::scalar(&vals, 1.0).unwrap();
            let est = EstimatorHandle::new("tanh", 1, |ds| vec![(3.0 * ds.mean()[0]).tanh()]);
            let a = lp_statistic(&est, &ds, StabilityOrder::P(p)).unwrap();
            let b = lp_statistic(&est, &ds, StabilityOrder::P(p + dq)).unwrap();
            let c = lp_statistic(&est, &ds, StabilityOrder::Inf).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-12) + 1e-15);
            prop_assert!(b <= c * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn scaling(vals in prop::collection::vec(-1.0f64..1.0, 2..15), c in 0.0f64..3.0) {
            let ds = Dataset::scalar(&vals, 1.0).unwrap();
            for order in [StabilityOrder::P(1.0), StabilityOrder::P(2.5), StabilityOrder::Inf] {
                let a = lp_statistic(&mean(), &ds, order).unwrap();
                let b = lp_statistic(&mean().scaled(c), &ds, order).unwrap();
                prop_assert!((b - c * a).abs() <= 1e-12 * (1.0 + a));
            }
        }

        #[test]
        fn two_notion_chain(vals in prop::collection::vec(-1.0f64..1.0, 2..15)) {
            let ds = Dataset::scalar(&vals, 1.0).unwrap();
            let est = EstimatorHandle::new("clip", 1, |ds| vec![ds.mean()[0].clamp(-0.2, 0.3)]);
            let (a, b) = two_notion_gap_check(&est, &ds).unwrap();
            prop_assert!(b <= a + 1e-12);
            prop_assert!(a <= 2.0 * b + 1e-12);
        }
    }
}
