use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetKind};
use crate::error::{Error, Result};
use crate::estimator::EstimatorHandle;
use crate::stability::StabilityOrder;
use crate::wavelet::{clip, WaveletBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveletMode {
    /// Clipped responses, resolution chosen from β.
    Worst,
    /// Per-coefficient capping with a global shrinkage factor.
    Avg,
    /// Unconstrained projection estimator at `L_opt`.
    Baseline,
}

/// Tuning constants that are only determined up to universal factors.
/// All logarithms are natural.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveletConstants {
    pub sigma_assumed: f64,
    /// Assumed bound on `sup |f|`.
    pub m_f: f64,
    /// Clip constant; `T = c_t √(ln n)`. Defaults to `4 (σ + M_f)`.
    pub c_t: Option<f64>,
    /// Cap constant; `B_L = c_b ln n`.
    pub c_b: f64,
    /// Global factor `α = nβ/(c_star ln² n) ∧ 1`.
    pub c_star: f64,
}

impl Default for WaveletConstants {
    fn default() -> Self {
        WaveletConstants { sigma_assumed: 1.0, m_f: 1.0, c_t: None, c_b: 1.0, c_star: 2.0 }
    }
}

#[derive(Debug, Clone)]
pub struct WaveletEstimatorSpec {
    pub basis: WaveletBasis,
    pub x0: f64,
    /// `ν = s − 1/p` of the Besov class.
    pub nu: f64,
    /// Besov smoothness `s`; must stay below the basis regularity.
    pub smoothness: f64,
    pub n: usize,
    pub beta: f64,
    pub mode: WaveletMode,
    pub constants: WaveletConstants,
}

impl WaveletEstimatorSpec {
    pub fn l_opt(&self) -> u32 {
        ((self.n as f64).log2() / (2.0 * self.nu + 1.0)).floor().max(0.0) as u32
    }

    fn ln_n(&self) -> f64 {
        (self.n as f64).ln().max(f64::MIN_POSITIVE)
    }

    pub fn clip_level(&self) -> f64 {
        match self.mode {
            WaveletMode::Worst => {
                let c = self.constants.c_t.unwrap_or(4.0 * (self.constants.sigma_assumed + self.constants.m_f));
                c * self.ln_n().sqrt()
            }
            _ => f64::INFINITY,
        }
    }

    /// `c_ψ = 1/(2 C'_ψ)`.
    pub fn c_small_psi(&self) -> f64 {
        1.0 / (2.0 * self.basis.c_psi_prime())
    }

    /// Finest level used; `None` means no level (the estimate is 0).
    pub fn level(&self) -> Option<u32> {
        match self.mode {
            WaveletMode::Worst => {
                let arg = self.c_small_psi() * self.n as f64 * self.beta / self.clip_level();
                let floor_level = self.basis.l0 as f64 - 1.0;
                let raw = if arg > 0.0 { arg.log2().max(floor_level) } else { floor_level };
                let l = (raw.floor() as i64).min(self.l_opt() as i64);
                (l >= self.basis.l0 as i64).then_some(l as u32)
            }
            _ => (self.l_opt() >= self.basis.l0).then_some(self.l_opt()),
        }
    }

    /// `B_L = c_b ln n`.
    pub fn cap(&self) -> f64 {
        self.constants.c_b * self.ln_n()
    }

    /// `α = nβ/(C_star ln² n) ∧ 1`.
    pub fn alpha(&self) -> f64 {
        (self.n as f64 * self.beta / (self.constants.c_star * self.ln_n().powi(2))).min(1.0)
    }

    /// The average-case stability budget at which `α = 1`.
    pub fn full_strength_beta(&self) -> f64 {
        self.constants.c_star * self.ln_n().powi(2) / self.n as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0 && self.x0 < 1.0) {
            return Err(Error::PointOutOfRange(self.x0));
        }
        if self.smoothness >= self.basis.regularity || !(self.nu > 0.0) || self.nu > self.smoothness {
            return Err(Error::RegularityViolation { regularity: self.basis.regularity, smoothness: self.smoothness });
        }
        if self.n < 2 || !(self.beta >= 0.0) {
            return Err(Error::InvalidArgument("need n >= 2 and beta >= 0".into()));
        }
        if matches!(self.basis.family, crate::wavelet::WaveletFamily::Haar) {
            let grid = self.x0 * 2f64.powi(self.l_opt() as i32 + 1);
            if grid.fract() == 0.0 {
                return Err(Error::DomainViolation(format!("x0 = {} is a Haar breakpoint", self.x0)));
            }
        }
        Ok(())
    }
}

/// Basis functions active at `x0`: `(father, level, k, value at x0)` up to `level`.
fn active_terms(basis: &WaveletBasis, x0: f64, level: u32) -> Vec<(bool, u32, usize, f64)> {
    let mut out = Vec::new();
    for k in basis.active(basis.l0, x0) {
        let v = basis.eval_father_raw(basis.l0, k, x0);
        if v != 0.0 {
            out.push((true, basis.l0, k, v));
        }
    }
    for l in basis.l0..=level {
        for k in basis.active(l, x0) {
            let v = basis.eval_mother_raw(l, k, x0);
            if v != 0.0 {
                out.push((false, l, k, v));
            }
        }
    }
    out
}

/// `f̂(x0)` for the chosen mode.
pub fn wavelet_estimator(spec: &WaveletEstimatorSpec) -> Result<EstimatorHandle> {
    spec.validate()?;
    let level = spec.level();
    let terms = level.map(|l| active_terms(&spec.basis, spec.x0, l)).unwrap_or_default();
    let basis = spec.basis.clone();
    let mode = spec.mode;
    let t = spec.clip_level();
    let cap = spec.cap();
    let alpha = spec.alpha();
    let id = match mode {
        WaveletMode::Worst => "wavelet-worst",
        WaveletMode::Avg => "wavelet-avg",
        WaveletMode::Baseline => "wavelet-baseline",
    };
    let eval = move |ds: &Dataset| -> Vec<f64> {
        if ds.kind() != DatasetKind::RegressionPairs || terms.is_empty() || (mode == WaveletMode::Avg && alpha == 0.0) {
            return vec![0.0];
        }
        let inv = 1.0 / ds.len() as f64;
        let mut total = 0.0;
        for &(father, l, k, at_x0) in &terms {
            let (mut f, mut s) = (0.0, 0.0);
            for p in ds.points() {
                let v = if father { basis.eval_father_raw(l, k, p[0]) } else { basis.eval_mother_raw(l, k, p[0]) };
                if v != 0.0 {
                    let y = if mode == WaveletMode::Worst { clip(p[1], t) } else { p[1] };
                    f += y * v;
                    s += (p[1] * v).abs();
                }
            }
            f *= inv;
            s *= inv;
            let coef = match mode {
                WaveletMode::Avg => {
                    let bound = cap * 2f64.powf(-(l as f64) / 2.0);
                    if s > bound {
                        f * bound / s
                    } else {
                        f
                    }
                }
                _ => f,
            };
            total += coef * at_x0;
        }
        if mode == WaveletMode::Avg {
            total *= alpha;
        }
        vec![total]
    };
    let handle = EstimatorHandle::new(id, 1, eval);
    Ok(match mode {
        WaveletMode::Worst => handle.with_certificate(StabilityOrder::Inf, spec.beta),
        WaveletMode::Avg => handle.with_certificate(StabilityOrder::P(1.0), spec.beta),
        WaveletMode::Baseline => handle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Seed;
    use crate::wavelet::empirical_coeffs;

    fn spec(mode: WaveletMode, n: usize, beta: f64) -> WaveletEstimatorSpec {
        WaveletEstimatorSpec {
            basis: WaveletBasis::haar(),
            x0: 0.3,
            nu: 0.5,
            smoothness: 0.5,
            n,
            beta,
            mode,
            constants: WaveletConstants::default(),
        }
    }

    fn data(n: usize, f: impl Fn(f64) -> f64) -> Dataset {
        let xs: Vec<f64> = (0..n).map(|i| ((i as f64 + 0.5) / n as f64 * 7.3).fract()).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        Dataset::regression(&xs, &ys, f64::INFINITY).unwrap()
    }

    #[test]
    fn zero_responses_give_zero() {
        let ds = data(256, |_| 0.0);
        for mode in [WaveletMode::Worst, WaveletMode::Avg, WaveletMode::Baseline] {
            let e = wavelet_estimator(&spec(mode, 256, 10.0)).unwrap();
            assert_eq!(e.evaluate(&ds, Seed(0)).unwrap(), vec![0.0]);
        }
    }

    #[test]
    fn worst_equals_baseline_without_clipping() {
        let ds = data(256, |x| (x - 0.3).abs().sqrt());
        let w = spec(WaveletMode::Worst, 256, 1e6);
        assert_eq!(w.level(), Some(w.l_opt()));
        let a = wavelet_estimator(&w).unwrap().evaluate(&ds, Seed(0)).unwrap()[0];
        let b = wavelet_estimator(&spec(WaveletMode::Baseline, 256, 0.0)).unwrap().evaluate(&ds, Seed(0)).unwrap()[0];
        assert_eq!(a, b);
    }

    #[test]
    fn baseline_matches_coefficient_table() {
        let ds = data(512, |x| (6.0 * x).cos());
        let s = spec(WaveletMode::Baseline, 512, 0.0);
        let est = wavelet_estimator(&s).unwrap().evaluate(&ds, Seed(0)).unwrap()[0];
        let table = empirical_coeffs(&s.basis, &ds, s.l_opt(), f64::INFINITY).unwrap();
        let oracle: f64 = table
            .coeffs
            .iter()
            .map(|c| {
                let v = if c.father { s.basis.eval_father(c.k, 0.3).unwrap() } else { s.basis.eval_basis(c.level, c.k, 0.3).unwrap() };
                c.fhat * v
            })
            .sum();
        assert!((est - oracle).abs() < 1e-12);
    }

    #[test]
    fn avg_output_bound() {
        let ds = data(300, |x| if x > 0.25 && x < 0.35 { 50.0 } else { -3.0 });
        let s = spec(WaveletMode::Avg, 300, 0.05);
        let l = s.level().unwrap();
        let bound = s.basis.k_loc as f64 * s.basis.c_psi * s.cap() * (l as f64 + 2.0) * s.alpha();
        let v = wavelet_estimator(&s).unwrap().evaluate(&ds, Seed(0)).unwrap()[0];
        assert!(v.abs() <= bound);
    }

    #[test]
    fn small_beta_gives_zero_worst() {
        let s = spec(WaveletMode::Worst, 64, 1e-6);
        assert_eq!(s.level(), None);
    }

    #[test]
    fn spec_checks() {
        let mut s = spec(WaveletMode::Worst, 64, 1.0);
        s.smoothness = 1.2;
        assert!(matches!(wavelet_estimator(&s), Err(Error::RegularityViolation { .. })));
        let mut s = spec(WaveletMode::Worst, 64, 1.0);
        s.x0 = 0.25;
        assert!(wavelet_estimator(&s).is_err());
        s.x0 = 1.0;
        assert!(matches!(wavelet_estimator(&s), Err(Error::PointOutOfRange(_))));
    }
}
