//! Wavelet bases on `[0, 1]`: Haar and periodized Daubechies.
//!
//! Level `l0` carries the father functions `φ_{l0,k}`; mothers `ψ_{lk}` live on
//! levels `l ≥ l0`. The kernel `K_L(x, x0)` sums both, so it is the projection
//! onto the approximation space at level `L + 1`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetKind};
use crate::distribution::RegressionFn;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveletFamily {
    Haar,
    /// Periodized Daubechies with `N` vanishing moments (2 ≤ N ≤ 4).
    Daubechies(u8),
}

/// Resolution (log2 points per unit) of the cascade tables.
const CASCADE_J: u32 = 16;

#[derive(Debug)]
struct Cascade {
    support: usize,
    phi: Vec<f64>,
    psi: Vec<f64>,
}

fn daubechies_filter(n: u8) -> Result<Vec<f64>> {
    Ok(match n {
        2 => vec![0.48296291314469025, 0.836516303737469, 0.22414386804185735, -0.12940952255092145],
        3 => vec![
            0.3326705529509569,
            0.8068915093133388,
            0.4598775021193313,
            -0.13501102001039084,
            -0.08544127388224149,
            0.035226291882100656,
        ],
        4 => vec![
            0.23037781330885523,
            0.7148465705525415,
            0.6308807679295904,
            -0.02798376941698385,
            -0.18703481171888114,
            0.030841381835986965,
            0.032883011666982945,
            -0.010597401784997278,
        ],
        _ => return Err(Error::InvalidArgument(format!("Daubechies order {n} not available (2..=4)"))),
    })
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting (tiny systems only).
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

impl Cascade {
    fn build(h: &[f64]) -> Cascade {
        let len = h.len();
        let support = len - 1;
        let s2 = std::f64::consts::SQRT_2;
        // φ at interior integers 1..support-1: eigenvector of the refinement matrix.
        let m = support - 1;
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                let idx = 2 * (i as i64 + 1) - (j as i64 + 1);
                if (0..len as i64).contains(&idx) {
                    a[i][j] = s2 * h[idx as usize];
                }
                if i == j {
                    a[i][j] -= 1.0;
                }
            }
        }
        a[m - 1] = vec![1.0; m];
        let mut b = vec![0.0; m];
        b[m - 1] = 1.0;
        let ints = solve(a, b);

        let size = support << CASCADE_J;
        let mut phi = vec![0.0; size + 1];
        for (i, v) in ints.iter().enumerate() {
            phi[(i + 1) << CASCADE_J] = *v;
        }
        // Fill dyadic points level by level: φ(x) = √2 Σ h_k φ(2x − k).
        for j in 1..=CASCADE_J {
            let step = 1usize << (CASCADE_J - j);
            let mut idx = step;
            while idx < size {
                if (idx / step) % 2 == 1 {
                    let mut v = 0.0;
                    for (k, hk) in h.iter().enumerate() {
                        let t = 2 * idx as i64 - ((k as i64) << CASCADE_J);
                        if t > 0 && (t as usize) < size {
                            v += hk * phi[t as usize];
                        }
                    }
                    phi[idx] = s2 * v;
                }
                idx += step;
            }
        }
        let mut psi = vec![0.0; size + 1];
        for (idx, out) in psi.iter_mut().enumerate().take(size) {
            let mut v = 0.0;
            for k in 0..len {
                let g = if k % 2 == 0 { 1.0 } else { -1.0 } * h[len - 1 - k];
                let t = 2 * idx as i64 - ((k as i64) << CASCADE_J);
                if t > 0 && (t as usize) < size {
                    v += g * phi[t as usize];
                }
            }
            *out = s2 * v;
        }
        Cascade { support, phi, psi }
    }

    fn lookup(table: &[f64], u: f64) -> f64 {
        let pos = u * (1u64 << CASCADE_J) as f64;
        if pos < 0.0 || pos >= (table.len() - 1) as f64 {
            return 0.0;
        }
        let i = pos.floor() as usize;
        let w = pos - i as f64;
        table[i] * (1.0 - w) + table[i + 1] * w
    }
}

/// A wavelet basis with its localization constants.
#[derive(Debug, Clone)]
pub struct WaveletBasis {
    pub family: WaveletFamily,
    pub l0: u32,
    /// Regularity `A`; the basis may only be used for smoothness `s < A`.
    pub regularity: f64,
    /// `‖ψ_lk‖∞ ≤ C_ψ 2^{l/2}` (also bounds the father functions).
    pub c_psi: f64,
    /// Maximum number of active translates per level at any point.
    pub k_loc: usize,
    /// `Leb(supp ψ_lk) ≤ S_ψ 2^{−l}`.
    pub s_psi: f64,
    cascade: Option<Arc<Cascade>>,
}

impl WaveletBasis {
    pub fn haar() -> Self {
        WaveletBasis { family: WaveletFamily::Haar, l0: 0, regularity: 1.0, c_psi: 1.0, k_loc: 1, s_psi: 1.0, cascade: None }
    }

    /// Periodized Daubechies-N. Localization constants are measured on the cascade grid.
    pub fn daubechies(n: u8, l0: u32) -> Result<Self> {
        let h = daubechies_filter(n)?;
        let cascade = Arc::new(Cascade::build(&h));
        let sup = cascade.phi.iter().chain(&cascade.psi).fold(0.0f64, |m, v| m.max(v.abs()));
        let support = cascade.support;
        let mut b = WaveletBasis {
            family: WaveletFamily::Daubechies(n),
            l0,
            regularity: n as f64,
            c_psi: sup,
            k_loc: support,
            s_psi: support as f64,
            cascade: Some(cascade),
        };
        // Periodization can stack translates at coarse levels; measure there.
        let grid = 1usize << 12;
        let mut c: f64 = sup;
        for l in l0..l0 + 3 {
            let scale = 2f64.powf(-(l as f64) / 2.0);
            for g in 0..grid {
                let x = g as f64 / grid as f64;
                c = c.max(b.eval_father_raw(l, 0, x).abs() * scale);
                c = c.max(b.eval_mother_raw(l, 0, x).abs() * scale);
            }
        }
        b.c_psi = c;
        Ok(b)
    }

    /// `C'_ψ = 2 K_loc C_ψ²`, the kernel envelope constant.
    pub fn c_psi_prime(&self) -> f64 {
        2.0 * self.k_loc as f64 * self.c_psi * self.c_psi
    }

    fn check(&self, l: u32, k: usize, x: f64) -> Result<()> {
        if l < self.l0 || l > 30 || k >= (1usize << l) {
            return Err(Error::IndexOutOfRange { index: k, len: 1usize << l.min(30) });
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::PointOutOfRange(x));
        }
        Ok(())
    }

    /// Mother `ψ_lk(x)`.
    pub fn eval_basis(&self, l: u32, k: usize, x: f64) -> Result<f64> {
        self.check(l, k, x)?;
        Ok(self.eval_mother_raw(l, k, x))
    }

    /// Father `φ_{l0,k}(x)`.
    pub fn eval_father(&self, k: usize, x: f64) -> Result<f64> {
        self.check(self.l0, k, x)?;
        Ok(self.eval_father_raw(self.l0, k, x))
    }

    fn haar_cell(l: u32, x: f64) -> (usize, f64) {
        let m = (1u64 << l) as f64;
        // Right-continuous; x = 1 belongs to the last cell.
        let t = (x * m).min(m - m * f64::EPSILON);
        let k = t.floor() as usize;
        (k.min((1usize << l) - 1), t - k as f64)
    }

    fn periodized(&self, table: &[f64], support: usize, l: u32, k: usize, x: f64) -> f64 {
        let m = (1u64 << l) as f64;
        let mut u = (x * m - k as f64).rem_euclid(m);
        let mut v = 0.0;
        while u < support as f64 {
            v += Cascade::lookup(table, u);
            u += m;
        }
        m.sqrt() * v
    }

    pub(crate) fn eval_mother_raw(&self, l: u32, k: usize, x: f64) -> f64 {
        match &self.cascade {
            None => {
                let (kk, frac) = Self::haar_cell(l, x);
                if kk != k {
                    0.0
                } else {
                    let a = (1u64 << l) as f64;
                    if frac < 0.5 {
                        a.sqrt()
                    } else {
                        -a.sqrt()
                    }
                }
            }
            Some(c) => self.periodized(&c.psi, c.support, l, k, x),
        }
    }

    pub(crate) fn eval_father_raw(&self, l: u32, k: usize, x: f64) -> f64 {
        match &self.cascade {
            None => {
                let (kk, _) = Self::haar_cell(l, x);
                if kk == k {
                    ((1u64 << l) as f64).sqrt()
                } else {
                    0.0
                }
            }
            Some(c) => self.periodized(&c.phi, c.support, l, k, x),
        }
    }

    /// Translates `k` at level `l` whose support contains `x`.
    pub(crate) fn active(&self, l: u32, x: f64) -> Vec<usize> {
        let count = 1usize << l;
        match &self.cascade {
            None => vec![Self::haar_cell(l, x).0],
            Some(c) => {
                let base = Self::haar_cell(l, x).0 as i64;
                let mut ks: Vec<usize> = (0..=c.support as i64)
                    .map(|o| (base - o).rem_euclid(count as i64) as usize)
                    .collect();
                ks.sort_unstable();
                ks.dedup();
                ks
            }
        }
    }
}

/// Empirical coefficients for one function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coeff {
    /// `true` for a father coefficient at level `l0`.
    pub father: bool,
    pub level: u32,
    pub k: usize,
    pub fhat: f64,
    pub fhat_clipped: f64,
    /// Mean absolute weighted response.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletCoeffs {
    pub coeffs: Vec<Coeff>,
    pub clip: f64,
    pub warnings: Vec<String>,
}

impl WaveletCoeffs {
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "level", "k", "fhat", "fhat_clipped", "s"]).expect("in-memory write");
        for c in &self.coeffs {
            w.write_record([
                if c.father { "father" } else { "mother" }.to_string(),
                c.level.to_string(),
                c.k.to_string(),
                format!("{}", c.fhat),
                format!("{}", c.fhat_clipped),
                format!("{}", c.s),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// `[y]_T`: `y` clipped to `[-T, T]`.
pub fn clip(y: f64, t: f64) -> f64 {
    if t.is_infinite() {
        y
    } else {
        y.clamp(-t, t)
    }
}

fn regression_rows(ds: &Dataset) -> Result<impl Iterator<Item = (f64, f64)> + '_> {
    if ds.kind() != DatasetKind::RegressionPairs {
        return Err(Error::InvalidArgument("wavelet routines need regression pairs".into()));
    }
    Ok(ds.points().map(|p| (p[0], p[1])))
}

/// Empirical coefficients `f̂_lk`, clipped `f̂^T_lk` and `S_lk` for `l0 ≤ l ≤ L`.
/// A level with `2^L > n` is reported in `warnings`, not rejected.
pub fn empirical_coeffs(basis: &WaveletBasis, ds: &Dataset, level: u32, t: f64) -> Result<WaveletCoeffs> {
    let n = ds.len();
    let mut warnings = Vec::new();
    if level >= 63 || (1u64 << level) > n as u64 {
        warnings.push(Error::LevelTooDeep { level, n }.to_string());
    }
    if level > 24 {
        return Err(Error::LevelTooDeep { level, n });
    }
    let mut coeffs = Vec::new();
    let mut accumulate = |father: bool, l: u32| -> Result<()> {
        let count = 1usize << l;
        let mut f = vec![0.0; count];
        let mut ft = vec![0.0; count];
        let mut s = vec![0.0; count];
        for (x, y) in regression_rows(ds)? {
            for k in basis.active(l, x) {
                let v = if father { basis.eval_father_raw(l, k, x) } else { basis.eval_mother_raw(l, k, x) };
                f[k] += y * v;
                ft[k] += clip(y, t) * v;
                s[k] += (y * v).abs();
            }
        }
        let inv = 1.0 / n as f64;
        for k in 0..count {
            coeffs.push(Coeff { father, level: l, k, fhat: f[k] * inv, fhat_clipped: ft[k] * inv, s: s[k] * inv });
        }
        Ok(())
    };
    accumulate(true, basis.l0)?;
    for l in basis.l0..=level {
        accumulate(false, l)?;
    }
    Ok(WaveletCoeffs { coeffs, clip: t, warnings })
}

/// `(grid sup of |K_L(·, x0)| over 2^{L+4} points, analytic bound C'_ψ 2^L)`.
pub fn kernel_sup(basis: &WaveletBasis, level: u32, x0: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::PointOutOfRange(x0));
    }
    if level < basis.l0 || level > 24 {
        return Err(Error::IndexOutOfRange { index: level as usize, len: 25 });
    }
    let grid = 1usize << (level + 4);
    let mut weights = Vec::new();
    for k in basis.active(basis.l0, x0) {
        weights.push((true, basis.l0, k, basis.eval_father_raw(basis.l0, k, x0)));
    }
    for l in basis.l0..=level {
        for k in basis.active(l, x0) {
            weights.push((false, l, k, basis.eval_mother_raw(l, k, x0)));
        }
    }
    let mut sup: f64 = 0.0;
    for g in 0..grid {
        let x = (g as f64 + 0.5) / grid as f64;
        let v: f64 = weights
            .iter()
            .map(|&(father, l, k, w)| {
                w * if father { basis.eval_father_raw(l, k, x) } else { basis.eval_mother_raw(l, k, x) }
            })
            .sum();
        sup = sup.max(v.abs());
    }
    Ok((sup, basis.c_psi_prime() * 2f64.powi(level as i32)))
}

/// Max deviation of the Gram matrix from the identity for all functions up to
/// `max_level`, using a midpoint rule on `2^grid_pow` points.
pub fn orthonormality_error(basis: &WaveletBasis, max_level: u32, grid_pow: u32) -> f64 {
    let mut index = Vec::new();
    let father_count = 1usize << basis.l0;
    for k in 0..father_count {
        index.push((true, basis.l0, k));
    }
    let mut offsets = vec![0usize; max_level as usize + 2];
    for l in basis.l0..=max_level {
        offsets[l as usize] = index.len();
        for k in 0..(1usize << l) {
            index.push((false, l, k));
        }
    }
    let m = index.len();
    let mut gram = vec![0.0; m * m];
    let grid = 1usize << grid_pow;
    let w = 1.0 / grid as f64;
    let mut active: Vec<(usize, f64)> = Vec::new();
    for g in 0..grid {
        let x = (g as f64 + 0.5) * w;
        active.clear();
        for k in basis.active(basis.l0, x) {
            active.push((k, basis.eval_father_raw(basis.l0, k, x)));
        }
        for l in basis.l0..=max_level {
            for k in basis.active(l, x) {
                active.push((offsets[l as usize] + k, basis.eval_mother_raw(l, k, x)));
            }
        }
        for &(i, vi) in &active {
            for &(j, vj) in &active {
                gram[i * m + j] += vi * vj * w;
            }
        }
    }
    let mut err: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((gram[i * m + j] - target).abs());
        }
    }
    err
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48)
}

/// Population coefficient `∫ f ψ_lk` (or `∫ f φ_{l0,k}`), integrated piecewise
/// over dyadic cells so discontinuities of the basis sit on cell edges.
pub fn population_coeff(basis: &WaveletBasis, f: &RegressionFn, father: bool, l: u32, k: usize) -> f64 {
    let cells = 1usize << (l + 2).max(6);
    let g = |x: f64| f.eval(x) * if father { basis.eval_father_raw(l, k, x) } else { basis.eval_mother_raw(l, k, x) };
    (0..cells)
        .map(|c| {
            let a = c as f64 / cells as f64;
            let b = (c + 1) as f64 / cells as f64;
            // Nudge endpoints inside the cell so right-continuous jumps are not sampled twice.
            let eps = 1e-13;
            integrate(&g, a + eps, b - eps, 1e-12)
        })
        .sum()
}

/// Deterministic test functions for rate experiments, each paired with its value at `x0`.
///
/// The first fixture, `|x − x0|^ν`, has its cusp exactly at `x0` so the bias of
/// a level-`L` projection at `x0` decays like `2^{−Lν}`.
pub fn besov_test_functions(nu: f64, count: usize, regularity: f64, x0: f64) -> Result<Vec<(RegressionFn, f64)>> {
    if !(nu > 0.0 && nu < regularity) {
        return Err(Error::RegularityViolation { regularity, smoothness: nu });
    }
    let mut all: Vec<(RegressionFn, f64)> = vec![
        (RegressionFn::new(format!("cusp(nu={nu},at={x0})"), 1.0, move |x| (x - x0).abs().powf(nu)), 0.0),
        (
            RegressionFn::new(format!("cusp(nu={nu},at=0.5)"), 1.0, move |x| (x - 0.5f64).abs().powf(nu)),
            (x0 - 0.5f64).abs().powf(nu),
        ),
        (RegressionFn::new("constant(0.7)", 0.7, |_| 0.7), 0.7),
        (
            RegressionFn::new(format!("triangle(h=0.8,peak={x0})"), 0.8, move |x| (0.8 * (1.0 - (x - x0).abs() / 0.25)).max(0.0)),
            0.8,
        ),
        (RegressionFn::new("piecewise-poly", 1.0, |x| if x < 0.5 { x * x } else { 0.25 - (x - 0.5) }), {
            if x0 < 0.5 {
                x0 * x0
            } else {
                0.25 - (x0 - 0.5)
            }
        }),
    ];
    all.truncate(count);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_values() {
        let b = WaveletBasis::haar();
        assert_eq!(b.eval_basis(0, 0, 0.25).unwrap(), 1.0);
        assert_eq!(b.eval_basis(0, 0, 0.75).unwrap(), -1.0);
        assert_eq!(b.eval_basis(2, 1, 0.9).unwrap(), 0.0);
        assert_eq!(b.eval_basis(2, 1, 0.25).unwrap(), 2.0);
        assert_eq!(b.eval_basis(2, 3, 1.0).unwrap(), -2.0);
        assert!(b.eval_basis(2, 4, 0.5).is_err());
        assert!(b.eval_basis(1, 0, 1.5).is_err());
    }

    #[test]
    fn haar_orthonormal() {
        assert!(orthonormality_error(&WaveletBasis::haar(), 8, 16) < 1e-12);
    }

    #[test]
    fn daubechies_orthonormal_on_grid() {
        let b = WaveletBasis::daubechies(2, 3).unwrap();
        let e = orthonormality_error(&b, 6, 14);
        assert!(e < 1e-3, "gram error {e}");
        assert!(b.c_psi > 1.0);
    }

    #[test]
    fn haar_localization_exact() {
        let b = WaveletBasis::haar();
        for l in 0..8 {
            let sup = (0..1000)
                .map(|i| b.eval_basis(l, 0, i as f64 / 1000.0 * 2f64.powi(-(l as i32))).unwrap().abs())
                .fold(0.0, f64::max);
            assert_eq!(sup, 2f64.powf(l as f64 / 2.0));
            assert_eq!(b.active(l, 0.3).len(), 1);
        }
    }

    #[test]
    fn kernel_examples() {
        let b = WaveletBasis::haar();
        let (s, bound) = kernel_sup(&b, 0, 0.25).unwrap();
        assert_eq!(s, 2.0);
        assert_eq!(bound, 2.0);
        let mut last = 0.0;
        for l in 0..8 {
            let (s, bound) = kernel_sup(&b, l, 0.3).unwrap();
            assert!(s <= bound + 1e-12);
            assert!(bound >= last);
            last = bound;
        }
    }

    #[test]
    fn coefficient_identities() {
        let b = WaveletBasis::haar();
        let xs: Vec<f64> = (0..64).map(|i| (i as f64 + 0.5) / 64.0).collect();
        let zero = Dataset::regression(&xs, &vec![0.0; 64], f64::INFINITY).unwrap();
        let c = empirical_coeffs(&b, &zero, 4, 1.0).unwrap();
        assert!(c.coeffs.iter().all(|c| c.fhat == 0.0 && c.fhat_clipped == 0.0 && c.s == 0.0));
        let ys: Vec<f64> = xs.iter().map(|x| (7.0 * x).sin() * 3.0).collect();
        let ds = Dataset::regression(&xs, &ys, f64::INFINITY).unwrap();
        let c = empirical_coeffs(&b, &ds, 5, f64::INFINITY).unwrap();
        for co in &c.coeffs {
            assert_eq!(co.fhat, co.fhat_clipped);
            assert!(co.fhat.abs() <= co.s + 1e-15);
            assert!(co.fhat_clipped.abs() <= f64::INFINITY);
        }
        let c = empirical_coeffs(&b, &ds, 5, 0.5).unwrap();
        for co in &c.coeffs {
            assert!(co.fhat_clipped.abs() <= 0.5 * 2f64.powf(co.level as f64 / 2.0) + 1e-12);
        }
        assert!(!empirical_coeffs(&b, &ds, 7, 1.0).unwrap().warnings.is_empty());
    }

    #[test]
    fn population_coefficients_of_basis_function() {
        let b = WaveletBasis::haar();
        let b2 = b.clone();
        let f = RegressionFn::new("psi00", 1.0, move |x| b2.eval_mother_raw(0, 0, x));
        assert!((population_coeff(&b, &f, false, 0, 0) - 1.0).abs() < 1e-9);
        assert!(population_coeff(&b, &f, false, 1, 0).abs() < 1e-9);
        assert!(population_coeff(&b, &f, true, 0, 0).abs() < 1e-9);
    }

    #[test]
    fn fixtures() {
        let fx = besov_test_functions(0.5, 5, 1.0, 0.3).unwrap();
        for (f, v) in &fx {
            assert!((f.eval(0.3) - v).abs() < 1e-15, "{}", f.name);
        }
        assert!(besov_test_functions(1.5, 2, 1.0, 0.3).is_err());
    }
}
