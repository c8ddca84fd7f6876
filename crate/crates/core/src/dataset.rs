//! Datasets: ordered collections of points with a declared domain.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm used for the domain bound. Bounded-mean classes use ℓ2 balls, the
/// sparse class uses ℓ∞ boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    #[default]
    L2,
    LInf,
}

impl NormKind {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormKind::L2 => l2_norm(v),
            NormKind::LInf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    #[default]
    VectorSample,
    /// Rows are `(x, y)` with `x ∈ [0, 1]`; the radius bounds `|y|`.
    RegressionPairs,
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Ordered sample of `n ≥ 1` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    data: Vec<f64>,
    n: usize,
    dim: usize,
    radius: f64,
    norm: NormKind,
    kind: DatasetKind,
}

impl Dataset {
    /// Builds a vector sample, checking finiteness and the domain bound.
    pub fn new(points: Vec<Vec<f64>>, radius: f64, norm: NormKind) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        let n = points.len();
        let data: Vec<f64> = points.into_iter().flatten().collect();
        Self::from_flat(data, n, dim, radius, norm, DatasetKind::VectorSample)
    }

    /// Builds a one-dimensional sample.
    pub fn scalar(values: &[f64], radius: f64) -> Result<Self> {
        Self::from_flat(values.to_vec(), values.len(), 1, radius, NormKind::L2, DatasetKind::VectorSample)
    }

    /// Builds regression pairs; `y_bound` may be infinite.
    pub fn regression(xs: &[f64], ys: &[f64], y_bound: f64) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
        }
        let data = xs.iter().zip(ys).flat_map(|(&x, &y)| [x, y]).collect();
        Self::from_flat(data, xs.len(), 2, y_bound, NormKind::LInf, DatasetKind::RegressionPairs)
    }

    pub fn from_flat(
        data: Vec<f64>,
        n: usize,
        dim: usize,
        radius: f64,
        norm: NormKind,
        kind: DatasetKind,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dataset must contain at least one point".into()));
        }
        if dim == 0 || data.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim.max(1), got: data.len() });
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("domain radius must be positive, got {radius}")));
        }
        let ds = Dataset { data, n, dim, radius, norm, kind };
        for i in 0..n {
            ds.check_point(ds.point(i))?;
        }
        Ok(ds)
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainViolation("non-finite coordinate".into()));
        }
        match self.kind {
            DatasetKind::VectorSample => {
                if self.radius.is_finite() {
                    let nrm = self.norm.norm(p);
                    if nrm > self.radius * (1.0 + 1e-12) {
                        return Err(Error::DomainViolation(format!(
                            "point norm {nrm} exceeds radius {}",
                            self.radius
                        )));
                    }
                }
            }
            DatasetKind::RegressionPairs => {
                if !(0.0..=1.0).contains(&p[0]) {
                    return Err(Error::DomainViolation(format!("design point {} outside [0,1]", p[0])));
                }
                if self.radius.is_finite() && p[1].abs() > self.radius * (1.0 + 1e-12) {
                    return Err(Error::DomainViolation(format!("response {} exceeds bound", p[1])));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    pub fn kind(&self) -> DatasetKind {
        self.kind
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Coordinate-wise sample mean.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for p in self.points() {
            for (a, b) in m.iter_mut().zip(p) {
                *a += b;
            }
        }
        let inv = 1.0 / self.n as f64;
        m.iter_mut().for_each(|a| *a *= inv);
        m
    }

    /// Copy with point `i` replaced. The input is left untouched.
    pub fn replace_point(&self, i: usize, new_point: &[f64]) -> Result<Dataset> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        self.check_point(new_point)?;
        let mut out = self.clone();
        out.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(new_point);
        Ok(out)
    }

    /// Copy with point `i` deleted; remaining order is preserved.
    pub fn drop_point(&self, i: usize) -> Result<Dataset> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument("cannot drop from a single-point dataset".into()));
        }
        let mut data = Vec::with_capacity((self.n - 1) * self.dim);
        data.extend_from_slice(&self.data[..i * self.dim]);
        data.extend_from_slice(&self.data[(i + 1) * self.dim..]);
        Ok(Dataset { data, n: self.n - 1, ..self.clone_meta() })
    }

    /// Copy with an extra point appended at the end.
    pub fn push_point(&self, p: &[f64]) -> Result<Dataset> {
        self.check_point(p)?;
        let mut out = self.clone();
        out.data.extend_from_slice(p);
        out.n += 1;
        Ok(out)
    }

    fn clone_meta(&self) -> Dataset {
        Dataset { data: Vec::new(), n: 0, dim: self.dim, radius: self.radius, norm: self.norm, kind: self.kind }
    }

    /// Number of indices at which the two datasets differ.
    pub fn hamming(&self, other: &Dataset) -> Result<usize> {
        if self.n != other.n || self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.n * self.dim, got: other.n * other.dim });
        }
        Ok((0..self.n).filter(|&i| self.point(i) != other.point(i)).count())
    }

    /// Writes the dataset as CSV with header `x0,...,x{d-1}` (or `x,y`).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let header: Vec<String> = match self.kind {
            DatasetKind::RegressionPairs => vec!["x".into(), "y".into()],
            DatasetKind::VectorSample => (0..self.dim).map(|j| format!("x{j}")).collect(),
        };
        wr.write_record(&header)?;
        for p in self.points() {
            // `{}` on f64 prints the shortest representation that round-trips.
            wr.write_record(p.iter().map(|v| format!("{v}")))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads a CSV written by [`Dataset::write_csv`]. A header of `x,y` selects
    /// regression pairs.
    pub fn read_csv<R: Read>(r: R, radius: f64, norm: NormKind) -> Result<Dataset> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        let kind = if header.len() == 2 && &header[0] == "x" && &header[1] == "y" {
            DatasetKind::RegressionPairs
        } else {
            for (j, h) in header.iter().enumerate() {
                if h != format!("x{j}") {
                    return Err(Error::Parse(format!("unexpected column `{h}` at position {j}")));
                }
            }
            DatasetKind::VectorSample
        };
        let dim = header.len();
        let mut data = Vec::new();
        let mut n = 0;
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != dim {
                return Err(Error::Parse(format!("row {n} has {} fields, expected {dim}", rec.len())));
            }
            for f in rec.iter() {
                data.push(f.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{f}: {e}")))?);
            }
            n += 1;
        }
        let norm = if kind == DatasetKind::RegressionPairs { NormKind::LInf } else { norm };
        Dataset::from_flat(data, n, dim, radius, norm, kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abc() -> Dataset {
        Dataset::scalar(&[0.1, 0.2, 0.3], 1.0).unwrap()
    }

    #[test]
    fn replace_point_examples() {
        let ds = Dataset::scalar(&[0.0, 0.0, 0.0], 1.0).unwrap();
        let out = ds.replace_point(1, &[1.0]).unwrap();
        assert_eq!(out.as_flat(), &[0.0, 1.0, 0.0]);
        assert_eq!(ds.as_flat(), &[0.0, 0.0, 0.0]);
        assert_eq!(ds.hamming(&out).unwrap(), 1);
        let back = out.replace_point(1, &[0.0]).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn replace_point_errors() {
        let ds = abc();
        assert!(matches!(ds.replace_point(3, &[0.0]), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(ds.replace_point(0, &[2.0]), Err(Error::DomainViolation(_))));
        assert!(matches!(ds.replace_point(0, &[f64::NAN]), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn drop_point_examples() {
        let ds = abc();
        assert_eq!(ds.drop_point(0).unwrap().as_flat(), &[0.2, 0.3]);
        assert_eq!(ds.drop_point(2).unwrap().as_flat(), &[0.1, 0.2]);
        assert_eq!(ds.drop_point(1).unwrap().len(), 2);
        assert!(matches!(ds.drop_point(3), Err(Error::IndexOutOfRange { .. })));
        assert_eq!(ds.len(), 3);
    }

    #[test]
    fn domain_checks() {
        assert!(Dataset::new(vec![vec![0.8, 0.8]], 1.0, NormKind::L2).is_err());
        assert!(Dataset::new(vec![vec![0.8, 0.8]], 1.0, NormKind::LInf).is_ok());
        assert!(Dataset::regression(&[1.5], &[0.0], f64::INFINITY).is_err());
        assert!(Dataset::scalar(&[], 1.0).is_err());
    }

    #[test]
    fn csv_header_and_regression() {
        let ds = Dataset::regression(&[0.25, 0.5], &[-1.0, 3.5], f64::INFINITY).unwrap();
        let s = ds.to_csv_string();
        assert!(s.starts_with("x,y\n"));
        let back = Dataset::read_csv(s.as_bytes(), f64::INFINITY, NormKind::L2).unwrap();
        assert_eq!(back, ds);
        assert!(Dataset::read_csv("a,b\n1,2\n".as_bytes(), 1.0, NormKind::L2).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(vals in prop::collection::vec(-1.0f64..1.0, 1..40)) {
            let ds = Dataset::scalar(&vals, 1.0).unwrap();
            let back = Dataset::read_csv(ds.to_csv_string().as_bytes(), 1.0, NormKind::L2).unwrap();
            prop_assert_eq!(back.as_flat(), ds.as_flat());
        }

        #[test]
        fn drop_never_mutates(vals in prop::collection::vec(-1.0f64..1.0, 2..20), i in 0usize..20) {
            let ds = Dataset::scalar(&vals, 1.0).unwrap();
            let before = ds.clone();
            let i = i % vals.len();
            let out = ds.drop_point(i).unwrap();
            prop_assert_eq!(&ds, &before);
            prop_assert_eq!(out.len(), vals.len() - 1);
        }
    }
}
