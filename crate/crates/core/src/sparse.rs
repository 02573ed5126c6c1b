//! Compressed-row sparse matrices with Matrix Market import/export.

use std::io::{BufRead, Write};

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;

use crate::error::{LleError, Result};

/// Square `n × n` matrix in compressed-row form. Column indices within a row
/// are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    /// Set when the matrix was built to be exactly symmetric.
    pub symmetric: bool,
}

impl SparseOperator {
    /// Builds from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, _)) = entries.iter().find(|&&(i, j, _)| i >= n || j >= n) {
            return Err(LleError::invalid(format!("entry ({i}, {j}) outside {n}×{n}")));
        }
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        })
    }

    /// Builds from per-row `(col, value)` lists, which need not be sorted.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        let entries = rows
            .into_iter()
            .enumerate()
            .flat_map(|(i, r)| r.into_iter().map(move |(j, v)| (i, j, v)))
            .collect();
        Self::from_triplets(n, entries)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
            symmetric: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum()
            })
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::from_triplets(self.n, self.triplets().map(|(i, j, v)| (j, i, v)).collect())
            .expect("transpose keeps indices in range");
        t.symmetric = self.symmetric;
        t
    }

    /// `alpha·self + beta·I`.
    pub fn scale_shift(&self, alpha: f64, beta: f64) -> Self {
        let mut entries: Vec<_> = self.triplets().map(|(i, j, v)| (i, j, alpha * v)).collect();
        if beta != 0.0 {
            entries.extend((0..self.n).map(|i| (i, i, beta)));
        }
        let mut out = Self::from_triplets(self.n, entries).expect("same shape");
        out.symmetric = self.symmetric;
        out
    }

    /// Divides row `i` by `d[i]`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in out.row_ptr[i]..out.row_ptr[i + 1] {
                out.values[k] /= d[i];
            }
        }
        out.symmetric = false;
        out
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .into_par_iter()
            .map_init(
                || (vec![0.0; n], vec![false; n]),
                |(acc, seen), i| {
                    let mut touched = Vec::new();
                    let (ca, va) = self.row(i);
                    for (&k, &a) in ca.iter().zip(va) {
                        let (cb, vb) = other.row(k);
                        for (&j, &b) in cb.iter().zip(vb) {
                            if !seen[j] {
                                seen[j] = true;
                                touched.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    touched
                        .into_iter()
                        .map(|j| {
                            let v = acc[j];
                            acc[j] = 0.0;
                            seen[j] = false;
                            (j, v)
                        })
                        .collect()
                },
            )
            .collect();
        Self::from_rows(rows).expect("product keeps shape")
    }

    /// `(A + Aᵀ)/2`, flagged symmetric.
    pub fn symmetrized(&self) -> Self {
        let entries = self
            .triplets()
            .flat_map(|(i, j, v)| [(i, j, 0.5 * v), (j, i, 0.5 * v)])
            .collect();
        let mut out = Self::from_triplets(self.n, entries).expect("same shape");
        out.symmetric = true;
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `‖A − Aᵀ‖_F / ‖A‖_F`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let entries = self
            .triplets()
            .chain(t.triplets().map(|(i, j, v)| (i, j, -v)))
            .collect();
        let d = Self::from_triplets(self.n, entries).expect("same shape");
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            0.0
        } else {
            d.frobenius_norm() / norm
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &t).map_err(|e| LleError::Linalg(format!("{e:?}")))
    }

    /// Writes Matrix Market `coordinate real general` (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.n, self.n, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }

    pub fn read_matrix_market<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| LleError::Parse("empty Matrix Market file".into()))??;
        let lower = header.to_ascii_lowercase();
        if !lower.starts_with("%%matrixmarket matrix coordinate real") {
            return Err(LleError::Parse(format!("unsupported header: {header}")));
        }
        let symmetric = lower.contains("symmetric");
        let mut size: Option<(usize, usize)> = None;
        let mut entries = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || LleError::Parse(format!("malformed line: {line}"));
            match size {
                None => {
                    if parts.len() != 3 {
                        return Err(bad());
                    }
                    let r: usize = parts[0].parse().map_err(|_| bad())?;
                    let c: usize = parts[1].parse().map_err(|_| bad())?;
                    let nnz: usize = parts[2].parse().map_err(|_| bad())?;
                    if r != c {
                        return Err(LleError::Parse("matrix must be square".into()));
                    }
                    size = Some((r, nnz));
                }
                Some(_) => {
                    if parts.len() != 3 {
                        return Err(bad());
                    }
                    let i: usize = parts[0].parse().map_err(|_| bad())?;
                    let j: usize = parts[1].parse().map_err(|_| bad())?;
                    let v: f64 = parts[2].parse().map_err(|_| bad())?;
                    if i == 0 || j == 0 {
                        return Err(bad());
                    }
                    entries.push((i - 1, j - 1, v));
                    if symmetric && i != j {
                        entries.push((j - 1, i - 1, v));
                    }
                }
            }
        }
        let (n, _) = size.ok_or_else(|| LleError::Parse("missing size line".into()))?;
        let mut m = Self::from_triplets(n, entries)?;
        m.symmetric = symmetric;
        Ok(m)
    }
}
