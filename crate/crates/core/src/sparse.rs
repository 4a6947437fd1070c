//! Compressed sparse row storage used for assembled operators.

use num_complex::Complex64;
use std::ops::{AddAssign, Mul};

pub trait Scalar:
    Copy + Default + PartialEq + AddAssign + Mul<Output = Self> + Send + Sync + 'static
{
}
impl Scalar for f64 {}
impl Scalar for Complex64 {}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    ///
    /// Duplicates are summed in the order they appear in `triplets`, so the
    /// result is bitwise reproducible for a fixed triplet order.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        // stable bucket sort by row, then stable sort by column inside rows
        let mut order = vec![0usize; triplets.len()];
        let mut next = counts.clone();
        for (k, &(r, _, _)) in triplets.iter().enumerate() {
            order[next[r]] = k;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..nrows {
            let slice = &mut order[counts[r]..counts[r + 1]];
            slice.sort_by_key(|&k| triplets[k].1);
            let mut last: Option<usize> = None;
            for &k in slice.iter() {
                let (_, c, v) = triplets[k];
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => T::default(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// Extracts the block with the given rows and columns. `col_map[j]` maps a
    /// full column index to its position in the block, if selected.
    pub fn submatrix(&self, rows: &[usize], col_map: &[Option<usize>], ncols: usize) -> Self {
        let mut triplets = Vec::new();
        for (bi, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if let Some(bj) = col_map[j] {
                    triplets.push((bi, bj, v));
                }
            }
        }
        Self::from_triplets(rows.len(), ncols, &triplets)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Bitwise structural and numerical equality with the transpose.
    pub fn is_symmetric_exact(&self) -> bool {
        self.nrows == self.ncols && self.triplets().all(|(i, j, v)| self.get(j, i) == v)
    }
}

impl CsrMatrix<f64> {
    pub fn mul_vec_c(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| x[j] * v).sum())
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| x[j] * v).sum())
            .collect()
    }

    /// `conj(y)^T A x` for a real matrix.
    pub fn form(&self, y: &[Complex64], x: &[Complex64]) -> Complex64 {
        self.mul_vec_c(x)
            .iter()
            .zip(y)
            .map(|(ax, yi)| yi.conj() * ax)
            .sum()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }
}

impl CsrMatrix<Complex64> {
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `A^H y`.
    pub fn mul_vec_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.nrows);
        let mut out = vec![Complex64::default(); self.ncols];
        for (i, yi) in y.iter().enumerate() {
            for (j, v) in self.row(i) {
                out[j] += v.conj() * yi;
            }
        }
        out
    }

    /// `conj(y)^T A x`.
    pub fn form(&self, y: &[Complex64], x: &[Complex64]) -> Complex64 {
        self.mul_vec(x)
            .iter()
            .zip(y)
            .map(|(ax, yi)| yi.conj() * ax)
            .sum()
    }
}
