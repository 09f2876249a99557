//! Compressed sparse row storage for complex matrices.

use crate::C64;
use num_complex::ComplexFloat;

/// Complex matrix in CSR form. Column indices within each row are sorted and
/// unique.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and exact zeros dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            rows[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut acc = C64::new(0.0, 0.0);
                while k < row.len() && row[k].0 == c {
                    acc += row[k].1;
                    k += 1;
                }
                if acc != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(acc);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    /// Row-major dense input.
    pub fn from_dense(nrows: usize, ncols: usize, data: &[C64]) -> Self {
        assert_eq!(data.len(), nrows * ncols);
        Self::from_triplets(
            nrows,
            ncols,
            (0..nrows).flat_map(|i| (0..ncols).map(move |j| (i, j, data[i * ncols + j]))),
        )
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

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[a..b]
            .iter()
            .copied()
            .zip(self.values[a..b].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[a..b].binary_search(&j) {
            Ok(k) => self.values[a + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.nrows * self.ncols];
        for (i, j, v) in self.triplets() {
            out[i * self.ncols + j] = v;
        }
        out
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(i, j, _)| i == j)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(i, j, v)| (j, i, v.conj())),
        )
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out.prune()
    }

    fn prune(self) -> Self {
        let (nrows, ncols) = (self.nrows, self.ncols);
        Self::from_triplets(nrows, ncols, self.triplets().collect::<Vec<_>>())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: C64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets()
                .chain(other.triplets().map(|(i, j, v)| (i, j, c * v))),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut triplets = Vec::new();
        for i in 0..self.nrows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    triplets.push((i, j, a * b));
                }
            }
        }
        Self::from_triplets(self.nrows, other.ncols, triplets)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.nrows, other.ncols);
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (i1, j1, a) in self.triplets() {
            for (i2, j2, b) in other.triplets() {
                triplets.push((i1 * r2 + i2, j1 * c2 + j2, a * b));
            }
        }
        Self::from_triplets(self.nrows * r2, self.ncols * c2, triplets)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other)
            .values
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `A - A^dag`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    /// True when every row and every column holds at most one entry.
    pub fn is_monomial(&self) -> bool {
        let mut seen = vec![false; self.ncols];
        for i in 0..self.nrows {
            if self.indptr[i + 1] - self.indptr[i] > 1 {
                return false;
            }
        }
        for &j in &self.indices {
            if std::mem::replace(&mut seen[j], true) {
                return false;
            }
        }
        true
    }

    pub(crate) fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub(crate) fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub(crate) fn values(&self) -> &[C64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let m = CsrMatrix::from_triplets(2, 2, [(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 1.0))]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(3.0, 1.0));
        assert_eq!(m.get(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn kron_matches_dense_definition() {
        let a = CsrMatrix::from_dense(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0), c(0.0, 0.0)]);
        let b = CsrMatrix::from_dense(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(5.0, 0.0)]);
        let k = a.kron(&b);
        for i1 in 0..2 {
            for j1 in 0..2 {
                for i2 in 0..2 {
                    for j2 in 0..2 {
                        assert_eq!(k.get(i1 * 2 + i2, j1 * 2 + j2), a.get(i1, j1) * b.get(i2, j2));
                    }
                }
            }
        }
    }

    #[test]
    fn monomial_detection() {
        let p = CsrMatrix::from_triplets(3, 3, [(0, 1, c(1.0, 0.0)), (1, 2, c(2.0, 0.0))]);
        assert!(p.is_monomial());
        let q = CsrMatrix::from_triplets(3, 3, [(0, 1, c(1.0, 0.0)), (2, 1, c(2.0, 0.0))]);
        assert!(!q.is_monomial());
    }

    #[test]
    fn adjoint_and_matmul() {
        let a = CsrMatrix::from_dense(2, 2, &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]);
        let ad = a.adjoint();
        assert_eq!(ad.get(1, 0), c(2.0, 0.0));
        assert_eq!(ad.get(0, 0), c(1.0, -1.0));
        let p = a.matmul(&ad);
        // (A A^dag) is Hermitian
        assert!(p.hermiticity_defect() < 1e-15);
    }
}
