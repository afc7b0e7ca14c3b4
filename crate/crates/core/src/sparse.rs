//! Compressed sparse row storage for complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Complex matrix in CSR form with sorted, duplicate-free column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    /// Builds from (row, col, value) triplets; duplicates are summed and exact
    /// zeros kept out.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, Complex64)>) -> Self {
        trip.sort_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) outside {nrows}x{ncols}");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { nrows, ncols, indptr, indices, values }.pruned()
    }

    fn pruned(self) -> Self {
        if self.values.iter().all(|v| *v != Complex64::new(0.0, 0.0)) {
            return self;
        }
        let trip = self.triplets().filter(|t| t.2 != Complex64::new(0.0, 0.0)).collect::<Vec<_>>();
        let mut indptr = vec![0; self.nrows + 1];
        for t in &trip {
            indptr[t.0 + 1] += 1;
        }
        for i in 0..self.nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices: trip.iter().map(|t| t.1).collect(),
            values: trip.iter().map(|t| t.2).collect(),
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

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let trip = self.triplets().map(|(i, j, v)| (j, i, v.conj())).collect();
        Self::from_triplets(self.ncols, self.nrows, trip)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out.pruned()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let trip = self.triplets().chain(other.triplets()).collect();
        Self::from_triplets(self.nrows, self.ncols, trip)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Sparse product self * other.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut trip = Vec::new();
        let mut acc = vec![Complex64::new(0.0, 0.0); other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut cols = Vec::new();
        for i in 0..self.nrows {
            cols.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = Complex64::new(0.0, 0.0);
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            trip.extend(cols.iter().map(|&j| (i, j, acc[j])));
        }
        Self::from_triplets(self.nrows, other.ncols, trip)
    }

    /// Rows and columns picked out by index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (p, &c) in cols.iter().enumerate() {
            col_map[c] = p;
        }
        let trip = rows
            .iter()
            .enumerate()
            .flat_map(|(p, &r)| {
                let col_map = &col_map;
                self.row(r).filter(|&(j, _)| col_map[j] != usize::MAX).map(move |(j, v)| (p, col_map[j], v))
            })
            .collect();
        Self::from_triplets(rows.len(), cols.len(), trip)
    }

    /// Symmetric permutation P M P^T where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let trip = self.triplets().map(|(i, j, v)| (inv[i], inv[j], v)).collect();
        Self::from_triplets(self.nrows, self.ncols, trip)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc + v.norm_sqr()).sqrt()
    }

    /// Largest absolute row sum, an upper bound on the spectral norm of a
    /// Hermitian matrix.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Frobenius norm of M - M^dagger.
    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).frobenius_norm()
    }

    /// Largest |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let mut trip = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != Complex64::new(0.0, 0.0) {
                    trip.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), trip)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect())
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, Complex64::new(v, 0.0))).collect())
    }
}
