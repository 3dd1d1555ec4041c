//! Small matrix types: CSR sparse, dense row-major, and sparse minus rank one.

use serde::Serialize;

/// Square CSR matrix with sorted, duplicate-free column indices per row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseMatrix {
    dim: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            offsets: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            offsets: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![1.0; dim],
        }
    }

    /// Builds from per-row `(column, value)` lists; duplicates are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut offsets = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                debug_assert!(c < dim);
                if cols.len() > *offsets.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        Self { dim, offsets, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map_or(0.0, |k| v[k])
    }

    /// `Diag(d)·self`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            for v in &mut out.vals[self.offsets[i]..self.offsets[i + 1]] {
                *v *= d[i];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let rows = (0..self.dim)
            .map(|i| {
                let (c1, v1) = self.row(i);
                let (c2, v2) = other.row(i);
                c1.iter()
                    .copied()
                    .zip(v1.iter().copied())
                    .chain(c2.iter().copied().zip(v2.iter().copied()))
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    /// `self + s·I`.
    pub fn add_diagonal(&self, s: f64) -> Self {
        self.add(&Self::identity(self.dim).scale(s))
    }

    /// `1ᵀ·self`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&c, &v) in self.cols.iter().zip(&self.vals) {
            out[c] += v;
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim);
        for i in 0..self.dim {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                m.set(i, j, x);
            }
        }
        m
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }
}

/// Square row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    /// Panics unless `data.len() == dim * dim`.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim, "dense matrix data has the wrong length");
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `S − u·vᵀ` with sparse `S`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsePlusRankOne {
    pub sparse: SparseMatrix,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl SparsePlusRankOne {
    pub fn dim(&self) -> usize {
        self.sparse.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sparse.get(i, j) - self.u[i] * self.v[j]
    }

    /// `(1−β)·self + β·I`.
    pub fn damped(&self, beta: f64) -> Self {
        Self {
            sparse: self.sparse.scale(1.0 - beta).add_diagonal(beta),
            u: self.u.iter().map(|x| (1.0 - beta) * x).collect(),
            v: self.v.clone(),
        }
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let su: f64 = self.u.iter().sum();
        self.sparse
            .column_sums()
            .iter()
            .zip(&self.v)
            .map(|(s, v)| s - su * v)
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = self.sparse.to_dense();
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, m.get(i, j) - self.u[i] * self.v[j]);
            }
        }
        m
    }
}
