//! Operator norms: power iteration for `‖·‖₂`, exact column/row sums otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sparse::{DenseMatrix, SparseMatrix, SparsePlusRankOne};
use crate::error::{Error, Result};

pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `out = A·x`
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// `out = Aᵀ·x`
    fn apply_transpose(&self, x: &[f64], out: &mut [f64]);
}

/// Max absolute column sum and max absolute row sum.
pub trait EntrywiseNorms {
    fn one_norm(&self) -> f64;
    fn infinity_norm(&self) -> f64;
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        DenseMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.as_row_major()[i * n..(i + 1) * n];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        out.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            let row = &self.as_row_major()[i * n..(i + 1) * n];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * xi;
            }
        }
    }
}

impl EntrywiseNorms for DenseMatrix {
    fn one_norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn infinity_norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        SparseMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            *o = c.iter().zip(v).map(|(&j, a)| a * x[j]).sum();
        }
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, j, a) in self.iter() {
            out[j] += a * x[i];
        }
    }
}

impl EntrywiseNorms for SparseMatrix {
    fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.dim()];
        for (_, j, a) in self.iter() {
            sums[j] += a.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    fn infinity_norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.row(i).1.iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl LinearOperator for SparsePlusRankOne {
    fn dim(&self) -> usize {
        SparsePlusRankOne::dim(self)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.sparse.apply(x, out);
        let vx: f64 = self.v.iter().zip(x).map(|(a, b)| a * b).sum();
        for (o, u) in out.iter_mut().zip(&self.u) {
            *o -= u * vx;
        }
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        self.sparse.apply_transpose(x, out);
        let ux: f64 = self.u.iter().zip(x).map(|(a, b)| a * b).sum();
        for (o, v) in out.iter_mut().zip(&self.v) {
            *o -= v * ux;
        }
    }
}

// Off the sparse pattern an entry is just −u_i·v_j, so each abs sum is the
// dense rank-one sum corrected at the stored entries.
impl EntrywiseNorms for SparsePlusRankOne {
    fn one_norm(&self) -> f64 {
        let su: f64 = self.u.iter().map(|x| x.abs()).sum();
        let mut sums: Vec<f64> = self.v.iter().map(|v| v.abs() * su).collect();
        for (i, j, s) in self.sparse.iter() {
            let r = self.u[i] * self.v[j];
            sums[j] += (s - r).abs() - r.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    fn infinity_norm(&self) -> f64 {
        let sv: f64 = self.v.iter().map(|x| x.abs()).sum();
        let mut sums: Vec<f64> = self.u.iter().map(|u| u.abs() * sv).collect();
        for (i, j, s) in self.sparse.iter() {
            let r = self.u[i] * self.v[j];
            sums[i] += (s - r).abs() - r.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }
}

/// `A + Aᵀ` for a wrapped operator.
pub struct Symmetrized<'a, A: ?Sized>(pub &'a A);

impl<A: LinearOperator + ?Sized> LinearOperator for Symmetrized<'_, A> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut tmp = vec![0.0; x.len()];
        self.0.apply(x, out);
        self.0.apply_transpose(x, &mut tmp);
        for (o, t) in out.iter_mut().zip(tmp) {
            *o += t;
        }
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        self.apply(x, out);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    /// Stop when the Ritz residual of the top pair of `AᵀA` is at most `tol·θ`.
    pub tol: f64,
    /// Cap on products with `AᵀA`.
    pub max_iterations: usize,
    /// Krylov basis size before restarting from the current Ritz vector.
    pub krylov_dim: usize,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 20_000,
            krylov_dim: 60,
            seed: 0x5eed,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

// Largest eigenpair of the k×k symmetric tridiagonal (alpha, beta).
fn top_ritz_pair(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = nalgebra::DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = nalgebra::SymmetricEigen::new(t);
    let (best, theta) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty tridiagonal");
    (theta, eig.eigenvectors.column(best).iter().copied().collect())
}

/// Largest singular value of `a`, from restarted Lanczos on `AᵀA` with full
/// reorthogonalization.
pub fn spectral_norm<A: LinearOperator + ?Sized>(a: &A, config: &SpectralConfig) -> Result<f64> {
    let n = a.dim();
    if n == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut start);
    let max_dim = config.krylov_dim.clamp(1, n);
    let mut ax = vec![0.0; n];
    let mut total = 0;
    loop {
        let mut basis = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            let k = basis.len() - 1;
            let mut w = vec![0.0; n];
            a.apply(&basis[k], &mut ax);
            a.apply_transpose(&ax, &mut w);
            total += 1;
            let ak = dot(&w, &basis[k]);
            alpha.push(ak);
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
                }
            }
            let bk = dot(&w, &w).sqrt();
            let (theta, s) = top_ritz_pair(&alpha, &beta);
            let estimate = theta.max(0.0);
            let bound = bk * s[k].abs();
            // bk ≈ 0: the Krylov space is invariant and θ is exact
            let scale = alpha.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if bound <= config.tol * theta || bk <= 1e-14 * scale || scale == 0.0 {
                return Ok(estimate.sqrt());
            }
            if total >= config.max_iterations {
                return Err(Error::PowerIteration {
                    iterations: total,
                    estimate: estimate.sqrt(),
                });
            }
            if basis.len() == max_dim {
                // restart from the Ritz vector
                start = vec![0.0; n];
                for (v, &c) in basis.iter().zip(&s) {
                    start.iter_mut().zip(v).for_each(|(x, vi)| *x += c * vi);
                }
                normalize(&mut start);
                break;
            }
            beta.push(bk);
            w.iter_mut().for_each(|x| *x /= bk);
            basis.push(w);
        }
    }
}

/// Spectral radius of the symmetric matrix `A + Aᵀ`.
pub fn symmetric_part_radius<A: LinearOperator + ?Sized>(a: &A, config: &SpectralConfig) -> Result<f64> {
    spectral_norm(&Symmetrized(a), config)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorms {
    pub spectral: f64,
    pub one: f64,
    pub infinity: f64,
}

pub fn operator_norms<A>(a: &A, config: &SpectralConfig) -> Result<OperatorNorms>
where
    A: LinearOperator + EntrywiseNorms + ?Sized,
{
    Ok(OperatorNorms {
        spectral: spectral_norm(a, config)?,
        one: a.one_norm(),
        infinity: a.infinity_norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_and_diagonal() {
        let cfg = SpectralConfig::default();
        let n = operator_norms(&DenseMatrix::identity(5), &cfg).unwrap();
        assert_relative_eq!(n.spectral, 1.0, epsilon = 1e-12);
        assert_eq!((n.one, n.infinity), (1.0, 1.0));
        let n = operator_norms(&DenseMatrix::from_diagonal(&[3.0, -4.0]), &cfg).unwrap();
        assert_relative_eq!(n.spectral, 4.0, epsilon = 1e-10);
        assert_eq!((n.one, n.infinity), (4.0, 4.0));
    }

    #[test]
    fn zero_matrix() {
        let cfg = SpectralConfig::default();
        assert_eq!(spectral_norm(&DenseMatrix::zeros(4), &cfg).unwrap(), 0.0);
        assert_eq!(spectral_norm(&SparseMatrix::zeros(4), &cfg).unwrap(), 0.0);
    }

    #[test]
    fn rank_one_entrywise_norms_match_dense() {
        let s = SparseMatrix::from_rows(vec![
            vec![(0, 1.0), (2, -2.0)],
            vec![(1, 0.25)],
            vec![(0, 3.0), (1, 1.0)],
        ]);
        let m = SparsePlusRankOne {
            sparse: s,
            u: vec![0.5, -1.0, 2.0],
            v: vec![1.0, 0.5, -0.25],
        };
        let d = m.to_dense();
        assert_relative_eq!(m.one_norm(), d.one_norm(), epsilon = 1e-14);
        assert_relative_eq!(m.infinity_norm(), d.infinity_norm(), epsilon = 1e-14);
        let cfg = SpectralConfig::default();
        assert_relative_eq!(
            spectral_norm(&m, &cfg).unwrap(),
            spectral_norm(&d, &cfg).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn symmetric_radius_of_rotation() {
        // J + Jᵀ = 0 for a rotation generator
        let j = DenseMatrix::from_row_major(2, vec![0.0, 3.0, -3.0, 0.0]);
        let cfg = SpectralConfig::default();
        assert_eq!(symmetric_part_radius(&j, &cfg).unwrap(), 0.0);
        assert_relative_eq!(spectral_norm(&j, &cfg).unwrap(), 3.0, epsilon = 1e-10);
        // symmetric part with eigenvalues ±2 is caught through its square
        let k = DenseMatrix::from_diagonal(&[1.0, -1.0]);
        assert_relative_eq!(symmetric_part_radius(&k, &cfg).unwrap(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn clustered_top_singular_values() {
        let d = [0.920309, 0.920198, 0.910199, 0.904140, 0.894502, 0.886805];
        let cfg = SpectralConfig { tol: 1e-12, krylov_dim: 3, ..Default::default() };
        assert_relative_eq!(spectral_norm(&DenseMatrix::from_diagonal(&d), &cfg).unwrap(), d[0], max_relative = 1e-12);
    }

    #[test]
    fn iteration_cap_reports_estimate() {
        let d: Vec<f64> = (0..40).map(|i| 1.0 - 1e-9 * i as f64).collect();
        let m = DenseMatrix::from_diagonal(&d);
        let cfg = SpectralConfig {
            tol: 0.0,
            max_iterations: 25,
            krylov_dim: 10,
            ..Default::default()
        };
        match spectral_norm(&m, &cfg) {
            Err(Error::PowerIteration { iterations, estimate }) => {
                assert_eq!(iterations, 25);
                assert!(estimate > 0.99);
            }
            other => panic!("{other:?}"),
        }
    }
}
