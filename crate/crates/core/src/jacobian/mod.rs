//! Analytic Jacobians of `E`, `R`, `G` and `G_β`, operator norms, and the
//! damping interval derived from `γ = ‖J_G‖₂` and `η = ρ(J_G + J_Gᵀ)`.

mod beta;
mod norms;
mod simplex;
mod sparse;
mod tune;

pub use beta::{beta_interval, convex_norm_bound, quadratic_norm_bound, BetaInterval};
pub use norms::{
    operator_norms, spectral_norm, symmetric_part_radius, EntrywiseNorms, LinearOperator,
    OperatorNorms, SpectralConfig, Symmetrized,
};
pub use simplex::sample_capped_simplex;
pub use sparse::{DenseMatrix, SparseMatrix, SparsePlusRankOne};
pub use tune::{tune_beta, FallbackReason, SampleReport, TuneConfig, TuneResult};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{g_partials, rnd_ttl_params, ModelInput, RndTtlParams};

/// `J_E = ∂E/∂o`.
///
/// With `P_k = Π_{i<k}(1−o_{m_i})` and the tail `T_k = (1−q_k)o_{m_k} + (1−o_{m_k})T_{k+1}`,
/// `T_K = 1`, row `n` has `∂E_n/∂o_{m_k} = λ_n P_k ((1−q_k) − T_{k+1})`.
pub fn jacobian_e(input: &ModelInput<'_>, o: &[f64]) -> SparseMatrix {
    let index = input.index;
    let rows = input.exec.map_range(index.len(), |n| {
        let nbrs = index.neighbors(n);
        let q = input.acceptance.served_by(index, n);
        let k = nbrs.len();
        let mut tail = vec![1.0; k + 1];
        for i in (0..k).rev() {
            let om = o[nbrs[i]];
            tail[i] = (1.0 - q[i]) * om + (1.0 - om) * tail[i + 1];
        }
        let mut prefix = 1.0;
        let mut row = Vec::with_capacity(k);
        for i in 0..k {
            row.push((nbrs[i], input.rates[n] * prefix * ((1.0 - q[i]) - tail[i + 1])));
            prefix *= 1.0 - o[nbrs[i]];
        }
        row
    });
    SparseMatrix::from_rows(rows)
}

/// `J_R = ∂R/∂o`.
///
/// Each term of `R_n` is `q_n(m)·λ_m·Π_{j∈S}(1−o_j)` with `S = {m} ∪ {items of N(m) before n}`;
/// its derivative in `o_j` is the leave-one-out product over `S ∖ {j}`.
pub fn jacobian_r(input: &ModelInput<'_>, o: &[f64]) -> SparseMatrix {
    let index = input.index;
    let prefix = crate::model::row_prefix_products(index, o, input.exec);
    let rows = input.exec.map_range(index.len(), |n| {
        let mut row = Vec::new();
        for (k, (&m, &pos)) in index
            .neighbors(n)
            .iter()
            .zip(index.reverse_positions(n))
            .enumerate()
        {
            let a = input.acceptance.serves(index, n, k) * input.rates[m];
            if a == 0.0 {
                continue;
            }
            let start = index.entry_range(m).start;
            let before = &index.neighbors(m)[..pos];
            // leave out m itself
            row.push((m, -a * prefix[start + pos]));
            // leave out before[i]: (1−o_m) · Π_{<i} · Π_{i<·<pos}
            let om = 1.0 - o[m];
            let mut suffix = 1.0;
            for i in (0..pos).rev() {
                row.push((before[i], -a * om * prefix[start + i] * suffix));
                suffix *= 1.0 - o[before[i]];
            }
        }
        row
    });
    SparseMatrix::from_rows(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct JacobianBundle {
    pub j_e: SparseMatrix,
    pub j_r: SparseMatrix,
    pub d_refresh: Vec<f64>,
    pub d_insertion: Vec<f64>,
    pub d_timer: Vec<f64>,
    /// `J_G = L − (∂₃g / Σ∂₃g)·(1ᵀL)` with `L = Diag(∂₁g)J_R + Diag(∂₂g)J_E`.
    pub j_g: SparsePlusRankOne,
    pub params: RndTtlParams,
}

impl JacobianBundle {
    /// `J_{Gβ} = (1−β)J_G + βI`.
    pub fn damped(&self, beta: f64) -> SparsePlusRankOne {
        self.j_g.damped(beta)
    }
}

pub fn jacobian_g(input: &ModelInput<'_>, o: &[f64], tc_tol: f64) -> Result<JacobianBundle> {
    let params = rnd_ttl_params(input, o, tc_tol, None)?;
    let n = input.len();
    let mut d_refresh = Vec::with_capacity(n);
    let mut d_insertion = Vec::with_capacity(n);
    let mut d_timer = Vec::with_capacity(n);
    for i in 0..n {
        let p = g_partials(params.refresh[i], params.insertion[i], params.timer);
        d_refresh.push(p.d_refresh);
        d_insertion.push(p.d_insertion);
        d_timer.push(p.d_timer);
    }
    let total: f64 = d_timer.iter().sum();
    if !(total > 0.0) {
        return Err(Error::SingularJacobian);
    }
    let j_e = jacobian_e(input, o);
    let j_r = jacobian_r(input, o);
    let l = j_r.scale_rows(&d_refresh).add(&j_e.scale_rows(&d_insertion));
    let v = l.column_sums();
    let u = d_timer.iter().map(|d| d / total).collect();
    Ok(JacobianBundle {
        j_g: SparsePlusRankOne { sparse: l, u, v },
        j_e,
        j_r,
        d_refresh,
        d_insertion,
        d_timer,
        params,
    })
}

#[cfg(test)]
mod tests;
