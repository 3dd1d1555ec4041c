//! Closed-form quantities of the RND-TTL cache model.
//!
//! Each item behaves as an independent TTL item with its own insertion rate
//! `λ^i_n` (while out of cache), refresh rate `λ^r_n` (while cached) and a
//! common timer `T`. The rates are functions of the occupancy vector `o`
//! through the neighborhood structure; `T` is fixed by the capacity
//! constraint `Σ_n g(λ^r_n, λ^i_n, T) = C`.

mod occupancy;
pub(crate) mod root;

pub use occupancy::{occupancy_g, occupancy_g_partials, GradientG};
pub(crate) use occupancy::{g, g_partials};

use serde::{Deserialize, Serialize};

use crate::acceptance::Acceptance;
use crate::catalog::NeighborhoodIndex;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Default tolerance on `|F(o, T)|` for the characteristic-time solve.
pub const DEFAULT_TC_TOL: f64 = 1e-10;

/// Everything the model needs besides the occupancy vector.
#[derive(Debug, Clone, Copy)]
pub struct ModelInput<'a> {
    pub index: &'a NeighborhoodIndex,
    pub acceptance: &'a Acceptance,
    pub rates: &'a [f64],
    pub capacity: f64,
    pub exec: Execution,
}

impl<'a> ModelInput<'a> {
    pub fn new(
        index: &'a NeighborhoodIndex,
        acceptance: &'a Acceptance,
        rates: &'a [f64],
        capacity: f64,
    ) -> Result<Self> {
        let n = index.len();
        if rates.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} request rates for {n} items",
                rates.len()
            )));
        }
        if acceptance.values().len() != index.entries() {
            return Err(Error::InvalidParameter(
                "acceptance table was built for a different neighborhood index".into(),
            ));
        }
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidParameter("request rates must be finite and nonnegative".into()));
        }
        if !(capacity > 0.0 && capacity < n as f64) {
            return Err(Error::CapacityOutOfRange { capacity, items: n });
        }
        Ok(Self {
            index,
            acceptance,
            rates,
            capacity,
            exec: Execution::default(),
        })
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_capacity(mut self, capacity: f64) -> Result<Self> {
        if !(capacity > 0.0 && capacity < self.len() as f64) {
            return Err(Error::CapacityOutOfRange {
                capacity,
                items: self.len(),
            });
        }
        self.capacity = capacity;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }
}

/// A point of the capped simplex `Δ_C = {o : 0 ≤ o_n ≤ 1, Σ o_n = C}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyVector {
    values: Vec<f64>,
    capacity: f64,
}

impl OccupancyVector {
    pub fn new(values: Vec<f64>, capacity: f64, tol: f64) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(format!(
                "occupancy of item {i} is {} (outside [0, 1])",
                values[i]
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - capacity).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "occupancies sum to {sum}, expected {capacity}"
            )));
        }
        Ok(Self { values, capacity })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }
}

/// Tuned RND-TTL parameters `(λ^i, λ^r, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RndTtlParams {
    pub insertion: Vec<f64>,
    pub refresh: Vec<f64>,
    pub timer: f64,
}

impl RndTtlParams {
    /// `g(λ^r_n, λ^i_n, T)` for every item.
    pub fn occupancies(&self) -> Vec<f64> {
        self.refresh
            .iter()
            .zip(&self.insertion)
            .map(|(&r, &i)| g(r, i, self.timer))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitReport {
    pub per_item: Vec<f64>,
    pub hit_rate: f64,
}

/// Insertion probabilities
/// `p^i_n = Π_{m∈N(n)}(1−o_m) + Σ_{m∈N(n)} (1−q_m(n))·o_m·Π_{j∈N_<m(n)}(1−o_j)`.
pub fn insertion_probs(
    index: &NeighborhoodIndex,
    acceptance: &Acceptance,
    o: &[f64],
    exec: Execution,
) -> Vec<f64> {
    exec.map_range(index.len(), |n| {
        let mut prefix = 1.0;
        let mut p = 0.0;
        for (&m, &q) in index.neighbors(n).iter().zip(acceptance.served_by(index, n)) {
            p += (1.0 - q) * o[m] * prefix;
            prefix *= 1.0 - o[m];
        }
        p + prefix
    })
}

/// `E(o) = λ ⊙ p^i(o)`.
pub fn insertion_rates(input: &ModelInput<'_>, o: &[f64]) -> Vec<f64> {
    let p = insertion_probs(input.index, input.acceptance, o, input.exec);
    p.iter().zip(input.rates).map(|(p, l)| p * l).collect()
}

// prefix[e] = Π_{i<k}(1 − o_{row[i]}) for entry e at position k of its row.
pub(crate) fn row_prefix_products(index: &NeighborhoodIndex, o: &[f64], exec: Execution) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = exec.map_range(index.len(), |n| {
        let mut acc = 1.0;
        index
            .neighbors(n)
            .iter()
            .map(|&m| {
                let before = acc;
                acc *= 1.0 - o[m];
                before
            })
            .collect()
    });
    rows.concat()
}

/// Refresh rates
/// `R_n(o) = λ_n + Σ_{m∈N(n)} q_n(m)·λ_m·Π_{j∈N[m], j closer to m than n}(1−o_j)`.
pub fn refresh_rates(input: &ModelInput<'_>, o: &[f64]) -> Vec<f64> {
    let index = input.index;
    let prefix = row_prefix_products(index, o, input.exec);
    input.exec.map_range(index.len(), |n| {
        let mut r = input.rates[n];
        for (k, (&m, &pos)) in index
            .neighbors(n)
            .iter()
            .zip(index.reverse_positions(n))
            .enumerate()
        {
            let q = input.acceptance.serves(index, n, k);
            if q == 0.0 {
                continue;
            }
            r += q * input.rates[m] * (1.0 - o[m]) * prefix[index.entry_range(m).start + pos];
        }
        r
    })
}

/// `F(o, T) = Σ_n g(R_n, E_n, T) − C` for precomputed rates.
pub fn capacity_residual(refresh: &[f64], insertion: &[f64], timer: f64, capacity: f64) -> f64 {
    refresh
        .iter()
        .zip(insertion)
        .map(|(&r, &i)| g(r, i, timer))
        .sum::<f64>()
        - capacity
}

/// Root `T` of `F(o, ·)` with `|F| ≤ tol`, searching upward from `hint`.
pub fn solve_characteristic_time(
    refresh: &[f64],
    insertion: &[f64],
    capacity: f64,
    tol: f64,
    hint: Option<f64>,
) -> Result<f64> {
    let positive = insertion.iter().filter(|&&x| x > 0.0).count();
    // F(o, ∞) = #{n : E_n > 0} − C
    if (positive as f64) <= capacity {
        return Err(Error::NoCharacteristicTime { positive, capacity });
    }
    let hint = hint.unwrap_or_else(|| {
        // LRU-like scale: C / Σ E is the small-T solution of Σ E_n T = C
        let total: f64 = insertion.iter().sum();
        capacity / total
    });
    root::solve_nondecreasing(
        |t| {
            let mut value = -capacity;
            let mut slope = 0.0;
            for (&r, &i) in refresh.iter().zip(insertion) {
                value += g(r, i, t);
                slope += g_partials(r, i, t).d_timer;
            }
            (value, slope)
        },
        hint,
        tol,
    )
    .map_err(|_| Error::NoCharacteristicTime { positive, capacity })
}

/// Rates `E(o)`, `R(o)` and the characteristic time `t_C(o)`.
pub fn rnd_ttl_params(input: &ModelInput<'_>, o: &[f64], tol: f64, hint: Option<f64>) -> Result<RndTtlParams> {
    let insertion = insertion_rates(input, o);
    let refresh = refresh_rates(input, o);
    let timer = solve_characteristic_time(&refresh, &insertion, input.capacity, tol, hint)?;
    Ok(RndTtlParams {
        insertion,
        refresh,
        timer,
    })
}

/// RND-TTL hit probabilities `h_n = o_n + (1 − o_n)(1 − p^i_n)`.
pub fn hit_probs_from_insertion(o: &[f64], insertion_probs: &[f64]) -> Vec<f64> {
    o.iter()
        .zip(insertion_probs)
        .map(|(&o, &p)| o + (1.0 - o) * (1.0 - p))
        .collect()
}

/// Hit probabilities
/// `h_n = o_n + Σ_{m∈N(n)} q_m(n)·o_m·Π_{j∈N[n], j closer to n than m}(1−o_j)`.
pub fn item_hit_probs(
    index: &NeighborhoodIndex,
    acceptance: &Acceptance,
    o: &[f64],
    exec: Execution,
) -> Vec<f64> {
    let h = exec.map_range(index.len(), |n| {
        let mut prefix = 1.0 - o[n];
        let mut h = o[n];
        for (&m, &q) in index.neighbors(n).iter().zip(acceptance.served_by(index, n)) {
            h += q * o[m] * prefix;
            prefix *= 1.0 - o[m];
        }
        h
    });
    #[cfg(debug_assertions)]
    {
        let p = insertion_probs(index, acceptance, o, exec);
        let alt = hit_probs_from_insertion(o, &p);
        for (a, b) in h.iter().zip(&alt) {
            debug_assert!((a - b).abs() <= 1e-12, "hit-probability forms disagree: {a} vs {b}");
        }
    }
    h
}

/// `H = Σ_n λ_n h_n`.
pub fn aggregate_hit_rate(rates: &[f64], hits: &[f64]) -> f64 {
    rates.iter().zip(hits).map(|(l, h)| l * h).sum()
}

pub fn hit_report(input: &ModelInput<'_>, o: &[f64]) -> HitReport {
    let per_item = item_hit_probs(input.index, input.acceptance, o, input.exec);
    let hit_rate = aggregate_hit_rate(input.rates, &per_item);
    HitReport { per_item, hit_rate }
}

/// Largest catalog for which the full product-form distribution is built.
pub const STATE_ENUMERATION_LIMIT: usize = 20;

/// `π_S = Π_{n∈S} o_n · Π_{m∉S} (1 − o_m)`.
pub fn state_probability(o: &[f64], state: &[usize]) -> Result<f64> {
    let mut member = vec![false; o.len()];
    for &s in state {
        if s >= o.len() {
            return Err(Error::UnknownItem { id: s, items: o.len() });
        }
        member[s] = true;
    }
    Ok(o
        .iter()
        .zip(&member)
        .map(|(&p, &inside)| if inside { p } else { 1.0 - p })
        .product())
}

/// The whole distribution, indexed by bitmask of cached items.
pub fn state_distribution(o: &[f64]) -> Result<Vec<f64>> {
    if o.len() > STATE_ENUMERATION_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "state enumeration limited to {STATE_ENUMERATION_LIMIT} items, got {}",
            o.len()
        )));
    }
    Ok((0u32..1 << o.len())
        .map(|mask| {
            o.iter()
                .enumerate()
                .map(|(i, &p)| if mask >> i & 1 == 1 { p } else { 1.0 - p })
                .product()
        })
        .collect())
}

#[cfg(test)]
mod tests;
