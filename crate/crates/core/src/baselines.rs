//! Reference estimators: the LRU characteristic-time approximation, its
//! neighborhood-aggregated variant, and static max-coverage allocations.

use serde::{Deserialize, Serialize};

use crate::catalog::NeighborhoodIndex;
use crate::error::{Error, Result};
use crate::model::root::solve_nondecreasing;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LruEstimate {
    pub hit_probs: Vec<f64>,
    pub characteristic_time: f64,
    pub hit_rate: f64,
}

/// `t` with `Σ (1 − e^{−r_n t}) = C`.
fn che_time(rates: &[f64], capacity: f64) -> Result<f64> {
    let positive = rates.iter().filter(|&&r| r > 0.0).count();
    if !(capacity > 0.0 && capacity < rates.len() as f64) {
        return Err(Error::CapacityOutOfRange {
            capacity,
            items: rates.len(),
        });
    }
    if positive as f64 <= capacity {
        return Err(Error::NoCharacteristicTime { positive, capacity });
    }
    let total: f64 = rates.iter().sum();
    solve_nondecreasing(
        |t| {
            let mut f = -capacity;
            let mut df = 0.0;
            for &r in rates {
                let e = (-r * t).exp();
                f += 1.0 - e;
                df += r * e;
            }
            (f, df)
        },
        capacity / total,
        0.0,
    )
}

fn estimate(rates: &[f64], served: &[f64], t: f64) -> LruEstimate {
    let hit_probs: Vec<f64> = served.iter().map(|r| -(-r * t).exp_m1()).collect();
    let hit_rate = rates.iter().zip(&hit_probs).map(|(l, h)| l * h).sum();
    LruEstimate {
        hit_probs,
        characteristic_time: t,
        hit_rate,
    }
}

/// LRU hit probabilities `h_n = 1 − e^{−λ_n t_C}`.
pub fn lru_ttl_estimate(rates: &[f64], capacity: f64) -> Result<LruEstimate> {
    let t = che_time(rates, capacity)?;
    Ok(estimate(rates, rates, t))
}

/// LRU driven by the aggregate rates `λ̃_n = Σ_{m∈N[n]} λ_m`, with the
/// capacity constraint applied to the resulting occupancies.
pub fn lru_agg_estimate(index: &NeighborhoodIndex, rates: &[f64], capacity: f64) -> Result<LruEstimate> {
    if rates.len() != index.len() {
        return Err(Error::InvalidParameter(format!(
            "{} rates for {} items",
            rates.len(),
            index.len()
        )));
    }
    let agg: Vec<f64> = (0..index.len())
        .map(|n| index.closed(n).map(|m| rates[m]).sum())
        .collect();
    let t = che_time(&agg, capacity)?;
    Ok(estimate(rates, &agg, t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticAllocation {
    pub chosen: Vec<usize>,
    pub covered_weight: f64,
}

/// Greedy weighted max coverage over closed neighborhoods; ties go to the
/// smallest id.
pub fn greedy_coverage(index: &NeighborhoodIndex, rates: &[f64], capacity: usize) -> StaticAllocation {
    let n = index.len();
    let mut covered = vec![false; n];
    let gain_of = |k: usize, covered: &[bool]| -> f64 { index.closed(k).filter(|&m| !covered[m]).map(|m| rates[m]).sum() };
    let mut gain: Vec<f64> = (0..n).map(|k| gain_of(k, &covered)).collect();
    let mut chosen = Vec::new();
    let mut total = 0.0;
    while chosen.len() < capacity {
        let mut best = None;
        for (k, &g) in gain.iter().enumerate() {
            if g > 0.0 && best.is_none_or(|(_, b)| g > b) {
                best = Some((k, g));
            }
        }
        let Some((c, g)) = best else { break };
        chosen.push(c);
        total += g;
        let newly: Vec<usize> = index.closed(c).filter(|&m| !covered[m]).collect();
        for &m in &newly {
            covered[m] = true;
        }
        // only items whose closed neighborhood meets a newly covered item change
        let mut touched: Vec<usize> = newly.iter().flat_map(|&m| index.closed(m)).collect();
        touched.sort_unstable();
        touched.dedup();
        for k in touched {
            gain[k] = gain_of(k, &covered);
        }
    }
    StaticAllocation {
        chosen,
        covered_weight: total,
    }
}

/// Largest catalog accepted by [`exact_static_optimum`] by default.
pub const EXACT_OPTIMUM_LIMIT: usize = 25;

/// Best coverage by at most `capacity` items, by branch and bound.
pub fn exact_static_optimum(index: &NeighborhoodIndex, rates: &[f64], capacity: usize, max_items: usize) -> Result<StaticAllocation> {
    let n = index.len();
    if n > max_items.min(64) {
        return Err(Error::BudgetExceeded(format!(
            "exact coverage limited to {} items, got {n}",
            max_items.min(64)
        )));
    }
    let masks: Vec<u64> = (0..n)
        .map(|k| index.closed(k).fold(0u64, |acc, m| acc | 1 << m))
        .collect();
    let weight = |mask: u64| -> f64 {
        (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| rates[i]).sum()
    };
    let mut search = Search {
        masks: &masks,
        weight: &weight,
        capacity: capacity.min(n),
        best: (0.0, Vec::new()),
        picks: Vec::new(),
    };
    search.run(0, 0, 0.0);
    let (covered_weight, chosen) = search.best;
    Ok(StaticAllocation { chosen, covered_weight })
}

struct Search<'a, W: Fn(u64) -> f64> {
    masks: &'a [u64],
    weight: &'a W,
    capacity: usize,
    best: (f64, Vec<usize>),
    picks: Vec<usize>,
}

impl<W: Fn(u64) -> f64> Search<'_, W> {
    fn run(&mut self, next: usize, covered: u64, value: f64) {
        if value > self.best.0 {
            self.best = (value, self.picks.clone());
        }
        let left = self.capacity - self.picks.len();
        if left == 0 || next == self.masks.len() {
            return;
        }
        // submodularity: the best `left` marginal gains bound any extension
        let mut gains: Vec<f64> = self.masks[next..]
            .iter()
            .map(|&m| (self.weight)(m & !covered))
            .collect();
        gains.sort_by(|a, b| b.total_cmp(a));
        let bound: f64 = gains.iter().take(left).sum();
        if value + bound <= self.best.0 {
            return;
        }
        for k in next..self.masks.len() {
            let add = self.masks[k] & !covered;
            if add == 0 {
                continue;
            }
            self.picks.push(k);
            self.run(k + 1, covered | add, value + (self.weight)(add));
            self.picks.pop();
        }
    }
}
