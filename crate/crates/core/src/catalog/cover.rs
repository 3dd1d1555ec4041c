//! Cover condition: for every `M ⊆ I` with `|M| ≤ C`, `|∪_{m∈M} N(m)| < N − C`.
//!
//! When it holds, the capacity equation has a unique root on the whole capped
//! simplex. It is only sufficient, so callers treat a failure as a warning.

use serde::{Deserialize, Serialize};

use super::NeighborhoodIndex;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMode {
    Exact,
    Heuristic,
}

/// Size limits for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverBudget {
    pub max_items: usize,
    pub max_capacity: usize,
}

impl Default for CoverBudget {
    fn default() -> Self {
        Self {
            max_items: 30,
            max_capacity: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum CoverVerdict {
    Holds,
    /// A set of `C` items whose open neighborhoods cover at least `N − C` items.
    Fails { witness: Vec<usize>, coverage: usize },
    /// Greedy found no violating set; `coverage` only lower-bounds the maximum.
    Unknown { witness: Vec<usize>, coverage: usize },
}

pub fn check_cover_condition(
    index: &NeighborhoodIndex,
    capacity: usize,
    mode: CoverMode,
    budget: CoverBudget,
) -> Result<CoverVerdict> {
    let n = index.len();
    if capacity == 0 || capacity >= n {
        return Err(Error::CapacityOutOfRange {
            capacity: capacity as f64,
            items: n,
        });
    }
    let target = n - capacity;
    match mode {
        CoverMode::Exact => {
            if n > budget.max_items || capacity > budget.max_capacity || n > 64 {
                return Err(Error::BudgetExceeded(format!(
                    "exact cover check limited to N <= {} and C <= {}, got N = {n}, C = {capacity}",
                    budget.max_items.min(64),
                    budget.max_capacity
                )));
            }
            let masks: Vec<u64> = (0..n)
                .map(|i| index.neighbors(i).iter().fold(0u64, |acc, &m| acc | (1 << m)))
                .collect();
            let mut chosen = Vec::with_capacity(capacity);
            match search(&masks, capacity, 0, 0, target, &mut chosen) {
                Some((witness, coverage)) => Ok(CoverVerdict::Fails { witness, coverage }),
                None => Ok(CoverVerdict::Holds),
            }
        }
        CoverMode::Heuristic => {
            let mut covered = vec![false; n];
            let mut count = 0usize;
            let mut witness = Vec::with_capacity(capacity);
            let mut chosen = vec![false; n];
            for _ in 0..capacity {
                let best = (0..n)
                    .filter(|&i| !chosen[i])
                    .map(|i| {
                        let gain = index.neighbors(i).iter().filter(|&&m| !covered[m]).count();
                        (gain, i)
                    })
                    // max gain, smallest id
                    .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
                let Some((_, pick)) = best else { break };
                witness.push(pick);
                chosen[pick] = true;
                for &m in index.neighbors(pick) {
                    if !covered[m] {
                        covered[m] = true;
                        count += 1;
                    }
                }
            }
            if count >= target {
                Ok(CoverVerdict::Fails {
                    witness,
                    coverage: count,
                })
            } else {
                Ok(CoverVerdict::Unknown {
                    witness,
                    coverage: count,
                })
            }
        }
    }
}

// Depth-first over size-`remaining` subsets of `start..`; returns the first
// subset whose union reaches `target`.
fn search(
    masks: &[u64],
    remaining: usize,
    start: usize,
    union: u64,
    target: usize,
    chosen: &mut Vec<usize>,
) -> Option<(Vec<usize>, usize)> {
    if remaining == 0 {
        let coverage = union.count_ones() as usize;
        return (coverage >= target).then(|| (chosen.clone(), coverage));
    }
    for i in start..=masks.len() - remaining {
        chosen.push(i);
        if let Some(hit) = search(masks, remaining - 1, i + 1, union | masks[i], target, chosen) {
            return Some(hit);
        }
        chosen.pop();
    }
    None
}
