use serde::{Deserialize, Serialize};

use super::lru::Outcome;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub measured: u64,
    pub exact_hits: u64,
    pub approximate_hits: u64,
    pub hit_rate: f64,
    /// Hit counts by requested item.
    pub per_item_exact: Vec<u64>,
    pub per_item_approximate: Vec<u64>,
    pub occupancy: Vec<f64>,
    pub warmup_discarded: usize,
}

impl EmpiricalStats {
    pub(crate) fn new(items: usize, warmup: usize) -> Self {
        Self {
            measured: 0,
            exact_hits: 0,
            approximate_hits: 0,
            hit_rate: 0.0,
            per_item_exact: vec![0; items],
            per_item_approximate: vec![0; items],
            occupancy: vec![0.0; items],
            warmup_discarded: warmup,
        }
    }

    pub(crate) fn record(&mut self, item: usize, outcome: Outcome) {
        self.measured += 1;
        match outcome {
            Outcome::Exact => {
                self.exact_hits += 1;
                self.per_item_exact[item] += 1;
            }
            Outcome::Approximate { .. } => {
                self.approximate_hits += 1;
                self.per_item_approximate[item] += 1;
            }
            Outcome::Miss { .. } => {}
        }
        self.hit_rate = self.hits() as f64 / self.measured as f64;
    }

    pub fn hits(&self) -> u64 {
        self.exact_hits + self.approximate_hits
    }
}

/// Fraction of measured request epochs at which each item was cached.
///
/// An item inserted while serving request `a` and evicted while serving
/// request `b` is seen by the arrivals `a+1..=b`.
pub(crate) struct OccupancyCounter {
    since: Vec<usize>,
    counts: Vec<u64>,
    window: (usize, usize),
}

impl OccupancyCounter {
    pub(crate) fn new(items: usize, warmup: usize, len: usize) -> Self {
        Self {
            since: vec![0; items],
            counts: vec![0; items],
            window: (warmup, len),
        }
    }

    pub(crate) fn enter(&mut self, item: usize, t: usize) {
        self.since[item] = t + 1;
    }

    pub(crate) fn leave(&mut self, item: usize, t: usize) {
        let lo = self.since[item].max(self.window.0);
        let hi = (t + 1).min(self.window.1);
        if hi > lo {
            self.counts[item] += (hi - lo) as u64;
        }
    }

    pub(crate) fn finish(mut self, still_cached: impl Iterator<Item = usize>) -> Vec<f64> {
        let end = self.window.1;
        for i in still_cached {
            self.leave(i, end - 1);
        }
        let measured = (self.window.1 - self.window.0) as f64;
        self.counts
            .iter()
            .map(|&c| if measured > 0.0 { c as f64 / measured } else { 0.0 })
            .collect()
    }
}
