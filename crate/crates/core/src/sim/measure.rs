use serde::{Deserialize, Serialize};

use super::lru::simulate_rnd_lru;
use super::stats::EmpiricalStats;
use super::trace::{generate_irm_trace, Trace};
use super::ttl::simulate_ttl_similarity;
use crate::acceptance::Acceptance;
use crate::catalog::{NeighborhoodIndex, Popularity};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    RndLru {
        index: &'a NeighborhoodIndex,
        acceptance: &'a Acceptance,
        capacity: usize,
    },
    TtlSimilarity {
        index: &'a NeighborhoodIndex,
        acceptance: &'a Acceptance,
        timers: &'a [f64],
    },
}

#[derive(Debug, Clone, Copy)]
pub enum TraceSource<'a> {
    /// One trace shared by every repetition; only acceptance draws vary.
    Fixed(&'a Trace),
    /// A fresh IRM trace per repetition, seeded by that repetition's seed.
    Irm { popularity: &'a Popularity, length: usize },
}

/// Leading part of each trace that updates state but is not measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Warmup {
    Fraction(f64),
    Requests(usize),
}

impl Default for Warmup {
    fn default() -> Self {
        Warmup::Fraction(0.1)
    }
}

impl Warmup {
    pub fn requests(self, len: usize) -> usize {
        match self {
            Warmup::Fraction(f) => ((len as f64) * f.clamp(0.0, 1.0)).floor() as usize,
            Warmup::Requests(k) => k.min(len),
        }
    }
}

/// Seed of the acceptance stream paired with a trace seed.
pub fn acceptance_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(29) ^ 0xa076_1d64_78bd_642f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub hit_rate: f64,
    /// Normal-approximation 95% half-width across repetitions.
    pub half_width: f64,
    pub repetitions: usize,
    pub seeds: Vec<u64>,
    pub hit_rates: Vec<f64>,
    /// Per-item occupancy averaged over repetitions.
    pub occupancy: Vec<f64>,
    pub warmup_discarded: usize,
}

pub fn mean_and_half_width(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

fn run_once(policy: Policy<'_>, trace: &Trace, seed: u64, warmup: Warmup) -> Result<EmpiricalStats> {
    let w = warmup.requests(trace.len());
    let s = acceptance_seed(seed);
    match policy {
        Policy::RndLru {
            index,
            acceptance,
            capacity,
        } => simulate_rnd_lru(index, acceptance, trace, capacity, s, w),
        Policy::TtlSimilarity {
            index,
            acceptance,
            timers,
        } => simulate_ttl_similarity(index, acceptance, trace, timers, s, w),
    }
}

/// Runs one simulation per seed and aggregates the hit rates.
pub fn measure_policy(
    policy: Policy<'_>,
    source: TraceSource<'_>,
    seeds: &[u64],
    warmup: Warmup,
    exec: Execution,
) -> Result<Measurement> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("at least one repetition is required".into()));
    }
    let timestamps = matches!(policy, Policy::TtlSimilarity { .. });
    let runs = exec.map_slice(seeds, |&seed| match source {
        TraceSource::Fixed(trace) => run_once(policy, trace, seed, warmup),
        TraceSource::Irm { popularity, length } => {
            let trace = generate_irm_trace(popularity, length, seed, timestamps)?;
            run_once(policy, &trace, seed, warmup)
        }
    });
    let runs: Vec<EmpiricalStats> = runs.into_iter().collect::<Result<_>>()?;
    let hit_rates: Vec<f64> = runs.iter().map(|r| r.hit_rate).collect();
    let (hit_rate, half_width) = mean_and_half_width(&hit_rates);
    let items = runs[0].occupancy.len();
    let occupancy = (0..items)
        .map(|i| runs.iter().map(|r| r.occupancy[i]).sum::<f64>() / runs.len() as f64)
        .collect();
    Ok(Measurement {
        hit_rate,
        half_width,
        repetitions: seeds.len(),
        seeds: seeds.to_vec(),
        hit_rates,
        occupancy,
        warmup_discarded: runs[0].warmup_discarded,
    })
}
