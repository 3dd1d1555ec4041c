//! Damped fixed-point iteration `o ← (1−β)·G(o) + β·o` on the capped simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    g, hit_report, rnd_ttl_params, solve_characteristic_time, HitReport, ModelInput,
    OccupancyVector, RndTtlParams, DEFAULT_TC_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub beta: f64,
    pub max_iterations: usize,
    /// Threshold on `‖o(j) − o(j−1)‖_∞`.
    pub occupancy_tol: f64,
    pub tc_tol: f64,
    /// Keep `o(j)` and `h(j)` for every iteration in the trace.
    pub keep_vectors: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            max_iterations: 100,
            occupancy_tol: 1e-8,
            tc_tol: DEFAULT_TC_TOL,
            keep_vectors: true,
        }
    }
}

impl SolverConfig {
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be positive".into()));
        }
        if !(self.occupancy_tol >= 0.0) || !(self.tc_tol >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Timer that produced `o(j)`; for `j = 0` the LRU characteristic time.
    pub characteristic_time: f64,
    pub hit_rate: f64,
    /// `‖o(j) − o(j−1)‖_∞`, zero at `j = 0`.
    pub step_norm: f64,
    /// `‖o(j) − G(o(j))‖_∞`.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupancy: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hit_probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
}

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    StepBelowTolerance,
    MaxIterations,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub occupancy: OccupancyVector,
    pub hits: HitReport,
    /// `t_C` of the final occupancy vector.
    pub characteristic_time: f64,
    pub params: RndTtlParams,
    pub trace: SolverTrace,
    pub converged: bool,
    pub stop: StopReason,
}

/// `G(o) = g(R(o), E(o), t_C(o))` together with the RND-TTL parameters used.
pub fn map_g(input: &ModelInput<'_>, o: &[f64], tc_tol: f64, hint: Option<f64>) -> Result<(Vec<f64>, RndTtlParams)> {
    let params = rnd_ttl_params(input, o, tc_tol, hint)?;
    let next = params.occupancies();
    Ok((next, params))
}

/// `G_β(o) = (1−β)·G(o) + β·o`.
pub fn map_g_beta(input: &ModelInput<'_>, o: &[f64], beta: f64, tc_tol: f64) -> Result<Vec<f64>> {
    let (next, _) = map_g(input, o, tc_tol, None)?;
    Ok(damp(&next, o, beta))
}

fn damp(next: &[f64], prev: &[f64], beta: f64) -> Vec<f64> {
    next.iter()
        .zip(prev)
        .map(|(&gn, &on)| (1.0 - beta) * gn + beta * on)
        .collect()
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// The LRU starting point `o(0)_n = 1 − e^{−λ_n t_C(0)}` and `t_C(0)`.
pub fn lru_start(input: &ModelInput<'_>, tc_tol: f64) -> Result<(Vec<f64>, f64)> {
    let t0 = solve_characteristic_time(input.rates, input.rates, input.capacity, tc_tol, None)?;
    let o = input.rates.iter().map(|&l| g(l, l, t0)).collect();
    Ok((o, t0))
}

fn make_record(input: &ModelInput<'_>, keep: bool, iteration: usize, timer: f64, step_norm: f64, o: &[f64]) -> IterationRecord {
    let hits = hit_report(input, o);
    IterationRecord {
        iteration,
        characteristic_time: timer,
        hit_rate: hits.hit_rate,
        step_norm,
        residual: f64::NAN,
        occupancy: keep.then(|| o.to_vec()),
        hit_probs: keep.then_some(hits.per_item),
    }
}

pub fn solve(input: &ModelInput<'_>, config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    let at = |iteration: usize| {
        move |source: Error| Error::SolverIteration {
            iteration,
            source: Box::new(source),
        }
    };
    let keep = config.keep_vectors;
    let (mut o, t0) = lru_start(input, config.tc_tol).map_err(at(0))?;
    let mut records = vec![make_record(input, keep, 0, t0, 0.0, &o)];
    let (mut image, mut params) = map_g(input, &o, config.tc_tol, Some(t0)).map_err(at(1))?;
    let mut stop = StopReason::MaxIterations;
    for j in 1..=config.max_iterations {
        records[j - 1].residual = sup_distance(&o, &image);
        let next = damp(&image, &o, config.beta);
        let step = sup_distance(&next, &o);
        o = next;
        records.push(make_record(input, keep, j, params.timer, step, &o));
        // G(o(j)) fills the residual of record j and feeds iteration j + 1
        let (img, p) = map_g(input, &o, config.tc_tol, Some(params.timer)).map_err(at(j + 1))?;
        image = img;
        params = p;
        if step <= config.occupancy_tol {
            stop = StopReason::StepBelowTolerance;
            break;
        }
    }
    let last = records.len() - 1;
    records[last].residual = sup_distance(&o, &image);
    let hits = hit_report(input, &o);
    Ok(Solution {
        occupancy: OccupancyVector::new(o, input.capacity, f64::INFINITY)?,
        hits,
        characteristic_time: params.timer,
        params,
        trace: SolverTrace { records },
        converged: stop == StopReason::StepBelowTolerance,
        stop,
    })
}
