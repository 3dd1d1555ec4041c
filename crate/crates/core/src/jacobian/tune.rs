use serde::{Deserialize, Serialize};

use super::beta::{beta_interval, BetaInterval};
use super::norms::{spectral_norm, symmetric_part_radius, SpectralConfig};
use super::simplex::sample_capped_simplex;
use super::jacobian_g;
use crate::error::Result;
use crate::model::ModelInput;

pub const FALLBACK_BETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneConfig {
    pub samples: usize,
    pub seed: u64,
    pub tc_tol: f64,
    pub power: SpectralConfig,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            samples: 8,
            seed: 1,
            tc_tol: 0.0,
            power: SpectralConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub sample: usize,
    pub interval: BetaInterval,
    /// `‖J_{Gβ}‖₂` at the returned β, when one was checked.
    pub damped_norm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackReason {
    NoUsableSamples,
    NegativeDiscriminant,
    EmptyIntersection,
    NormCheckFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub beta: f64,
    pub verified: bool,
    pub intersection: Option<(f64, f64)>,
    pub samples: Vec<SampleReport>,
    pub skipped: Vec<usize>,
    pub fallback: Option<FallbackReason>,
}

struct Analysed {
    interval: BetaInterval,
    bundle: super::JacobianBundle,
}

fn analyse(input: &ModelInput<'_>, o: &[f64], config: &TuneConfig) -> Result<Analysed> {
    let bundle = jacobian_g(input, o, config.tc_tol)?;
    let gamma = spectral_norm(&bundle.j_g, &config.power)?;
    let eta = symmetric_part_radius(&bundle.j_g, &config.power)?;
    Ok(Analysed {
        interval: beta_interval(gamma, eta),
        bundle,
    })
}

/// Intersects the damping intervals of `config.samples` random occupancy
/// vectors and returns the midpoint once `‖J_{Gβ}‖₂ < 1` is confirmed at
/// every sample; otherwise `β = 0.5` with `verified = false`.
pub fn tune_beta(input: &ModelInput<'_>, config: &TuneConfig) -> Result<TuneResult> {
    let points = sample_capped_simplex(input.len(), input.capacity, config.samples, config.seed)?;
    let inner = input.with_exec(crate::exec::Execution::Sequential);
    let outcomes = input
        .exec
        .map_slice(&points, |o| analyse(&inner, o, config));

    let mut analysed = Vec::new();
    let mut skipped = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(a) => analysed.push((i, a)),
            Err(e) => {
                log::warn!("β tuning: sample {i} skipped: {e}");
                skipped.push(i);
            }
        }
    }
    let mut samples: Vec<SampleReport> = analysed
        .iter()
        .map(|(i, a)| SampleReport {
            sample: *i,
            interval: a.interval,
            damped_norm: None,
        })
        .collect();

    let fallback = |samples, intersection, reason| TuneResult {
        beta: FALLBACK_BETA,
        verified: false,
        intersection,
        samples,
        skipped: skipped.clone(),
        fallback: Some(reason),
    };
    if analysed.is_empty() {
        return Ok(fallback(samples, None, FallbackReason::NoUsableSamples));
    }
    if analysed.iter().any(|(_, a)| a.interval.discriminant < 0.0) {
        return Ok(fallback(samples, None, FallbackReason::NegativeDiscriminant));
    }
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 1.0;
    for (_, a) in &analysed {
        match a.interval.interval {
            Some((x, y)) => {
                lo = lo.max(x);
                hi = hi.min(y);
            }
            None => {
                hi = lo;
                break;
            }
        }
    }
    if lo >= hi {
        return Ok(fallback(samples, None, FallbackReason::EmptyIntersection));
    }
    let beta = 0.5 * (lo + hi);
    let norms = input.exec.map_slice(&analysed, |(_, a)| {
        spectral_norm(&a.bundle.damped(beta), &config.power)
    });
    let mut ok = true;
    for (report, norm) in samples.iter_mut().zip(norms) {
        let norm = norm?;
        ok &= norm < 1.0;
        report.damped_norm = Some(norm);
    }
    if !ok {
        return Ok(fallback(samples, Some((lo, hi)), FallbackReason::NormCheckFailed));
    }
    Ok(TuneResult {
        beta,
        verified: true,
        intersection: Some((lo, hi)),
        samples,
        skipped,
        fallback: None,
    })
}
