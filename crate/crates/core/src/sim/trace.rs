use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::catalog::Popularity;
use crate::error::{Error, Result};

/// Request sequence, optionally with nondecreasing arrival times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    requests: Vec<usize>,
    timestamps: Option<Vec<f64>>,
    seed: Option<u64>,
}

impl Trace {
    pub fn new(requests: Vec<usize>, timestamps: Option<Vec<f64>>) -> Result<Self> {
        if let Some(ts) = &timestamps {
            if ts.len() != requests.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} timestamps for {} requests",
                    ts.len(),
                    requests.len()
                )));
            }
            if let Some(k) = ts.windows(2).position(|w| !(w[1] >= w[0])) {
                return Err(Error::NonMonotoneTimestamps(k + 1));
            }
            if ts.first().is_some_and(|t| !t.is_finite()) {
                return Err(Error::NonMonotoneTimestamps(0));
            }
        }
        Ok(Self {
            requests,
            timestamps,
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn requests(&self) -> &[usize] {
        &self.requests
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn check_items(&self, items: usize) -> Result<()> {
        match self.requests.iter().find(|&&id| id >= items) {
            Some(&id) => Err(Error::UnknownItem { id, items }),
            None => Ok(()),
        }
    }
}

/// Independent draws from the popularity law; with timestamps, unit-rate
/// exponential gaps so that item `n` arrives as a Poisson process of rate `λ_n`.
pub fn generate_irm_trace(popularity: &Popularity, length: usize, seed: u64, with_timestamps: bool) -> Result<Trace> {
    if length == 0 {
        return Err(Error::EmptyTrace);
    }
    let dist = WeightedIndex::new(popularity.rates())
        .map_err(|e| Error::InvalidParameter(format!("popularity: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut requests = Vec::with_capacity(length);
    let mut timestamps = with_timestamps.then(|| Vec::with_capacity(length));
    let mut now = 0.0;
    for _ in 0..length {
        requests.push(dist.sample(&mut rng));
        if let Some(ts) = timestamps.as_mut() {
            let gap: f64 = Exp1.sample(&mut rng);
            now += gap;
            ts.push(now);
        }
    }
    Ok(Trace::new(requests, timestamps)?.with_seed(seed))
}
