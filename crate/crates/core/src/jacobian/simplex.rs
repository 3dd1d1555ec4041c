use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// Random points of `{o ∈ [0,1]^N : Σ o = C}`: a flat Dirichlet draw scaled to
/// `C`, then coordinates above one are clipped and the excess is spread over
/// the rest in proportion to their values.
pub fn sample_capped_simplex(n: usize, capacity: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if !(capacity > 0.0 && capacity < n as f64) {
        return Err(Error::CapacityOutOfRange { capacity, items: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| one_sample(n, capacity, &mut rng)).collect())
}

fn one_sample(n: usize, capacity: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut o: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = o.iter().sum();
    o.iter_mut().for_each(|x| *x *= capacity / total);
    let mut capped = vec![false; n];
    for _ in 0..=n {
        let mut excess = 0.0;
        for (x, c) in o.iter_mut().zip(capped.iter_mut()) {
            if *x >= 1.0 && !*c {
                excess += *x - 1.0;
                *x = 1.0;
                *c = true;
            }
        }
        if excess == 0.0 {
            break;
        }
        let free: f64 = o.iter().zip(&capped).filter(|(_, c)| !**c).map(|(x, _)| x).sum();
        let free_count = capped.iter().filter(|c| !**c).count();
        for (x, c) in o.iter_mut().zip(&capped) {
            if !*c {
                *x += if free > 0.0 { excess * *x / free } else { excess / free_count as f64 };
            }
        }
    }
    // absorb rounding in the largest free coordinate
    let drift = capacity - o.iter().sum::<f64>();
    if let Some(k) = (0..n).filter(|&i| !capped[i]).max_by(|&a, &b| o[a].total_cmp(&o[b])) {
        o[k] = (o[k] + drift).clamp(0.0, 1.0);
    }
    o
}
