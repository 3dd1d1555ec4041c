use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalEstimate {
    /// Long-run fraction of time the item is cached.
    pub occupancy: f64,
    pub std_error: f64,
    /// Fraction of independent Poisson probes that found the item cached.
    pub probe_occupancy: f64,
    pub probe_std_error: f64,
    pub cycles: usize,
}

/// Ratio estimator `Σ on / Σ cycle` and its delta-method standard error.
fn ratio_estimate(on: &[f64], total: &[f64]) -> (f64, f64) {
    let n = on.len() as f64;
    let r = on.iter().sum::<f64>() / total.iter().sum::<f64>();
    let mean_total = total.iter().sum::<f64>() / n;
    let ss: f64 = on.iter().zip(total).map(|(a, c)| (a - r * c).powi(2)).sum();
    (r, (ss / (n * (n - 1.0))).sqrt() / mean_total)
}

/// Simulates the single-item RND-TTL renewal process: an exponential off
/// period of rate `insertion`, then an on period that starts with timer `T`
/// and restarts it at every refresh (Poisson of rate `refresh`) arriving
/// before expiry.
pub fn rnd_ttl_renewal_oracle(insertion: f64, refresh: f64, timer: f64, cycles: usize, seed: u64) -> Result<RenewalEstimate> {
    if !(insertion > 0.0 && refresh >= 0.0 && timer > 0.0) || cycles < 2 {
        return Err(Error::InvalidParameter(
            "renewal oracle needs insertion > 0, refresh >= 0, timer > 0 and at least two cycles".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let off = Exp::new(insertion).expect("positive rate");
    let gaps = (refresh > 0.0).then(|| Exp::new(refresh).expect("positive rate"));
    let mean_on = if refresh > 0.0 {
        (refresh * timer).exp_m1() / refresh
    } else {
        timer
    };
    // about ten probes per cycle
    let probe_rate = 10.0 / (1.0 / insertion + mean_on);
    let mut probe_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);

    let mut on_times = Vec::with_capacity(cycles);
    let mut totals = Vec::with_capacity(cycles);
    let mut probes_on = Vec::with_capacity(cycles);
    let mut probes_all = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        let t_off = off.sample(&mut rng);
        let mut t_on = 0.0;
        if let Some(gaps) = &gaps {
            loop {
                let g = gaps.sample(&mut rng);
                if g < timer {
                    t_on += g;
                } else {
                    break;
                }
            }
        }
        t_on += timer;
        let count = |len: f64, rng: &mut ChaCha8Rng| -> f64 {
            Poisson::new(probe_rate * len).map_or(0.0, |p| p.sample(rng))
        };
        let k_on = count(t_on, &mut probe_rng);
        let k_off = count(t_off, &mut probe_rng);
        on_times.push(t_on);
        totals.push(t_on + t_off);
        probes_on.push(k_on);
        probes_all.push(k_on + k_off);
    }
    let (occupancy, std_error) = ratio_estimate(&on_times, &totals);
    let (probe_occupancy, probe_std_error) = ratio_estimate(&probes_on, &probes_all);
    Ok(RenewalEstimate {
        occupancy,
        std_error,
        probe_occupancy,
        probe_std_error,
        cycles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::occupancy_g;

    #[test]
    fn no_refresh_limit() {
        let e = rnd_ttl_renewal_oracle(2.0, 0.0, 0.7, 200_000, 1).unwrap();
        let expect = 1.4 / 2.4;
        assert!((e.occupancy - expect).abs() < 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn ttl_reduction() {
        let e = rnd_ttl_renewal_oracle(1.0, 1.0, 2f64.ln(), 200_000, 2).unwrap();
        assert!((e.occupancy - 0.5).abs() < 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn probes_see_time_average() {
        let e = rnd_ttl_renewal_oracle(1.0, 2.0, 1.0, 200_000, 3).unwrap();
        let g = occupancy_g(2.0, 1.0, 1.0).unwrap();
        assert!((e.occupancy - g).abs() < 3.0 * e.std_error);
        let se = (e.std_error.powi(2) + e.probe_std_error.powi(2)).sqrt();
        assert!((e.probe_occupancy - e.occupancy).abs() < 3.0 * se, "{e:?}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(rnd_ttl_renewal_oracle(0.0, 1.0, 1.0, 10, 0).is_err());
        assert!(rnd_ttl_renewal_oracle(1.0, 1.0, 1.0, 1, 0).is_err());
    }
}
