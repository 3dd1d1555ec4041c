use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lru::Outcome;
use super::stats::EmpiricalStats;
use super::trace::Trace;
use crate::acceptance::Acceptance;
use crate::catalog::NeighborhoodIndex;
use crate::error::{Error, Result};

/// TTL similarity cache: cached items carry timers, the closest live item
/// serves with probability `q` and gets its timer reset, a miss inserts the
/// requested item with a fresh timer. Items leave only by expiry.
///
/// `timers[n]` is the timer granted to item `n`. Occupancy is the fraction
/// of the measurement window (from the first measured arrival to the last
/// arrival) during which the item was cached.
pub fn simulate_ttl_similarity(
    index: &NeighborhoodIndex,
    acceptance: &Acceptance,
    trace: &Trace,
    timers: &[f64],
    seed: u64,
    warmup: usize,
) -> Result<EmpiricalStats> {
    let times = trace.timestamps().ok_or(Error::MissingTimestamps)?;
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let n_items = index.len();
    trace.check_items(n_items)?;
    if timers.len() != n_items || timers.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidParameter("one positive timer per item is required".into()));
    }
    let warmup = warmup.min(trace.len() - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = EmpiricalStats::new(n_items, warmup);
    // absolute expiry; an item is cached at time τ iff expiry > τ
    let mut expiry = vec![f64::NEG_INFINITY; n_items];
    let mut on_since = vec![0.0; n_items];
    let mut on_time = vec![0.0; n_items];
    let start = times[warmup];
    let end = *times.last().unwrap();
    let clip = |a: f64, b: f64| (b.min(end) - a.max(start)).max(0.0);

    for (t, (&n, &now)) in trace.requests().iter().zip(times).enumerate() {
        let live = |m: usize| expiry[m] > now;
        let candidate = if live(n) {
            Some((n, 1.0))
        } else {
            index
                .neighbors(n)
                .iter()
                .zip(acceptance.served_by(index, n))
                .find(|(&m, _)| live(m))
                .map(|(&m, &q)| (m, q))
        };
        // an empty neighborhood plays the role of the unreachable tombstone
        let u: f64 = rng.random();
        let (refreshed, outcome) = match candidate {
            Some((m, q)) if u < q => (
                m,
                if m == n {
                    Outcome::Exact
                } else {
                    Outcome::Approximate { server: m }
                },
            ),
            _ => (n, Outcome::Miss { evicted: None }),
        };
        if !live(refreshed) {
            if expiry[refreshed].is_finite() {
                on_time[refreshed] += clip(on_since[refreshed], expiry[refreshed]);
            }
            on_since[refreshed] = now;
        }
        expiry[refreshed] = now + timers[refreshed];
        if t >= warmup {
            stats.record(n, outcome);
        }
    }
    let window = end - start;
    for i in 0..n_items {
        if expiry[i].is_finite() {
            on_time[i] += clip(on_since[i], expiry[i]);
        }
        stats.occupancy[i] = if window > 0.0 { on_time[i] / window } else { 0.0 };
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acceptance::AcceptanceRule;

    fn spaced(n: usize, gap: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * gap).collect()
    }

    #[test]
    fn short_gaps_always_hit() {
        let index = NeighborhoodIndex::isolated(1);
        let acc = Acceptance::new(&index, &AcceptanceRule::Lru).unwrap();
        let trace = Trace::new(vec![0; 50], Some(spaced(50, 0.5))).unwrap();
        let s = simulate_ttl_similarity(&index, &acc, &trace, &[1.0], 0, 0).unwrap();
        assert_eq!(s.hits(), 49);
        let s = simulate_ttl_similarity(&index, &acc, &trace, &[1.0], 0, 1).unwrap();
        assert_eq!(s.hit_rate, 1.0);
        assert!((s.occupancy[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn long_gaps_never_hit() {
        let index = NeighborhoodIndex::isolated(1);
        let acc = Acceptance::new(&index, &AcceptanceRule::Lru).unwrap();
        let trace = Trace::new(vec![0; 50], Some(spaced(50, 2.0))).unwrap();
        let s = simulate_ttl_similarity(&index, &acc, &trace, &[1.0], 0, 0).unwrap();
        assert_eq!(s.hits(), 0);
        // on for 1 of every 2 time units, last period clipped at the final arrival
        assert!((s.occupancy[0] - 49.0 / 98.0).abs() < 1e-12);
    }

    #[test]
    fn neighbor_serves_and_is_refreshed() {
        let index = NeighborhoodIndex::from_lists(vec![vec![(1, 1.0)], vec![(0, 1.0)]], 1.0).unwrap();
        let acc = Acceptance::new(&index, &AcceptanceRule::SimLru).unwrap();
        // 0 at t=0, 1 at t=0.8 is served by 0 and resets it, so 0 at 1.5 hits
        let trace = Trace::new(vec![0, 1, 0], Some(vec![0.0, 0.8, 1.5])).unwrap();
        let s = simulate_ttl_similarity(&index, &acc, &trace, &[1.0, 1.0], 0, 0).unwrap();
        assert_eq!(s.per_item_approximate, vec![0, 1]);
        assert_eq!(s.per_item_exact, vec![1, 0]);
        assert!((s.occupancy[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.occupancy[1], 0.0);
    }

    #[test]
    fn timestamps_required() {
        let index = NeighborhoodIndex::isolated(1);
        let acc = Acceptance::new(&index, &AcceptanceRule::Lru).unwrap();
        let trace = Trace::new(vec![0], None).unwrap();
        assert!(matches!(
            simulate_ttl_similarity(&index, &acc, &trace, &[1.0], 0, 0),
            Err(Error::MissingTimestamps)
        ));
    }
}
