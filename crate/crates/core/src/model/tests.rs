use super::*;
use crate::acceptance::AcceptanceRule;
use crate::catalog::{
    build_neighborhood_index, grid_catalog, DissimilaritySpec, Popularity, TieBreak,
};
use approx::assert_relative_eq;
use proptest::prelude::*;

fn pair(q: f64) -> (NeighborhoodIndex, Acceptance) {
    let index = NeighborhoodIndex::from_lists(vec![vec![(1, 1.0)], vec![(0, 1.0)]], 1.0).unwrap();
    let acc = Acceptance::from_aligned(&index, vec![q, q]).unwrap();
    (index, acc)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn insertion_prob_isolated_and_single_neighbor() {
    let index = NeighborhoodIndex::isolated(3);
    let acc = Acceptance::new(&index, &AcceptanceRule::Lru).unwrap();
    let p = insertion_probs(&index, &acc, &[0.3, 0.9, 0.1], Execution::Sequential);
    assert_eq!(p, vec![1.0; 3]);

    let (index, acc) = pair(0.4);
    let p = insertion_probs(&index, &acc, &[0.2, 0.7], Execution::Sequential);
    assert_relative_eq!(p[0], 1.0 - 0.4 * 0.7, epsilon = 1e-15);
    assert_relative_eq!(p[1], 1.0 - 0.4 * 0.2, epsilon = 1e-15);

    let (index, acc) = pair(1.0);
    let p = insertion_probs(&index, &acc, &[1.0, 1.0], Execution::Sequential);
    assert_eq!(p, vec![0.0, 0.0]);
}

#[test]
fn refresh_rate_examples() {
    let (index, acc) = pair(1.0);
    let rates = [1.0, 1.0];
    let input = ModelInput {
        index: &index,
        acceptance: &acc,
        rates: &rates,
        capacity: 1.0,
        exec: Execution::Sequential,
    };
    let r = refresh_rates(&input, &[0.3, 0.5]);
    assert_relative_eq!(r[0], 1.5, epsilon = 1e-15);
    let r = refresh_rates(&input, &[0.3, 1.0]);
    assert_relative_eq!(r[0], 1.0, epsilon = 1e-15);

    let iso = NeighborhoodIndex::isolated(2);
    let acc = Acceptance::new(&iso, &AcceptanceRule::Lru).unwrap();
    let input = ModelInput::new(&iso, &acc, &[0.2, 0.8], 1.0).unwrap();
    assert_eq!(refresh_rates(&input, &[0.5, 0.5]), vec![0.2, 0.8]);
}

#[test]
fn refresh_rate_three_in_a_row() {
    // items on a line at 0, 1, 2 with d = 1: item 1 is closest to both ends
    let catalog = crate::catalog::Catalog::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
    let index = build_neighborhood_index(
        &catalog,
        &DissimilaritySpec::euclidean(1.0),
        TieBreak::ById,
        Execution::Sequential,
    )
    .unwrap();
    let acc = Acceptance::from_aligned(&index, vec![0.5; index.entries()]).unwrap();
    let rates = [0.2, 0.3, 0.5];
    let o = [0.1, 0.4, 0.6];
    let input = ModelInput::new(&index, &acc, &rates, 1.0).unwrap();
    let r = refresh_rates(&input, &o);
    // item 1 serves requests for 0 (when 0 absent) and for 2 (when 2 absent)
    let expect1 = 0.3 + 0.5 * 0.2 * (1.0 - 0.1) + 0.5 * 0.5 * (1.0 - 0.6);
    assert_relative_eq!(r[1], expect1, epsilon = 1e-15);
    // item 0 serves requests for 1 only if 1 is absent
    assert_relative_eq!(r[0], 0.2 + 0.5 * 0.3 * 0.6, epsilon = 1e-15);
    // item 2 in row 1 sits behind item 0 (tie at distance 1, id order)
    assert_relative_eq!(r[2], 0.5 + 0.5 * 0.3 * 0.6 * 0.9, epsilon = 1e-15);
}

#[test]
fn hit_prob_examples() {
    let iso = NeighborhoodIndex::isolated(2);
    let acc = Acceptance::new(&iso, &AcceptanceRule::Lru).unwrap();
    assert_eq!(item_hit_probs(&iso, &acc, &[0.3, 0.7], Execution::Sequential), vec![0.3, 0.7]);

    let (index, acc) = pair(1.0);
    let h = item_hit_probs(&index, &acc, &[0.0, 0.5], Execution::Sequential);
    assert_relative_eq!(h[0], 0.5, epsilon = 1e-15);

    let (index, acc) = pair(0.0);
    let h = item_hit_probs(&index, &acc, &[0.2, 0.5], Execution::Sequential);
    assert_eq!(h, vec![0.2, 0.5]);
}

#[test]
fn aggregate_examples() {
    assert_relative_eq!(aggregate_hit_rate(&[0.75, 0.25], &[0.8, 0.4]), 0.7, epsilon = 1e-15);
    assert_relative_eq!(aggregate_hit_rate(&[0.5, 0.5], &[1.0, 1.0]), 1.0);
    let o = [0.1, 0.3, 0.6, 1.0];
    assert_relative_eq!(aggregate_hit_rate(&[0.25; 4], &o), 2.0 / 4.0, epsilon = 1e-15);
}

#[test]
fn residual_examples() {
    assert_eq!(capacity_residual(&[1.0, 2.0], &[1.0, 2.0], 0.0, 1.5), -1.5);
    let t = 0.7;
    let lam = [0.4, 0.4, 0.4];
    let f = capacity_residual(&lam, &lam, t, 1.0);
    assert_relative_eq!(f, 3.0 * (1.0 - (-0.4 * t).exp()) - 1.0, epsilon = 1e-14);
}

#[test]
fn characteristic_time_examples() {
    let lam = [1.0; 4];
    let t = solve_characteristic_time(&lam, &lam, 2.0, 1e-12, None).unwrap();
    assert_relative_eq!(t, 2f64.ln(), epsilon = 1e-10);

    let pop = Popularity::zipf(100, 0.8).unwrap();
    let l = pop.rates();
    let t = solve_characteristic_time(l, l, 10.0, 1e-12, None).unwrap();
    let f = |t: f64| l.iter().map(|x| 1.0 - (-x * t).exp()).sum::<f64>() - 10.0;
    let oracle = bisect(f, 0.0, 1e6);
    assert_relative_eq!(t, oracle, max_relative = 1e-9);

    let err = solve_characteristic_time(&[1.0, 1.0], &[0.0, 0.0], 1.0, 1e-10, None).unwrap_err();
    assert!(matches!(err, Error::NoCharacteristicTime { positive: 0, .. }));
    // two positive insertion rates cannot fill a cache of two
    let err = solve_characteristic_time(&[1.0; 3], &[1.0, 1.0, 0.0], 2.0, 1e-10, None).unwrap_err();
    assert!(matches!(err, Error::NoCharacteristicTime { positive: 2, .. }));
}

#[test]
fn state_probability_examples() {
    assert_relative_eq!(state_probability(&[0.5, 0.5], &[1]).unwrap(), 0.25);
    assert_eq!(state_probability(&[1.0, 1.0, 1.0], &[0, 1, 2]).unwrap(), 1.0);
    assert!(state_probability(&[0.5], &[3]).is_err());
    let o = [0.1, 0.9, 0.35, 0.6, 0.0, 1.0, 0.42, 0.77, 0.5, 0.13];
    let total: f64 = state_distribution(&o).unwrap().iter().sum();
    assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    assert!(state_distribution(&[0.5; 21]).is_err());
}

#[test]
fn input_validation() {
    let iso = NeighborhoodIndex::isolated(3);
    let acc = Acceptance::new(&iso, &AcceptanceRule::Lru).unwrap();
    assert!(ModelInput::new(&iso, &acc, &[0.5, 0.5], 1.0).is_err());
    assert!(ModelInput::new(&iso, &acc, &[0.5, 0.5, -0.1], 1.0).is_err());
    assert!(ModelInput::new(&iso, &acc, &[0.2, 0.3, 0.5], 3.0).is_err());
    assert!(ModelInput::new(&iso, &acc, &[0.2, 0.3, 0.5], 0.0).is_err());
    assert!(OccupancyVector::new(vec![0.5, 0.6], 1.0, 1e-9).is_err());
    assert!(OccupancyVector::new(vec![1.2, -0.2], 1.0, 1e-9).is_err());
    assert!(OccupancyVector::new(vec![0.4, 0.6], 1.0, 1e-9).is_ok());
}

#[test]
fn grid_parallel_matches_sequential() {
    let catalog = grid_catalog(12).unwrap();
    let spec = DissimilaritySpec::euclidean(2.0);
    let index = build_neighborhood_index(&catalog, &spec, TieBreak::Counterclockwise, Execution::Sequential).unwrap();
    let acc = Acceptance::new(&index, &AcceptanceRule::Power { exponent: 2.0 }).unwrap();
    let pop = Popularity::zipf(catalog.len(), 0.9).unwrap();
    let o: Vec<f64> = (0..catalog.len()).map(|i| ((i * 37) % 11) as f64 / 11.0).collect();
    let seq = ModelInput::new(&index, &acc, pop.rates(), 10.0).unwrap().with_exec(Execution::Sequential);
    let par = seq.with_exec(Execution::Parallel);
    assert_eq!(refresh_rates(&seq, &o), refresh_rates(&par, &o));
    assert_eq!(insertion_rates(&seq, &o), insertion_rates(&par, &o));
}

fn random_instance() -> impl Strategy<Value = (Vec<Vec<(usize, f64)>>, Vec<f64>, Vec<f64>)> {
    (2usize..9)
        .prop_flat_map(|n| {
            let pairs = proptest::collection::vec((0..n, 0..n, 0.1f64..3.0), 0..2 * n);
            (Just(n), pairs, proptest::collection::vec(0.0f64..=1.0, n))
        })
        .prop_flat_map(|(n, pairs, o)| {
            let mut lists = vec![Vec::new(); n];
            for (a, b, d) in pairs {
                if a != b && !lists[a].iter().any(|&(m, _)| m == b) {
                    lists[a].push((b, d));
                    lists[b].push((a, d));
                }
            }
            let entries: usize = lists.iter().map(Vec::len).sum();
            (Just(lists), proptest::collection::vec(0.0f64..=1.0, entries), Just(o))
        })
}

proptest! {
    #[test]
    fn hit_forms_agree((lists, q, o) in random_instance()) {
        let index = NeighborhoodIndex::from_lists(lists, 3.0).unwrap();
        let acc = Acceptance::from_aligned(&index, q).unwrap();
        let p = insertion_probs(&index, &acc, &o, Execution::Sequential);
        let alt = hit_probs_from_insertion(&o, &p);
        let h = item_hit_probs(&index, &acc, &o, Execution::Sequential);
        for n in 0..o.len() {
            prop_assert!((h[n] - alt[n]).abs() <= 1e-12);
            prop_assert!(h[n] >= o[n] - 1e-15 && h[n] <= 1.0 + 1e-15);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&p[n]));
        }
    }

    #[test]
    fn rates_bounded_by_requests((lists, q, o) in random_instance()) {
        let index = NeighborhoodIndex::from_lists(lists, 3.0).unwrap();
        let acc = Acceptance::from_aligned(&index, q).unwrap();
        let rates = vec![1.0 / o.len() as f64; o.len()];
        let input = ModelInput::new(&index, &acc, &rates, 1.0).unwrap();
        let e = insertion_rates(&input, &o);
        let r = refresh_rates(&input, &o);
        for n in 0..o.len() {
            prop_assert!(e[n] <= rates[n] + 1e-15);
            prop_assert!(r[n] >= rates[n]);
        }
        let zeros = vec![0.0; o.len()];
        prop_assert!(insertion_probs(&index, &acc, &zeros, Execution::Sequential).iter().all(|&p| p == 1.0));
    }

    #[test]
    fn residual_increasing(lam in proptest::collection::vec(0.01f64..2.0, 2..10), t in 0.01f64..5.0) {
        let a = capacity_residual(&lam, &lam, t, 1.0);
        let b = capacity_residual(&lam, &lam, t * 1.1, 1.0);
        prop_assert!(b > a);
    }
}
