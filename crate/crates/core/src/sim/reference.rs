//! Straightforward LRU and SIM-LRU used to cross-check the RND-LRU engine.
//! They work from raw embeddings rather than the neighborhood index.

use std::collections::hash_map::DefaultHasher;
use std::collections::VecDeque;
use std::hash::{Hash, Hasher};

use super::trace::Trace;
use crate::catalog::{Catalog, DissimilaritySpec, TieBreak};

/// Order-sensitive hash of a sequence of cache states.
#[derive(Debug, Clone)]
pub struct StateSequenceHash(DefaultHasher);

impl Default for StateSequenceHash {
    fn default() -> Self {
        Self(DefaultHasher::new())
    }
}

impl StateSequenceHash {
    pub fn push(&mut self, state: impl IntoIterator<Item = usize>) {
        let mut len = 0usize;
        for id in state {
            id.hash(&mut self.0);
            len += 1;
        }
        // delimit states
        (usize::MAX - len).hash(&mut self.0);
    }

    pub fn finish(&self) -> u64 {
        self.0.finish()
    }
}

/// Plain LRU; returns the final list (front first) and the state hash.
pub fn reference_lru(trace: &Trace, capacity: usize) -> (Vec<usize>, u64) {
    let mut list: VecDeque<usize> = VecDeque::new();
    let mut hash = StateSequenceHash::default();
    for &n in trace.requests() {
        if let Some(pos) = list.iter().position(|&x| x == n) {
            list.remove(pos);
        } else if list.len() == capacity {
            list.pop_back();
        }
        list.push_front(n);
        hash.push(list.iter().copied());
    }
    (list.into(), hash.finish())
}

/// SIM-LRU: a request is served by the closest cached item within the
/// threshold (ties broken as in the neighborhood order); otherwise inserted.
pub fn reference_sim_lru(
    catalog: &Catalog,
    spec: &DissimilaritySpec,
    tie_break: TieBreak,
    trace: &Trace,
    capacity: usize,
) -> (Vec<usize>, u64) {
    let mut list: VecDeque<usize> = VecDeque::new();
    let mut hash = StateSequenceHash::default();
    for &n in trace.requests() {
        let x = catalog.embedding(n);
        let best = list
            .iter()
            .enumerate()
            .map(|(pos, &m)| {
                let d = if m == n { 0.0 } else { spec.distance(x, catalog.embedding(m)) };
                let key = if m == n { f64::NEG_INFINITY } else { tie_break.key(catalog, n, m) };
                (pos, m, d, key)
            })
            .filter(|&(_, _, d, _)| d <= spec.threshold)
            .min_by(|a, b| a.2.total_cmp(&b.2).then(a.3.total_cmp(&b.3)).then(a.1.cmp(&b.1)));
        match best {
            Some((pos, m, _, _)) => {
                list.remove(pos);
                list.push_front(m);
            }
            None => {
                if list.len() == capacity {
                    list.pop_back();
                }
                list.push_front(n);
            }
        }
        hash.push(list.iter().copied());
    }
    (list.into(), hash.finish())
}
