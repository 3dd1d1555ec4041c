use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stats::{EmpiricalStats, OccupancyCounter};
use super::trace::Trace;
use crate::acceptance::Acceptance;
use crate::catalog::NeighborhoodIndex;
use crate::error::{Error, Result};

const NIL: usize = usize::MAX;

/// LRU list over item ids, front = most recently used.
#[derive(Debug, Clone)]
pub struct LruList {
    capacity: usize,
    prev: Vec<usize>,
    next: Vec<usize>,
    cached: Vec<bool>,
    head: usize,
    tail: usize,
    len: usize,
}

impl LruList {
    pub fn new(items: usize, capacity: usize) -> Self {
        Self {
            capacity,
            prev: vec![NIL; items],
            next: vec![NIL; items],
            cached: vec![false; items],
            head: NIL,
            tail: NIL,
            len: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, item: usize) -> bool {
        self.cached[item]
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors((self.head != NIL).then_some(self.head), |&i| {
            let n = self.next[i];
            (n != NIL).then_some(n)
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn unlink(&mut self, i: usize) {
        let (p, n) = (self.prev[i], self.next[i]);
        if p == NIL {
            self.head = n;
        } else {
            self.next[p] = n;
        }
        if n == NIL {
            self.tail = p;
        } else {
            self.prev[n] = p;
        }
        self.prev[i] = NIL;
        self.next[i] = NIL;
    }

    fn push_front(&mut self, i: usize) {
        self.next[i] = self.head;
        self.prev[i] = NIL;
        if self.head != NIL {
            self.prev[self.head] = i;
        }
        self.head = i;
        if self.tail == NIL {
            self.tail = i;
        }
    }

    pub fn move_to_front(&mut self, i: usize) {
        debug_assert!(self.cached[i]);
        if self.head != i {
            self.unlink(i);
            self.push_front(i);
        }
    }

    /// Inserts `i` at the front, evicting the tail when full.
    pub fn insert_front(&mut self, i: usize) -> Option<usize> {
        debug_assert!(!self.cached[i]);
        let evicted = if self.len == self.capacity {
            let t = self.tail;
            self.unlink(t);
            self.cached[t] = false;
            self.len -= 1;
            Some(t)
        } else {
            None
        };
        self.push_front(i);
        self.cached[i] = true;
        self.len += 1;
        evicted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Exact,
    Approximate { server: usize },
    Miss { evicted: Option<usize> },
}

impl Outcome {
    pub fn is_hit(self) -> bool {
        !matches!(self, Outcome::Miss { .. })
    }
}

/// RND-LRU: the closest cached item of `N[n]` serves a request for `n` with
/// probability `q_m(n)` and moves to the front; otherwise `n` is inserted.
#[derive(Debug, Clone)]
pub struct RndLruCache<'a> {
    index: &'a NeighborhoodIndex,
    acceptance: &'a Acceptance,
    list: LruList,
    rng: ChaCha8Rng,
}

impl<'a> RndLruCache<'a> {
    pub fn new(index: &'a NeighborhoodIndex, acceptance: &'a Acceptance, capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::CapacityOutOfRange {
                capacity: 0.0,
                items: index.len(),
            });
        }
        Ok(Self {
            index,
            acceptance,
            list: LruList::new(index.len(), capacity),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn list(&self) -> &LruList {
        &self.list
    }

    /// Closest cached item of `N[n]` and its acceptance probability.
    pub fn closest_cached(&self, n: usize) -> Option<(usize, f64)> {
        if self.list.contains(n) {
            return Some((n, 1.0));
        }
        let q = self.acceptance.served_by(self.index, n);
        self.index
            .neighbors(n)
            .iter()
            .zip(q)
            .find(|(&m, _)| self.list.contains(m))
            .map(|(&m, &q)| (m, q))
    }

    pub fn step(&mut self, n: usize) -> Outcome {
        if let Some((m, q)) = self.closest_cached(n) {
            // u ∈ (0, 1] so that q = 1 always serves and q = 0 never does
            let u = 1.0 - self.rng.random::<f64>();
            if u <= q {
                self.list.move_to_front(m);
                return if m == n {
                    Outcome::Exact
                } else {
                    Outcome::Approximate { server: m }
                };
            }
        }
        Outcome::Miss {
            evicted: self.list.insert_front(n),
        }
    }
}

/// Runs RND-LRU over `trace`; `observe` sees the cache after every step.
pub fn run_rnd_lru<F>(
    index: &NeighborhoodIndex,
    acceptance: &Acceptance,
    trace: &Trace,
    capacity: usize,
    seed: u64,
    warmup: usize,
    mut observe: F,
) -> Result<EmpiricalStats>
where
    F: FnMut(usize, &LruList, Outcome),
{
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    trace.check_items(index.len())?;
    let mut cache = RndLruCache::new(index, acceptance, capacity, seed)?;
    let warmup = warmup.min(trace.len());
    let mut stats = EmpiricalStats::new(index.len(), warmup);
    let mut occupancy = OccupancyCounter::new(index.len(), warmup, trace.len());
    for (t, &n) in trace.requests().iter().enumerate() {
        let outcome = cache.step(n);
        if t >= warmup {
            stats.record(n, outcome);
        }
        if let Outcome::Miss { evicted } = outcome {
            if let Some(e) = evicted {
                occupancy.leave(e, t);
            }
            occupancy.enter(n, t);
        }
        observe(t, cache.list(), outcome);
    }
    stats.occupancy = occupancy.finish(cache.list().iter());
    Ok(stats)
}

pub fn simulate_rnd_lru(
    index: &NeighborhoodIndex,
    acceptance: &Acceptance,
    trace: &Trace,
    capacity: usize,
    seed: u64,
    warmup: usize,
) -> Result<EmpiricalStats> {
    run_rnd_lru(index, acceptance, trace, capacity, seed, warmup, |_, _, _| {})
}
