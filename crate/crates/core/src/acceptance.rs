//! Acceptance probabilities `q_m(n)`: the chance that cached item `m`, being
//! the closest cached item to a request for `n` within the threshold, is
//! used to serve it. `q_n(n) = 1` always.

use serde::{Deserialize, Serialize};

use crate::catalog::NeighborhoodIndex;
use crate::error::{Error, Result};

/// How to derive `q` for neighbor pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AcceptanceRule {
    /// `q_m(n) = dis(n, m)^-exponent`, clipped to `[0, 1]`.
    Power { exponent: f64 },
    /// Every neighbor within the threshold is accepted (SIM-LRU).
    SimLru,
    /// No approximate hits (plain LRU).
    Lru,
    /// Explicit `(server, requester, q)` triples; missing pairs get 0.
    Table(Vec<(usize, usize, f64)>),
}

/// `q` values aligned with the entries of a [`NeighborhoodIndex`]: entry `e`
/// of row `n` pointing at `m` holds `q_m(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Acceptance {
    serve: Vec<f64>,
}

impl Acceptance {
    pub fn new(index: &NeighborhoodIndex, rule: &AcceptanceRule) -> Result<Self> {
        let mut serve = vec![0.0; index.entries()];
        match rule {
            AcceptanceRule::Power { exponent } => {
                for n in 0..index.len() {
                    for (e, &dis) in index.entry_range(n).zip(index.distances(n)) {
                        serve[e] = dis.powf(-exponent).clamp(0.0, 1.0);
                    }
                }
            }
            AcceptanceRule::SimLru => serve.fill(1.0),
            AcceptanceRule::Lru => {}
            AcceptanceRule::Table(triples) => {
                for &(server, requester, q) in triples {
                    if !(0.0..=1.0).contains(&q) {
                        return Err(Error::AcceptanceOutOfRange {
                            server,
                            requester,
                            value: q,
                        });
                    }
                    if requester >= index.len() || server >= index.len() {
                        return Err(Error::UnknownItem {
                            id: requester.max(server),
                            items: index.len(),
                        });
                    }
                    if server == requester {
                        if q != 1.0 {
                            return Err(Error::InvalidParameter(format!(
                                "q_n(n) must be 1 (item {server})"
                            )));
                        }
                        continue;
                    }
                    // pairs outside the threshold can never serve, ignore them
                    if let Some(k) = index.neighbors(requester).iter().position(|&m| m == server) {
                        serve[index.entry_range(requester).start + k] = q;
                    }
                }
            }
        }
        Ok(Self { serve })
    }

    /// From raw aligned values (entry `e` of row `n` holds `q_m(n)`).
    pub fn from_aligned(index: &NeighborhoodIndex, serve: Vec<f64>) -> Result<Self> {
        if serve.len() != index.entries() {
            return Err(Error::InvalidParameter(format!(
                "expected {} acceptance values, got {}",
                index.entries(),
                serve.len()
            )));
        }
        for n in 0..index.len() {
            for (e, &m) in index.entry_range(n).zip(index.neighbors(n)) {
                if !(0.0..=1.0).contains(&serve[e]) {
                    return Err(Error::AcceptanceOutOfRange {
                        server: m,
                        requester: n,
                        value: serve[e],
                    });
                }
            }
        }
        Ok(Self { serve })
    }

    /// `q_m(n)` for all `m ∈ N(n)`, in neighborhood order.
    pub fn served_by(&self, index: &NeighborhoodIndex, n: usize) -> &[f64] {
        &self.serve[index.entry_range(n)]
    }

    /// `q_n(m)` where `m` is the `k`-th neighbor of `n`: the chance that `n`
    /// serves a request for `m`.
    pub fn serves(&self, index: &NeighborhoodIndex, n: usize, k: usize) -> f64 {
        let m = index.neighbors(n)[k];
        let pos = index.reverse_positions(n)[k];
        self.serve[index.entry_range(m).start + pos]
    }

    pub fn values(&self) -> &[f64] {
        &self.serve
    }

    /// True when every neighbor entry is zero (the model reduces to LRU).
    pub fn is_kronecker(&self) -> bool {
        self.serve.iter().all(|&q| q == 0.0)
    }
}
