use std::cmp::Ordering;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{Catalog, DissimilaritySpec};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Resolution of equal-distance neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Smaller id first.
    #[default]
    ById,
    /// 2-D only: increasing angle of `m - n` measured from the positive
    /// x-axis in `[0, 2π)` (right, up, left, down on a lattice).
    Counterclockwise,
}

impl TieBreak {
    /// Secondary sort key of neighbor `m` as seen from `n`.
    pub fn key(self, catalog: &Catalog, n: usize, m: usize) -> f64 {
        match self {
            TieBreak::ById => m as f64,
            TieBreak::Counterclockwise => {
                let a = catalog.embedding(n);
                let b = catalog.embedding(m);
                let angle = (b[1] - a[1]).atan2(b[0] - a[0]);
                if angle < 0.0 {
                    angle + TAU
                } else {
                    angle
                }
            }
        }
    }
}

/// Open neighborhoods `N(n)` in compressed rows, each sorted by
/// `(dis(n, m), tie-break key)` strictly ascending.
///
/// The position of `m` in row `n` delimits `N_<m(n)`: it is exactly the
/// prefix of the row before `m`. The closed neighborhood `N[n]` is the row
/// with `n` itself prepended.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodIndex {
    offsets: Vec<usize>,
    ids: Vec<usize>,
    distances: Vec<f64>,
    // For entry `e` of row `n` pointing at `m`: position of `n` within row `m`.
    reverse: Vec<usize>,
    threshold: f64,
    tie_break: TieBreak,
}

pub fn build_neighborhood_index(
    catalog: &Catalog,
    spec: &DissimilaritySpec,
    tie_break: TieBreak,
    exec: Execution,
) -> Result<NeighborhoodIndex> {
    if !(spec.threshold >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "similarity threshold must be nonnegative, got {}",
            spec.threshold
        )));
    }
    if tie_break == TieBreak::Counterclockwise && catalog.dim() != 2 {
        return Err(Error::NotTwoDimensional(catalog.dim()));
    }
    let n_items = catalog.len();
    let d = spec.threshold;

    // Sweep along the first coordinate: only items with |x0(n) - x0(m)| <= d
    // can be neighbors.
    let mut order: Vec<usize> = (0..n_items).collect();
    order.sort_by(|&a, &b| {
        catalog.embedding(a)[0]
            .total_cmp(&catalog.embedding(b)[0])
            .then(a.cmp(&b))
    });
    let first: Vec<f64> = order.iter().map(|&i| catalog.embedding(i)[0]).collect();
    let mut rank = vec![0usize; n_items];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }

    let rows: Vec<Vec<(usize, f64, f64)>> = exec.map_range(n_items, |n| {
        let x = catalog.embedding(n)[0];
        let lo = first.partition_point(|&v| v < x - d);
        let mut row = Vec::new();
        for &m in &order[lo..] {
            if first[rank[m]] > x + d {
                break;
            }
            if m == n {
                continue;
            }
            let dis = spec.distance(catalog.embedding(n), catalog.embedding(m));
            if dis <= d {
                row.push((m, dis, tie_break.key(catalog, n, m)));
            }
        }
        row.sort_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then(a.2.total_cmp(&b.2))
                .then(a.0.cmp(&b.0))
        });
        row
    });

    let mut offsets = Vec::with_capacity(n_items + 1);
    offsets.push(0);
    let mut ids = Vec::new();
    let mut distances = Vec::new();
    for row in &rows {
        for &(m, dis, _) in row {
            ids.push(m);
            distances.push(dis);
        }
        offsets.push(ids.len());
    }
    let mut index = NeighborhoodIndex {
        offsets,
        ids,
        distances,
        reverse: Vec::new(),
        threshold: d,
        tie_break,
    };
    index.reverse = index.compute_reverse()?;
    Ok(index)
}

impl NeighborhoodIndex {
    /// Build directly from pre-ordered open neighbor lists. Lists must be
    /// symmetric; the caller is responsible for the order.
    pub fn from_lists(lists: Vec<Vec<(usize, f64)>>, threshold: f64) -> Result<Self> {
        let n_items = lists.len();
        let mut offsets = vec![0];
        let mut ids = Vec::new();
        let mut distances = Vec::new();
        for (n, row) in lists.into_iter().enumerate() {
            for (m, dis) in row {
                if m >= n_items {
                    return Err(Error::UnknownItem { id: m, items: n_items });
                }
                if m == n {
                    return Err(Error::InvalidParameter(format!(
                        "item {n} listed as its own neighbor"
                    )));
                }
                ids.push(m);
                distances.push(dis);
            }
            offsets.push(ids.len());
        }
        let mut index = Self {
            offsets,
            ids,
            distances,
            reverse: Vec::new(),
            threshold,
            tie_break: TieBreak::ById,
        };
        index.reverse = index.compute_reverse()?;
        Ok(index)
    }

    /// Every item isolated: `N(n) = ∅`.
    pub fn isolated(n_items: usize) -> Self {
        Self {
            offsets: vec![0; n_items + 1],
            ids: Vec::new(),
            distances: Vec::new(),
            reverse: Vec::new(),
            threshold: 0.0,
            tie_break: TieBreak::ById,
        }
    }

    fn compute_reverse(&self) -> Result<Vec<usize>> {
        let mut reverse = vec![usize::MAX; self.ids.len()];
        for n in 0..self.len() {
            for (k, &m) in self.neighbors(n).iter().enumerate() {
                let e = self.offsets[n] + k;
                let pos = self.neighbors(m).iter().position(|&x| x == n).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "neighborhoods are not symmetric: {m} in N({n}) but {n} not in N({m})"
                    ))
                })?;
                reverse[e] = pos;
            }
        }
        Ok(reverse)
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    /// Number of neighbor entries (sum of open-neighborhood sizes).
    pub fn entries(&self) -> usize {
        self.ids.len()
    }

    /// Ordered open neighborhood `N(n)`.
    pub fn neighbors(&self, n: usize) -> &[usize] {
        &self.ids[self.offsets[n]..self.offsets[n + 1]]
    }

    pub fn distances(&self, n: usize) -> &[f64] {
        &self.distances[self.offsets[n]..self.offsets[n + 1]]
    }

    /// Position of `n` within the row of its `k`-th neighbor.
    pub fn reverse_positions(&self, n: usize) -> &[usize] {
        &self.reverse[self.offsets[n]..self.offsets[n + 1]]
    }

    /// Flat entry range of row `n`, for data aligned with the index.
    pub fn entry_range(&self, n: usize) -> std::ops::Range<usize> {
        self.offsets[n]..self.offsets[n + 1]
    }

    pub fn degree(&self, n: usize) -> usize {
        self.offsets[n + 1] - self.offsets[n]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|n| self.degree(n)).max().unwrap_or(0)
    }

    /// Closed neighborhood `N[n]` in order: `n` first, then `N(n)`.
    pub fn closed(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(n).chain(self.neighbors(n).iter().copied())
    }

    pub fn contains(&self, n: usize, m: usize) -> bool {
        self.neighbors(n).contains(&m)
    }

    /// Compare two members of `N[n]` by their order around `n`.
    pub fn compare_around(&self, n: usize, a: usize, b: usize) -> Option<Ordering> {
        let rank = |x: usize| {
            if x == n {
                Some(0)
            } else {
                self.neighbors(n).iter().position(|&m| m == x).map(|p| p + 1)
            }
        };
        Some(rank(a)?.cmp(&rank(b)?))
    }
}
