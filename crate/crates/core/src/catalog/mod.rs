//! Item universe: embeddings, dissimilarity, neighborhoods and popularity.

mod cover;
mod neighborhood;

pub use cover::{check_cover_condition, CoverBudget, CoverMode, CoverVerdict};
pub use neighborhood::{build_neighborhood_index, NeighborhoodIndex, TieBreak};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of items with dense ids `0..N` and equal-dimension embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    dim: usize,
    coords: Vec<f64>,
}

impl Catalog {
    pub fn new(embeddings: Vec<Vec<f64>>) -> Result<Self> {
        let dim = embeddings.first().map(Vec::len).ok_or(Error::EmptyCatalog)?;
        let mut coords = Vec::with_capacity(dim * embeddings.len());
        for (item, e) in embeddings.into_iter().enumerate() {
            if e.len() != dim {
                return Err(Error::DimensionMismatch {
                    item,
                    expected: dim,
                    found: e.len(),
                });
            }
            if e.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "item {item} has a non-finite coordinate"
                )));
            }
            coords.extend(e);
        }
        Ok(Self { dim, coords })
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embedding(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn embeddings(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// `side × side` integer lattice. Item `x * side + y` sits at `(x, y)`.
pub fn grid_catalog(side: usize) -> Result<Catalog> {
    if side == 0 {
        return Err(Error::InvalidParameter("grid side must be at least 1".into()));
    }
    let mut embeddings = Vec::with_capacity(side * side);
    for x in 0..side {
        for y in 0..side {
            embeddings.push(vec![x as f64, y as f64]);
        }
    }
    Catalog::new(embeddings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// Dissimilarity function and the similarity threshold `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissimilaritySpec {
    pub metric: Metric,
    pub threshold: f64,
}

impl DissimilaritySpec {
    pub fn euclidean(threshold: f64) -> Self {
        Self {
            metric: Metric::Euclidean,
            threshold,
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.metric.distance(a, b)
    }
}

/// Per-item request rates, normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Popularity {
    weights: Vec<f64>,
    rates: Vec<f64>,
}

impl Popularity {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "popularity weight of item {i} is negative or non-finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter(
                "popularity weights sum to zero".into(),
            ));
        }
        let rates = weights.iter().map(|w| w / total).collect();
        Ok(Self { weights, rates })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(vec![1.0; n])
    }

    /// Zipf law over item ids: weight of item `i` is `(i + 1)^-exponent`.
    pub fn zipf(n: usize, exponent: f64) -> Result<Self> {
        Self::from_weights((0..n).map(|i| ((i + 1) as f64).powf(-exponent)).collect())
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized request rates `λ` (requests per request slot).
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }
}

/// Hotspot popularity: `weight_n = (min_h dis(n, h) + 1)^-alpha`, normalized.
pub fn synthetic_popularity(
    catalog: &Catalog,
    metric: Metric,
    hotspots: &[Vec<f64>],
    alpha: f64,
) -> Result<Popularity> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if hotspots.is_empty() {
        return Err(Error::InvalidParameter("at least one hotspot is required".into()));
    }
    if let Some(h) = hotspots.iter().find(|h| h.len() != catalog.dim()) {
        return Err(Error::DimensionMismatch {
            item: 0,
            expected: catalog.dim(),
            found: h.len(),
        });
    }
    let weights = catalog
        .embeddings()
        .map(|e| {
            let nearest = hotspots
                .iter()
                .map(|h| metric.distance(e, h))
                .fold(f64::INFINITY, f64::min);
            (nearest + 1.0).powf(-alpha)
        })
        .collect();
    Popularity::from_weights(weights)
}
