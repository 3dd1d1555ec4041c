//! Experiment configuration: a TOML file, overridable from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use simcache::catalog::{
    build_neighborhood_index, grid_catalog, synthetic_popularity, Catalog, DissimilaritySpec, Metric,
    NeighborhoodIndex, Popularity, TieBreak,
};
use simcache::io;
use simcache::solver::SolverConfig;
use simcache::{Acceptance, AcceptanceRule, Execution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Similarity threshold `d`.
    pub threshold: f64,
    pub tie_break: TieBreak,
    pub capacities: Vec<f64>,
    pub catalog: CatalogSection,
    pub popularity: PopularitySection,
    pub acceptance: AcceptanceSection,
    pub solver: SolverSection,
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CatalogSection {
    pub grid: Option<usize>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopularitySection {
    /// Hot regions; on a grid catalog with none given, two regions at a
    /// quarter and three quarters of the diagonal.
    pub hotspots: Option<Vec<Vec<f64>>>,
    pub alpha: f64,
    pub zipf: Option<f64>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum RuleKind {
    Power,
    SimLru,
    Lru,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcceptanceSection {
    pub rule: RuleKind,
    pub exponent: f64,
    /// `server,requester,q` rows for the table rule.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaChoice {
    Fixed(f64),
    Named(String),
}

impl BetaChoice {
    pub fn is_tune(&self) -> bool {
        matches!(self, BetaChoice::Named(s) if s == "tune")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// A number in `[0, 1)` or `"tune"`.
    pub beta: BetaChoice,
    pub max_iterations: usize,
    pub occupancy_tol: f64,
    pub tc_tol: f64,
    pub tune_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub trace_length: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Fraction of each trace discarded before measuring.
    pub warmup: f64,
    /// Replay this trace instead of generating IRM traces.
    pub trace: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            threshold: 1.0,
            tie_break: TieBreak::Counterclockwise,
            capacities: vec![50.0],
            catalog: CatalogSection::default(),
            popularity: PopularitySection::default(),
            acceptance: AcceptanceSection::default(),
            solver: SolverSection::default(),
            simulation: SimulationSection::default(),
        }
    }
}

impl Default for CatalogSection {
    fn default() -> Self {
        Self {
            grid: Some(20),
            file: None,
        }
    }
}

impl Default for PopularitySection {
    fn default() -> Self {
        Self {
            hotspots: None,
            alpha: 2.5,
            zipf: None,
            file: None,
        }
    }
}

impl Default for AcceptanceSection {
    fn default() -> Self {
        Self {
            rule: RuleKind::Power,
            exponent: 2.0,
            file: None,
        }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            beta: BetaChoice::Fixed(s.beta),
            max_iterations: s.max_iterations,
            occupancy_tol: s.occupancy_tol,
            tc_tol: s.tc_tol,
            tune_samples: 8,
        }
    }
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            trace_length: 40_000,
            repetitions: 10,
            seed: 1,
            warmup: 0.1,
            trace: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.threshold >= 0.0, "threshold must be nonnegative");
        ensure!(!self.capacities.is_empty(), "at least one capacity is required");
        ensure!(self.capacities.iter().all(|c| *c > 0.0), "capacities must be positive");
        match (&self.catalog.grid, &self.catalog.file) {
            (Some(_), Some(_)) => bail!("catalog: give either grid or file, not both"),
            (None, None) => bail!("catalog: grid or file is required"),
            (_, Some(f)) => ensure!(f.exists(), "catalog file {} does not exist", f.display()),
            _ => {}
        }
        let p = &self.popularity;
        let sources = p.file.is_some() as u8 + p.zipf.is_some() as u8 + p.hotspots.is_some() as u8;
        ensure!(sources <= 1, "popularity: give at most one of hotspots, zipf, file");
        if let Some(f) = &p.file {
            ensure!(f.exists(), "popularity file {} does not exist", f.display());
        }
        if sources == 0 {
            ensure!(self.catalog.grid.is_some(), "popularity: hotspots, zipf or file is required for a file catalog");
        }
        if self.acceptance.rule == RuleKind::Table {
            let f = self.acceptance.file.as_ref().context("acceptance: table rule needs a file")?;
            ensure!(f.exists(), "acceptance table {} does not exist", f.display());
        }
        match &self.solver.beta {
            BetaChoice::Fixed(b) => ensure!((0.0..1.0).contains(b), "beta must lie in [0, 1), got {b}"),
            BetaChoice::Named(s) => ensure!(s == "tune", "beta must be a number or \"tune\", got {s:?}"),
        }
        ensure!(self.solver.max_iterations > 0, "max_iterations must be positive");
        ensure!(self.simulation.repetitions > 0, "repetitions must be positive");
        ensure!((0.0..1.0).contains(&self.simulation.warmup), "warmup must lie in [0, 1)");
        if let Some(t) = &self.simulation.trace {
            ensure!(t.exists(), "trace file {} does not exist", t.display());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seeds(&self) -> Vec<u64> {
        let s = self.simulation.seed;
        (0..self.simulation.repetitions as u64).map(|k| s.wrapping_add(k)).collect()
    }

    pub fn solver_config(&self, beta: f64) -> SolverConfig {
        SolverConfig {
            beta,
            max_iterations: self.solver.max_iterations,
            occupancy_tol: self.solver.occupancy_tol,
            tc_tol: self.solver.tc_tol,
            keep_vectors: false,
        }
    }

    pub fn build_catalog(&self) -> Result<Catalog> {
        match (&self.catalog.grid, &self.catalog.file) {
            (Some(side), _) => Ok(grid_catalog(*side)?),
            (None, Some(f)) => Ok(io::read_catalog_csv(f)?),
            (None, None) => bail!("catalog: grid or file is required"),
        }
    }

    pub fn build_popularity(&self, catalog: &Catalog) -> Result<Popularity> {
        let p = &self.popularity;
        let pop = if let Some(f) = &p.file {
            io::read_popularity_csv(f)?
        } else if let Some(s) = p.zipf {
            Popularity::zipf(catalog.len(), s)?
        } else {
            let hotspots = match (&p.hotspots, self.catalog.grid) {
                (Some(h), _) => h.clone(),
                (None, Some(side)) => default_hotspots(side),
                (None, None) => bail!("popularity: hotspots are required for a file catalog"),
            };
            synthetic_popularity(catalog, Metric::Euclidean, &hotspots, p.alpha)?
        };
        ensure!(
            pop.len() == catalog.len(),
            "popularity has {} items but the catalog has {}",
            pop.len(),
            catalog.len()
        );
        Ok(pop)
    }

    pub fn build_index(&self, catalog: &Catalog) -> Result<NeighborhoodIndex> {
        let spec = DissimilaritySpec::euclidean(self.threshold);
        Ok(build_neighborhood_index(catalog, &spec, self.tie_break, Execution::default())?)
    }

    pub fn acceptance_rule(&self) -> Result<AcceptanceRule> {
        Ok(match self.acceptance.rule {
            RuleKind::Power => AcceptanceRule::Power {
                exponent: self.acceptance.exponent,
            },
            RuleKind::SimLru => AcceptanceRule::SimLru,
            RuleKind::Lru => AcceptanceRule::Lru,
            RuleKind::Table => {
                let f = self.acceptance.file.as_ref().context("acceptance: table rule needs a file")?;
                AcceptanceRule::Table(io::read_acceptance_table(f)?)
            }
        })
    }

    pub fn build_acceptance(&self, index: &NeighborhoodIndex) -> Result<Acceptance> {
        Ok(Acceptance::new(index, &self.acceptance_rule()?)?)
    }
}

pub fn default_hotspots(side: usize) -> Vec<Vec<f64>> {
    let a = (side as f64 / 4.0 - 1.0).max(0.0);
    let b = (3.0 * side as f64 / 4.0 - 1.0).max(0.0);
    vec![vec![a, a], vec![b, b]]
}

/// Capacity as an integer slot count, for the simulators and greedy.
pub fn slots(capacity: f64) -> Result<usize> {
    ensure!(
        capacity.fract() == 0.0 && capacity >= 1.0,
        "capacity {capacity} must be a positive integer here"
    );
    Ok(capacity as usize)
}
