//! `simcache`: batch front end for the similarity-cache model and simulators.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use simcache::baselines::{greedy_coverage, lru_agg_estimate, lru_ttl_estimate};
use simcache::catalog::{check_cover_condition, Catalog, CoverBudget, CoverMode, CoverVerdict, NeighborhoodIndex, Popularity};
use simcache::io;
use simcache::jacobian::{
    beta_interval, jacobian_g, operator_norms, spectral_norm, symmetric_part_radius, tune_beta, BetaInterval,
    OperatorNorms, SpectralConfig, TuneConfig, TuneResult,
};
use simcache::model::ModelInput;
use simcache::sim::{generate_irm_trace, measure_policy, Measurement, Policy, Trace, TraceSource, Warmup};
use simcache::solver::{lru_start, solve, Solution};
use simcache::{Acceptance, AcceptanceRule, Execution};

use config::{slots, BetaChoice, ExperimentConfig, RuleKind};

#[derive(Parser)]
#[command(name = "simcache", version, about = "Hit-rate prediction and simulation for similarity caches")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a catalog (and optionally its popularity) as CSV.
    GenCatalog {
        #[command(flatten)]
        exp: Overrides,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        popularity_out: Option<PathBuf>,
    },
    /// Write an IRM request trace plus a metadata JSON next to it.
    GenTrace {
        #[command(flatten)]
        exp: Overrides,
        #[arg(short, long)]
        output: PathBuf,
        /// Add Poisson arrival times.
        #[arg(long)]
        timestamps: bool,
        /// Metadata path; defaults to `<output>.json`.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Solve the fixed point for one capacity and report hit probabilities.
    Predict {
        #[command(flatten)]
        exp: Overrides,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate the configured policy and emit `method,C,hit_rate,ci95,seed_count`.
    Simulate {
        #[command(flatten)]
        exp: Overrides,
        #[arg(long, value_enum, default_value_t = SimPolicy::RndLru)]
        policy: SimPolicy,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Per-item occupancy dump.
        #[arg(long)]
        occupancy: Option<PathBuf>,
    },
    /// Compare simulation, model and baselines over the capacity list.
    Compare {
        #[command(flatten)]
        exp: Overrides,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Per-item occupancy dump (simulated vs predicted).
        #[arg(long)]
        occupancy: Option<PathBuf>,
    },
    /// Randomized choice of the damping parameter.
    TuneBeta {
        #[command(flatten)]
        exp: Overrides,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Jacobian norms at the LRU starting point for each capacity.
    AnalyzeJacobian {
        #[command(flatten)]
        exp: Overrides,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Norm table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimPolicy {
    /// LRU list with randomized approximate hits.
    RndLru,
    /// TTL cache with the model's characteristic time as timer.
    Ttl,
}

/// Command-line overrides of the experiment file.
#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Square grid catalog with this side.
    #[arg(long)]
    grid: Option<usize>,
    /// Catalog CSV (one item per row, coordinates in columns).
    #[arg(long = "catalog")]
    catalog_file: Option<PathBuf>,
    #[arg(long = "popularity")]
    popularity_file: Option<PathBuf>,
    /// Hotspot skew.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    zipf: Option<f64>,
    /// Similarity threshold.
    #[arg(long = "d")]
    threshold: Option<f64>,
    /// Capacities, comma separated.
    #[arg(short = 'C', long = "capacity", value_delimiter = ',')]
    capacities: Vec<f64>,
    #[arg(long, value_enum)]
    rule: Option<RuleKind>,
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long)]
    table: Option<PathBuf>,
    /// Damping in [0, 1) or `tune`.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Requests per trace.
    #[arg(long = "r")]
    trace_length: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Replay this trace instead of generating one per repetition.
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(g) = self.grid {
            cfg.catalog.grid = Some(g);
            cfg.catalog.file = None;
        }
        if let Some(f) = &self.catalog_file {
            cfg.catalog.file = Some(f.clone());
            cfg.catalog.grid = None;
        }
        let pop = &mut cfg.popularity;
        if let Some(f) = &self.popularity_file {
            pop.file = Some(f.clone());
            pop.zipf = None;
            pop.hotspots = None;
        }
        if let Some(s) = self.zipf {
            pop.zipf = Some(s);
            pop.file = None;
            pop.hotspots = None;
        }
        if let Some(a) = self.alpha {
            pop.alpha = a;
        }
        if let Some(d) = self.threshold {
            cfg.threshold = d;
        }
        if !self.capacities.is_empty() {
            cfg.capacities = self.capacities.clone();
        }
        if let Some(r) = self.rule {
            cfg.acceptance.rule = r;
        }
        if let Some(e) = self.exponent {
            cfg.acceptance.exponent = e;
        }
        if let Some(t) = &self.table {
            cfg.acceptance.rule = RuleKind::Table;
            cfg.acceptance.file = Some(t.clone());
        }
        if let Some(b) = &self.beta {
            cfg.solver.beta = match b.parse::<f64>() {
                Ok(v) => BetaChoice::Fixed(v),
                Err(_) => BetaChoice::Named(b.clone()),
            };
        }
        if let Some(i) = self.iterations {
            cfg.solver.max_iterations = i;
        }
        if let Some(s) = self.seed {
            cfg.simulation.seed = s;
        }
        if let Some(r) = self.trace_length {
            cfg.simulation.trace_length = r;
        }
        if let Some(r) = self.repetitions {
            cfg.simulation.repetitions = r;
        }
        if let Some(t) = &self.trace {
            cfg.simulation.trace = Some(t.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Serialize)]
struct Reproducibility {
    version: &'static str,
    config_hash: String,
    seeds: Vec<u64>,
    config: ExperimentConfig,
}

fn reproducibility(cfg: &ExperimentConfig, seeds: Vec<u64>) -> Reproducibility {
    Reproducibility {
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        seeds,
        config: cfg.clone(),
    }
}

/// Everything derived from the catalog part of the configuration.
struct Setup {
    catalog: Catalog,
    popularity: Popularity,
    index: NeighborhoodIndex,
    acceptance: Acceptance,
}

impl Setup {
    fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let catalog = cfg.build_catalog()?;
        let popularity = cfg.build_popularity(&catalog)?;
        let index = cfg.build_index(&catalog)?;
        let acceptance = cfg.build_acceptance(&index)?;
        Ok(Self {
            catalog,
            popularity,
            index,
            acceptance,
        })
    }

    fn input<'a>(&'a self, acceptance: &'a Acceptance, capacity: f64) -> Result<ModelInput<'a>> {
        Ok(ModelInput::new(&self.index, acceptance, self.popularity.rates(), capacity)?)
    }
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_text(&(text + "\n"), path)
}

fn write_text(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn single_capacity(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.capacities.as_slice() {
        [c] => Ok(*c),
        _ => bail!("this command takes a single capacity, got {:?}", cfg.capacities),
    }
}

fn tune_config(cfg: &ExperimentConfig) -> TuneConfig {
    TuneConfig {
        samples: cfg.solver.tune_samples,
        seed: cfg.simulation.seed,
        ..Default::default()
    }
}

/// The configured β, tuning it first when asked.
fn choose_beta(cfg: &ExperimentConfig, input: &ModelInput<'_>) -> Result<(f64, Option<TuneResult>)> {
    match cfg.solver.beta {
        BetaChoice::Fixed(b) => Ok((b, None)),
        _ => {
            let t = tune_beta(input, &tune_config(cfg))?;
            Ok((t.beta, Some(t)))
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum CoverStatus {
    Holds,
    Fails,
    Unverified,
    NotApplicable,
}

fn cover_status(index: &NeighborhoodIndex, capacity: f64, warnings: &mut Vec<String>) -> CoverStatus {
    let Ok(c) = slots(capacity) else {
        return CoverStatus::NotApplicable;
    };
    let budget = CoverBudget::default();
    let mode = if index.len() <= budget.max_items && c <= budget.max_capacity {
        CoverMode::Exact
    } else {
        CoverMode::Heuristic
    };
    match check_cover_condition(index, c, mode, budget) {
        Ok(CoverVerdict::Holds) => CoverStatus::Holds,
        Ok(CoverVerdict::Fails { witness, coverage }) => {
            warnings.push(format!(
                "cover condition fails for C={capacity}: {} items cover {coverage} neighbors; the capacity equation may have no root on parts of the simplex",
                witness.len()
            ));
            CoverStatus::Fails
        }
        Ok(CoverVerdict::Unknown { .. }) => CoverStatus::Unverified,
        Err(_) => CoverStatus::NotApplicable,
    }
}

#[derive(Debug, Serialize)]
struct PredictionReport {
    #[serde(rename = "H")]
    hit_rate: f64,
    h: Vec<f64>,
    o: Vec<f64>,
    t_c: f64,
    t_c0: f64,
    capacity: f64,
    occupancy_sum: f64,
    iterations: usize,
    converged: bool,
    step_norms: Vec<f64>,
    residual: f64,
    beta: f64,
    cover_condition: CoverStatus,
    tuning: Option<TuneResult>,
    warnings: Vec<String>,
    reproducibility: Reproducibility,
}

fn predict(cfg: &ExperimentConfig, output: Option<&Path>) -> Result<()> {
    let setup = Setup::build(cfg)?;
    let c = single_capacity(cfg)?;
    let input = setup.input(&setup.acceptance, c)?;
    let (beta, tuning) = choose_beta(cfg, &input)?;
    let sol = solve(&input, &cfg.solver_config(beta))?;
    let mut warnings = Vec::new();
    let cover = cover_status(&setup.index, c, &mut warnings);
    if !sol.converged {
        warnings.push(format!(
            "no convergence after {} iterations (last step {:.3e})",
            sol.trace.iterations(),
            sol.trace.records.last().map_or(f64::NAN, |r| r.step_norm)
        ));
    }
    if let Some(t) = &tuning {
        if !t.verified {
            warnings.push(format!("beta tuning fell back to {} ({:?})", t.beta, t.fallback));
        }
    }
    for w in &warnings {
        warn!("{w}");
    }
    let seeds = tuning.as_ref().map_or_else(Vec::new, |_| vec![cfg.simulation.seed]);
    let report = prediction_report(cfg, &sol, c, beta, cover, tuning, warnings, seeds);
    write_json(&report, output)
}

#[allow(clippy::too_many_arguments)]
fn prediction_report(
    cfg: &ExperimentConfig,
    sol: &Solution,
    capacity: f64,
    beta: f64,
    cover: CoverStatus,
    tuning: Option<TuneResult>,
    warnings: Vec<String>,
    seeds: Vec<u64>,
) -> PredictionReport {
    let recs = &sol.trace.records;
    let o = sol.occupancy.as_slice().to_vec();
    PredictionReport {
        hit_rate: sol.hits.hit_rate,
        h: sol.hits.per_item.clone(),
        occupancy_sum: o.iter().sum(),
        o,
        t_c: sol.characteristic_time,
        t_c0: recs[0].characteristic_time,
        capacity,
        iterations: sol.trace.iterations(),
        converged: sol.converged,
        step_norms: recs.iter().map(|r| r.step_norm).collect(),
        residual: recs.last().map_or(f64::NAN, |r| r.residual),
        beta,
        cover_condition: cover,
        tuning,
        warnings,
        reproducibility: reproducibility(cfg, seeds),
    }
}

#[derive(Debug, Clone, Serialize)]
struct Row {
    method: &'static str,
    capacity: f64,
    hit_rate: f64,
    ci95: f64,
    seed_count: usize,
}

impl Row {
    fn model(method: &'static str, capacity: f64, hit_rate: f64) -> Self {
        Self {
            method,
            capacity,
            hit_rate,
            ci95: 0.0,
            seed_count: 0,
        }
    }

    fn measured(method: &'static str, capacity: f64, m: &Measurement) -> Self {
        Self {
            method,
            capacity,
            hit_rate: m.hit_rate,
            ci95: m.half_width,
            seed_count: m.repetitions,
        }
    }
}

fn rows_csv(rows: &[Row]) -> String {
    let mut s = String::from("method,C,hit_rate,ci95,seed_count\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{},{}\n", r.method, r.capacity, r.hit_rate, r.ci95, r.seed_count));
    }
    s
}

fn load_trace(cfg: &ExperimentConfig, items: usize, timestamps: bool) -> Result<Option<Trace>> {
    let Some(path) = &cfg.simulation.trace else {
        return Ok(None);
    };
    let trace = io::read_trace(path)?;
    trace.check_items(items)?;
    ensure!(
        !timestamps || trace.timestamps().is_some(),
        "the ttl policy needs a trace with timestamps"
    );
    Ok(Some(trace))
}

fn source<'a>(cfg: &ExperimentConfig, trace: Option<&'a Trace>, popularity: &'a Popularity) -> TraceSource<'a> {
    match trace {
        Some(t) => TraceSource::Fixed(t),
        None => TraceSource::Irm {
            popularity,
            length: cfg.simulation.trace_length,
        },
    }
}

fn occupancy_csv(columns: &[&str], capacities: &[f64], data: &[Vec<Vec<f64>>]) -> String {
    let mut s = format!("item,C,{}\n", columns.join(","));
    for (ci, c) in capacities.iter().enumerate() {
        let cols = &data[ci];
        for n in 0..cols[0].len() {
            let vals: Vec<String> = cols.iter().map(|v| v[n].to_string()).collect();
            s.push_str(&format!("{n},{c},{}\n", vals.join(",")));
        }
    }
    s
}

#[derive(Debug, Serialize)]
struct TableReport {
    rows: Vec<Row>,
    warnings: Vec<String>,
    reproducibility: Reproducibility,
}

fn simulate(cfg: &ExperimentConfig, policy: SimPolicy, output: Option<&Path>, json: Option<&Path>, occupancy: Option<&Path>) -> Result<()> {
    let setup = Setup::build(cfg)?;
    let seeds = cfg.seeds();
    let timed = matches!(policy, SimPolicy::Ttl);
    let trace = load_trace(cfg, setup.catalog.len(), timed)?;
    let warmup = Warmup::Fraction(cfg.simulation.warmup);
    let mut rows = Vec::new();
    let mut dumps = Vec::new();
    for &c in &cfg.capacities {
        let src = source(cfg, trace.as_ref(), &setup.popularity);
        let m = match policy {
            SimPolicy::RndLru => {
                let p = Policy::RndLru {
                    index: &setup.index,
                    acceptance: &setup.acceptance,
                    capacity: slots(c)?,
                };
                measure_policy(p, src, &seeds, warmup, Execution::default())?
            }
            SimPolicy::Ttl => {
                let input = setup.input(&setup.acceptance, c)?;
                let (beta, _) = choose_beta(cfg, &input)?;
                let sol = solve(&input, &cfg.solver_config(beta))?;
                let timers = vec![sol.characteristic_time; setup.catalog.len()];
                let p = Policy::TtlSimilarity {
                    index: &setup.index,
                    acceptance: &setup.acceptance,
                    timers: &timers,
                };
                measure_policy(p, src, &seeds, warmup, Execution::default())?
            }
        };
        let method = if timed { "exp_rnd_ttl" } else { "exp_rnd" };
        rows.push(Row::measured(method, c, &m));
        dumps.push(vec![m.occupancy]);
    }
    if let Some(p) = occupancy {
        write_text(&occupancy_csv(&["occupancy"], &cfg.capacities, &dumps), Some(p))?;
    }
    write_text(&rows_csv(&rows), output)?;
    if let Some(p) = json {
        let report = TableReport {
            rows,
            warnings: Vec::new(),
            reproducibility: reproducibility(cfg, seeds),
        };
        write_json(&report, Some(p))?;
    }
    Ok(())
}

struct Cell {
    rows: Vec<Row>,
    occupancy: Vec<Vec<f64>>,
    warnings: Vec<String>,
}

fn compare_cell(cfg: &ExperimentConfig, setup: &Setup, sim_acc: &Acceptance, trace: Option<&Trace>, c: f64) -> Result<Cell> {
    let seeds = cfg.seeds();
    let warmup = Warmup::Fraction(cfg.simulation.warmup);
    let k = slots(c)?;
    let mut warnings = Vec::new();
    let measure = |acc: &Acceptance| {
        let p = Policy::RndLru {
            index: &setup.index,
            acceptance: acc,
            capacity: k,
        };
        measure_policy(p, source(cfg, trace, &setup.popularity), &seeds, warmup, Execution::Sequential)
    };
    let ours = |method: &str, acc: &Acceptance, warnings: &mut Vec<String>| -> Result<Solution> {
        let input = ModelInput::new(&setup.index, acc, setup.popularity.rates(), c)?;
        let (beta, _) = choose_beta(cfg, &input)?;
        let sol = solve(&input, &cfg.solver_config(beta))?;
        if !sol.converged {
            warnings.push(format!("{method} C={c}: fixed point not converged after {} iterations", sol.trace.iterations()));
        }
        Ok(sol)
    };
    let exp_rnd = measure(&setup.acceptance)?;
    let exp_sim = measure(sim_acc)?;
    let ours_rnd = ours("ours_rnd", &setup.acceptance, &mut warnings)?;
    let ours_sim = ours("ours_sim", sim_acc, &mut warnings)?;
    let rates = setup.popularity.rates();
    let mut rows = vec![
        Row::measured("exp_rnd", c, &exp_rnd),
        Row::measured("exp_sim", c, &exp_sim),
        Row::model("ours_rnd", c, ours_rnd.hits.hit_rate),
        Row::model("ours_sim", c, ours_sim.hits.hit_rate),
        Row::model("lru", c, lru_ttl_estimate(rates, c)?.hit_rate),
        Row::model("lru_agg", c, lru_agg_estimate(&setup.index, rates, c)?.hit_rate),
    ];
    if cfg.acceptance.rule == RuleKind::Table {
        warnings.push("greedy skipped: it assumes every neighbor serves, which an explicit q table contradicts".into());
    } else {
        rows.push(Row::model("greedy", c, greedy_coverage(&setup.index, rates, k).covered_weight));
    }
    let occupancy = vec![
        exp_rnd.occupancy,
        ours_rnd.occupancy.into_inner(),
        exp_sim.occupancy,
        ours_sim.occupancy.into_inner(),
    ];
    Ok(Cell {
        rows,
        occupancy,
        warnings,
    })
}

fn compare(cfg: &ExperimentConfig, output: Option<&Path>, json: Option<&Path>, occupancy: Option<&Path>) -> Result<()> {
    let setup = Setup::build(cfg)?;
    let sim_acc = Acceptance::new(&setup.index, &AcceptanceRule::SimLru)?;
    let trace = load_trace(cfg, setup.catalog.len(), false)?;
    let cells: Vec<Cell> = cfg
        .capacities
        .par_iter()
        .map(|&c| compare_cell(cfg, &setup, &sim_acc, trace.as_ref(), c))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut dumps = Vec::new();
    for cell in cells {
        rows.extend(cell.rows);
        warnings.extend(cell.warnings);
        dumps.push(cell.occupancy);
    }
    for w in &warnings {
        warn!("{w}");
    }
    if let Some(p) = occupancy {
        let cols = ["exp_rnd", "ours_rnd", "exp_sim", "ours_sim"];
        write_text(&occupancy_csv(&cols, &cfg.capacities, &dumps), Some(p))?;
    }
    write_text(&rows_csv(&rows), output)?;
    if let Some(p) = json {
        let report = TableReport {
            rows,
            warnings,
            reproducibility: reproducibility(cfg, cfg.seeds()),
        };
        write_json(&report, Some(p))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct TuneReport {
    capacity: f64,
    #[serde(flatten)]
    result: TuneResult,
    reproducibility: Reproducibility,
}

fn tune(cfg: &ExperimentConfig, output: Option<&Path>) -> Result<()> {
    let setup = Setup::build(cfg)?;
    let c = single_capacity(cfg)?;
    let input = setup.input(&setup.acceptance, c)?;
    let result = tune_beta(&input, &tune_config(cfg))?;
    if !result.verified {
        warn!("no verified beta, falling back to {} ({:?})", result.beta, result.fallback);
    }
    let report = TuneReport {
        capacity: c,
        result,
        reproducibility: reproducibility(cfg, vec![cfg.simulation.seed]),
    };
    write_json(&report, output)
}

#[derive(Debug, Serialize)]
struct NormRow {
    capacity: f64,
    beta: f64,
    damped: OperatorNorms,
    gamma: f64,
    eta: f64,
    interval: BetaInterval,
}

#[derive(Debug, Serialize)]
struct JacobianReport {
    rows: Vec<NormRow>,
    reproducibility: Reproducibility,
}

fn analyze(cfg: &ExperimentConfig, output: Option<&Path>, csv: Option<&Path>) -> Result<()> {
    let setup = Setup::build(cfg)?;
    let spectral = SpectralConfig::default();
    let tc_tol = cfg.solver.tc_tol;
    let mut rows = Vec::new();
    for &c in &cfg.capacities {
        let input = setup.input(&setup.acceptance, c)?;
        let (beta, _) = choose_beta(cfg, &input)?;
        let (o0, _) = lru_start(&input, tc_tol)?;
        let bundle = jacobian_g(&input, &o0, tc_tol)?;
        let gamma = spectral_norm(&bundle.j_g, &spectral)?;
        let eta = symmetric_part_radius(&bundle.j_g, &spectral)?;
        rows.push(NormRow {
            capacity: c,
            beta,
            damped: operator_norms(&bundle.damped(beta), &spectral)?,
            gamma,
            eta,
            interval: beta_interval(gamma, eta),
        });
    }
    if let Some(p) = csv {
        let mut s = String::from("C,beta,spectral,one,infinity,gamma,eta\n");
        for r in &rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.capacity, r.beta, r.damped.spectral, r.damped.one, r.damped.infinity, r.gamma, r.eta
            ));
        }
        write_text(&s, Some(p))?;
    }
    let seeds = if cfg.solver.beta.is_tune() { vec![cfg.simulation.seed] } else { Vec::new() };
    write_json(
        &JacobianReport {
            rows,
            reproducibility: reproducibility(cfg, seeds),
        },
        output,
    )
}

#[derive(Debug, Serialize)]
struct TraceMeta {
    items: usize,
    length: usize,
    seed: u64,
    alpha: f64,
    timestamps: bool,
    reproducibility: Reproducibility,
}

fn gen_trace(cfg: &ExperimentConfig, output: &Path, timestamps: bool, meta: Option<&Path>) -> Result<()> {
    let catalog = cfg.build_catalog()?;
    let popularity = cfg.build_popularity(&catalog)?;
    let seed = cfg.simulation.seed;
    let trace = generate_irm_trace(&popularity, cfg.simulation.trace_length, seed, timestamps)?;
    io::write_trace(output, &trace)?;
    let meta_path = meta.map_or_else(|| PathBuf::from(format!("{}.json", output.display())), Path::to_path_buf);
    let m = TraceMeta {
        items: catalog.len(),
        length: trace.len(),
        seed,
        alpha: cfg.popularity.alpha,
        timestamps,
        reproducibility: reproducibility(cfg, vec![seed]),
    };
    write_json(&m, Some(&meta_path))
}

fn gen_catalog(cfg: &ExperimentConfig, output: &Path, popularity_out: Option<&Path>) -> Result<()> {
    let catalog = cfg.build_catalog()?;
    io::write_catalog_csv(output, &catalog)?;
    if let Some(p) = popularity_out {
        io::write_popularity_csv(p, &cfg.build_popularity(&catalog)?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenCatalog {
            exp,
            output,
            popularity_out,
        } => gen_catalog(&exp.resolve()?, &output, popularity_out.as_deref()),
        Command::GenTrace {
            exp,
            output,
            timestamps,
            meta,
        } => gen_trace(&exp.resolve()?, &output, timestamps, meta.as_deref()),
        Command::Predict { exp, output } => predict(&exp.resolve()?, output.as_deref()),
        Command::Simulate {
            exp,
            policy,
            output,
            json,
            occupancy,
        } => simulate(&exp.resolve()?, policy, output.as_deref(), json.as_deref(), occupancy.as_deref()),
        Command::Compare {
            exp,
            output,
            json,
            occupancy,
        } => compare(&exp.resolve()?, output.as_deref(), json.as_deref(), occupancy.as_deref()),
        Command::TuneBeta { exp, output } => tune(&exp.resolve()?, output.as_deref()),
        Command::AnalyzeJacobian { exp, output, csv } => analyze(&exp.resolve()?, output.as_deref(), csv.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let causes: Vec<String> = e.chain().skip(1).map(|c| c.to_string()).collect();
            let msg = serde_json::json!({ "error": e.to_string(), "causes": causes });
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
