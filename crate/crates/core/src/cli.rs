//! Command-line front end: `field | plan | corpus | train | infer | bench`.
//!
//! Every run is described by a [`RunConfig`], read from an optional TOML file
//! and overridden by flags. The resolved config is written next to the
//! outputs so `--config <out>/config.toml` repeats the run.

use std::collections::HashSet;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bench::{emit_distribution_data, energy_gap, evaluate_nn, run_comparison, write_distribution_csv, Method};
use crate::dataset::{
    generate_corpus, read_corpus, sample_rear_start, split_stratified, stratum, write_metrics_csv, CorpusConfig,
    DomainConfig, MetricsRow, NormStats, ScenarioGrid, TrainingSample,
};
use crate::error::{Error, Result};
use crate::flowfield::{field_stats, make_uniform_field, read_field, write_field, FlowField, GridNode, ScenarioParams};
use crate::metrics::{assess, MetricsConfig};
use crate::mlp::{infer_path, load_checkpoint, median_inference_time, save_checkpoint, snap_to_grid, train, TrainConfig};
use crate::planner::{astar, dijkstra_oracle, HeuristicMode, Path, PlannerConfig, Variant};

/// Environment variable read when neither `--seed` nor the config file sets a seed.
pub const SEED_ENV: &str = "WAKEPLAN_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: PathBuf,
    /// Worker threads for corpus generation.
    pub jobs: usize,
    /// When false, every reported wall time is 0 so outputs are byte-identical.
    pub record_timing: bool,
    pub domain: DomainConfig,
    pub scenario: ScenarioSection,
    pub planner: PlannerConfig,
    pub metrics: MetricsConfig,
    pub field: FieldSection,
    pub plan: PlanSection,
    pub corpus: CorpusSection,
    pub train: TrainSection,
    pub infer: InferSection,
    pub bench: BenchSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            out: PathBuf::from("wakeplan-out"),
            jobs: 1,
            record_timing: true,
            domain: DomainConfig::default(),
            scenario: ScenarioSection::default(),
            planner: PlannerConfig::default(),
            metrics: MetricsConfig::default(),
            field: FieldSection::default(),
            plan: PlanSection::default(),
            corpus: CorpusSection::default(),
            train: TrainSection::default(),
            infer: InferSection::default(),
            bench: BenchSection::default(),
        }
    }
}

/// Flow condition of the single field used by `field`, `plan` and `infer`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub flow_speed: f64,
    pub flow_angle: f64,
    /// Freestream only, no hull or wake.
    pub uniform: bool,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self { flow_speed: 1.0, flow_angle: 0.0, uniform: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSection {
    /// Summarize an existing field file instead of generating one.
    pub inspect: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    /// Field file to plan on; generated from the domain and scenario when absent.
    pub field: Option<PathBuf>,
    pub start: Option<[usize; 3]>,
    pub goal: Option<[usize; 3]>,
    /// Use the Dijkstra reference planner instead of A*.
    pub oracle: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub scenarios: ScenarioGrid,
    pub variants: Vec<Variant>,
}

impl Default for CorpusSection {
    fn default() -> Self {
        Self { scenarios: ScenarioGrid::default(), variants: Variant::ALL.to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub corpus: Option<PathBuf>,
    pub variant: Variant,
    pub val_fraction: f64,
    pub overfit_smoke: bool,
    pub smoke_samples: usize,
    pub smoke_threshold: f64,
    pub optimizer: TrainConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            corpus: None,
            variant: Variant::WakeInformed,
            val_fraction: 0.2,
            overfit_smoke: false,
            smoke_samples: 32,
            smoke_threshold: 1e-3,
            optimizer: TrainConfig::default(),
        }
    }
}

impl TrainSection {
    /// Optimizer settings of the overfit smoke run: small batches, a larger
    /// step and no early stopping.
    pub fn smoke_config(&self) -> TrainConfig {
        TrainConfig { lr: 1e-3, batch_size: 8, max_epochs: 500, patience: None, ..self.optimizer.clone() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferSection {
    pub model: Option<PathBuf>,
    /// Meters.
    pub start: Option<[f64; 3]>,
    /// Meters; defaults to the payload bay.
    pub goal: Option<[f64; 3]>,
    /// Snap the prediction onto the wake field and assess it.
    pub snap: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub corpus: Option<PathBuf>,
    /// Network checkpoints to compare against the planners.
    pub models: Vec<PathBuf>,
    /// `split.json` from a training run; restricts the comparison to its
    /// validation keys.
    pub split: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Copies the run seed into every seeded sub-config.
    pub fn resolve(mut self) -> Self {
        let seed = self.seed();
        self.seed = Some(seed);
        self.corpus.scenarios.seed = seed;
        self.train.optimizer.seed = seed;
        self
    }

    pub fn scenario_params(&self) -> Result<ScenarioParams> {
        ScenarioParams::new(self.scenario.flow_speed, self.scenario.flow_angle, self.seed())
    }

    pub fn build_field(&self) -> Result<FlowField> {
        let sc = self.scenario_params()?;
        if self.scenario.uniform {
            make_uniform_field(self.domain.grid, sc)
        } else {
            self.domain.build_field(sc)
        }
    }

    pub fn corpus_config(&self) -> CorpusConfig {
        CorpusConfig {
            domain: self.domain.clone(),
            scenarios: self.corpus.scenarios.clone(),
            planner: self.planner,
            metrics: self.metrics,
            variants: self.corpus.variants.clone(),
            jobs: self.jobs,
            record_timing: self.record_timing,
        }
    }

    fn timing(&self, t: f64) -> f64 {
        if self.record_timing {
            t
        } else {
            0.0
        }
    }
}

/// Record of one invocation, written as `manifest.json` in the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

fn parse_triple<T: std::str::FromStr>(s: &str) -> std::result::Result<[T; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got {s:?}"));
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| format!("cannot parse {p:?}"))?);
    }
    out.try_into().map_err(|_| unreachable!())
}

fn parse_node(s: &str) -> std::result::Result<[usize; 3], String> {
    parse_triple(s)
}

fn parse_point(s: &str) -> std::result::Result<[f64; 3], String> {
    parse_triple(s)
}

#[derive(Debug, Parser)]
#[command(name = "wakeplan", version, about = "Wake-informed energy-optimal path planning for underwater vehicles")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed [fallback: config file, WAKEPLAN_SEED, then 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for corpus generation.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write 0 for every wall time so that outputs are byte-identical.
    #[arg(long, global = true)]
    pub no_timing: bool,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct DomainArgs {
    /// Nodes per axis.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Domain edge length, meters.
    #[arg(long)]
    pub extent: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct ScenarioArgs {
    /// Freestream speed, m/s.
    #[arg(long)]
    pub speed: Option<f64>,
    /// Inflow angle, degrees.
    #[arg(long)]
    pub angle: Option<f64>,
    /// Freestream only, no hull or wake.
    #[arg(long)]
    pub uniform: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a flow field, or summarize an existing one.
    Field {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Field file to summarize instead of generating.
        #[arg(long)]
        inspect: Option<PathBuf>,
    },
    /// Plan one path.
    Plan {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Field file; generated from the domain and scenario when absent.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Start node as ix,iy,iz [default: seeded rear-face node].
        #[arg(long, value_parser = parse_node)]
        start: Option<[usize; 3]>,
        /// Goal node as ix,iy,iz [default: payload bay].
        #[arg(long, value_parser = parse_node)]
        goal: Option<[usize; 3]>,
        #[arg(long, value_enum)]
        variant: Option<Variant>,
        #[arg(long, value_enum)]
        heuristic: Option<HeuristicMode>,
        /// Use the Dijkstra reference planner.
        #[arg(long)]
        oracle: bool,
    },
    /// Plan paths over a grid of flow conditions.
    Corpus {
        #[command(flatten)]
        domain: DomainArgs,
        /// Comma-separated flow speeds, m/s.
        #[arg(long, value_delimiter = ',')]
        speeds: Option<Vec<f64>>,
        /// Comma-separated inflow angles, degrees.
        #[arg(long, value_delimiter = ',')]
        angles: Option<Vec<f64>>,
        /// Start nodes per field.
        #[arg(long)]
        starts: Option<usize>,
        /// Planner variants (repeatable) [default: both].
        #[arg(long, value_enum)]
        variant: Vec<Variant>,
        #[arg(long, value_enum)]
        heuristic: Option<HeuristicMode>,
    },
    /// Train a network on one variant of a corpus.
    Train {
        /// Corpus directory.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, value_enum)]
        variant: Option<Variant>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        /// Early-stopping patience; 0 disables it.
        #[arg(long)]
        patience: Option<usize>,
        #[arg(long)]
        val_fraction: Option<f64>,
        /// Overfit a few trajectories and fail unless the loss gets small.
        #[arg(long)]
        overfit_smoke: bool,
    },
    /// Predict a path with a trained network.
    Infer {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Checkpoint directory.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Start position as x,y,z meters.
        #[arg(long, value_parser = parse_point)]
        start: Option<[f64; 3]>,
        /// Goal position as x,y,z meters [default: payload bay].
        #[arg(long, value_parser = parse_point)]
        goal: Option<[f64; 3]>,
        /// Snap onto the wake field and compute path metrics.
        #[arg(long)]
        snap: bool,
    },
    /// Compare planners and networks on a corpus.
    Bench {
        /// Corpus directory.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Checkpoint directories (repeatable).
        #[arg(long)]
        model: Vec<PathBuf>,
        /// Restrict to the validation keys of a training split.
        #[arg(long)]
        split: Option<PathBuf>,
    },
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Field { .. } => CommandKind::Field,
            Command::Plan { .. } => CommandKind::Plan,
            Command::Corpus { .. } => CommandKind::Corpus,
            Command::Train { .. } => CommandKind::Train,
            Command::Infer { .. } => CommandKind::Infer,
            Command::Bench { .. } => CommandKind::Bench,
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl DomainArgs {
    fn apply(self, d: &mut DomainConfig) {
        if let Some(n) = self.grid_n {
            (d.grid.nx, d.grid.ny, d.grid.nz) = (n, n, n);
        }
        set(&mut d.grid.extent, self.extent);
    }
}

impl ScenarioArgs {
    fn apply(self, s: &mut ScenarioSection) {
        set(&mut s.flow_speed, self.speed);
        set(&mut s.flow_angle, self.angle);
        s.uniform |= self.uniform;
    }
}

impl Cli {
    /// Builds the run configuration: defaults, then the config file, then
    /// flags. The seed falls back to `env_seed` when neither sets it.
    pub fn run_config(self, env_seed: Option<u64>) -> std::result::Result<(RunConfig, CommandKind), CliError> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
                RunConfig::from_toml(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.seed = self.seed.or(cfg.seed).or(env_seed);
        set(&mut cfg.out, self.out);
        set(&mut cfg.jobs, self.jobs);
        if self.no_timing {
            cfg.record_timing = false;
        }
        let kind = self.command.kind();
        match self.command {
            Command::Field { domain, scenario, inspect } => {
                domain.apply(&mut cfg.domain);
                scenario.apply(&mut cfg.scenario);
                if inspect.is_some() {
                    cfg.field.inspect = inspect;
                }
            }
            Command::Plan { domain, scenario, field, start, goal, variant, heuristic, oracle } => {
                domain.apply(&mut cfg.domain);
                scenario.apply(&mut cfg.scenario);
                if field.is_some() {
                    cfg.plan.field = field;
                }
                if start.is_some() {
                    cfg.plan.start = start;
                }
                if goal.is_some() {
                    cfg.plan.goal = goal;
                }
                set(&mut cfg.planner.variant, variant);
                set(&mut cfg.planner.heuristic, heuristic);
                cfg.plan.oracle |= oracle;
            }
            Command::Corpus { domain, speeds, angles, starts, variant, heuristic } => {
                domain.apply(&mut cfg.domain);
                set(&mut cfg.corpus.scenarios.speeds, speeds);
                set(&mut cfg.corpus.scenarios.angles, angles);
                set(&mut cfg.corpus.scenarios.starts_per_field, starts);
                if !variant.is_empty() {
                    cfg.corpus.variants = variant;
                }
                set(&mut cfg.planner.heuristic, heuristic);
            }
            Command::Train { corpus, variant, epochs, lr, batch_size, patience, val_fraction, overfit_smoke } => {
                if corpus.is_some() {
                    cfg.train.corpus = corpus;
                }
                set(&mut cfg.train.variant, variant);
                let o = &mut cfg.train.optimizer;
                set(&mut o.max_epochs, epochs);
                set(&mut o.lr, lr);
                set(&mut o.batch_size, batch_size);
                if let Some(p) = patience {
                    o.patience = (p > 0).then_some(p);
                }
                set(&mut cfg.train.val_fraction, val_fraction);
                cfg.train.overfit_smoke |= overfit_smoke;
            }
            Command::Infer { domain, scenario, model, start, goal, snap } => {
                domain.apply(&mut cfg.domain);
                scenario.apply(&mut cfg.scenario);
                if model.is_some() {
                    cfg.infer.model = model;
                }
                if start.is_some() {
                    cfg.infer.start = start;
                }
                if goal.is_some() {
                    cfg.infer.goal = goal;
                }
                cfg.infer.snap |= snap;
            }
            Command::Bench { corpus, model, split } => {
                if corpus.is_some() {
                    cfg.bench.corpus = corpus;
                }
                if !model.is_empty() {
                    cfg.bench.models = model;
                }
                if split.is_some() {
                    cfg.bench.split = split;
                }
            }
        }
        Ok((cfg.resolve(), kind))
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation; exit code 2.
    Usage(String),
    /// Failure while running; exit code 1.
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Field,
    Plan,
    Corpus,
    Train,
    Infer,
    Bench,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Field => "field",
            CommandKind::Plan => "plan",
            CommandKind::Corpus => "corpus",
            CommandKind::Train => "train",
            CommandKind::Infer => "infer",
            CommandKind::Bench => "bench",
        }
    }
}

/// Collects output files and writes them under the output directory.
struct Outputs<'a> {
    dir: &'a FsPath,
    files: Vec<String>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a FsPath) -> Result<Self> {
        fs::create_dir_all(dir).map_err(Error::file(dir))?;
        Ok(Self { dir, files: Vec::new() })
    }

    /// Registers `name` and returns its full path.
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, serde_json::to_string_pretty(value)? + "\n").map_err(Error::file(&p))
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).map_err(Error::file(&p))
    }
}

/// Runs one command with a resolved configuration and writes
/// `config.toml` and `manifest.json` next to its outputs.
pub fn execute(cfg: &RunConfig, kind: CommandKind) -> Result<RunManifest> {
    let mut out = Outputs::new(&cfg.out)?;
    let summary = match kind {
        CommandKind::Field => cmd_field(cfg, &mut out)?,
        CommandKind::Plan => cmd_plan(cfg, &mut out)?,
        CommandKind::Corpus => cmd_corpus(cfg, &mut out)?,
        CommandKind::Train => cmd_train(cfg, &mut out)?,
        CommandKind::Infer => cmd_infer(cfg, &mut out)?,
        CommandKind::Bench => cmd_bench(cfg, &mut out)?,
    };
    out.text("config.toml", &cfg.to_toml()?)?;
    let mut outputs = out.files.clone();
    outputs.push("manifest.json".into());
    let manifest = RunManifest {
        command: kind.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed(),
        outputs,
        summary,
    };
    let p = cfg.out.join("manifest.json");
    fs::write(&p, serde_json::to_string_pretty(&manifest)? + "\n").map_err(Error::file(&p))?;
    Ok(manifest)
}

fn require<'a>(v: &'a Option<PathBuf>, what: &str) -> Result<&'a PathBuf> {
    v.as_ref().ok_or_else(|| Error::Config(format!("{what} is required")))
}

fn cmd_field(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let field = match &cfg.field.inspect {
        Some(p) => read_field(p)?,
        None => cfg.build_field()?,
    };
    let stats = field_stats(&field, &cfg.planner)?;
    let (vmin, vmax) = field.min_max_speed();
    if cfg.field.inspect.is_none() {
        write_field(out.path("field.wpf"), &field)?;
    }
    out.json("field_stats.json", &stats)?;
    Ok(json!({
        "dims": field.spec().dims(),
        "extent": field.spec().extent,
        "scenario": field.scenario(),
        "fingerprint": format!("{:08x}", field.fingerprint()),
        "free_nodes": stats.free_nodes,
        "min_speed": vmin,
        "max_speed": vmax,
        "median_speed": stats.median_speed,
    }))
}

fn cmd_plan(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let field = match &cfg.plan.field {
        Some(p) => read_field(p)?,
        None => cfg.build_field()?,
    };
    let spec = *field.spec();
    let to_node = |a: [usize; 3]| GridNode::new(a[0], a[1], a[2]);
    let goal = match (cfg.plan.goal, &cfg.plan.field) {
        (Some(g), _) => to_node(g),
        (None, None) if !cfg.scenario.uniform => cfg.domain.goal(),
        _ => return Err(Error::Config("a goal node is required for field files and uniform fields".into())),
    };
    let start = match cfg.plan.start {
        Some(s) => to_node(s),
        None => sample_rear_start(&field, &mut ChaCha8Rng::seed_from_u64(cfg.seed()))?,
    };
    let pcfg = cfg.planner;
    let mut result = if cfg.plan.oracle { dijkstra_oracle(&field, start, goal, &pcfg)? } else { astar(&field, start, goal, &pcfg)? };
    result.wall_time = cfg.timing(result.wall_time);
    let metrics = assess(&result.path, &field, None, &pcfg, &cfg.metrics)?;
    info!("planned {} nodes, g = {}, {} expanded", result.path.len(), result.g_total, result.expanded);
    out.json("path.json", &json!({ "start": start, "goal": goal, "result": result, "metrics": metrics }))?;
    Ok(json!({
        "planner": if cfg.plan.oracle { "dijkstra" } else { "astar" },
        "variant": pcfg.variant,
        "heuristic": pcfg.heuristic,
        "dims": spec.dims(),
        "nodes": result.path.len(),
        "g_total": result.g_total,
        "expanded": result.expanded,
        "wall_time": result.wall_time,
        "metrics": metrics,
    }))
}

fn cmd_corpus(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let corpus = generate_corpus(&cfg.corpus_config())?;
    let dir = out.path("corpus");
    crate::dataset::write_corpus(&dir, &corpus)?;
    let manifest = corpus.manifest();
    Ok(json!({ "fields": manifest.fields, "counts": manifest.counts }))
}

/// Evenly spaced picks so that a small subset spans the scenario grid.
fn spread<T: Clone>(items: &[T], n: usize) -> Vec<T> {
    if items.len() <= n {
        return items.to_vec();
    }
    (0..n).map(|i| items[i * items.len() / n].clone()).collect()
}

fn cmd_train(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let corpus = read_corpus(require(&cfg.train.corpus, "train.corpus (--corpus)")?)?;
    let variant = cfg.train.variant;
    let (samples, skipped) = corpus.samples(variant);
    if samples.is_empty() {
        return Err(Error::EmptyData(format!("corpus has no usable {variant} paths")));
    }
    if cfg.train.overfit_smoke {
        let subset = spread(&samples, cfg.train.smoke_samples);
        let norm = NormStats::fit(&subset)?;
        let set: Vec<TrainingSample> = subset.iter().map(|s| norm.normalize(s)).collect();
        let tcfg = cfg.train.smoke_config();
        let (model, report) = train(&set, &set, norm, &tcfg)?;
        let report = if cfg.record_timing { report } else { report.without_timing() };
        // Validation is the training set here, so the best validation loss
        // is the lowest full training-set loss, and the returned model has it.
        let final_loss = report.best_val;
        out.json("report.json", &report)?;
        save_checkpoint(out.path("model"), &model, &tcfg)?;
        if final_loss.is_nan() || final_loss >= cfg.train.smoke_threshold {
            return Err(Error::Domain(format!(
                "overfit smoke failed: training loss {final_loss:.3e} is not below {:.1e}",
                cfg.train.smoke_threshold
            )));
        }
        return Ok(json!({
            "mode": "overfit_smoke",
            "samples": set.len(),
            "epochs": report.stopped_epoch,
            "train_loss": final_loss,
            "best_epoch": report.best_epoch,
            "threshold": cfg.train.smoke_threshold,
        }));
    }
    let strata: Vec<_> = samples.iter().map(|s| stratum(&s.scenario)).collect();
    let (tr, va) = split_stratified(&strata, 1.0 - cfg.train.val_fraction, cfg.seed())?;
    let train_raw: Vec<TrainingSample> = tr.iter().map(|&i| samples[i].clone()).collect();
    let norm = NormStats::fit(&train_raw)?;
    let train_set: Vec<TrainingSample> = train_raw.iter().map(|s| norm.normalize(s)).collect();
    let val_set: Vec<TrainingSample> = va.iter().map(|&i| norm.normalize(&samples[i])).collect();
    let (model, report) = train(&train_set, &val_set, norm, &cfg.train.optimizer)?;
    let report = if cfg.record_timing { report } else { report.without_timing() };
    save_checkpoint(out.path("model"), &model, &cfg.train.optimizer)?;
    out.json("report.json", &report)?;
    let keys = |idx: &[usize]| idx.iter().map(|&i| samples[i].key()).collect::<Vec<_>>();
    out.json("split.json", &Split { train: keys(&tr), val: keys(&va) })?;
    Ok(json!({
        "variant": variant,
        "train_samples": train_set.len(),
        "val_samples": val_set.len(),
        "skipped_overlong": skipped,
        "best_epoch": report.best_epoch,
        "best_val_loss": report.best_val,
        "stopped_epoch": report.stopped_epoch,
    }))
}

/// Keys of the training and validation samples of a training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<(String, usize)>,
    pub val: Vec<(String, usize)>,
}

fn cmd_infer(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let (model, _) = load_checkpoint(require(&cfg.infer.model, "infer.model (--model)")?)?;
    let sc = cfg.scenario_params()?;
    let spec = cfg.domain.grid;
    let start = cfg.infer.start.ok_or_else(|| Error::Config("infer.start (--start) is required".into()))?;
    let goal = cfg.infer.goal.unwrap_or_else(|| spec.position(cfg.domain.goal()));
    let radius = spec.spacing().iter().copied().fold(f64::INFINITY, f64::min);
    let mut pred = infer_path(&model, start, goal, &sc, radius)?;
    pred.wall_time = cfg.timing(median_inference_time(&model, start, goal, &sc, radius, crate::bench::NN_TIMING_REPEATS)?);
    let mut summary = json!({
        "variant": model.variant,
        "waypoints": pred.waypoints.len(),
        "reached_goal": pred.reached_goal,
        "wall_time": pred.wall_time,
    });
    let snapped = if cfg.infer.snap {
        let field = cfg.build_field()?;
        let meta = Path::new(vec![], field.spec(), sc, model.variant);
        let (path, valid) = snap_to_grid(&pred.waypoints, &field, &meta);
        let metrics = if valid { Some(assess(&path, &field, None, &cfg.planner.with_variant(model.variant), &cfg.metrics)?) } else { None };
        summary["valid"] = json!(valid);
        summary["metrics"] = json!(metrics);
        Some(json!({ "nodes": path.nodes, "valid": valid, "metrics": metrics }))
    } else {
        None
    };
    out.json("prediction.json", &json!({ "start": start, "goal": goal, "prediction": pred, "snapped": snapped }))?;
    Ok(summary)
}

fn cmd_bench(cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let corpus = read_corpus(require(&cfg.bench.corpus, "bench.corpus (--corpus)")?)?;
    let keep: Option<HashSet<(String, usize)>> = match &cfg.bench.split {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(Error::file(p))?;
            Some(serde_json::from_str::<Split>(&text)?.val.into_iter().collect())
        }
        None => None,
    };
    let keep_key = |k: &(String, usize)| keep.as_ref().is_none_or(|s| s.contains(k));
    let mut inputs: Vec<(Method, Vec<MetricsRow>)> = Vec::new();
    for &v in &corpus.config.variants {
        let rows = corpus.records_for(v).filter(|r| keep_key(&r.key())).map(MetricsRow::from_record).collect();
        inputs.push((Method::astar(v), rows));
    }
    let mut gaps = Vec::new();
    for dir in &cfg.bench.models {
        let (model, _) = load_checkpoint(dir)?;
        let rows = evaluate_nn(&model, &corpus, cfg.record_timing, keep_key)?;
        if let Some((_, astar_rows)) = inputs.iter().find(|(m, _)| *m == Method::astar(model.variant)) {
            gaps.push(json!({ "variant": model.variant, "gap": energy_gap(&rows, astar_rows) }));
        }
        inputs.push((Method::nn(model.variant), rows));
    }
    inputs.sort_by_key(|(m, _)| *m);
    let tables = run_comparison(&inputs)?;
    out.text("tables.md", &tables.to_markdown())?;
    tables.write_csv(out.path("tables.csv"))?;
    for (m, rows) in &inputs {
        let name = m.slug();
        write_metrics_csv(out.path(&format!("metrics_{name}.csv")), rows)?;
        write_distribution_csv(out.path(&format!("distribution_{name}.csv")), &emit_distribution_data(rows))?;
    }
    emit(&tables.to_markdown());
    Ok(json!({ "methods": tables.methods, "rows": inputs[0].1.len(), "energy_gap": gaps }))
}

/// Entry point of the binary: parses arguments, runs the command and maps
/// errors to exit codes (2 for usage errors, 1 for failures).
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let dump = cli.dump_config;
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => match s.trim().parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => return fail(CliError::Usage(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        },
        Err(_) => None,
    };
    let (cfg, kind) = match cli.run_config(env_seed) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    if dump {
        return match cfg.to_toml() {
            Ok(t) => {
                emit(&t);
                ExitCode::SUCCESS
            }
            Err(e) => fail(e.into()),
        };
    }
    match execute(&cfg, kind) {
        Ok(m) => {
            let line = serde_json::to_string(&json!({ "command": m.command, "out": cfg.out, "summary": m.summary }));
            emit(&(line.unwrap_or_default() + "\n"));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.into()),
    }
}

/// Writes to stdout, ignoring a closed pipe (e.g. output piped into `head`).
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn fail(e: CliError) -> ExitCode {
    let (code, kind, message) = match &e {
        CliError::Usage(m) => (2, "usage", m.clone()),
        CliError::Run(err) => (1, err.kind(), err.to_string()),
    };
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::from(code)
}
