//! Trajectory corpora over scenario sweeps, and their conversion into padded,
//! masked and normalized training samples.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path as FsPath;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowfield::{field_stats, make_wake_field, FlowField, GridNode, GridSpec, HullModel, ScenarioParams, WakeShapeParams};
use crate::metrics::{assess, MetricsConfig, PathMetrics};
use crate::planner::{astar, Path, PlannerConfig, Variant};

/// Waypoint slots in a training target.
pub const MAX_WAYPOINTS: usize = 130;
pub const INPUT_DIM: usize = 8;
pub const OUTPUT_DIM: usize = 3 * MAX_WAYPOINTS;

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(a << 6).wrapping_add(a >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const START_STREAM: u64 = 0x5354_4152_5453;

/// Label used to key records of one (speed, angle) field.
pub fn scenario_id(flow_speed: f64, flow_angle: f64) -> String {
    format!("s{flow_speed:.2}_a{flow_angle:.1}")
}

/// Flow conditions to sweep and the number of starts per field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioGrid {
    pub speeds: Vec<f64>,
    pub angles: Vec<f64>,
    pub starts_per_field: usize,
    pub seed: u64,
}

impl Default for ScenarioGrid {
    /// Desk scale: 10 speeds covering every speed bucket, 5 angles, 6 starts.
    fn default() -> Self {
        Self {
            speeds: vec![0.3, 0.7, 1.2, 1.7, 2.3, 2.8, 3.3, 3.8, 4.4, 4.9],
            angles: vec![0.0, 15.0, 30.0, 45.0, 60.0],
            starts_per_field: 6,
            seed: 0,
        }
    }
}

impl ScenarioGrid {
    /// The full sweep the CFD data was produced on: 0.1 to 5.0 m/s in steps
    /// of 0.1, 0 to 60 degrees in steps of 5, 36 starts per field.
    pub fn full_sweep(seed: u64) -> Self {
        Self {
            speeds: (1..=50).map(|i| i as f64 / 10.0).collect(),
            angles: (0..=12).map(|i| 5.0 * i as f64).collect(),
            starts_per_field: 36,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.speeds.is_empty() || self.angles.is_empty() || self.starts_per_field == 0 {
            return Err(Error::Config("scenario grid needs speeds, angles and at least one start".into()));
        }
        for &s in &self.speeds {
            for &a in &self.angles {
                ScenarioParams::new(s, a, 0)?;
            }
        }
        Ok(())
    }

    pub fn field_count(&self) -> usize {
        self.speeds.len() * self.angles.len()
    }

    /// Paths per planner variant.
    pub fn total_paths(&self) -> usize {
        self.field_count() * self.starts_per_field
    }

    /// Scenarios in speed-major order, each with its own derived seed.
    pub fn scenarios(&self) -> Vec<ScenarioParams> {
        let mut out = Vec::with_capacity(self.field_count());
        for &flow_speed in &self.speeds {
            for &flow_angle in &self.angles {
                let seed = mix_seed(mix_seed(self.seed, flow_speed.to_bits()), flow_angle.to_bits());
                out.push(ScenarioParams { flow_speed, flow_angle, seed });
            }
        }
        out
    }

    /// Seed of the start-position stream for a field.
    ///
    /// Starts depend on the angle but not the speed, so every speed sees the
    /// same start set and speed buckets differ only in the flow.
    pub fn start_seed(&self, flow_angle: f64) -> u64 {
        mix_seed(mix_seed(self.seed, START_STREAM), flow_angle.to_bits())
    }
}

/// Uniformly random traversable node on the rear (max-x) face.
pub fn sample_rear_start<R: Rng + ?Sized>(field: &FlowField, rng: &mut R) -> Result<GridNode> {
    let spec = field.spec();
    let ix = spec.nx - 1;
    let free: Vec<GridNode> = (0..spec.nz)
        .flat_map(|iz| (0..spec.ny).map(move |iy| GridNode::new(ix, iy, iz)))
        .filter(|&n| !field.is_occupied(n))
        .collect();
    free.choose(rng).copied().ok_or_else(|| Error::Geometry("rear boundary face is fully occupied".into()))
}

/// Grid, hull and wake shape shared by every field of a sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainConfig {
    pub grid: GridSpec,
    /// Defaults to the standard hull centered in the domain.
    pub hull: Option<HullModel>,
    pub wake: WakeShapeParams,
}

impl DomainConfig {
    pub fn hull(&self) -> HullModel {
        self.hull.unwrap_or_else(|| HullModel::centered(&self.grid))
    }

    pub fn goal(&self) -> GridNode {
        self.hull().goal_node(&self.grid)
    }

    pub fn build_field(&self, scenario: ScenarioParams) -> Result<FlowField> {
        make_wake_field(self.grid, scenario, &self.hull(), &self.wake)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub domain: DomainConfig,
    pub scenarios: ScenarioGrid,
    /// Vehicle constants and heuristic; the variant is set per run.
    pub planner: PlannerConfig,
    pub metrics: MetricsConfig,
    pub variants: Vec<Variant>,
    /// Worker threads; 1 keeps generation single-threaded.
    pub jobs: usize,
    /// When false, planning times are recorded as 0 so that corpora are
    /// byte-identical across runs.
    pub record_timing: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            domain: DomainConfig::default(),
            scenarios: ScenarioGrid::default(),
            planner: PlannerConfig::default(),
            metrics: MetricsConfig::default(),
            variants: Variant::ALL.to_vec(),
            jobs: 1,
            record_timing: true,
        }
    }
}

/// One planned path, or the failure to plan it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub scenario_id: String,
    pub field_index: usize,
    pub start_index: usize,
    pub scenario: ScenarioParams,
    pub variant: Variant,
    pub start: GridNode,
    pub goal: GridNode,
    pub nodes: Vec<GridNode>,
    pub waypoints: Vec<[f64; 3]>,
    pub g_total: Option<f64>,
    pub expanded: usize,
    pub wall_time: f64,
    pub metrics: Option<PathMetrics>,
    pub error: Option<String>,
}

impl PathRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn path(&self) -> Path {
        Path { nodes: self.nodes.clone(), waypoints: self.waypoints.clone(), scenario: self.scenario, variant: self.variant }
    }

    pub fn key(&self) -> (String, usize) {
        (self.scenario_id.clone(), self.start_index)
    }
}

/// Per-variant counts written to the manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VariantCounts {
    pub variant: Variant,
    pub paths: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub config: CorpusConfig,
    pub fields: usize,
    pub counts: Vec<VariantCounts>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub config: CorpusConfig,
    /// Field-major, then variant, then start index.
    pub records: Vec<PathRecord>,
}

impl Corpus {
    pub fn records_for(&self, variant: Variant) -> impl Iterator<Item = &PathRecord> {
        self.records.iter().filter(move |r| r.variant == variant)
    }

    pub fn manifest(&self) -> CorpusManifest {
        let counts = self
            .config
            .variants
            .iter()
            .map(|&variant| {
                let (mut paths, mut failures) = (0, 0);
                for r in self.records_for(variant) {
                    if r.ok() {
                        paths += 1;
                    } else {
                        failures += 1;
                    }
                }
                VariantCounts { variant, paths, failures }
            })
            .collect();
        CorpusManifest { config: self.config.clone(), fields: self.config.scenarios.field_count(), counts }
    }

    /// Training samples of one variant; overlong paths are skipped and counted.
    pub fn samples(&self, variant: Variant) -> (Vec<TrainingSample>, usize) {
        let mut out = Vec::new();
        let mut skipped = 0;
        for r in self.records_for(variant).filter(|r| r.ok()) {
            match pad_and_mask(r) {
                Ok(s) => out.push(s),
                Err(e) => {
                    warn!("skipping {} start {}: {e}", r.scenario_id, r.start_index);
                    skipped += 1;
                }
            }
        }
        (out, skipped)
    }
}

fn plan_field(cfg: &CorpusConfig, field_index: usize, scenario: ScenarioParams) -> Result<Vec<PathRecord>> {
    let field = cfg.domain.build_field(scenario)?;
    let stats = field_stats(&field, &cfg.planner)?;
    let goal = cfg.domain.goal();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.scenarios.start_seed(scenario.flow_angle));
    let starts = (0..cfg.scenarios.starts_per_field)
        .map(|_| sample_rear_start(&field, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let id = scenario_id(scenario.flow_speed, scenario.flow_angle);
    let mut out = Vec::with_capacity(starts.len() * cfg.variants.len());
    for &variant in &cfg.variants {
        let pcfg = cfg.planner.with_variant(variant);
        for (start_index, &start) in starts.iter().enumerate() {
            let mut rec = PathRecord {
                scenario_id: id.clone(),
                field_index,
                start_index,
                scenario,
                variant,
                start,
                goal,
                nodes: Vec::new(),
                waypoints: Vec::new(),
                g_total: None,
                expanded: 0,
                wall_time: 0.0,
                metrics: None,
                error: None,
            };
            match astar(&field, start, goal, &pcfg)
                .and_then(|r| Ok((assess(&r.path, &field, Some(&stats), &pcfg, &cfg.metrics)?, r)))
            {
                Ok((m, r)) => {
                    rec.g_total = Some(r.g_total);
                    rec.expanded = r.expanded;
                    if cfg.record_timing {
                        rec.wall_time = r.wall_time;
                    }
                    rec.metrics = Some(m);
                    rec.nodes = r.path.nodes;
                    rec.waypoints = r.path.waypoints;
                }
                Err(e) => {
                    warn!("{id} start {start_index} {variant}: {e}");
                    if let Error::NoPath { expanded } = e {
                        rec.expanded = expanded;
                    }
                    rec.error = Some(e.to_string());
                }
            }
            out.push(rec);
        }
    }
    Ok(out)
}

/// Plans every (field, start) pair of the sweep for each configured variant.
///
/// Failed searches are recorded, not fatal. Record order is independent of
/// `jobs`.
pub fn generate_corpus(cfg: &CorpusConfig) -> Result<Corpus> {
    cfg.scenarios.validate()?;
    cfg.planner.validate()?;
    cfg.metrics.validate()?;
    cfg.domain.grid.validate()?;
    if cfg.variants.is_empty() {
        return Err(Error::Config("no planner variants selected".into()));
    }
    let scenarios = cfg.scenarios.scenarios();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let per_field: Vec<Result<Vec<PathRecord>>> = pool.install(|| {
        use rayon::prelude::*;
        scenarios.par_iter().enumerate().map(|(i, &sc)| plan_field(cfg, i, sc)).collect()
    });
    let mut records = Vec::with_capacity(cfg.scenarios.total_paths() * cfg.variants.len());
    for r in per_field {
        records.extend(r?);
    }
    Ok(Corpus { config: cfg.clone(), records })
}

/// One row of a metrics table; the exchange format between planners,
/// network inference and the benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario_id: String,
    pub variant: Variant,
    pub seed: u64,
    #[serde(rename = "E_J")]
    pub energy: Option<f64>,
    #[serde(rename = "L_m")]
    pub length: Option<f64>,
    #[serde(rename = "n_highvel")]
    pub n_high_velocity: Option<usize>,
    #[serde(rename = "n_turb")]
    pub n_turbulent: Option<usize>,
    #[serde(rename = "plan_time_s")]
    pub plan_time: f64,
    pub start_index: usize,
    pub flow_speed: f64,
    pub flow_angle: f64,
    pub valid: bool,
}

impl MetricsRow {
    pub fn from_record(r: &PathRecord) -> Self {
        let m = r.metrics.as_ref();
        Self {
            scenario_id: r.scenario_id.clone(),
            variant: r.variant,
            seed: r.scenario.seed,
            energy: m.map(|m| m.energy),
            length: m.map(|m| m.length),
            n_high_velocity: m.map(|m| m.n_high_velocity),
            n_turbulent: m.map(|m| m.n_turbulent),
            plan_time: r.wall_time,
            start_index: r.start_index,
            flow_speed: r.scenario.flow_speed,
            flow_angle: r.scenario.flow_angle,
            valid: r.ok(),
        }
    }

    pub fn key(&self) -> (String, usize) {
        (self.scenario_id.clone(), self.start_index)
    }
}

pub fn write_metrics_csv(path: impl AsRef<FsPath>, rows: &[MetricsRow]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(Error::file(path))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(Error::file(path))?;
    Ok(())
}

pub fn read_metrics_csv(path: impl AsRef<FsPath>) -> Result<Vec<MetricsRow>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(Error::file(path))?;
    csv::Reader::from_reader(file).deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Writes `manifest.json` plus `<variant>/paths.jsonl` and
/// `<variant>/metrics.csv` under `dir`.
pub fn write_corpus(dir: impl AsRef<FsPath>, corpus: &Corpus) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(Error::file(dir))?;
    for &variant in &corpus.config.variants {
        let vdir = dir.join(variant.as_str());
        fs::create_dir_all(&vdir).map_err(Error::file(&vdir))?;
        let jsonl = vdir.join("paths.jsonl");
        let mut w = BufWriter::new(fs::File::create(&jsonl).map_err(Error::file(&jsonl))?);
        for r in corpus.records_for(variant) {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n").map_err(Error::file(&jsonl))?;
        }
        w.flush().map_err(Error::file(&jsonl))?;
        let rows: Vec<MetricsRow> = corpus.records_for(variant).map(MetricsRow::from_record).collect();
        write_metrics_csv(vdir.join("metrics.csv"), &rows)?;
    }
    let manifest = dir.join("manifest.json");
    fs::write(&manifest, serde_json::to_string_pretty(&corpus.manifest())?).map_err(Error::file(&manifest))?;
    Ok(())
}

pub fn read_corpus(dir: impl AsRef<FsPath>) -> Result<Corpus> {
    let dir = dir.as_ref();
    let manifest_path = dir.join("manifest.json");
    let text = fs::read_to_string(&manifest_path).map_err(Error::file(&manifest_path))?;
    let manifest: CorpusManifest = serde_json::from_str(&text)?;
    let mut by_variant = Vec::new();
    for &variant in &manifest.config.variants {
        let jsonl = dir.join(variant.as_str()).join("paths.jsonl");
        let reader = BufReader::new(fs::File::open(&jsonl).map_err(Error::file(&jsonl))?);
        let mut recs = Vec::new();
        for line in reader.lines() {
            let line = line.map_err(Error::file(&jsonl))?;
            if !line.trim().is_empty() {
                recs.push(serde_json::from_str::<PathRecord>(&line)?);
            }
        }
        by_variant.push(recs);
    }
    // Restore field-major order.
    let mut records: Vec<PathRecord> = by_variant.into_iter().flatten().collect();
    let rank = |v: Variant| manifest.config.variants.iter().position(|&x| x == v).unwrap_or(usize::MAX);
    records.sort_by_key(|r| (r.field_index, rank(r.variant), r.start_index));
    Ok(Corpus { config: manifest.config, records })
}

/// Network input: start and goal positions in meters, flow speed, flow angle.
pub fn input_vector(start: [f64; 3], goal: [f64; 3], scenario: &ScenarioParams) -> [f64; INPUT_DIM] {
    [start[0], start[1], start[2], goal[0], goal[1], goal[2], scenario.flow_speed, scenario.flow_angle]
}

/// A padded trajectory with its validity mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub input: [f64; INPUT_DIM],
    pub target: Vec<f64>,
    /// 1.0 for real coordinates, 0.0 for padding.
    pub mask: Vec<f64>,
    pub n_waypoints: usize,
    pub scenario_id: String,
    pub start_index: usize,
    pub scenario: ScenarioParams,
    pub variant: Variant,
}

impl TrainingSample {
    pub fn key(&self) -> (String, usize) {
        (self.scenario_id.clone(), self.start_index)
    }
}

pub fn pad_and_mask(record: &PathRecord) -> Result<TrainingSample> {
    let n = record.waypoints.len();
    if n == 0 {
        return Err(Error::InvalidPath("path has no waypoints".into()));
    }
    if n > MAX_WAYPOINTS {
        return Err(Error::OverlongPath { len: n, max: MAX_WAYPOINTS });
    }
    let mut target = vec![0.0; OUTPUT_DIM];
    let mut mask = vec![0.0; OUTPUT_DIM];
    for (i, w) in record.waypoints.iter().enumerate() {
        target[3 * i..3 * i + 3].copy_from_slice(w);
    }
    mask[..3 * n].fill(1.0);
    Ok(TrainingSample {
        input: input_vector(record.waypoints[0], record.waypoints[n - 1], &record.scenario),
        target,
        mask,
        n_waypoints: n,
        scenario_id: record.scenario_id.clone(),
        start_index: record.start_index,
        scenario: record.scenario,
        variant: record.variant,
    })
}

/// Z-score statistics fitted on a training split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub target_mean: Vec<f64>,
    pub target_std: Vec<f64>,
}

/// Standard deviations below this are rounding noise of a constant column
/// (inputs and targets are meters, m/s and degrees) and are replaced by 1.
pub const MIN_STD: f64 = 1e-9;

fn column_stats(rows: impl Iterator<Item = (f64, bool)> + Clone) -> (f64, f64) {
    let (sum, count) = rows.clone().filter(|r| r.1).fold((0.0, 0usize), |(s, c), (x, _)| (s + x, c + 1));
    if count == 0 {
        return (0.0, 1.0);
    }
    let mean = sum / count as f64;
    let var = rows.filter(|r| r.1).map(|(x, _)| (x - mean) * (x - mean)).sum::<f64>() / count as f64;
    let std = var.sqrt();
    (mean, if std > MIN_STD { std } else { 1.0 })
}

impl NormStats {
    /// Per-column mean and population std. Targets use unmasked entries only;
    /// constant (std at most [`MIN_STD`]) or never-observed columns get std 1.
    pub fn fit(samples: &[TrainingSample]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyData("no samples to fit normalization on".into()));
        }
        let (input_mean, input_std) =
            (0..INPUT_DIM).map(|j| column_stats(samples.iter().map(move |s| (s.input[j], true)))).unzip();
        let (target_mean, target_std) = (0..OUTPUT_DIM)
            .map(|j| column_stats(samples.iter().map(move |s| (s.target[j], s.mask[j] != 0.0))))
            .unzip();
        Ok(Self { input_mean, input_std, target_mean, target_std })
    }

    pub fn normalize_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.input_mean.iter().zip(&self.input_std)).map(|(v, (m, s))| (v - m) / s).collect()
    }

    pub fn denormalize_input(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(self.input_mean.iter().zip(&self.input_std)).map(|(v, (m, s))| v * s + m).collect()
    }

    /// Normalizes a target; masked entries are set to 0.
    pub fn normalize_target(&self, y: &[f64], mask: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(mask)
            .zip(self.target_mean.iter().zip(&self.target_std))
            .map(|((v, m), (mu, s))| if *m != 0.0 { (v - mu) / s } else { 0.0 })
            .collect()
    }

    pub fn denormalize_target(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(self.target_mean.iter().zip(&self.target_std)).map(|(v, (m, s))| v * s + m).collect()
    }

    pub fn normalize(&self, s: &TrainingSample) -> TrainingSample {
        let mut out = s.clone();
        out.input.copy_from_slice(&self.normalize_input(&s.input));
        out.target = self.normalize_target(&s.target, &s.mask);
        out
    }

    /// Inverse of [`NormStats::normalize`]; masked target entries stay 0.
    pub fn denormalize(&self, s: &TrainingSample) -> TrainingSample {
        let mut out = s.clone();
        out.input.copy_from_slice(&self.denormalize_input(&s.input));
        out.target = self
            .denormalize_target(&s.target)
            .into_iter()
            .zip(&s.mask)
            .map(|(v, m)| if *m != 0.0 { v } else { 0.0 })
            .collect();
        out
    }
}

/// Splits item indices into (train, validation) with `fraction` of each
/// stratum in training.
///
/// The global training count is `round(fraction * n)`. Each stratum gets
/// `floor(fraction * size)` plus at most one more, handed to the strata with
/// the largest remainders (ties in seeded random order), so every stratum is
/// within one item of its exact share. Both returned lists are sorted.
pub fn split_stratified<K: Ord + Clone>(strata: &[K], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if strata.is_empty() {
        return Err(Error::EmptyData("nothing to split".into()));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Config(format!("split fraction must be in [0, 1], got {fraction}")));
    }
    let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (i, k) in strata.iter().enumerate() {
        groups.entry(k.clone()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    for g in &mut groups {
        g.shuffle(&mut rng);
    }
    let mut quota: Vec<usize> = groups.iter().map(|g| (fraction * g.len() as f64).floor() as usize).collect();
    let total = (fraction * strata.len() as f64).round() as usize;
    let mut extra = total.saturating_sub(quota.iter().sum());
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.shuffle(&mut rng);
    let remainder: Vec<f64> =
        groups.iter().zip(&quota).map(|(g, &q)| fraction * g.len() as f64 - q as f64).collect();
    order.sort_by(|&a, &b| remainder[b].total_cmp(&remainder[a]));
    for i in order {
        if extra == 0 {
            break;
        }
        if quota[i] < groups[i].len() && remainder[i] > 0.0 {
            quota[i] += 1;
            extra -= 1;
        }
    }
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (g, q) in groups.iter().zip(quota) {
        train.extend_from_slice(&g[..q]);
        val.extend_from_slice(&g[q..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

/// Stratum key of a scenario: exact speed and angle.
pub fn stratum(scenario: &ScenarioParams) -> (u64, u64) {
    (scenario.flow_speed.to_bits(), scenario.flow_angle.to_bits())
}
