//! Four-way comparison of the A* planners and their network approximations,
//! bucketed by flow speed, plus per-scenario distribution data.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::dataset::{Corpus, MetricsRow};
use crate::error::{Error, Result};
use crate::flowfield::{field_stats, median_in_place, FlowField};
use crate::metrics::assess;
use crate::mlp::{infer_path, median_inference_time, snap_to_grid, MlpModel};
use crate::planner::Variant;

/// Speed ranges of the comparison tables, m/s. The first bucket is closed,
/// the others are `(lo, hi]`.
pub const SPEED_BUCKETS: [(f64, f64); 6] = [(0.1, 0.5), (0.5, 1.0), (1.0, 2.0), (2.0, 3.0), (3.0, 4.0), (4.0, 5.0)];

/// Index into [`SPEED_BUCKETS`]; `None` outside [0.1, 5.0].
pub fn bucket_of(speed: f64) -> Option<usize> {
    const TOL: f64 = 1e-9;
    if !(SPEED_BUCKETS[0].0 - TOL..=SPEED_BUCKETS[5].1 + TOL).contains(&speed) {
        return None;
    }
    Some(SPEED_BUCKETS.iter().position(|&(_, hi)| speed <= hi + TOL).unwrap_or(SPEED_BUCKETS.len() - 1))
}

pub fn bucket_label(i: usize) -> String {
    let (lo, hi) = SPEED_BUCKETS[i];
    format!("{lo:.1}-{hi:.1}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CiAstar,
    CiNn,
    WiAstar,
    WiNn,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::CiAstar, Method::CiNn, Method::WiAstar, Method::WiNn];

    pub fn label(self) -> &'static str {
        match self {
            Method::CiAstar => "C.I._A*",
            Method::CiNn => "C.I._NN",
            Method::WiAstar => "W.I._A*",
            Method::WiNn => "W.I._NN",
        }
    }

    /// File-name form of the label.
    pub fn slug(self) -> &'static str {
        match self {
            Method::CiAstar => "ci_astar",
            Method::CiNn => "ci_nn",
            Method::WiAstar => "wi_astar",
            Method::WiNn => "wi_nn",
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            Method::CiAstar | Method::CiNn => Variant::CurrentInformed,
            Method::WiAstar | Method::WiNn => Variant::WakeInformed,
        }
    }

    pub fn is_nn(self) -> bool {
        matches!(self, Method::CiNn | Method::WiNn)
    }

    pub fn astar(variant: Variant) -> Self {
        match variant {
            Variant::CurrentInformed => Method::CiAstar,
            Variant::WakeInformed => Method::WiAstar,
        }
    }

    pub fn nn(variant: Variant) -> Self {
        match variant {
            Variant::CurrentInformed => Method::CiNn,
            Variant::WakeInformed => Method::WiNn,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Energy,
    Length,
    HighVelocity,
    Turbulent,
    Time,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Energy, Metric::Length, Metric::HighVelocity, Metric::Turbulent, Metric::Time];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Energy => "E [J]",
            Metric::Length => "L [m]",
            Metric::HighVelocity => "N_high-velocity",
            Metric::Turbulent => "N_turbulent",
            Metric::Time => "t [s]",
        }
    }

    /// Value of this metric in a row, if the row contributes to it.
    ///
    /// Invalid rows contribute nothing, except that network timing is kept
    /// for every inference since it does not depend on the output.
    pub fn value(self, row: &MetricsRow, method: Method) -> Option<f64> {
        match self {
            Metric::Time if row.valid || method.is_nn() => Some(row.plan_time),
            _ if !row.valid => None,
            Metric::Energy => row.energy,
            Metric::Length => row.length,
            Metric::HighVelocity => row.n_high_velocity.map(|n| n as f64),
            Metric::Turbulent => row.n_turbulent.map(|n| n as f64),
            Metric::Time => None,
        }
    }
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std, n })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: Metric,
    pub bucket: String,
    /// One entry per method, in [`ComparisonTables::methods`] order.
    pub cells: Vec<Option<Summary>>,
    /// Index of the method with the smallest mean.
    pub winner: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTables {
    pub methods: Vec<Method>,
    pub rows: Vec<ComparisonRow>,
    /// Per bucket, the fraction of each method's rows without a valid path.
    pub invalid_rate: Vec<(String, Vec<f64>)>,
}

fn check_comparable(inputs: &[(Method, Vec<MetricsRow>)]) -> Result<()> {
    let keyed = |rows: &[MetricsRow]| -> BTreeMap<(String, usize), (u64, u64)> {
        rows.iter().map(|r| (r.key(), (r.flow_speed.to_bits(), r.flow_angle.to_bits()))).collect()
    };
    let (m0, rows0) = &inputs[0];
    let reference = keyed(rows0);
    if reference.len() != rows0.len() {
        return Err(Error::Comparability(format!("{m0} has duplicate (scenario, start) rows")));
    }
    for (m, rows) in &inputs[1..] {
        let other = keyed(rows);
        if other != reference || rows.len() != rows0.len() {
            let a: BTreeSet<_> = reference.keys().collect();
            let b: BTreeSet<_> = other.keys().collect();
            let missing = a.symmetric_difference(&b).count();
            return Err(Error::Comparability(format!(
                "{m} and {m0} cover different scenario grids or start sets ({missing} keys differ)"
            )));
        }
    }
    Ok(())
}

/// Bucketed mean ± std of every metric for every method.
///
/// All inputs must cover the same (scenario, start) keys with the same flow
/// conditions.
pub fn run_comparison(inputs: &[(Method, Vec<MetricsRow>)]) -> Result<ComparisonTables> {
    if inputs.is_empty() {
        return Err(Error::EmptyData("no methods to compare".into()));
    }
    check_comparable(inputs)?;
    let methods: Vec<Method> = inputs.iter().map(|(m, _)| *m).collect();
    let mut bucketed: Vec<Vec<Vec<&MetricsRow>>> = vec![vec![Vec::new(); SPEED_BUCKETS.len()]; inputs.len()];
    for (mi, (_, rows)) in inputs.iter().enumerate() {
        for r in rows {
            let b = bucket_of(r.flow_speed)
                .ok_or_else(|| Error::Domain(format!("flow speed {} outside every bucket", r.flow_speed)))?;
            bucketed[mi][b].push(r);
        }
    }
    let used: Vec<usize> = (0..SPEED_BUCKETS.len()).filter(|&b| bucketed.iter().any(|m| !m[b].is_empty())).collect();
    let mut rows = Vec::new();
    for metric in Metric::ALL {
        for &b in &used {
            let cells: Vec<Option<Summary>> = inputs
                .iter()
                .enumerate()
                .map(|(mi, (method, _))| {
                    let values: Vec<f64> = bucketed[mi][b].iter().filter_map(|r| metric.value(r, *method)).collect();
                    Summary::of(&values)
                })
                .collect();
            let winner = cells
                .iter()
                .enumerate()
                .filter_map(|(i, c)| c.map(|s| (i, s.mean)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i);
            rows.push(ComparisonRow { metric, bucket: bucket_label(b), cells, winner });
        }
    }
    let invalid_rate = used
        .iter()
        .map(|&b| {
            let rates = (0..inputs.len())
                .map(|mi| {
                    let all = &bucketed[mi][b];
                    if all.is_empty() {
                        0.0
                    } else {
                        all.iter().filter(|r| !r.valid).count() as f64 / all.len() as f64
                    }
                })
                .collect();
            (bucket_label(b), rates)
        })
        .collect();
    Ok(ComparisonTables { methods, rows, invalid_rate })
}

fn fmt_cell(c: &Option<Summary>, metric: Metric) -> String {
    match c {
        None => "-".into(),
        Some(s) if metric == Metric::Time => format!("{:.3e} ± {:.3e}", s.mean, s.std),
        Some(s) => format!("{:.2} ± {:.2}", s.mean, s.std),
    }
}

impl ComparisonTables {
    pub fn row(&self, metric: Metric, bucket: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.metric == metric && r.bucket == bucket)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self.methods.iter().map(|m| m.label()).collect();
        for metric in Metric::ALL {
            let _ = writeln!(out, "| {} | Range [m/s] | {} |", metric.label(), header.join(" | "));
            let _ = writeln!(out, "|---|---|{}", "---|".repeat(header.len()));
            for r in self.rows.iter().filter(|r| r.metric == metric) {
                let cells: Vec<String> = r
                    .cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let s = fmt_cell(c, metric);
                        if r.winner == Some(i) {
                            format!("**{s}**")
                        } else {
                            s
                        }
                    })
                    .collect();
                let _ = writeln!(out, "| | {} | {} |", r.bucket, cells.join(" | "));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "| invalid rate | Range [m/s] | {} |", header.join(" | "));
        let _ = writeln!(out, "|---|---|{}", "---|".repeat(header.len()));
        for (bucket, rates) in &self.invalid_rate {
            let cells: Vec<String> = rates.iter().map(|r| format!("{:.1}%", 100.0 * r)).collect();
            let _ = writeln!(out, "| | {bucket} | {} |", cells.join(" | "));
        }
        out
    }

    /// Long-format CSV: one line per (metric, bucket, method).
    pub fn write_csv(&self, path: impl AsRef<FsPath>) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            metric: Metric,
            bucket: &'a str,
            method: &'a str,
            mean: Option<f64>,
            std: Option<f64>,
            n: usize,
            winner: bool,
            invalid_rate: f64,
        }
        let path = path.as_ref();
        let mut w = csv::Writer::from_writer(fs::File::create(path).map_err(crate::error::Error::file(path))?);
        let invalid: HashMap<&str, &Vec<f64>> = self.invalid_rate.iter().map(|(b, r)| (b.as_str(), r)).collect();
        for r in &self.rows {
            for (i, (m, c)) in self.methods.iter().zip(&r.cells).enumerate() {
                w.serialize(Line {
                    metric: r.metric,
                    bucket: &r.bucket,
                    method: m.label(),
                    mean: c.map(|s| s.mean),
                    std: c.map(|s| s.std),
                    n: c.map_or(0, |s| s.n),
                    winner: r.winner == Some(i),
                    invalid_rate: invalid.get(r.bucket.as_str()).map_or(0.0, |v| v[i]),
                })?;
            }
        }
        w.flush().map_err(crate::error::Error::file(path))?;
        Ok(())
    }
}

/// Per-(speed, angle) statistics for heatmaps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionCell {
    pub flow_speed: f64,
    pub flow_angle: f64,
    /// Valid paths in the cell.
    pub n: usize,
    pub std_energy: Option<f64>,
    pub median_length: Option<f64>,
    pub median_high_velocity: Option<f64>,
}

/// Groups valid rows by (speed, angle). Cells with fewer than two valid
/// paths are left empty.
pub fn emit_distribution_data(rows: &[MetricsRow]) -> Vec<DistributionCell> {
    let mut cells: BTreeMap<(u64, u64), Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.flow_speed.to_bits(), r.flow_angle.to_bits())).or_default().push(r);
    }
    let mut out: Vec<DistributionCell> = cells
        .into_values()
        .map(|group| {
            let valid: Vec<&MetricsRow> = group.iter().copied().filter(|r| r.valid).collect();
            let mut cell = DistributionCell {
                flow_speed: group[0].flow_speed,
                flow_angle: group[0].flow_angle,
                n: valid.len(),
                std_energy: None,
                median_length: None,
                median_high_velocity: None,
            };
            if valid.len() >= 2 {
                let energy: Vec<f64> = valid.iter().filter_map(|r| r.energy).collect();
                cell.std_energy = Summary::of(&energy).map(|s| s.std);
                let mut length: Vec<f64> = valid.iter().filter_map(|r| r.length).collect();
                cell.median_length = (!length.is_empty()).then(|| median_in_place(&mut length));
                let mut hv: Vec<f64> = valid.iter().filter_map(|r| r.n_high_velocity.map(|n| n as f64)).collect();
                cell.median_high_velocity = (!hv.is_empty()).then(|| median_in_place(&mut hv));
            }
            cell
        })
        .collect();
    out.sort_by(|a, b| a.flow_speed.total_cmp(&b.flow_speed).then(a.flow_angle.total_cmp(&b.flow_angle)));
    out
}

pub fn write_distribution_csv(path: impl AsRef<FsPath>, cells: &[DistributionCell]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(fs::File::create(path).map_err(Error::file(path))?);
    for c in cells {
        w.serialize(c)?;
    }
    w.flush().map_err(Error::file(path))?;
    Ok(())
}

/// Network inference repeats per path; the median is reported.
pub const NN_TIMING_REPEATS: usize = 5;

/// Runs `model` on the start and goal of every `model.variant` record of
/// `corpus` accepted by `keep`, and assesses the snapped predictions on the
/// wake field.
///
/// Every accepted record yields a row, including those the planner failed
/// on, so the result stays comparable with the planner's rows. Predictions
/// that touch an occupied node are returned with `valid = false` and no
/// metrics. With `record_timing` false the times are written as 0.
pub fn evaluate_nn(
    model: &MlpModel,
    corpus: &Corpus,
    record_timing: bool,
    mut keep: impl FnMut(&(String, usize)) -> bool,
) -> Result<Vec<MetricsRow>> {
    let variant = model.variant;
    let domain = &corpus.config.domain;
    let spacing = domain.grid.spacing().iter().copied().fold(f64::INFINITY, f64::min);
    let pcfg = corpus.config.planner.with_variant(variant);
    let mut field: Option<(usize, FlowField, crate::flowfield::FieldStats)> = None;
    let mut out = Vec::new();
    for rec in corpus.records_for(variant).filter(|r| keep(&r.key())) {
        if field.as_ref().map(|f| f.0) != Some(rec.field_index) {
            let f = domain.build_field(rec.scenario)?;
            let s = field_stats(&f, &pcfg)?;
            field = Some((rec.field_index, f, s));
        }
        let (_, wake_field, stats) = field.as_ref().unwrap();
        let spec = wake_field.spec();
        let (start, goal) = (spec.position(rec.start), spec.position(rec.goal));
        let pred = infer_path(model, start, goal, &rec.scenario, spacing)?;
        let time = median_inference_time(model, start, goal, &rec.scenario, spacing, NN_TIMING_REPEATS)?;
        let (path, valid) = snap_to_grid(&pred.waypoints, wake_field, &rec.path());
        let metrics = if valid { Some(assess(&path, wake_field, Some(stats), &pcfg, &corpus.config.metrics)?) } else { None };
        out.push(MetricsRow {
            scenario_id: rec.scenario_id.clone(),
            variant,
            seed: rec.scenario.seed,
            energy: metrics.map(|m| m.energy),
            length: metrics.map(|m| m.length),
            n_high_velocity: metrics.map(|m| m.n_high_velocity),
            n_turbulent: metrics.map(|m| m.n_turbulent),
            plan_time: if record_timing { time } else { 0.0 },
            start_index: rec.start_index,
            flow_speed: rec.scenario.flow_speed,
            flow_angle: rec.scenario.flow_angle,
            valid,
        });
    }
    Ok(out)
}

/// Mean energy of valid network paths against the matching planner paths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyGap {
    pub nn_mean: f64,
    pub astar_mean: f64,
    /// `100 (nn - astar) / astar`.
    pub percent: f64,
    pub pairs: usize,
}

pub fn energy_gap(nn: &[MetricsRow], astar: &[MetricsRow]) -> Option<EnergyGap> {
    let reference: HashMap<(String, usize), f64> =
        astar.iter().filter(|r| r.valid).filter_map(|r| r.energy.map(|e| (r.key(), e))).collect();
    let (mut sum_nn, mut sum_a, mut pairs) = (0.0, 0.0, 0usize);
    for r in nn.iter().filter(|r| r.valid) {
        if let (Some(e), Some(a)) = (r.energy, reference.get(&r.key())) {
            sum_nn += e;
            sum_a += a;
            pairs += 1;
        }
    }
    (pairs > 0).then(|| {
        let (nn_mean, astar_mean) = (sum_nn / pairs as f64, sum_a / pairs as f64);
        EnergyGap { nn_mean, astar_mean, percent: 100.0 * (nn_mean - astar_mean) / astar_mean, pairs }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(speed: f64, start: usize, e: f64, valid: bool) -> MetricsRow {
        MetricsRow {
            scenario_id: crate::dataset::scenario_id(speed, 0.0),
            variant: Variant::WakeInformed,
            seed: 0,
            energy: valid.then_some(e),
            length: valid.then_some(10.0 + e),
            n_high_velocity: valid.then_some(start),
            n_turbulent: valid.then_some(1),
            plan_time: 0.5,
            start_index: start,
            flow_speed: speed,
            flow_angle: 0.0,
            valid,
        }
    }

    #[test]
    fn buckets_partition_the_speed_range() {
        assert_eq!(bucket_of(0.1), Some(0));
        assert_eq!(bucket_of(0.5), Some(0));
        assert_eq!(bucket_of(0.50001), Some(1));
        assert_eq!(bucket_of(2.0), Some(2));
        assert_eq!(bucket_of(5.0), Some(5));
        assert_eq!(bucket_of(5.1), None);
        assert_eq!(bucket_of(0.05), None);
        for i in 1..=50 {
            assert!(bucket_of(i as f64 / 10.0).is_some());
        }
    }

    #[test]
    fn self_comparison_gives_identical_columns() {
        let rows: Vec<MetricsRow> = (0..4).map(|i| row(0.3 + i as f64, i, i as f64, true)).collect();
        let t = run_comparison(&[(Method::CiAstar, rows.clone()), (Method::WiAstar, rows)]).unwrap();
        for r in &t.rows {
            assert_eq!(r.cells[0], r.cells[1]);
        }
        assert!(t.to_markdown().contains("C.I._A*"));
    }

    #[test]
    fn mismatched_keys_are_not_comparable() {
        let a = vec![row(0.3, 0, 1.0, true)];
        let b = vec![row(0.3, 1, 1.0, true)];
        assert!(matches!(run_comparison(&[(Method::CiAstar, a), (Method::WiAstar, b)]), Err(Error::Comparability(_))));
    }

    #[test]
    fn invalid_rows_count_only_toward_the_rate() {
        let a = vec![row(0.3, 0, 1.0, true), row(0.3, 1, 3.0, true)];
        let b = vec![row(0.3, 0, 2.0, true), row(0.3, 1, 0.0, false)];
        let t = run_comparison(&[(Method::WiAstar, a), (Method::WiNn, b)]).unwrap();
        let e = t.row(Metric::Energy, "0.1-0.5").unwrap();
        assert_eq!(e.cells[0].unwrap().mean, 2.0);
        assert_eq!(e.cells[1].unwrap().n, 1);
        assert_eq!(e.winner, Some(0));
        assert_eq!(t.invalid_rate[0].1, vec![0.0, 0.5]);
        let time = t.row(Metric::Time, "0.1-0.5").unwrap();
        assert_eq!(time.cells[1].unwrap().n, 2);
    }

    #[test]
    fn distribution_cells_need_two_valid_paths() {
        let cells = emit_distribution_data(&[row(1.0, 0, 1.0, true)]);
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].std_energy, None);
        let cells = emit_distribution_data(&[row(1.0, 0, 1.0, true), row(1.0, 1, 3.0, true)]);
        assert!((cells[0].std_energy.unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(cells[0].median_length, Some(12.0));
    }
}
