//! Drag-energy A* over the 26-connected grid.
//!
//! Moving from `n` to a neighbor `n'` costs `omega1 * F_D(v(n')) * d(n, n')`
//! with `F_D = 0.5 rho v^2 C_D A` evaluated at the destination node. The
//! current-informed variant searches the wake-stripped field, the
//! wake-informed variant the field as given.

mod astar;
mod dijkstra;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use astar::astar;
pub use dijkstra::{cost_to_goal, dijkstra_oracle};

use crate::error::{Error, Result};
use crate::flowfield::{euclid_steps, FieldStats, FlowField, GridNode, GridSpec, ScenarioParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum HeuristicMode {
    /// Field-mean energy rate times straight-line distance.
    #[default]
    PaperAverage,
    /// Field-minimum energy rate times straight-line distance; admissible and consistent.
    AdmissibleMin,
    /// No heuristic (uniform-cost search).
    Zero,
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Variant {
    CurrentInformed,
    #[default]
    WakeInformed,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::CurrentInformed, Variant::WakeInformed];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::CurrentInformed => "current_informed",
            Variant::WakeInformed => "wake_informed",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "current_informed" => Ok(Variant::CurrentInformed),
            "wake_informed" => Ok(Variant::WakeInformed),
            other => Err(Error::Config(format!("unknown planner variant {other:?}"))),
        }
    }
}

/// Vehicle drag constants, cost weight and search options.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Fluid density, kg/m^3.
    pub rho: f64,
    /// Drag coefficient.
    pub c_d: f64,
    /// Cross-sectional area, m^2.
    pub area: f64,
    /// Weight on the energy term.
    pub omega1: f64,
    pub heuristic: HeuristicMode,
    pub variant: Variant,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            rho: 1025.1627,
            c_d: 0.15,
            area: 0.051,
            omega1: 1.0,
            heuristic: HeuristicMode::PaperAverage,
            variant: Variant::WakeInformed,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rho", self.rho), ("c_d", self.c_d), ("area", self.area), ("omega1", self.omega1)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("planner {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_heuristic(mut self, heuristic: HeuristicMode) -> Self {
        self.heuristic = heuristic;
        self
    }

    /// Drag force at relative speed `v`, newtons. No domain check.
    #[inline]
    pub fn drag(&self, v: f64) -> f64 {
        0.5 * self.rho * v * v * self.c_d * self.area
    }

    /// Weighted drag, i.e. edge cost per meter when entering a node at speed `v`.
    #[inline]
    pub fn energy_rate(&self, v: f64) -> f64 {
        self.omega1 * self.drag(v)
    }
}

/// `0.5 rho v^2 C_D A`.
pub fn drag_force(v: f64, cfg: &PlannerConfig) -> Result<f64> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::Domain(format!("relative speed must be finite and >= 0, got {v}")));
    }
    Ok(cfg.drag(v))
}

/// Distance between nodes on an isotropic grid with the given spacing.
pub fn euclid(a: GridNode, b: GridNode, spacing: f64) -> f64 {
    euclid_steps(a.delta(b), spacing)
}

pub(crate) const STEPS: [[i64; 3]; 26] = {
    let mut out = [[0i64; 3]; 26];
    let mut k = 0;
    let mut dz = -1;
    while dz <= 1 {
        let mut dy = -1;
        while dy <= 1 {
            let mut dx = -1;
            while dx <= 1 {
                if !(dx == 0 && dy == 0 && dz == 0) {
                    out[k] = [dx, dy, dz];
                    k += 1;
                }
                dx += 1;
            }
            dy += 1;
        }
        dz += 1;
    }
    out
};

#[inline]
pub(crate) fn strides(spec: &GridSpec) -> [i64; 3] {
    [1, spec.nx as i64, (spec.nx * spec.ny) as i64]
}

/// Corner-cutting rule for a move of `d` from flat index `from`.
///
/// A move changing two or three coordinates is blocked when, seen from either
/// endpoint, at least two of the face-neighbors inside the move's bounding
/// box are occupied. Both endpoints must be in bounds.
#[inline]
pub(crate) fn corner_blocked(occupied: &[bool], strides: [i64; 3], from: usize, d: [i64; 3]) -> bool {
    let moving = d.iter().filter(|&&c| c != 0).count();
    if moving < 2 {
        return false;
    }
    let from = from as i64;
    let to = from + d[0] * strides[0] + d[1] * strides[1] + d[2] * strides[2];
    let mut near_from = 0;
    let mut near_to = 0;
    for axis in 0..3 {
        if d[axis] == 0 {
            continue;
        }
        let off = d[axis] * strides[axis];
        near_from += occupied[(from + off) as usize] as u32;
        near_to += occupied[(to - off) as usize] as u32;
    }
    near_from >= 2 || (moving == 3 && near_to >= 2)
}

/// Traversable neighbors of `node` with their step distances.
pub fn neighbors(field: &FlowField, node: GridNode) -> impl Iterator<Item = (GridNode, f64)> + '_ {
    let spec = *field.spec();
    let st = strides(&spec);
    let from = spec.index(node);
    STEPS.iter().filter_map(move |&d| {
        let (x, y, z) = (node.ix as i64 + d[0], node.iy as i64 + d[1], node.iz as i64 + d[2]);
        if !spec.contains_signed(x, y, z) {
            return None;
        }
        let next = GridNode::new(x as usize, y as usize, z as usize);
        if field.is_occupied(next) || corner_blocked(field.occupancy(), st, from, d) {
            return None;
        }
        Some((next, spec.distance(node, next)))
    })
}

/// Cost of the single move `from -> to`.
pub fn edge_cost(from: GridNode, to: GridNode, field: &FlowField, cfg: &PlannerConfig) -> Result<f64> {
    let spec = field.spec();
    spec.check(from)?;
    spec.check(to)?;
    if !from.is_neighbor(to) {
        return Err(Error::NotNeighbors { from, to });
    }
    if field.is_occupied(to)
        || corner_blocked(field.occupancy(), strides(spec), spec.index(from), from.delta(to))
    {
        return Err(Error::BlockedEdge { from, to });
    }
    Ok(cfg.energy_rate(field.speed_at(to)) * spec.distance(from, to))
}

/// Energy rate the heuristic multiplies the remaining distance by.
pub fn heuristic_rate(stats: &FieldStats, mode: HeuristicMode) -> f64 {
    match mode {
        HeuristicMode::PaperAverage => stats.mean_energy_rate,
        HeuristicMode::AdmissibleMin => stats.min_energy_rate,
        HeuristicMode::Zero => 0.0,
    }
}

/// Estimated remaining cost from `n` to `goal`.
pub fn heuristic(n: GridNode, goal: GridNode, stats: &FieldStats, cfg: &PlannerConfig, spec: &GridSpec) -> f64 {
    match cfg.heuristic {
        HeuristicMode::Zero => 0.0,
        mode => heuristic_rate(stats, mode) * spec.distance(n, goal),
    }
}

/// Ordered node sequence with physical waypoints and provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<GridNode>,
    pub waypoints: Vec<[f64; 3]>,
    pub scenario: ScenarioParams,
    pub variant: Variant,
}

impl Path {
    pub fn new(nodes: Vec<GridNode>, spec: &GridSpec, scenario: ScenarioParams, variant: Variant) -> Self {
        let waypoints = nodes.iter().map(|&n| spec.position(n)).collect();
        Self { nodes, waypoints, scenario, variant }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> Option<GridNode> {
        self.nodes.first().copied()
    }

    pub fn goal(&self) -> Option<GridNode> {
        self.nodes.last().copied()
    }

    /// Checks the planner-output invariants: neighbor steps that the grid
    /// allows, no occupied or repeated nodes, and the expected endpoints.
    pub fn validate(&self, field: &FlowField, start: GridNode, goal: GridNode) -> Result<()> {
        let spec = field.spec();
        if self.start() != Some(start) || self.goal() != Some(goal) {
            return Err(Error::InvalidPath(format!(
                "endpoints {:?} -> {:?}, expected {start} -> {goal}",
                self.start(),
                self.goal()
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(self.nodes.len());
        for &n in &self.nodes {
            spec.check(n)?;
            if field.is_occupied(n) {
                return Err(Error::Occupied(n));
            }
            if !seen.insert(n) {
                return Err(Error::InvalidPath(format!("node {n} repeats")));
            }
        }
        let relaxed = PlannerConfig::default();
        for w in self.nodes.windows(2) {
            edge_cost(w[0], w[1], field, &relaxed)?;
        }
        Ok(())
    }
}

/// Outcome of one planning call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub path: Path,
    /// Sum of edge costs along the path, J (weighted by omega1).
    pub g_total: f64,
    pub expanded: usize,
    /// Seconds spent in the planning call.
    pub wall_time: f64,
}

pub(crate) fn check_endpoints(field: &FlowField, start: GridNode, goal: GridNode) -> Result<()> {
    let spec = field.spec();
    spec.check(start)?;
    spec.check(goal)?;
    for n in [start, goal] {
        if field.is_occupied(n) {
            return Err(Error::Occupied(n));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::{field_stats, make_uniform_field};

    #[test]
    fn euclid_examples() {
        let a = GridNode::new(0, 0, 0);
        assert_eq!(euclid(a, a, 1.0), 0.0);
        assert!((euclid(a, GridNode::new(1, 1, 1), 1.0) - 1.7320508075688772).abs() < 1e-15);
        assert_eq!(euclid(a, GridNode::new(3, 4, 0), 2.0), 10.0);
        assert_eq!(euclid(GridNode::new(3, 4, 0), a, 2.0), 10.0);
    }

    #[test]
    fn drag_examples() {
        let cfg = PlannerConfig::default();
        assert_eq!(drag_force(0.0, &cfg).unwrap(), 0.0);
        // 0.5 * 1025.1627 * 1 * 0.15 * 0.051
        assert!((drag_force(1.0, &cfg).unwrap() - 3.9212473275).abs() < 1e-12);
        let f2 = drag_force(2.0, &cfg).unwrap();
        assert!((f2 - 15.68498931).abs() < 1e-10);
        assert!((f2 - 4.0 * drag_force(1.0, &cfg).unwrap()).abs() < 1e-12);
        assert!(matches!(drag_force(-0.1, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn steps_cover_the_neighborhood() {
        let mut seen = std::collections::HashSet::new();
        for d in STEPS {
            assert!(d.iter().all(|c| c.abs() <= 1) && d != [0, 0, 0]);
            assert!(seen.insert(d));
        }
        assert_eq!(seen.len(), 26);
    }

    fn uniform(n: usize, extent: f64, speed: f64) -> FlowField {
        make_uniform_field(
            GridSpec::cube(n, extent).unwrap(),
            ScenarioParams::new(speed, 0.0, 0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn edge_cost_examples() {
        let cfg = PlannerConfig::default();
        // spacing 1.2205 exactly
        let f = uniform(3, 2.441, 1.0);
        let a = GridNode::new(0, 0, 0);
        let c = edge_cost(a, GridNode::new(1, 0, 0), &f, &cfg).unwrap();
        assert!((c - 3.9212473275 * 1.2205).abs() < 1e-9, "{c}");
        assert!((c - 4.78588236321375).abs() < 1e-9);
        let diag = edge_cost(a, GridNode::new(1, 1, 1), &f, &cfg).unwrap();
        assert!((diag / c - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn edge_cost_zero_flow_and_errors() {
        let cfg = PlannerConfig::default();
        let spec = GridSpec::cube(3, 2.0).unwrap();
        let mut speed = vec![1.0; 27];
        speed[spec.index(GridNode::new(1, 0, 0))] = 0.0;
        let mut occ = vec![false; 27];
        occ[spec.index(GridNode::new(0, 1, 0))] = true;
        let f = FlowField::from_parts(spec, speed, occ, ScenarioParams::default()).unwrap();
        let a = GridNode::new(0, 0, 0);
        assert_eq!(edge_cost(a, GridNode::new(1, 0, 0), &f, &cfg).unwrap(), 0.0);
        assert!(matches!(
            edge_cost(a, GridNode::new(2, 0, 0), &f, &cfg),
            Err(Error::NotNeighbors { .. })
        ));
        assert!(matches!(
            edge_cost(a, GridNode::new(0, 1, 0), &f, &cfg),
            Err(Error::BlockedEdge { .. })
        ));
        assert!(matches!(edge_cost(a, GridNode::new(0, 0, 3), &f, &cfg), Err(Error::OutOfBounds(_))));
    }

    #[test]
    fn corner_cutting_between_two_occupied_faces_is_blocked() {
        let cfg = PlannerConfig::default();
        let spec = GridSpec::cube(3, 2.0).unwrap();
        let mut occ = vec![false; 27];
        occ[spec.index(GridNode::new(1, 0, 0))] = true;
        occ[spec.index(GridNode::new(0, 1, 0))] = true;
        let f = FlowField::from_parts(spec, vec![1.0; 27], occ, ScenarioParams::default()).unwrap();
        let a = GridNode::new(0, 0, 0);
        assert!(matches!(edge_cost(a, GridNode::new(1, 1, 0), &f, &cfg), Err(Error::BlockedEdge { .. })));
        // Reverse direction is blocked as well.
        assert!(edge_cost(GridNode::new(1, 1, 0), a, &f, &cfg).is_err());
        // One occupied face neighbor is not enough.
        assert!(edge_cost(a, GridNode::new(0, 1, 1), &f, &cfg).is_ok());
        // Space diagonal with two occupied faces next to the source.
        assert!(edge_cost(a, GridNode::new(1, 1, 1), &f, &cfg).is_err());
        assert!(edge_cost(GridNode::new(1, 1, 1), a, &f, &cfg).is_err());
    }

    #[test]
    fn heuristic_modes() {
        let f = uniform(5, 4.0, 1.5);
        let spec = *f.spec();
        let stats = field_stats(&f, &PlannerConfig::default()).unwrap();
        let goal = GridNode::new(4, 4, 4);
        let n = GridNode::new(0, 1, 2);
        let base = PlannerConfig::default();
        let avg = heuristic(n, goal, &stats, &base, &spec);
        let min = heuristic(n, goal, &stats, &base.with_heuristic(HeuristicMode::AdmissibleMin), &spec);
        let zero = heuristic(n, goal, &stats, &base.with_heuristic(HeuristicMode::Zero), &spec);
        assert_eq!(avg, min);
        assert_eq!(zero, 0.0);
        for mode in [HeuristicMode::PaperAverage, HeuristicMode::AdmissibleMin, HeuristicMode::Zero] {
            assert_eq!(heuristic(goal, goal, &stats, &base.with_heuristic(mode), &spec), 0.0);
        }
    }

    #[test]
    fn config_rejects_non_positive_constants() {
        let mut cfg = PlannerConfig::default();
        cfg.validate().unwrap();
        cfg.omega1 = 0.0;
        assert!(cfg.validate().is_err());
        cfg = PlannerConfig { area: -1.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
