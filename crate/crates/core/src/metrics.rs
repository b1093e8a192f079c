//! Path quality metrics, always evaluated against a wake-bearing field.
//!
//! Steps between consecutive path nodes need not be grid moves: snapped
//! network outputs can jump several nodes, and each jump counts once, priced
//! at its destination node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowfield::{field_stats, FieldStats, FlowField};
use crate::planner::{Path, PlannerConfig};

/// Smallest predecessor speed the relative fluctuation is divided by.
pub const DELTA_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    /// Relative speed change that marks a turbulent node.
    pub epsilon: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { epsilon: 0.005 }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    /// Drag energy, J.
    pub energy: f64,
    /// Path length, m.
    pub length: f64,
    pub n_high_velocity: usize,
    pub n_turbulent: usize,
    /// Fingerprint of the field the metrics were computed on.
    pub eval_field_id: u32,
}

fn check_nodes(path: &Path, field: &FlowField) -> Result<()> {
    for &n in &path.nodes {
        field.spec().check(n)?;
    }
    Ok(())
}

/// Nodes whose speed is at or above `median + std` of the field.
pub fn high_velocity_count(path: &Path, field: &FlowField, stats: &FieldStats) -> Result<usize> {
    if stats.field_id != field.fingerprint() {
        return Err(Error::Provenance { expected: field.fingerprint(), found: stats.field_id });
    }
    check_nodes(path, field)?;
    let threshold = stats.high_velocity_threshold();
    Ok(path.nodes.iter().filter(|&&n| field.speed_at(n) >= threshold).count())
}

/// Nodes (after the first) whose speed differs from the previous node's by
/// at least `epsilon` relative to the previous speed.
pub fn turbulent_count(path: &Path, field: &FlowField, cfg: &MetricsConfig) -> Result<usize> {
    cfg.validate()?;
    check_nodes(path, field)?;
    Ok(path
        .nodes
        .windows(2)
        .filter(|w| {
            let prev = field.speed_at(w[0]);
            let cur = field.speed_at(w[1]);
            (cur - prev).abs() / prev.max(DELTA_FLOOR) >= cfg.epsilon
        })
        .count())
}

/// Sum of `F_D(v(next)) * d(prev, next)` over consecutive node pairs.
pub fn path_energy(path: &Path, field: &FlowField, cfg: &PlannerConfig) -> Result<f64> {
    check_nodes(path, field)?;
    if let Some(&n) = path.nodes.iter().find(|&&n| field.is_occupied(n)) {
        return Err(Error::Occupied(n));
    }
    let spec = field.spec();
    Ok(path.nodes.windows(2).map(|w| cfg.drag(field.speed_at(w[1])) * spec.distance(w[0], w[1])).sum())
}

/// Sum of distances between consecutive waypoints, m.
pub fn path_length(path: &Path) -> f64 {
    path.waypoints
        .windows(2)
        .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2) + (w[1][2] - w[0][2]).powi(2)).sqrt())
        .sum()
}

/// All four metrics of `path` on `wake_field`.
///
/// Pass `stats` when they are already known for `wake_field` to skip
/// recomputing them.
pub fn assess(
    path: &Path,
    wake_field: &FlowField,
    stats: Option<&FieldStats>,
    planner: &PlannerConfig,
    cfg: &MetricsConfig,
) -> Result<PathMetrics> {
    let owned;
    let stats = match stats {
        Some(s) => s,
        None => {
            owned = field_stats(wake_field, planner)?;
            &owned
        }
    };
    Ok(PathMetrics {
        energy: path_energy(path, wake_field, planner)?,
        length: path_length(path),
        n_high_velocity: high_velocity_count(path, wake_field, stats)?,
        n_turbulent: turbulent_count(path, wake_field, cfg)?,
        eval_field_id: wake_field.fingerprint(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::{GridNode, GridSpec, ScenarioParams};
    use crate::planner::Variant;

    fn line_field(speeds: &[f64]) -> FlowField {
        let spec = GridSpec::new(speeds.len(), 2, 2, (speeds.len() - 1) as f64).unwrap();
        let mut v = vec![1.0; spec.len()];
        v[..speeds.len()].copy_from_slice(speeds);
        FlowField::from_parts(spec, v, vec![false; spec.len()], ScenarioParams::default()).unwrap()
    }

    fn line_path(f: &FlowField, n: usize) -> Path {
        let nodes = (0..n).map(|i| GridNode::new(i, 0, 0)).collect();
        Path::new(nodes, f.spec(), *f.scenario(), Variant::WakeInformed)
    }

    #[test]
    fn turbulence_uses_relative_backward_difference() {
        let f = line_field(&[1.0, 1.004, 1.010]);
        let p = line_path(&f, 3);
        assert_eq!(turbulent_count(&p, &f, &MetricsConfig::default()).unwrap(), 1);
        let flat = line_field(&[2.0, 2.0, 2.0]);
        assert_eq!(turbulent_count(&line_path(&flat, 3), &flat, &MetricsConfig::default()).unwrap(), 0);
    }

    #[test]
    fn high_velocity_threshold_is_inclusive() {
        let f = line_field(&[1.0, 1.0, 1.0, 1.0]);
        let mut stats = field_stats(&f, &PlannerConfig::default()).unwrap();
        stats.median_speed = 1.0;
        stats.std_speed = 0.5;
        assert_eq!(high_velocity_count(&line_path(&f, 4), &f, &stats).unwrap(), 0);
        let g = line_field(&[1.5, 1.5, 1.5, 0.2]);
        let mut stats = field_stats(&g, &PlannerConfig::default()).unwrap();
        stats.median_speed = 1.0;
        stats.std_speed = 0.5;
        assert_eq!(high_velocity_count(&line_path(&g, 4), &g, &stats).unwrap(), 3);
    }

    #[test]
    fn uniform_field_counts_every_node_as_high_velocity() {
        let f = line_field(&[1.0; 5]);
        let stats = field_stats(&f, &PlannerConfig::default()).unwrap();
        assert_eq!(stats.std_speed, 0.0);
        assert_eq!(high_velocity_count(&line_path(&f, 5), &f, &stats).unwrap(), 5);
    }

    #[test]
    fn foreign_stats_are_rejected() {
        let f = line_field(&[1.0, 2.0, 3.0]);
        let g = line_field(&[1.0, 2.0, 3.5]);
        let stats = field_stats(&g, &PlannerConfig::default()).unwrap();
        assert!(matches!(high_velocity_count(&line_path(&f, 3), &f, &stats), Err(Error::Provenance { .. })));
    }

    #[test]
    fn energy_and_length_examples() {
        let cfg = PlannerConfig::default();
        let spec = GridSpec::cube(3, 2.441).unwrap();
        let f = FlowField::from_parts(spec, vec![1.0; 27], vec![false; 27], ScenarioParams::default()).unwrap();
        let one = Path::new(vec![GridNode::new(0, 0, 0)], &spec, ScenarioParams::default(), Variant::WakeInformed);
        assert_eq!(path_energy(&one, &f, &cfg).unwrap(), 0.0);
        assert_eq!(path_length(&one), 0.0);
        let two = Path::new(
            vec![GridNode::new(0, 0, 0), GridNode::new(1, 0, 0)],
            &spec,
            ScenarioParams::default(),
            Variant::WakeInformed,
        );
        assert!((path_energy(&two, &f, &cfg).unwrap() - 4.78588236321375).abs() < 1e-9);

        let diag_spec = GridSpec::cube(8, 7.0).unwrap();
        let nodes = (0..8).map(|i| GridNode::new(i, i, i)).collect();
        let diag = Path::new(nodes, &diag_spec, ScenarioParams::default(), Variant::WakeInformed);
        assert!((path_length(&diag) - 7.0 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn occupied_node_invalidates_energy() {
        let spec = GridSpec::cube(2, 1.0).unwrap();
        let mut occ = vec![false; 8];
        occ[1] = true;
        let f = FlowField::from_parts(spec, vec![1.0; 8], occ, ScenarioParams::default()).unwrap();
        let p = Path::new(
            vec![GridNode::new(0, 0, 0), GridNode::new(1, 0, 0)],
            &spec,
            ScenarioParams::default(),
            Variant::WakeInformed,
        );
        assert!(matches!(path_energy(&p, &f, &PlannerConfig::default()), Err(Error::Occupied(_))));
    }
}
