use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::model::MlpModel;
use crate::dataset::input_vector;
use crate::error::Result;
use crate::flowfield::{FlowField, GridNode, ScenarioParams};
use crate::planner::Path;

/// Waypoints predicted by a network, in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnPrediction {
    pub waypoints: Vec<[f64; 3]>,
    /// Whether some waypoint came within `goal_radius` of the goal.
    pub reached_goal: bool,
    /// Seconds spent in the inference call.
    pub wall_time: f64,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Predicts a trajectory from physical start and goal positions.
///
/// The raw output is read as consecutive waypoints and cut after the first
/// one within `goal_radius` (normally one grid spacing) of the goal; if none
/// is that close every waypoint is kept.
pub fn infer_path(
    model: &MlpModel,
    start: [f64; 3],
    goal: [f64; 3],
    scenario: &ScenarioParams,
    goal_radius: f64,
) -> Result<NnPrediction> {
    let t0 = Instant::now();
    let x = model.norm_stats.normalize_input(&input_vector(start, goal, scenario));
    let y = model.norm_stats.denormalize_target(&model.forward(&x)?);
    let mut waypoints: Vec<[f64; 3]> = y.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    let hit = waypoints.iter().position(|&w| dist(w, goal) <= goal_radius);
    if let Some(i) = hit {
        waypoints.truncate(i + 1);
    }
    Ok(NnPrediction { waypoints, reached_goal: hit.is_some(), wall_time: t0.elapsed().as_secs_f64() })
}

/// Median wall time of `repeats` identical inference calls.
pub fn median_inference_time(
    model: &MlpModel,
    start: [f64; 3],
    goal: [f64; 3],
    scenario: &ScenarioParams,
    goal_radius: f64,
    repeats: usize,
) -> Result<f64> {
    let mut times = (0..repeats.max(1))
        .map(|_| infer_path(model, start, goal, scenario, goal_radius).map(|p| p.wall_time))
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::flowfield::median_in_place(&mut times))
}

/// Snaps waypoints to their nearest grid nodes, dropping consecutive
/// duplicates. Returns the path and whether it avoids every occupied node.
pub fn snap_to_grid(waypoints: &[[f64; 3]], field: &FlowField, path_meta: &Path) -> (Path, bool) {
    let spec = field.spec();
    let mut nodes: Vec<GridNode> = Vec::with_capacity(waypoints.len());
    for &w in waypoints {
        let n = spec.nearest_node(w);
        if nodes.last() != Some(&n) {
            nodes.push(n);
        }
    }
    let valid = !nodes.is_empty() && nodes.iter().all(|&n| !field.is_occupied(n));
    (Path::new(nodes, spec, path_meta.scenario, path_meta.variant), valid)
}
