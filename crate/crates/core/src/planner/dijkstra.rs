//! Plain Dijkstra built only on the public move model, used to cross-check A*.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{check_endpoints, edge_cost, neighbors, Path, PlannerConfig, SearchResult, Variant};
use crate::error::{Error, Result};
use crate::flowfield::{strip_wake, FlowField, GridNode};

/// Total-order wrapper so costs can live in a heap.
#[derive(Clone, Copy)]
struct Cost(f64);

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Optimal path by uniform-cost search. Ignores `cfg.heuristic`.
pub fn dijkstra_oracle(field: &FlowField, start: GridNode, goal: GridNode, cfg: &PlannerConfig) -> Result<SearchResult> {
    let t0 = Instant::now();
    cfg.validate()?;
    check_endpoints(field, start, goal)?;
    let stripped;
    let f = match cfg.variant {
        Variant::CurrentInformed => {
            stripped = strip_wake(field);
            &stripped
        }
        Variant::WakeInformed => field,
    };
    let spec = f.spec();
    let mut dist = vec![f64::INFINITY; spec.len()];
    let mut prev: Vec<Option<GridNode>> = vec![None; spec.len()];
    let mut heap = BinaryHeap::new();
    dist[spec.index(start)] = 0.0;
    heap.push(Reverse((Cost(0.0), start.ix, start.iy, start.iz)));
    let mut expanded = 0;
    while let Some(Reverse((Cost(d), ix, iy, iz))) = heap.pop() {
        let node = GridNode::new(ix, iy, iz);
        if d > dist[spec.index(node)] {
            continue;
        }
        if node == goal {
            let mut nodes = vec![goal];
            let mut at = goal;
            while let Some(p) = prev[spec.index(at)] {
                nodes.push(p);
                at = p;
            }
            nodes.reverse();
            let path = Path::new(nodes, spec, *field.scenario(), cfg.variant);
            return Ok(SearchResult { path, g_total: d, expanded, wall_time: t0.elapsed().as_secs_f64() });
        }
        expanded += 1;
        for (next, _) in neighbors(f, node) {
            let nd = d + edge_cost(node, next, f, cfg)?;
            let i = spec.index(next);
            if nd < dist[i] {
                dist[i] = nd;
                prev[i] = Some(node);
                heap.push(Reverse((Cost(nd), next.ix, next.iy, next.iz)));
            }
        }
    }
    Err(Error::NoPath { expanded })
}

/// Optimal cost from every node to `goal` on `field` as given (no stripping).
/// Unreachable and occupied nodes get infinity.
pub fn cost_to_goal(field: &FlowField, goal: GridNode, cfg: &PlannerConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_endpoints(field, goal, goal)?;
    let spec = field.spec();
    let mut dist = vec![f64::INFINITY; spec.len()];
    let mut heap = BinaryHeap::new();
    dist[spec.index(goal)] = 0.0;
    heap.push(Reverse((Cost(0.0), goal.ix, goal.iy, goal.iz)));
    while let Some(Reverse((Cost(d), ix, iy, iz))) = heap.pop() {
        let node = GridNode::new(ix, iy, iz);
        if d > dist[spec.index(node)] {
            continue;
        }
        // Moves are symmetric in reachability, so predecessors of `node` are
        // its neighbors; the cost is that of entering `node` from them.
        for (pred, _) in neighbors(field, node) {
            let nd = d + edge_cost(pred, node, field, cfg)?;
            let i = spec.index(pred);
            if nd < dist[i] {
                dist[i] = nd;
                heap.push(Reverse((Cost(nd), pred.ix, pred.iy, pred.iz)));
            }
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::{GridSpec, ScenarioParams};

    #[test]
    fn reverse_costs_match_forward_searches() {
        let spec = GridSpec::cube(5, 4.0).unwrap();
        let speed: Vec<f64> = (0..spec.len()).map(|i| 0.5 + (i % 7) as f64 * 0.2).collect();
        let mut occ = vec![false; spec.len()];
        occ[spec.index(GridNode::new(2, 2, 2))] = true;
        occ[spec.index(GridNode::new(2, 1, 2))] = true;
        let f = FlowField::from_parts(spec, speed, occ, ScenarioParams::default()).unwrap();
        let cfg = PlannerConfig::default();
        let goal = GridNode::new(4, 3, 1);
        let table = cost_to_goal(&f, goal, &cfg).unwrap();
        for start in [GridNode::new(0, 0, 0), GridNode::new(1, 4, 4), GridNode::new(3, 2, 2)] {
            let fwd = dijkstra_oracle(&f, start, goal, &cfg).unwrap();
            let t = table[spec.index(start)];
            assert!((fwd.g_total - t).abs() <= 1e-9 * t.max(1.0), "{} vs {t}", fwd.g_total);
        }
        assert!(table[spec.index(GridNode::new(2, 2, 2))].is_infinite());
    }
}
