use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{check_endpoints, corner_blocked, strides, HeuristicMode, Path, PlannerConfig, SearchResult, Variant, STEPS};
use crate::error::{Error, Result};
use crate::flowfield::{energy_rate_summary, strip_wake, FlowField, GridNode};

#[derive(Clone, Copy, Debug)]
struct Entry {
    f: f64,
    h: f64,
    g: f64,
    /// (ix, iy, iz) packed so that integer order is lexicographic order.
    key: u64,
    idx: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // BinaryHeap pops the greatest entry: smallest f, then smallest h, then
    // lexicographically smallest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.key.cmp(&self.key))
    }
}

#[inline]
fn pack(n: GridNode) -> u64 {
    ((n.ix as u64) << 42) | ((n.iy as u64) << 21) | n.iz as u64
}

/// Plans a minimum-energy path from `start` to `goal`.
///
/// The current-informed variant searches `strip_wake(field)`; the
/// wake-informed variant searches `field` itself. With
/// [`HeuristicMode::PaperAverage`] closed nodes are re-opened when a cheaper
/// route to them turns up; the other two modes are consistent and never
/// re-open. `wall_time` covers the whole call, including wake stripping and
/// the heuristic's field pass.
pub fn astar(field: &FlowField, start: GridNode, goal: GridNode, cfg: &PlannerConfig) -> Result<SearchResult> {
    let t0 = Instant::now();
    cfg.validate()?;
    check_endpoints(field, start, goal)?;
    let stripped;
    let search_field = match cfg.variant {
        Variant::CurrentInformed => {
            stripped = strip_wake(field);
            &stripped
        }
        Variant::WakeInformed => field,
    };
    let (nodes, g_total, expanded) = search(search_field, start, goal, cfg)?;
    let path = Path::new(nodes, field.spec(), *field.scenario(), cfg.variant);
    Ok(SearchResult { path, g_total, expanded, wall_time: t0.elapsed().as_secs_f64() })
}

fn search(field: &FlowField, start: GridNode, goal: GridNode, cfg: &PlannerConfig) -> Result<(Vec<GridNode>, f64, usize)> {
    if start == goal {
        return Ok((vec![start], 0.0, 0));
    }
    let spec = *field.spec();
    let (mean_rate, min_rate) = energy_rate_summary(field, cfg).ok_or(Error::EmptyField)?;
    let h_rate = match cfg.heuristic {
        HeuristicMode::PaperAverage => mean_rate,
        HeuristicMode::AdmissibleMin => min_rate,
        HeuristicMode::Zero => 0.0,
    };
    let reopen = cfg.heuristic == HeuristicMode::PaperAverage;
    let h = |n: GridNode| if h_rate == 0.0 { 0.0 } else { h_rate * spec.distance(n, goal) };

    let speeds = field.speeds();
    let occupied = field.occupancy();
    let st = strides(&spec);
    let step_len: Vec<f64> = STEPS
        .iter()
        .map(|d| {
            let o = GridNode::new(1, 1, 1);
            spec.distance(o, GridNode::new((1 + d[0]) as usize, (1 + d[1]) as usize, (1 + d[2]) as usize))
        })
        .collect();

    let n = spec.len();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![u32::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    let start_idx = spec.index(start);
    let goal_idx = spec.index(goal);
    g[start_idx] = 0.0;
    let h0 = h(start);
    open.push(Entry { f: h0, h: h0, g: 0.0, key: pack(start), idx: start_idx as u32 });

    let mut expanded = 0usize;
    while let Some(Entry { g: g_cur, idx, .. }) = open.pop() {
        let cur = idx as usize;
        if closed[cur] || g_cur > g[cur] {
            continue;
        }
        if cur == goal_idx {
            let mut nodes = vec![goal];
            let mut at = cur;
            while at != start_idx {
                at = parent[at] as usize;
                nodes.push(spec.node(at));
            }
            nodes.reverse();
            return Ok((nodes, g_cur, expanded));
        }
        closed[cur] = true;
        expanded += 1;
        let node = spec.node(cur);
        for (k, d) in STEPS.iter().enumerate() {
            let (x, y, z) = (node.ix as i64 + d[0], node.iy as i64 + d[1], node.iz as i64 + d[2]);
            if !spec.contains_signed(x, y, z) {
                continue;
            }
            let next = (cur as i64 + d[0] * st[0] + d[1] * st[1] + d[2] * st[2]) as usize;
            if occupied[next] || corner_blocked(occupied, st, cur, *d) {
                continue;
            }
            let tentative = g_cur + cfg.energy_rate(speeds[next]) * step_len[k];
            if tentative >= g[next] {
                continue;
            }
            if closed[next] {
                if !reopen {
                    continue;
                }
                closed[next] = false;
            }
            g[next] = tentative;
            parent[next] = cur as u32;
            let nn = GridNode::new(x as usize, y as usize, z as usize);
            let hn = h(nn);
            open.push(Entry { f: tentative + hn, h: hn, g: tentative, key: pack(nn), idx: next as u32 });
        }
    }
    Err(Error::NoPath { expanded })
}
