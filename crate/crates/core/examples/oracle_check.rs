//! Checks A* against the Dijkstra reference on random fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wakeplan::{astar, dijkstra_oracle, FlowField, GridNode, GridSpec, HeuristicMode, PlannerConfig, ScenarioParams};

fn random_field(rng: &mut ChaCha8Rng) -> wakeplan::Result<FlowField> {
    let spec = GridSpec::cube(16, 15.0)?;
    let speed = (0..spec.len()).map(|_| rng.gen_range(0.1..5.0)).collect();
    let occupied = (0..spec.len()).map(|_| rng.gen_bool(0.08)).collect();
    FlowField::from_parts(spec, speed, occupied, ScenarioParams::default())
}

fn main() -> wakeplan::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = PlannerConfig::default().with_heuristic(HeuristicMode::AdmissibleMin);
    let (mut agree, mut tried) = (0, 0);
    while tried < 10 {
        let field = random_field(&mut rng)?;
        let (start, goal) = (GridNode::new(0, 0, 0), GridNode::new(15, 15, 15));
        if field.is_occupied(start) || field.is_occupied(goal) {
            continue;
        }
        tried += 1;
        let a = astar(&field, start, goal, &cfg)?;
        let d = dijkstra_oracle(&field, start, goal, &cfg)?;
        let rel = (a.g_total - d.g_total).abs() / d.g_total;
        println!("field {tried:2}: A* {:.6} J ({} expanded), Dijkstra {:.6} J ({} expanded), rel diff {rel:.1e}", a.g_total, a.expanded, d.g_total, d.expanded);
        if rel <= 1e-9 {
            agree += 1;
        }
    }
    println!("{agree}/{tried} optimal");
    Ok(())
}
