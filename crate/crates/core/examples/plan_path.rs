//! Plans with both planner variants from the same start and compares the
//! paths on the wake field.

use wakeplan::dataset::{sample_rear_start, DomainConfig};
use wakeplan::{assess, astar, field_stats, GridSpec, HeuristicMode, MetricsConfig, PlannerConfig, ScenarioParams, Variant};
use rand::SeedableRng;

fn main() -> wakeplan::Result<()> {
    let domain = DomainConfig { grid: GridSpec::cube(48, 60.0)?, ..Default::default() };
    let field = domain.build_field(ScenarioParams::new(2.5, 15.0, 1)?)?;
    let goal = domain.goal();
    let start = sample_rear_start(&field, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3))?;
    let base = PlannerConfig::default().with_heuristic(HeuristicMode::AdmissibleMin);
    let stats = field_stats(&field, &base)?;
    println!("start {start} -> goal {goal}");
    for variant in Variant::ALL {
        let cfg = base.with_variant(variant);
        let res = astar(&field, start, goal, &cfg)?;
        let m = assess(&res.path, &field, Some(&stats), &cfg, &MetricsConfig::default())?;
        println!(
            "{variant:>16}: {} nodes, E {:.1} J, L {:.2} m, high-velocity {}, turbulent {}, {} expanded in {:.3} s",
            res.path.len(),
            m.energy,
            m.length,
            m.n_high_velocity,
            m.n_turbulent,
            res.expanded,
            res.wall_time
        );
    }
    Ok(())
}
