mod common;

use common::{brute_metrics, random_field, random_free_node, rel_diff};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wakeplan::planner::neighbors;
use wakeplan::{assess, astar, field_stats, GridNode, MetricsConfig, Path, PlannerConfig, Variant};

/// Random walk over traversable neighbors, sometimes jumping further the way
/// snapped network paths do.
fn random_path(field: &wakeplan::FlowField, rng: &mut ChaCha8Rng) -> Path {
    let mut nodes = vec![random_free_node(field, rng)];
    for _ in 0..rng.gen_range(0..40) {
        let last = *nodes.last().unwrap();
        let next: Option<GridNode> = if rng.gen_bool(0.1) {
            Some(random_free_node(field, rng))
        } else {
            let options: Vec<_> = neighbors(field, last).map(|(n, _)| n).collect();
            (!options.is_empty()).then(|| options[rng.gen_range(0..options.len())])
        };
        match next {
            Some(n) => nodes.push(n),
            None => break,
        }
    }
    Path::new(nodes, field.spec(), *field.scenario(), Variant::WakeInformed)
}

#[test]
fn metrics_match_brute_force_on_200_pairs() {
    let cfg = PlannerConfig::default();
    let mcfg = MetricsConfig::default();
    for i in 0..200u64 {
        let field = random_field(1000 + i, 8 + (i as usize % 5), 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let path = random_path(&field, &mut rng);
        let m = assess(&path, &field, None, &cfg, &mcfg).unwrap();
        let b = brute_metrics(&path, &field, &cfg, mcfg.epsilon);
        assert_eq!(m.n_high_velocity, b.n_high_velocity, "pair {i}");
        assert_eq!(m.n_turbulent, b.n_turbulent, "pair {i}");
        assert!(rel_diff(m.energy, b.energy) <= 1e-9, "pair {i}: {} vs {}", m.energy, b.energy);
        assert!(rel_diff(m.length, b.length) <= 1e-9, "pair {i}");
    }
}

#[test]
fn wake_informed_energy_equals_search_cost() {
    let cfg = PlannerConfig::default().with_variant(Variant::WakeInformed);
    let mut checked = 0;
    for i in 0..60u64 {
        let field = random_field(5000 + i, 12, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let (s, g) = (random_free_node(&field, &mut rng), random_free_node(&field, &mut rng));
        if let Ok(res) = astar(&field, s, g, &cfg) {
            let stats = field_stats(&field, &cfg).unwrap();
            let m = assess(&res.path, &field, Some(&stats), &cfg, &MetricsConfig::default()).unwrap();
            assert!(rel_diff(m.energy, res.g_total) <= 1e-9);
            let straight = field.spec().distance(s, g);
            assert!(m.length >= straight * (1.0 - 1e-12));
            checked += 1;
        }
    }
    assert!(checked > 40);
}

#[test]
fn length_ignores_the_field() {
    let a = random_field(1, 10, 0.0);
    let b = random_field(2, 10, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let path = random_path(&a, &mut rng);
    let cfg = PlannerConfig::default();
    let ma = assess(&path, &a, None, &cfg, &MetricsConfig::default()).unwrap();
    let mb = assess(&path, &b, None, &cfg, &MetricsConfig::default()).unwrap();
    assert_eq!(ma.length, mb.length);
}
