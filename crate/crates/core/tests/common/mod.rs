//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wakeplan::dataset::TrainingSample;
use wakeplan::mlp::MlpModel;
use wakeplan::{FlowField, GridNode, GridSpec, Path, PlannerConfig, ScenarioParams};

/// Random speeds in [0.1, 5.0] and an occupancy fraction drawn from
/// [0, max_occupancy].
pub fn random_field(seed: u64, n: usize, max_occupancy: f64) -> FlowField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = GridSpec::cube(n, 1.2205 * (n - 1) as f64).unwrap();
    let p = rng.gen_range(0.0..=max_occupancy);
    let speed = (0..spec.len()).map(|_| rng.gen_range(0.1..=5.0)).collect();
    let occupied = (0..spec.len()).map(|_| rng.gen_bool(p)).collect();
    let scenario = ScenarioParams::new(rng.gen_range(0.1..=5.0), 0.0, seed).unwrap();
    FlowField::from_parts(spec, speed, occupied, scenario).unwrap()
}

pub fn random_free_node(field: &FlowField, rng: &mut impl Rng) -> GridNode {
    let spec = field.spec();
    loop {
        let n = GridNode::new(rng.gen_range(0..spec.nx), rng.gen_range(0..spec.ny), rng.gen_range(0..spec.nz));
        if !field.is_occupied(n) {
            return n;
        }
    }
}

fn position(spec: &GridSpec, n: GridNode) -> [f64; 3] {
    let h = |k: usize| spec.extent / (k - 1) as f64;
    [n.ix as f64 * h(spec.nx), n.iy as f64 * h(spec.ny), n.iz as f64 * h(spec.nz)]
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn speed(field: &FlowField, n: GridNode) -> f64 {
    let spec = field.spec();
    field.speeds()[n.ix + spec.nx * (n.iy + spec.ny * n.iz)]
}

/// Path metrics recomputed from first principles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BruteMetrics {
    pub energy: f64,
    pub length: f64,
    pub n_high_velocity: usize,
    pub n_turbulent: usize,
}

pub fn brute_metrics(path: &Path, field: &FlowField, cfg: &PlannerConfig, epsilon: f64) -> BruteMetrics {
    let spec = field.spec();
    let drag = |v: f64| cfg.omega1 * 0.5 * cfg.rho * v * v * cfg.c_d * cfg.area;
    let mut energy = 0.0;
    let mut length = 0.0;
    for w in path.nodes.windows(2) {
        let d = dist(position(spec, w[0]), position(spec, w[1]));
        energy += drag(speed(field, w[1])) * d;
        length += d;
    }

    let mut free: Vec<f64> =
        field.speeds().iter().zip(field.occupancy()).filter(|(_, o)| !**o).map(|(v, _)| *v).collect();
    free.sort_by(f64::total_cmp);
    let k = free.len();
    let median = if k % 2 == 1 { free[k / 2] } else { (free[k / 2 - 1] + free[k / 2]) / 2.0 };
    let mean = free.iter().sum::<f64>() / k as f64;
    let std = (free.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k as f64).sqrt();
    let n_high_velocity = path.nodes.iter().filter(|&&n| speed(field, n) >= median + std).count();

    let n_turbulent = path
        .nodes
        .windows(2)
        .filter(|w| {
            let (a, b) = (speed(field, w[0]), speed(field, w[1]));
            (b - a).abs() / a.max(1e-12) >= epsilon
        })
        .count();
    BruteMetrics { energy, length, n_high_velocity, n_turbulent }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Forward pass written out with plain loops, as a reference for the
/// library's kernels.
pub fn naive_forward(model: &MlpModel, x: &[f64]) -> Vec<f64> {
    let mut cur = x.to_vec();
    let last = model.layers.len() - 1;
    for (k, l) in model.layers.iter().enumerate() {
        let mut next = vec![0.0; l.n_out];
        for o in 0..l.n_out {
            let mut s = l.b[o];
            for i in 0..l.n_in {
                s += l.w[o * l.n_in + i] * cur[i];
            }
            next[o] = if k < last { s.max(0.0) } else { s };
        }
        cur = next;
    }
    cur
}

/// Pooled masked MSE of `model` on `batch`, via [`naive_forward`].
pub fn naive_loss(model: &MlpModel, batch: &[TrainingSample]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for s in batch {
        let y = naive_forward(model, &s.input);
        for j in 0..y.len() {
            num += s.mask[j] * (y[j] - s.target[j]).powi(2);
            den += s.mask[j];
        }
    }
    num / den
}

/// Random normalized-looking samples with random path lengths.
pub fn random_samples(rng: &mut impl Rng, n: usize, out_dim: usize) -> Vec<TrainingSample> {
    (0..n)
        .map(|i| {
            let mut input = [0.0; 8];
            input.iter_mut().for_each(|x| *x = rng.gen_range(-2.0..2.0));
            let waypoints = rng.gen_range(1..=out_dim / 3);
            let target = (0..out_dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mask = (0..out_dim).map(|j| if j < 3 * waypoints { 1.0 } else { 0.0 }).collect();
            TrainingSample {
                input,
                target,
                mask,
                n_waypoints: waypoints,
                scenario_id: format!("r{i}"),
                start_index: i,
                scenario: ScenarioParams::default(),
                variant: Default::default(),
            }
        })
        .collect()
}
