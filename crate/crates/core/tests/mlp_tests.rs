mod common;

use common::{naive_forward, naive_loss, random_samples};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wakeplan::dataset::{NormStats, OUTPUT_DIM};
use wakeplan::mlp::{
    backward, init_xavier, init_xavier_dims, load_checkpoint, save_checkpoint, train, Example, MlpModel, TrainConfig,
};

fn randomize_biases(model: &mut MlpModel, rng: &mut ChaCha8Rng) {
    for l in &mut model.layers {
        l.b.iter_mut().for_each(|b| *b = rng.gen_range(-0.3..0.3));
    }
}

/// Largest relative error between analytic and central-difference gradients
/// over `picks` entries of each block (every entry when `picks` is None).
fn max_rel_error(model: &MlpModel, batch: &[wakeplan::dataset::TrainingSample], picks: Option<usize>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    const H: f64 = 1e-5;
    let examples: Vec<Example> = batch.iter().map(Example::from).collect();
    let (_, grads) = backward(model, &examples).unwrap();
    let mut worst = Vec::new();
    for (bi, g) in grads.blocks.iter().enumerate() {
        let idx: Vec<usize> = match picks {
            Some(k) => (0..k).map(|_| rng.gen_range(0..g.len())).collect(),
            None => (0..g.len()).collect(),
        };
        let mut w = 0.0f64;
        for j in idx {
            let mut plus = model.clone();
            plus.blocks_mut()[bi][j] += H;
            let mut minus = model.clone();
            minus.blocks_mut()[bi][j] -= H;
            let numeric = (naive_loss(&plus, batch) - naive_loss(&minus, batch)) / (2.0 * H);
            let rel = (g[j] - numeric).abs() / g[j].abs().max(numeric.abs()).max(1e-6);
            w = w.max(rel);
        }
        worst.push(w);
    }
    worst
}

#[test]
fn gradients_match_finite_differences_on_a_small_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut model = init_xavier_dims(&[8, 6, 7, 9], 3);
    randomize_biases(&mut model, &mut rng);
    let batch = random_samples(&mut rng, 4, 9);
    for (b, e) in max_rel_error(&model, &batch, None, &mut rng).iter().enumerate() {
        assert!(*e < 1e-4, "block {b}: {e:.2e}");
    }
}

#[test]
fn gradients_match_finite_differences_on_the_full_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut model = init_xavier(9);
    randomize_biases(&mut model, &mut rng);
    let batch = random_samples(&mut rng, 4, OUTPUT_DIM);
    for (b, e) in max_rel_error(&model, &batch, Some(20), &mut rng).iter().enumerate() {
        assert!(*e < 1e-4, "block {b}: {e:.2e}");
    }
}

#[test]
fn forward_matches_naive_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut model = init_xavier(4);
    randomize_biases(&mut model, &mut rng);
    let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let a = model.forward(&x).unwrap();
    let b = naive_forward(&model, &x);
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0));
    }
}

#[test]
fn training_is_deterministic_and_reduces_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let samples = random_samples(&mut rng, 24, OUTPUT_DIM);
    let norm = NormStats::fit(&samples).unwrap();
    let set: Vec<_> = samples.iter().map(|s| norm.normalize(s)).collect();
    let cfg = TrainConfig { lr: 1e-3, batch_size: 8, max_epochs: 20, patience: None, seed: 5, ..Default::default() };
    let (m1, r1) = train(&set[..18], &set[18..], norm.clone(), &cfg).unwrap();
    let (m2, r2) = train(&set[..18], &set[18..], norm, &cfg).unwrap();
    assert_eq!(m1, m2);
    assert_eq!(r1.without_timing(), r2.without_timing());
    assert!(r1.train_loss.last().unwrap() < &r1.train_loss[0]);
    assert_eq!(r1.train_loss.len(), 20);
}

#[test]
fn empty_splits_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples = random_samples(&mut rng, 4, OUTPUT_DIM);
    let norm = NormStats::fit(&samples).unwrap();
    assert!(train(&samples, &[], norm.clone(), &TrainConfig::default()).is_err());
    assert!(train(&[], &samples, norm, &TrainConfig::default()).is_err());
}

#[test]
fn checkpoint_round_trip_is_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut model = init_xavier(11);
    randomize_biases(&mut model, &mut rng);
    let samples = random_samples(&mut rng, 5, OUTPUT_DIM);
    model.norm_stats = NormStats::fit(&samples).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_checkpoint(dir.path(), &model, &TrainConfig::default()).unwrap();
    let (back, manifest) = load_checkpoint(dir.path()).unwrap();
    assert_eq!(manifest.param_count, model.param_count());
    for (a, b) in model.blocks().iter().zip(back.blocks()) {
        assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert_eq!(back, model);
}
