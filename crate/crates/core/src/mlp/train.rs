use std::time::Instant;

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{init_xavier_dims, Activations, MlpModel, LAYER_DIMS};
use crate::dataset::{mix_seed, NormStats, TrainingSample};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping; `None`
    /// disables early stopping and is written as 0 in config files.
    #[serde(with = "patience_serde")]
    pub patience: Option<usize>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// L2 coefficient, added to the gradient as `weight_decay * w`.
    pub weight_decay: f64,
    pub seed: u64,
}

mod patience_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(p.unwrap_or(0) as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        Ok(Some(usize::deserialize(d)?).filter(|&p| p > 0))
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            batch_size: 64,
            max_epochs: 50,
            patience: Some(10),
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Config(format!("lr must be positive, got {}", self.lr)));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::Config("batch_size and max_epochs must be positive".into()));
        }
        if let Some(p) = self.patience {
            if p == 0 || p > self.max_epochs {
                return Err(Error::Config(format!("patience must be in 1..={}, got {p}", self.max_epochs)));
            }
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2) && self.eps > 0.0) {
            return Err(Error::Config("adam constants out of range".into()));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::Config(format!("weight_decay must be non-negative, got {}", self.weight_decay)));
        }
        Ok(())
    }
}

/// `sum(m (y - p)^2) / sum(m)`.
pub fn masked_mse(pred: &[f64], target: &[f64], mask: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.len() != mask.len() {
        return Err(Error::Shape(format!("lengths {} / {} / {}", pred.len(), target.len(), mask.len())));
    }
    let denom: f64 = mask.iter().sum();
    if denom <= 0.0 {
        return Err(Error::UndefinedLoss);
    }
    let num: f64 = pred.iter().zip(target).zip(mask).map(|((p, y), m)| m * (y - p) * (y - p)).sum();
    Ok(num / denom)
}

/// One training example in normalized units.
#[derive(Clone, Copy, Debug)]
pub struct Example<'a> {
    pub input: &'a [f64],
    pub target: &'a [f64],
    pub mask: &'a [f64],
}

impl<'a> From<&'a TrainingSample> for Example<'a> {
    fn from(s: &'a TrainingSample) -> Self {
        Self { input: &s.input, target: &s.target, mask: &s.mask }
    }
}

/// Gradients, same block layout as [`MlpModel::blocks`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub blocks: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Self { blocks: model.blocks().iter().map(|b| vec![0.0; b.len()]).collect() }
    }
}

/// Batch loss (masked entries pooled over the whole batch) and its exact
/// gradient with respect to every parameter block.
pub fn backward(model: &MlpModel, batch: &[Example<'_>]) -> Result<(f64, Gradients)> {
    let denom: f64 = batch.iter().map(|e| e.mask.iter().sum::<f64>()).sum();
    if denom <= 0.0 {
        return Err(Error::UndefinedLoss);
    }
    let n_layers = model.layers.len();
    let mut grads = Gradients::zeros_like(model);
    let mut acts = Activations::default();
    let mut loss = 0.0;
    for ex in batch {
        model.forward_cached(ex.input, &mut acts);
        let mut delta: Vec<f64> = acts
            .output
            .iter()
            .zip(ex.target)
            .zip(ex.mask)
            .map(|((p, y), m)| {
                loss += m * (p - y) * (p - y);
                2.0 * m * (p - y) / denom
            })
            .collect();
        for k in (0..n_layers).rev() {
            let layer = &model.layers[k];
            let input: &[f64] = if k == 0 { ex.input } else { &acts.post[k - 1] };
            let (gw, gb) = {
                let (lo, hi) = grads.blocks.split_at_mut(2 * k + 1);
                (&mut lo[2 * k], &mut hi[0])
            };
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                for (g, &a) in gw[o * layer.n_in..(o + 1) * layer.n_in].iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            if k > 0 {
                let mut prev = vec![0.0; layer.n_in];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (p, &w) in prev.iter_mut().zip(&layer.w[o * layer.n_in..(o + 1) * layer.n_in]) {
                        *p += d * w;
                    }
                }
                for (p, &z) in prev.iter_mut().zip(&acts.pre[k - 1]) {
                    if z <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
    }
    Ok((loss / denom, grads))
}

/// Mean masked MSE of `model` over `samples`, entries pooled.
pub fn dataset_loss(model: &MlpModel, samples: &[TrainingSample]) -> Result<f64> {
    let (mut num, mut denom) = (0.0, 0.0);
    for s in samples {
        let pred = model.forward(&s.input)?;
        for ((p, y), m) in pred.iter().zip(&s.target).zip(&s.mask) {
            num += m * (y - p) * (y - p);
            denom += m;
        }
    }
    if denom <= 0.0 {
        return Err(Error::UndefinedLoss);
    }
    Ok(num / denom)
}

/// First and second moment estimates for every parameter block.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        let z = Gradients::zeros_like(model).blocks;
        Self { m: z.clone(), v: z, t: 0 }
    }
}

/// Bias-corrected Adam update of one block; the caller advances `t` first.
pub fn adam_update(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], t: u64, cfg: &TrainConfig) {
    let bc1 = 1.0 - cfg.beta1.powi(t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(t as i32);
    for i in 0..params.len() {
        let g = grads[i] + cfg.weight_decay * params[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

pub fn adam_step(model: &mut MlpModel, grads: &Gradients, state: &mut AdamState, cfg: &TrainConfig) {
    state.t += 1;
    let t = state.t;
    for (((p, g), m), v) in model.blocks_mut().into_iter().zip(&grads.blocks).zip(&mut state.m).zip(&mut state.v) {
        adam_update(p, g, m, v, t, cfg);
    }
}

/// Patience-based stopping rule on validation loss.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: Option<usize>,
    pub best: f64,
    pub best_epoch: usize,
    since_best: usize,
}

impl EarlyStopping {
    pub fn new(patience: Option<usize>) -> Self {
        Self { patience, best: f64::INFINITY, best_epoch: 0, since_best: 0 }
    }

    /// Records the loss of `epoch` (1-based). Returns `(improved, stop)`.
    pub fn update(&mut self, epoch: usize, val_loss: f64) -> (bool, bool) {
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = epoch;
            self.since_best = 0;
            return (true, false);
        }
        self.since_best += 1;
        (false, self.patience.is_some_and(|p| self.since_best >= p))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    /// Last epoch run (1-based).
    pub stopped_epoch: usize,
    pub best_epoch: usize,
    pub best_val: f64,
    pub wall_time: f64,
}

impl TrainReport {
    /// The report with its wall time zeroed, for run-to-run comparison.
    pub fn without_timing(&self) -> Self {
        Self { wall_time: 0.0, ..self.clone() }
    }
}

/// Trains a fresh Xavier-initialized model on already-normalized samples.
///
/// Mini-batches are reshuffled every epoch from a seed derived from
/// `cfg.seed` and the epoch. The returned model holds the parameters of the
/// best validation epoch and carries `norm_stats`.
pub fn train(
    train_set: &[TrainingSample],
    val_set: &[TrainingSample],
    norm_stats: NormStats,
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    let mut model = init_xavier_dims(&LAYER_DIMS, cfg.seed);
    model.norm_stats = norm_stats;
    if let Some(s) = train_set.first() {
        model.variant = s.variant;
    }
    train_model(model, train_set, val_set, cfg)
}

/// Like [`train`] but starting from `model`.
pub fn train_model(
    mut model: MlpModel,
    train_set: &[TrainingSample],
    val_set: &[TrainingSample],
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    cfg.validate()?;
    model.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::EmptyData("training and validation sets must be non-empty".into()));
    }
    let t0 = Instant::now();
    let mut state = AdamState::new(&model);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best = model.clone();
    let mut report = TrainReport {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        stopped_epoch: 0,
        best_epoch: 0,
        best_val: f64::INFINITY,
        wall_time: 0.0,
    };
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        order.sort_unstable();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, epoch as u64)));
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<Example<'_>> = chunk.iter().map(|&i| Example::from(&train_set[i])).collect();
            let (_, grads) = backward(&model, &batch)?;
            adam_step(&mut model, &grads, &mut state, cfg);
        }
        let train_loss = dataset_loss(&model, train_set)?;
        let val_loss = dataset_loss(&model, val_set)?;
        if !(train_loss.is_finite() && val_loss.is_finite()) {
            return Err(Error::Config(format!("training diverged at epoch {epoch}")));
        }
        report.train_loss.push(train_loss);
        report.val_loss.push(val_loss);
        report.stopped_epoch = epoch;
        info!("epoch {epoch}: train {train_loss:.6e} val {val_loss:.6e}");
        let (improved, stop) = stopper.update(epoch, val_loss);
        if improved {
            best.clone_from(&model);
        }
        if stop {
            break;
        }
    }
    report.best_epoch = stopper.best_epoch;
    report.best_val = stopper.best;
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok((best, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masked_mse_examples() {
        let y = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(masked_mse(&y, &y, &[1.0; 4]).unwrap(), 0.0);
        let p = [3.0, 4.0, 5.0, 100.0];
        assert_eq!(masked_mse(&p, &y, &[1.0, 1.0, 1.0, 0.0]).unwrap(), 4.0);
        assert!(matches!(masked_mse(&p, &y, &[0.0; 4]), Err(Error::UndefinedLoss)));
    }

    #[test]
    fn first_adam_step_is_lr() {
        let cfg = TrainConfig::default();
        let (mut p, mut m, mut v) = ([0.0], [0.0], [0.0]);
        adam_update(&mut p, &[1.0], &mut m, &mut v, 1, &cfg);
        assert!((p[0] + 1e-4 / (1.0 + 1e-8)).abs() < 1e-18);
        assert!((p[0] + 9.9999e-5).abs() < 1e-9);
        let (mut q, mut m, mut v) = ([0.7], [0.0], [0.0]);
        adam_update(&mut q, &[0.0], &mut m, &mut v, 1, &cfg);
        assert_eq!(q[0], 0.7);
    }

    #[test]
    fn patience_one_stops_at_second_worsening_epoch() {
        let mut s = EarlyStopping::new(Some(1));
        assert_eq!(s.update(1, 1.0), (true, false));
        assert_eq!(s.update(2, 2.0), (false, true));
        assert_eq!(s.best_epoch, 1);
        let mut off = EarlyStopping::new(None);
        for e in 1..100 {
            assert!(!off.update(e, e as f64).1);
        }
    }

    #[test]
    fn config_validation() {
        TrainConfig::default().validate().unwrap();
        assert!(TrainConfig { patience: Some(51), ..Default::default() }.validate().is_err());
        assert!(TrainConfig { lr: 0.0, ..Default::default() }.validate().is_err());
    }
}
