use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{NormStats, INPUT_DIM, OUTPUT_DIM};
use crate::error::{Error, Result};
use crate::planner::Variant;

/// Layer widths of the regressor.
pub const LAYER_DIMS: [usize; 4] = [INPUT_DIM, 128, 256, OUTPUT_DIM];

/// Fully connected layer; `w` is row-major `n_out x n_in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self { n_in, n_out, w: vec![0.0; n_in * n_out], b: vec![0.0; n_out] }
    }

    /// `out = W x + b`.
    #[inline]
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_in);
        let n = self.n_in;
        // Four rows at a time so each load of `x` is reused.
        let mut rows = self.w.chunks_exact(4 * n);
        let mut outs = out.chunks_exact_mut(4);
        let mut bias = self.b.chunks_exact(4);
        for ((block, o), b) in rows.by_ref().zip(outs.by_ref()).zip(bias.by_ref()) {
            let (r0, rest) = block.split_at(n);
            let (r1, rest) = rest.split_at(n);
            let (r2, r3) = rest.split_at(n);
            let mut acc = [0.0f64; 4];
            for i in 0..n {
                let xi = x[i];
                acc[0] += r0[i] * xi;
                acc[1] += r1[i] * xi;
                acc[2] += r2[i] * xi;
                acc[3] += r3[i] * xi;
            }
            for k in 0..4 {
                o[k] = acc[k] + b[k];
            }
        }
        for ((o, row), b) in outs.into_remainder().iter_mut().zip(rows.remainder().chunks_exact(n)).zip(bias.remainder()) {
            *o = dot(row, x) + b;
        }
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn relu_in_place(v: &mut [f64]) {
    for x in v {
        *x = x.max(0.0);
    }
}

/// Feedforward ReLU network with its bound normalization statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Dense>,
    pub norm_stats: NormStats,
    pub variant: Variant,
}

/// Activations kept for the backward pass: `pre[k]` and `post[k]` for each
/// hidden layer, then the output.
#[derive(Clone, Debug, Default)]
pub struct Activations {
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

impl MlpModel {
    /// All-zero model with the given layer widths and identity normalization.
    pub fn zeros(dims: &[usize]) -> Self {
        let layers = dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect();
        let (n_in, n_out) = (dims[0], dims[dims.len() - 1]);
        Self {
            layers,
            norm_stats: NormStats {
                input_mean: vec![0.0; n_in],
                input_std: vec![1.0; n_in],
                target_mean: vec![0.0; n_out],
                target_std: vec![1.0; n_out],
            },
            variant: Variant::default(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].n_in];
        d.extend(self.layers.iter().map(|l| l.n_out));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].n_out
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Parameter blocks in order W1, b1, W2, b2, ...
    pub fn blocks(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| [l.w.as_slice(), l.b.as_slice()]).collect()
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers.iter_mut().flat_map(|l| [l.w.as_mut_slice(), l.b.as_mut_slice()]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Shape("model has no layers".into()));
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].n_out != pair[1].n_in {
                return Err(Error::Shape(format!("layer {} output {} != layer {} input {}", i + 1, pair[0].n_out, i + 2, pair[1].n_in)));
            }
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.w.len() != l.n_in * l.n_out || l.b.len() != l.n_out {
                return Err(Error::Shape(format!("layer {} parameter count does not match {}x{}", i + 1, l.n_out, l.n_in)));
            }
            if !l.w.iter().chain(&l.b).all(|v| v.is_finite()) {
                return Err(Error::Shape(format!("layer {} has non-finite parameters", i + 1)));
            }
        }
        let ns = &self.norm_stats;
        if ns.input_mean.len() != self.input_dim()
            || ns.input_std.len() != self.input_dim()
            || ns.target_mean.len() != self.output_dim()
            || ns.target_std.len() != self.output_dim()
        {
            return Err(Error::Shape("normalization statistics do not match the layer widths".into()));
        }
        Ok(())
    }

    /// Network output for a normalized input; no activation on the last layer.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!("input has {} entries, expected {}", x.len(), self.input_dim())));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let mut cur = x.to_vec();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.n_out];
            layer.apply(&cur, &mut next);
            if k < last {
                relu_in_place(&mut next);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Forward pass that keeps every intermediate for backpropagation.
    pub(crate) fn forward_cached(&self, x: &[f64], acts: &mut Activations) {
        let last = self.layers.len() - 1;
        acts.pre.resize(last, Vec::new());
        acts.post.resize(last, Vec::new());
        for k in 0..=last {
            let layer = &self.layers[k];
            let input: &[f64] = if k == 0 { x } else { &acts.post[k - 1] };
            let mut z = vec![0.0; layer.n_out];
            layer.apply(input, &mut z);
            if k < last {
                let mut a = z.clone();
                relu_in_place(&mut a);
                acts.pre[k] = z;
                acts.post[k] = a;
            } else {
                acts.output = z;
            }
        }
    }
}

/// Xavier-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
pub fn init_xavier(seed: u64) -> MlpModel {
    init_xavier_dims(&LAYER_DIMS, seed)
}

pub fn init_xavier_dims(dims: &[usize], seed: u64) -> MlpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = MlpModel::zeros(dims);
    for layer in &mut model.layers {
        let bound = (6.0 / (layer.n_in + layer.n_out) as f64).sqrt();
        for w in &mut layer.w {
            *w = rng.gen_range(-bound..=bound);
        }
    }
    model
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xavier_bounds_and_zero_bias() {
        let m = init_xavier(5);
        let bound = (6.0f64 / 136.0).sqrt();
        assert!((bound - 0.2100).abs() < 1e-4);
        assert!(m.layers[0].w.iter().all(|w| w.abs() <= bound));
        assert!(m.layers.iter().all(|l| l.b.iter().all(|&b| b == 0.0)));
        assert_eq!(m, init_xavier(5));
        assert_ne!(m.layers[0].w, init_xavier(6).layers[0].w);
        assert_eq!(m.dims(), LAYER_DIMS.to_vec());
        m.validate().unwrap();
    }

    #[test]
    fn zero_model_and_bias_passthrough() {
        let mut m = MlpModel::zeros(&LAYER_DIMS);
        assert!(m.forward(&[0.3; 8]).unwrap().iter().all(|&y| y == 0.0));
        m.layers[2].b.fill(1.25);
        assert!(m.forward(&[-2.0; 8]).unwrap().iter().all(|&y| y == 1.25));
        assert!(matches!(m.forward(&[f64::NAN; 8]), Err(Error::NonFiniteInput)));
        assert!(matches!(m.forward(&[0.0; 7]), Err(Error::Shape(_))));
    }

    #[test]
    fn dot_handles_remainders() {
        let a: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let b = vec![2.0; 7];
        assert_eq!(dot(&a, &b), 42.0);
    }
}
