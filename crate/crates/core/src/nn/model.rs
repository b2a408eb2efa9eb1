use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::DatasetEmbedding;
use crate::error::CoreError;

/// Layer shapes in fixed order: branches A (count), B (area), C
/// (centroid), D (bbox), E (compactness), then the fusion pair.
pub const ARCH: [(usize, usize); 12] = [
    (1, 8),
    (8, 4),
    (1, 8),
    (8, 4),
    (2, 16),
    (16, 8),
    (4, 32),
    (32, 16),
    (1, 8),
    (8, 4),
    (36, 16),
    (16, 8),
];

pub const N_LAYERS: usize = 12;

/// Embedding slice consumed by each branch: (start, len) into the 9-vector.
const BRANCH_SLICES: [(usize, usize); 5] = [(0, 1), (1, 1), (2, 2), (4, 4), (8, 1)];

/// Fully connected layer; weights are row-major `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Affine {
    fn init(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        // uniform +-sqrt(6 / (fan_in + fan_out))
        let bound = libm::sqrt(6.0 / (in_dim + out_dim) as f64);
        let w = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Affine {
            in_dim,
            out_dim,
            w,
            b: vec![0.0; out_dim],
        }
    }

    /// y = relu(W x + b); also returns the pre-activation.
    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        debug_assert_eq!(x.len(), self.in_dim);
        let mut pre = self.b.clone();
        for (o, pre_o) in pre.iter_mut().enumerate() {
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            for (wi, xi) in row.iter().zip(x) {
                *pre_o += wi * xi;
            }
        }
        let post = pre.iter().map(|&v| v.max(0.0)).collect();
        (pre, post)
    }
}

/// Per-layer gradient accumulator, shaped like the layer it mirrors.
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

struct LayerCache {
    input: Vec<f64>,
    pre: Vec<f64>,
}

/// The shared-weight twin network. Both twins are this single parameter
/// set; weight tying is structural.
#[derive(Debug, Clone, PartialEq)]
pub struct SiameseModel {
    pub layers: Vec<Affine>,
    pub rng_seed: u64,
}

impl SiameseModel {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = ARCH
            .iter()
            .map(|&(i, o)| Affine::init(i, o, &mut rng))
            .collect();
        SiameseModel {
            layers,
            rng_seed: seed,
        }
    }

    /// Rebuilds a model from exported layers, validating shapes.
    pub fn from_layers(layers: Vec<Affine>, seed: u64) -> Result<Self, CoreError> {
        if layers.len() != N_LAYERS {
            return Err(CoreError::ShapeMismatch(format!(
                "expected {} layers, got {}",
                N_LAYERS,
                layers.len()
            )));
        }
        for (idx, (layer, &(i, o))) in layers.iter().zip(ARCH.iter()).enumerate() {
            if layer.in_dim != i
                || layer.out_dim != o
                || layer.w.len() != i * o
                || layer.b.len() != o
            {
                return Err(CoreError::ShapeMismatch(format!(
                    "layer {idx}: expected {i}x{o}, got {}x{} (w={}, b={})",
                    layer.in_dim,
                    layer.out_dim,
                    layer.w.len(),
                    layer.b.len()
                )));
            }
        }
        Ok(SiameseModel {
            layers,
            rng_seed: seed,
        })
    }

    pub fn zero_grads(&self) -> Vec<LayerGrads> {
        self.layers
            .iter()
            .map(|l| LayerGrads {
                w: vec![0.0; l.w.len()],
                b: vec![0.0; l.b.len()],
            })
            .collect()
    }

    fn forward_cached(&self, v: &[f64; 9]) -> (Vec<LayerCache>, Vec<f64>) {
        let mut caches: Vec<LayerCache> = Vec::with_capacity(N_LAYERS);
        let mut concat: Vec<f64> = Vec::with_capacity(36);
        for (branch, &(start, len)) in BRANCH_SLICES.iter().enumerate() {
            let mut x: Vec<f64> = v[start..start + len].to_vec();
            for layer_idx in [2 * branch, 2 * branch + 1] {
                let (pre, post) = self.layers[layer_idx].forward(&x);
                caches.push(LayerCache { input: x, pre });
                x = post;
            }
            concat.extend_from_slice(&x);
        }
        let mut x = concat;
        for layer_idx in [10, 11] {
            let (pre, post) = self.layers[layer_idx].forward(&x);
            caches.push(LayerCache { input: x, pre });
            x = post;
        }
        (caches, x)
    }

    /// Feature-space image of an embedding vector (8-dimensional, >= 0).
    pub fn forward(&self, e: &DatasetEmbedding) -> Vec<f64> {
        self.forward_cached(&e.v).1
    }

    /// Clamped feature-space distance between two embeddings, in [0, 1).
    pub fn predict_distance(&self, e1: &DatasetEmbedding, e2: &DatasetEmbedding) -> f64 {
        let f1 = self.forward(e1);
        let f2 = self.forward(e2);
        let d = l2_distance(&f1, &f2);
        d / (1.0 + d)
    }

    /// Squared error of the clamped distance against a JSD target.
    pub fn loss(&self, e1: &DatasetEmbedding, e2: &DatasetEmbedding, d_jsd: f64) -> f64 {
        let diff = self.predict_distance(e1, e2) - d_jsd;
        diff * diff
    }

    /// Accumulates d(loss)/d(params) for one pair into `grads` and
    /// returns the pair loss. Gradients from both twins sum into the
    /// shared parameter set in a fixed order.
    pub fn accumulate_pair_grads(
        &self,
        v1: &[f64; 9],
        v2: &[f64; 9],
        target: f64,
        scale: f64,
        grads: &mut [LayerGrads],
    ) -> f64 {
        let (cache1, f1) = self.forward_cached(v1);
        let (cache2, f2) = self.forward_cached(v2);
        let d = l2_distance(&f1, &f2);
        let d_hat = d / (1.0 + d);
        let loss = (d_hat - target) * (d_hat - target);
        if d == 0.0 {
            // identical feature vectors: either the target is 0 (exact
            // optimum, nothing to move) or the distance head has no
            // defined direction; both cases contribute zero gradient
            return loss;
        }
        let g_dhat = 2.0 * (d_hat - target);
        let g_d = g_dhat / ((1.0 + d) * (1.0 + d));
        let grad_f1: Vec<f64> = f1
            .iter()
            .zip(&f2)
            .map(|(a, b)| scale * g_d * (a - b) / d)
            .collect();
        let grad_f2: Vec<f64> = grad_f1.iter().map(|g| -g).collect();
        self.backward_twin(&cache1, grad_f1, grads);
        self.backward_twin(&cache2, grad_f2, grads);
        loss
    }

    fn backward_twin(&self, caches: &[LayerCache], grad_out: Vec<f64>, grads: &mut [LayerGrads]) {
        // fusion layers first; caches are indexed by layer
        let mut g = grad_out;
        for layer_idx in [11usize, 10] {
            g = self.backward_layer(layer_idx, &caches[layer_idx], g, grads);
        }
        // g is now the gradient on the 36-wide concat; split per branch
        let mut offset = 0;
        for branch in 0..5 {
            let out_dim = ARCH[2 * branch + 1].1;
            let mut gb = g[offset..offset + out_dim].to_vec();
            offset += out_dim;
            for layer_idx in [2 * branch + 1, 2 * branch] {
                gb = self.backward_layer(layer_idx, &caches[layer_idx], gb, grads);
            }
        }
    }

    /// Backprop through relu(Wx + b): accumulates weight/bias grads and
    /// returns the gradient on the layer input.
    fn backward_layer(
        &self,
        layer_idx: usize,
        cache: &LayerCache,
        grad_post: Vec<f64>,
        grads: &mut [LayerGrads],
    ) -> Vec<f64> {
        let layer = &self.layers[layer_idx];
        let acc = &mut grads[layer_idx];
        let mut grad_in = vec![0.0; layer.in_dim];
        for o in 0..layer.out_dim {
            if cache.pre[o] <= 0.0 {
                continue;
            }
            let gp = grad_post[o];
            acc.b[o] += gp;
            let row = o * layer.in_dim;
            for i in 0..layer.in_dim {
                acc.w[row + i] += gp * cache.input[i];
                grad_in[i] += gp * layer.w[row + i];
            }
        }
        grad_in
    }
}

pub(crate) fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        sum += d * d;
    }
    libm::sqrt(sum)
}
