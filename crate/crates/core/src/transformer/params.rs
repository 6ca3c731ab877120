//! Parameter container, seed-keyed Xavier-uniform initialization, and the
//! fixed tensor enumeration shared by the optimizer and the checkpoint
//! format.

use super::ModelConfig;
use crate::matmul::Mat;
use crate::rng::{domain, stream};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub ln1_gamma: Vec<f64>,
    pub ln1_beta: Vec<f64>,
    pub wq: Mat,
    pub bq: Vec<f64>,
    pub wk: Mat,
    pub bk: Vec<f64>,
    pub wv: Mat,
    pub bv: Vec<f64>,
    pub wo: Mat,
    pub bo: Vec<f64>,
    pub ln2_gamma: Vec<f64>,
    pub ln2_beta: Vec<f64>,
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Mat,
    pub b2: Vec<f64>,
}

/// All weights of the regressor. Also serves as the gradient and Adam
/// moment container via [`TransformerParams::zeros_like`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransformerParams {
    pub config: ModelConfig,
    pub seed: u64,
    pub epoch: usize,
    pub embed_w: Mat,
    pub embed_b: Vec<f64>,
    pub layers: Vec<LayerParams>,
    pub final_gamma: Vec<f64>,
    pub final_beta: Vec<f64>,
    pub kp_head_w: Mat,
    pub kp_head_b: Vec<f64>,
    pub pose_head_w: Mat,
    pub pose_head_b: Vec<f64>,
}

impl TransformerParams {
    /// Xavier-uniform weights, zero biases, unit layer-norm scales;
    /// deterministic in `seed`.
    pub fn init(config: ModelConfig, seed: u64) -> Self {
        let mut rng = stream(seed, domain::PARAM_INIT, 0);
        let d = config.hidden_dim;
        let f = config.feature_len();
        let ffn = config.ffn_dim();

        let mut params = Self {
            config,
            seed,
            epoch: 0,
            embed_w: xavier(f, d, &mut rng),
            embed_b: vec![0.0; d],
            layers: (0..config.layers)
                .map(|_| LayerParams {
                    ln1_gamma: vec![1.0; d],
                    ln1_beta: vec![0.0; d],
                    wq: xavier(d, d, &mut rng),
                    bq: vec![0.0; d],
                    wk: xavier(d, d, &mut rng),
                    bk: vec![0.0; d],
                    wv: xavier(d, d, &mut rng),
                    bv: vec![0.0; d],
                    wo: xavier(d, d, &mut rng),
                    bo: vec![0.0; d],
                    ln2_gamma: vec![1.0; d],
                    ln2_beta: vec![0.0; d],
                    w1: xavier(d, ffn, &mut rng),
                    b1: vec![0.0; ffn],
                    w2: xavier(ffn, d, &mut rng),
                    b2: vec![0.0; d],
                })
                .collect(),
            final_gamma: vec![1.0; d],
            final_beta: vec![0.0; d],
            kp_head_w: xavier(d, 3, &mut rng),
            kp_head_b: vec![0.0; 3],
            pose_head_w: xavier(d, config.pose_dim(), &mut rng),
            pose_head_b: vec![0.0; config.pose_dim()],
        };
        params.epoch = 0;
        params
    }

    /// Same shapes, all zeros; the gradient/moment container.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.for_each_tensor_mut(|_, t| t.fill(0.0));
        z
    }

    /// Walks every tensor in the documented checkpoint order.
    pub fn for_each_tensor<F: FnMut(&str, &[f64])>(&self, mut f: F) {
        f("embed_w", &self.embed_w.data);
        f("embed_b", &self.embed_b);
        for (i, l) in self.layers.iter().enumerate() {
            let name = |field: &str| format!("layer{i}.{field}");
            f(&name("ln1_gamma"), &l.ln1_gamma);
            f(&name("ln1_beta"), &l.ln1_beta);
            f(&name("wq"), &l.wq.data);
            f(&name("bq"), &l.bq);
            f(&name("wk"), &l.wk.data);
            f(&name("bk"), &l.bk);
            f(&name("wv"), &l.wv.data);
            f(&name("bv"), &l.bv);
            f(&name("wo"), &l.wo.data);
            f(&name("bo"), &l.bo);
            f(&name("ln2_gamma"), &l.ln2_gamma);
            f(&name("ln2_beta"), &l.ln2_beta);
            f(&name("w1"), &l.w1.data);
            f(&name("b1"), &l.b1);
            f(&name("w2"), &l.w2.data);
            f(&name("b2"), &l.b2);
        }
        f("final_gamma", &self.final_gamma);
        f("final_beta", &self.final_beta);
        f("kp_head_w", &self.kp_head_w.data);
        f("kp_head_b", &self.kp_head_b);
        f("pose_head_w", &self.pose_head_w.data);
        f("pose_head_b", &self.pose_head_b);
    }

    pub fn for_each_tensor_mut<F: FnMut(&str, &mut [f64])>(&mut self, mut f: F) {
        f("embed_w", &mut self.embed_w.data);
        f("embed_b", &mut self.embed_b);
        for (i, l) in self.layers.iter_mut().enumerate() {
            let prefix = format!("layer{i}.");
            f(&format!("{prefix}ln1_gamma"), &mut l.ln1_gamma);
            f(&format!("{prefix}ln1_beta"), &mut l.ln1_beta);
            f(&format!("{prefix}wq"), &mut l.wq.data);
            f(&format!("{prefix}bq"), &mut l.bq);
            f(&format!("{prefix}wk"), &mut l.wk.data);
            f(&format!("{prefix}bk"), &mut l.bk);
            f(&format!("{prefix}wv"), &mut l.wv.data);
            f(&format!("{prefix}bv"), &mut l.bv);
            f(&format!("{prefix}wo"), &mut l.wo.data);
            f(&format!("{prefix}bo"), &mut l.bo);
            f(&format!("{prefix}ln2_gamma"), &mut l.ln2_gamma);
            f(&format!("{prefix}ln2_beta"), &mut l.ln2_beta);
            f(&format!("{prefix}w1"), &mut l.w1.data);
            f(&format!("{prefix}b1"), &mut l.b1);
            f(&format!("{prefix}w2"), &mut l.w2.data);
            f(&format!("{prefix}b2"), &mut l.b2);
        }
        f("final_gamma", &mut self.final_gamma);
        f("final_beta", &mut self.final_beta);
        f("kp_head_w", &mut self.kp_head_w.data);
        f("kp_head_b", &mut self.kp_head_b);
        f("pose_head_w", &mut self.pose_head_w.data);
        f("pose_head_b", &mut self.pose_head_b);
    }

    pub fn tensor_count(&self) -> usize {
        let mut n = 0;
        self.for_each_tensor(|_, _| n += 1);
        n
    }

    /// `self += other`, tensor by tensor.
    pub fn add_assign(&mut self, other: &Self) {
        let mut flat: Vec<&[f64]> = Vec::new();
        other.for_each_tensor(|_, t| flat.push(t));
        let mut i = 0;
        self.for_each_tensor_mut(|_, t| {
            for (a, b) in t.iter_mut().zip(flat[i]) {
                *a += b;
            }
            i += 1;
        });
    }

    pub fn scale(&mut self, s: f64) {
        self.for_each_tensor_mut(|_, t| {
            for v in t {
                *v *= s;
            }
        });
    }

    pub fn all_finite(&self) -> bool {
        let mut ok = true;
        self.for_each_tensor(|_, t| ok &= t.iter().all(|v| v.is_finite()));
        ok
    }
}

fn xavier(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Mat {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Mat::from_vec(
        fan_in,
        fan_out,
        (0..fan_in * fan_out)
            .map(|_| rng.random_range(-limit..limit))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ModelConfig {
        ModelConfig {
            layers: 2,
            hidden_dim: 32,
            heads: 4,
            ..ModelConfig::full(5)
        }
    }

    #[test]
    fn init_is_deterministic_in_seed() {
        let a = TransformerParams::init(config(), 7);
        let b = TransformerParams::init(config(), 7);
        assert_eq!(a, b);
        let c = TransformerParams::init(config(), 8);
        assert_ne!(a, c);
    }

    #[test]
    fn init_is_finite_with_unit_layernorm() {
        let p = TransformerParams::init(config(), 7);
        assert!(p.all_finite());
        assert!(p.layers[0].ln1_gamma.iter().all(|&g| g == 1.0));
        assert!(p.embed_b.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn tensor_walk_covers_the_same_set_mutably_and_immutably() {
        let mut p = TransformerParams::init(config(), 7);
        let mut names = Vec::new();
        p.for_each_tensor(|n, _| names.push(n.to_string()));
        let mut names_mut = Vec::new();
        p.for_each_tensor_mut(|n, _| names_mut.push(n.to_string()));
        assert_eq!(names, names_mut);
        assert_eq!(names.len(), 2 + 2 * 16 + 2 + 4);
    }
}
