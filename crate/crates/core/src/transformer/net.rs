//! Forward pass and hand-written reverse-mode backward pass.
//!
//! Pre-norm blocks: `h += Wo·attn(LN1(h))`, then `h += W2·gelu(W1·LN2(h))`,
//! a final layer norm, and two linear heads: a per-keypoint-token 3D head
//! and a pose head on the query token. Attention is block-diagonal per
//! object (13 tokens attend only within their object). Head outputs are in
//! network units; translation and keypoint outputs are interpreted as
//! meters and scaled to mm by [`NetworkOutput`].

use super::params::{LayerParams, TransformerParams};
use super::tokenize::TOKENS_PER_OBJECT;
use super::{ModelConfig, RotationMode, TransformerError};
use crate::geometry::{matrix_to_rot6d, GeometryError};
use crate::matmul::{gemm, Mat};
use crate::{Pose7D, KEYPOINT_COUNT};

const LN_EPS: f64 = 1e-5;
/// Head outputs are meters; world quantities are mm.
pub const OUTPUT_SCALE_MM: f64 = 1000.0;

/// Raw pose head output split into its semantic parts.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseRaw {
    pub translation_mm: [f64; 3],
    /// 3 (axis-angle) or 6 (continuous) rotation values, unscaled.
    pub rotation: Vec<f64>,
    pub articulation: f64,
}

impl PoseRaw {
    /// Interprets the raw output as a `Pose7D`. Degenerate 6-value
    /// rotations go through the regularized orthonormalization, so this is
    /// total.
    pub fn to_pose7d(&self, mode: RotationMode) -> Result<Pose7D, GeometryError> {
        let rotation6 = match mode {
            RotationMode::SixD => {
                let r6: [f64; 6] = self.rotation.clone().try_into().map_err(|_| {
                    GeometryError::DegenerateRotation
                })?;
                let (m, _) = crate::geometry::rot6d_forward_safe(&r6);
                matrix_to_rot6d(m.matrix())?
            }
            RotationMode::AxisAngle3 => {
                let aa: [f64; 3] = self.rotation.clone().try_into().map_err(|_| {
                    GeometryError::DegenerateRotation
                })?;
                let m = crate::geometry::axis_angle_to_matrix(&aa);
                matrix_to_rot6d(m.matrix())?
            }
        };
        Ok(Pose7D::new(self.translation_mm, rotation6, self.articulation))
    }
}

/// Batched inference output, one entry per object.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkOutput {
    /// Predicted 3D keypoints, mm; `object × keypoint` order.
    pub keypoints3d_mm: Vec<[[f64; 3]; KEYPOINT_COUNT]>,
    pub poses: Vec<PoseRaw>,
}

/// Per-layer activations cached for the backward pass.
pub(super) struct LayerCache {
    ln1_xhat: Mat,
    ln1_rstd: Vec<f64>,
    a1: Mat,
    q: Mat,
    k: Mat,
    v: Mat,
    /// Softmax rows, `object × head × query × key`.
    attn_p: Vec<f64>,
    attn_concat: Mat,
    ln2_xhat: Mat,
    ln2_rstd: Vec<f64>,
    a2: Mat,
    f1: Mat,
    g: Mat,
}

pub(super) struct ForwardCache {
    pub tokens: Mat,
    layers: Vec<LayerCache>,
    final_xhat: Mat,
    final_rstd: Vec<f64>,
    kp_in: Mat,
    pose_in: Mat,
    pub batch: usize,
}

/// Raw head outputs: keypoint head `(batch·12) × 3`, pose head
/// `batch × pose_dim`.
pub(super) struct RawOutputs {
    pub kp_raw: Mat,
    pub pose_raw: Mat,
}

/// Inference entry point.
pub fn forward(
    params: &TransformerParams,
    tokens: &Mat,
) -> Result<NetworkOutput, TransformerError> {
    let (raw, cache) = forward_cached(params, tokens)?;
    Ok(assemble_output(&params.config, &raw, cache.batch))
}

pub(super) fn assemble_output(
    config: &ModelConfig,
    raw: &RawOutputs,
    batch: usize,
) -> NetworkOutput {
    let mut keypoints3d_mm = Vec::with_capacity(batch);
    let mut poses = Vec::with_capacity(batch);
    let rd = config.rotation_mode.dim();
    for b in 0..batch {
        let mut kps = [[0.0; 3]; KEYPOINT_COUNT];
        for (k, kp) in kps.iter_mut().enumerate() {
            let row = raw.kp_raw.row(b * KEYPOINT_COUNT + k);
            *kp = [
                row[0] * OUTPUT_SCALE_MM,
                row[1] * OUTPUT_SCALE_MM,
                row[2] * OUTPUT_SCALE_MM,
            ];
        }
        keypoints3d_mm.push(kps);
        let row = raw.pose_raw.row(b);
        poses.push(PoseRaw {
            translation_mm: [
                row[0] * OUTPUT_SCALE_MM,
                row[1] * OUTPUT_SCALE_MM,
                row[2] * OUTPUT_SCALE_MM,
            ],
            rotation: row[3..3 + rd].to_vec(),
            articulation: row[3 + rd],
        });
    }
    NetworkOutput {
        keypoints3d_mm,
        poses,
    }
}

pub(super) fn forward_cached(
    params: &TransformerParams,
    tokens: &Mat,
) -> Result<(RawOutputs, ForwardCache), TransformerError> {
    let config = &params.config;
    let t = TOKENS_PER_OBJECT;
    if tokens.rows % t != 0 {
        return Err(TransformerError::ShapeMismatch(format!(
            "token rows {} not a multiple of {t}",
            tokens.rows
        )));
    }
    if tokens.cols != config.feature_len() {
        return Err(TransformerError::ShapeMismatch(format!(
            "feature length {} != configured {}",
            tokens.cols,
            config.feature_len()
        )));
    }
    let batch = tokens.rows / t;
    let d = config.hidden_dim;

    let mut h = linear(tokens, &params.embed_w, &params.embed_b);
    let mut layers = Vec::with_capacity(config.layers);
    for layer in &params.layers {
        let (next, cache) = layer_forward(config, layer, h, batch);
        layers.push(cache);
        h = next;
    }

    let (y, final_xhat, final_rstd) =
        layer_norm(&h, &params.final_gamma, &params.final_beta);

    // Gather keypoint-token and pose-token rows.
    let mut kp_in = Mat::zeros(batch * KEYPOINT_COUNT, d);
    let mut pose_in = Mat::zeros(batch, d);
    for b in 0..batch {
        for k in 0..KEYPOINT_COUNT {
            kp_in
                .row_mut(b * KEYPOINT_COUNT + k)
                .copy_from_slice(y.row(b * t + k));
        }
        pose_in.row_mut(b).copy_from_slice(y.row(b * t + KEYPOINT_COUNT));
    }
    let kp_raw = linear(&kp_in, &params.kp_head_w, &params.kp_head_b);
    let pose_raw = linear(&pose_in, &params.pose_head_w, &params.pose_head_b);

    // The final-LN input is recoverable from the last layer cache, so only
    // the normalized activations are kept.
    Ok((
        RawOutputs { kp_raw, pose_raw },
        ForwardCache {
            tokens: tokens.clone(),
            layers,
            final_xhat,
            final_rstd,
            kp_in,
            pose_in,
            batch,
        },
    ))
}

/// Accumulates parameter gradients for the given head cotangents into
/// `grads` and returns nothing else; `grads` must be zeroed or hold partial
/// sums from other records.
pub(super) fn backward(
    params: &TransformerParams,
    cache: &ForwardCache,
    d_kp_raw: &Mat,
    d_pose_raw: &Mat,
    grads: &mut TransformerParams,
) {
    let config = &params.config;
    let t = TOKENS_PER_OBJECT;
    let batch = cache.batch;
    let d = config.hidden_dim;

    // Head backward.
    let d_kp_in = linear_backward(
        &cache.kp_in,
        &params.kp_head_w,
        d_kp_raw,
        &mut grads.kp_head_w,
        &mut grads.kp_head_b,
    );
    let d_pose_in = linear_backward(
        &cache.pose_in,
        &params.pose_head_w,
        d_pose_raw,
        &mut grads.pose_head_w,
        &mut grads.pose_head_b,
    );

    // Scatter head cotangents back onto token rows.
    let mut d_y = Mat::zeros(batch * t, d);
    for b in 0..batch {
        for k in 0..KEYPOINT_COUNT {
            d_y.row_mut(b * t + k)
                .copy_from_slice(d_kp_in.row(b * KEYPOINT_COUNT + k));
        }
        d_y.row_mut(b * t + KEYPOINT_COUNT)
            .copy_from_slice(d_pose_in.row(b));
    }

    let mut d_h = layer_norm_backward(
        &cache.final_xhat,
        &cache.final_rstd,
        &params.final_gamma,
        &d_y,
        &mut grads.final_gamma,
        &mut grads.final_beta,
    );

    for (li, layer) in params.layers.iter().enumerate().rev() {
        let lc = &cache.layers[li];
        let lg = &mut grads.layers[li];
        d_h = layer_backward(config, layer, lc, lg, d_h, batch);
    }

    // Embedding backward.
    gemm(&cache.tokens, true, &d_h, false, &mut grads.embed_w, 1.0);
    accumulate_bias(&d_h, &mut grads.embed_b);
}

fn layer_forward(
    config: &ModelConfig,
    layer: &LayerParams,
    h_in: Mat,
    batch: usize,
) -> (Mat, LayerCache) {
    let t = TOKENS_PER_OBJECT;
    let heads = config.heads;
    let dh = config.head_dim();
    let scale = 1.0 / (dh as f64).sqrt();

    let (a1, ln1_xhat, ln1_rstd) = layer_norm(&h_in, &layer.ln1_gamma, &layer.ln1_beta);
    let q = linear(&a1, &layer.wq, &layer.bq);
    let k = linear(&a1, &layer.wk, &layer.bk);
    let v = linear(&a1, &layer.wv, &layer.bv);

    let mut attn_p = vec![0.0; batch * heads * t * t];
    let mut attn_concat = Mat::zeros(h_in.rows, config.hidden_dim);
    for b in 0..batch {
        for head in 0..heads {
            let off = head * dh;
            let p_base = (b * heads + head) * t * t;
            for i in 0..t {
                let qi = &q.row(b * t + i)[off..off + dh];
                let row = &mut attn_p[p_base + i * t..p_base + (i + 1) * t];
                let mut max = f64::NEG_INFINITY;
                for (j, slot) in row.iter_mut().enumerate() {
                    let kj = &k.row(b * t + j)[off..off + dh];
                    let s: f64 = qi.iter().zip(kj).map(|(a, b)| a * b).sum::<f64>() * scale;
                    *slot = s;
                    if s > max {
                        max = s;
                    }
                }
                let mut sum = 0.0;
                for slot in row.iter_mut() {
                    *slot = (*slot - max).exp();
                    sum += *slot;
                }
                let inv = 1.0 / sum;
                for slot in row.iter_mut() {
                    *slot *= inv;
                }
            }
            for i in 0..t {
                let p_row = &attn_p[p_base + i * t..p_base + (i + 1) * t];
                let out_row = attn_concat.row_mut(b * t + i);
                for (j, &pij) in p_row.iter().enumerate() {
                    let vj = &v.row(b * t + j)[off..off + dh];
                    for (o, &vv) in out_row[off..off + dh].iter_mut().zip(vj) {
                        *o += pij * vv;
                    }
                }
            }
        }
    }

    let o = linear(&attn_concat, &layer.wo, &layer.bo);
    let mut h_mid = h_in;
    h_mid.add_assign(&o);

    let (a2, ln2_xhat, ln2_rstd) = layer_norm(&h_mid, &layer.ln2_gamma, &layer.ln2_beta);
    let f1 = linear(&a2, &layer.w1, &layer.b1);
    let mut g = f1.clone();
    for v in g.data.iter_mut() {
        *v = gelu(*v);
    }
    let f2 = linear(&g, &layer.w2, &layer.b2);
    let mut h_out = h_mid;
    h_out.add_assign(&f2);

    (
        h_out,
        LayerCache {
            ln1_xhat,
            ln1_rstd,
            a1,
            q,
            k,
            v,
            attn_p,
            attn_concat,
            ln2_xhat,
            ln2_rstd,
            a2,
            f1,
            g,
        },
    )
}

fn layer_backward(
    config: &ModelConfig,
    layer: &LayerParams,
    lc: &LayerCache,
    lg: &mut LayerParams,
    d_h_out: Mat,
    batch: usize,
) -> Mat {
    let t = TOKENS_PER_OBJECT;
    let heads = config.heads;
    let dh = config.head_dim();
    let scale = 1.0 / (dh as f64).sqrt();

    // FFN branch: h_out = h_mid + W2·gelu(W1·a2).
    let d_f2 = &d_h_out;
    let d_g = linear_backward(&lc.g, &layer.w2, d_f2, &mut lg.w2, &mut lg.b2);
    let mut d_f1 = d_g;
    for (dv, &x) in d_f1.data.iter_mut().zip(&lc.f1.data) {
        *dv *= gelu_grad(x);
    }
    let d_a2 = linear_backward(&lc.a2, &layer.w1, &d_f1, &mut lg.w1, &mut lg.b1);
    let mut d_h_mid = layer_norm_backward(
        &lc.ln2_xhat,
        &lc.ln2_rstd,
        &layer.ln2_gamma,
        &d_a2,
        &mut lg.ln2_gamma,
        &mut lg.ln2_beta,
    );
    d_h_mid.add_assign(&d_h_out);

    // Attention branch: h_mid = h_in + Wo·attn.
    let d_o = &d_h_mid;
    let d_attn = linear_backward(&lc.attn_concat, &layer.wo, d_o, &mut lg.wo, &mut lg.bo);

    let mut d_q = Mat::zeros(d_attn.rows, config.hidden_dim);
    let mut d_k = Mat::zeros(d_attn.rows, config.hidden_dim);
    let mut d_v = Mat::zeros(d_attn.rows, config.hidden_dim);
    for b in 0..batch {
        for head in 0..heads {
            let off = head * dh;
            let p_base = (b * heads + head) * t * t;
            // dV and dP.
            let mut d_p = vec![0.0; t * t];
            for i in 0..t {
                let d_out = &d_attn.row(b * t + i)[off..off + dh];
                let p_row = &lc.attn_p[p_base + i * t..p_base + (i + 1) * t];
                for j in 0..t {
                    let vj = &lc.v.row(b * t + j)[off..off + dh];
                    d_p[i * t + j] = d_out.iter().zip(vj).map(|(a, b)| a * b).sum();
                    let pij = p_row[j];
                    for (dvv, &d_o_val) in d_v.row_mut(b * t + j)[off..off + dh]
                        .iter_mut()
                        .zip(d_out)
                    {
                        *dvv += pij * d_o_val;
                    }
                }
            }
            // Softmax backward per row, then dq/dk.
            for i in 0..t {
                let p_row = &lc.attn_p[p_base + i * t..p_base + (i + 1) * t];
                let d_p_row = &d_p[i * t..(i + 1) * t];
                let dot: f64 = p_row.iter().zip(d_p_row).map(|(p, dp)| p * dp).sum();
                for j in 0..t {
                    let d_s = p_row[j] * (d_p_row[j] - dot) * scale;
                    let kj = &lc.k.row(b * t + j)[off..off + dh];
                    let qi = &lc.q.row(b * t + i)[off..off + dh];
                    for ((dq, &kv), (dk, &qv)) in d_q.row_mut(b * t + i)[off..off + dh]
                        .iter_mut()
                        .zip(kj)
                        .zip(d_k.row_mut(b * t + j)[off..off + dh].iter_mut().zip(qi))
                    {
                        *dq += d_s * kv;
                        *dk += d_s * qv;
                    }
                }
            }
        }
    }

    let mut d_a1 = linear_backward(&lc.a1, &layer.wq, &d_q, &mut lg.wq, &mut lg.bq);
    let d_a1_k = linear_backward(&lc.a1, &layer.wk, &d_k, &mut lg.wk, &mut lg.bk);
    let d_a1_v = linear_backward(&lc.a1, &layer.wv, &d_v, &mut lg.wv, &mut lg.bv);
    d_a1.add_assign(&d_a1_k);
    d_a1.add_assign(&d_a1_v);

    let mut d_h_in = layer_norm_backward(
        &lc.ln1_xhat,
        &lc.ln1_rstd,
        &layer.ln1_gamma,
        &d_a1,
        &mut lg.ln1_gamma,
        &mut lg.ln1_beta,
    );
    d_h_in.add_assign(&d_h_mid);
    d_h_in
}

/// `y = x·w + b` with the bias broadcast over rows.
fn linear(x: &Mat, w: &Mat, b: &[f64]) -> Mat {
    let mut y = Mat::zeros(x.rows, w.cols);
    gemm(x, false, w, false, &mut y, 0.0);
    for r in 0..y.rows {
        for (v, add) in y.row_mut(r).iter_mut().zip(b) {
            *v += add;
        }
    }
    y
}

/// Accumulates `dW += xᵀ·dy`, `db += colsum(dy)` and returns `dx = dy·wᵀ`.
fn linear_backward(x: &Mat, w: &Mat, d_y: &Mat, d_w: &mut Mat, d_b: &mut [f64]) -> Mat {
    gemm(x, true, d_y, false, d_w, 1.0);
    accumulate_bias(d_y, d_b);
    let mut d_x = Mat::zeros(x.rows, w.rows);
    gemm(d_y, false, w, true, &mut d_x, 0.0);
    d_x
}

fn accumulate_bias(d_y: &Mat, d_b: &mut [f64]) {
    for r in 0..d_y.rows {
        for (acc, v) in d_b.iter_mut().zip(d_y.row(r)) {
            *acc += v;
        }
    }
}

/// Row-wise layer norm; returns the output, the normalized rows, and the
/// per-row reciprocal standard deviation.
fn layer_norm(x: &Mat, gamma: &[f64], beta: &[f64]) -> (Mat, Mat, Vec<f64>) {
    let d = x.cols;
    let mut out = Mat::zeros(x.rows, d);
    let mut xhat = Mat::zeros(x.rows, d);
    let mut rstds = Vec::with_capacity(x.rows);
    for r in 0..x.rows {
        let row = x.row(r);
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
        let rstd = 1.0 / (var + LN_EPS).sqrt();
        rstds.push(rstd);
        let xh = xhat.row_mut(r);
        let o = out.row_mut(r);
        for i in 0..d {
            xh[i] = (row[i] - mean) * rstd;
            o[i] = gamma[i] * xh[i] + beta[i];
        }
    }
    (out, xhat, rstds)
}

/// Standard layer-norm backward; accumulates `dγ`, `dβ` and returns `dx`.
fn layer_norm_backward(
    xhat: &Mat,
    rstd: &[f64],
    gamma: &[f64],
    d_y: &Mat,
    d_gamma: &mut [f64],
    d_beta: &mut [f64],
) -> Mat {
    let d = xhat.cols;
    let mut d_x = Mat::zeros(xhat.rows, d);
    for r in 0..xhat.rows {
        let xh = xhat.row(r);
        let dy = d_y.row(r);
        let mut mean_gd = 0.0;
        let mut mean_gdx = 0.0;
        for i in 0..d {
            let gd = gamma[i] * dy[i];
            mean_gd += gd;
            mean_gdx += gd * xh[i];
            d_gamma[i] += dy[i] * xh[i];
            d_beta[i] += dy[i];
        }
        mean_gd /= d as f64;
        mean_gdx /= d as f64;
        let dx = d_x.row_mut(r);
        for i in 0..d {
            let gd = gamma[i] * dy[i];
            dx[i] = rstd[r] * (gd - mean_gd - xh[i] * mean_gdx);
        }
    }
    d_x
}

const GELU_C: f64 = 0.7978845608028654; // sqrt(2/π)
const GELU_A: f64 = 0.044715;

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let inner = GELU_C * (x + GELU_A * x * x * x);
    let t = inner.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::make_instrument_set;
    use crate::synth::{observe, PoseSampler};
    use crate::CameraRig;

    fn setup(config: ModelConfig) -> (TransformerParams, Mat) {
        let models = make_instrument_set(7, config.class_count);
        let rig = CameraRig::vr_default();
        let pose = PoseSampler::new(3).sample(0, &models[1], &rig).unwrap();
        let (obs, _) = observe(&pose, &models[1], &rig).unwrap();
        let tokens = super::super::tokenize(&obs, &config, &rig).unwrap();
        (TransformerParams::init(config, 11), tokens)
    }

    #[test]
    fn zero_params_give_zero_pose_output() {
        let config = ModelConfig::full(4);
        let (params, tokens) = setup(config);
        let zeroed = params.zeros_like();
        let out = forward(&zeroed, &tokens).unwrap();
        assert_eq!(out.poses.len(), 1);
        assert_eq!(out.poses[0].translation_mm, [0.0; 3]);
        assert!(out.poses[0].rotation.iter().all(|&r| r == 0.0));
        assert_eq!(out.poses[0].articulation, 0.0);
        assert!(out.keypoints3d_mm[0].iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn outputs_are_finite_and_shaped() {
        for config in [
            ModelConfig::full(4),
            ModelConfig {
                rotation_mode: RotationMode::AxisAngle3,
                ..ModelConfig::full(4)
            },
        ] {
            let (params, tokens) = setup(config);
            let out = forward(&params, &tokens).unwrap();
            assert_eq!(out.poses[0].rotation.len(), config.rotation_mode.dim());
            assert!(out.poses[0].translation_mm.iter().all(|v| v.is_finite()));
            for kp in &out.keypoints3d_mm[0] {
                assert!(kp.iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn keypoint_token_permutation_is_equivariant() {
        let config = ModelConfig::full(4);
        let (params, tokens) = setup(config);
        let base = forward(&params, &tokens).unwrap();

        // Permute the 12 keypoint token rows (one-hots travel with them).
        let perm: [usize; KEYPOINT_COUNT] = [5, 2, 9, 0, 11, 7, 1, 4, 10, 3, 8, 6];
        let mut permuted = tokens.clone();
        for (dst, &src) in perm.iter().enumerate() {
            permuted.row_mut(dst).copy_from_slice(tokens.row(src));
        }
        let out = forward(&params, &permuted).unwrap();

        for (a, b) in base.poses[0]
            .translation_mm
            .iter()
            .zip(&out.poses[0].translation_mm)
        {
            assert!((a - b).abs() < 1e-9, "pose changed under permutation");
        }
        for (dst, &src) in perm.iter().enumerate() {
            for c in 0..3 {
                assert!(
                    (base.keypoints3d_mm[0][src][c] - out.keypoints3d_mm[0][dst][c]).abs()
                        < 1e-9,
                    "keypoint outputs did not follow their tokens"
                );
            }
        }
    }

    #[test]
    fn batched_forward_matches_single() {
        let config = ModelConfig::full(4);
        let models = make_instrument_set(7, 4);
        let rig = CameraRig::vr_default();
        let sampler = PoseSampler::new(9);
        let observations: Vec<_> = (0..3)
            .map(|i| {
                let pose = sampler.sample(i, &models[i as usize % 4], &rig).unwrap();
                observe(&pose, &models[i as usize % 4], &rig).unwrap().0
            })
            .collect();
        let params = TransformerParams::init(config, 5);
        let refs: Vec<&crate::StereoObservation> = observations.iter().collect();
        let batch_tokens = super::super::tokenize_batch(&refs, &config, &rig).unwrap();
        let batched = forward(&params, &batch_tokens).unwrap();
        for (i, obs) in observations.iter().enumerate() {
            let single_tokens = super::super::tokenize(obs, &config, &rig).unwrap();
            let single = forward(&params, &single_tokens).unwrap();
            for (a, b) in single.poses[0]
                .translation_mm
                .iter()
                .zip(&batched.poses[i].translation_mm)
            {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gelu_grad_matches_finite_differences() {
        for x in [-3.0, -0.5, 0.0, 0.3, 2.7] {
            let h = 1e-6;
            let fd = (gelu(x + h) - gelu(x - h)) / (2.0 * h);
            assert!((gelu_grad(x) - fd).abs() < 1e-8, "x={x}");
        }
    }
}
