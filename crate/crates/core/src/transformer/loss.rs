//! Composite training loss and its gradients.
//!
//! Three L2-norm terms with configurable weights:
//!
//! 1. pose term — `‖P̂ − P‖` over the raw pose vector (translation mm,
//!    rotation values, articulation);
//! 2. vertex term — `‖T(P̂)·V − T(P)·V‖` over the stacked surface points;
//! 3. keypoint term — `‖K̂₃D − K₃D‖` over the stacked predicted 3D
//!    keypoints.
//!
//! Gradients flow back through the articulated transform and the rotation
//! map (Gram-Schmidt or Rodrigues) into the raw head outputs, then through
//! the network. Norm gradients at exactly zero use the zero subgradient.

use super::net::{self, ForwardCache, RawOutputs, OUTPUT_SCALE_MM};
use super::params::TransformerParams;
use super::tokenize::tokenize_batch;
use super::{ModelConfig, RotationMode, TransformerError};
use crate::geometry::{
    axis_angle_to_matrix, axis_angle_vjp, matrix_to_axis_angle, matrix_to_rot6d, rot6d_to_matrix,
    PoseGradAccum, PoseTransform,
};
use crate::instruments::InstrumentModel;
use crate::matmul::Mat;
use crate::synth::DatasetRecord;
use crate::{CameraRig, Pose7D, KEYPOINT_COUNT};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub pose_term: f64,
    pub vertex_term: f64,
    pub kp3d_term: f64,
}

impl LossBreakdown {
    pub fn add(&mut self, other: &LossBreakdown) {
        self.total += other.total;
        self.pose_term += other.pose_term;
        self.vertex_term += other.vertex_term;
        self.kp3d_term += other.kp3d_term;
    }

    pub fn scaled(&self, s: f64) -> LossBreakdown {
        LossBreakdown {
            total: self.total * s,
            pose_term: self.pose_term * s,
            vertex_term: self.vertex_term * s,
            kp3d_term: self.kp3d_term * s,
        }
    }
}

/// Loss and parameter gradients for a single record; the oracle-checked
/// entry point.
pub fn record_loss_and_grad(
    params: &TransformerParams,
    record: &DatasetRecord,
    model: &InstrumentModel<f64>,
    rig: &CameraRig,
) -> Result<(LossBreakdown, TransformerParams), TransformerError> {
    let mut grads = params.zeros_like();
    let breakdown = shard_loss_grads(
        params,
        std::slice::from_ref(record),
        std::slice::from_ref(model).iter().map(|m| (m.class_id, m)).collect(),
        rig,
        &mut grads,
    )?;
    Ok((breakdown, grads))
}

/// Batched loss + gradient accumulation over a shard of records. Gradients
/// are summed (not averaged) into `grads`; the breakdown is the sum too.
pub(super) fn shard_loss_grads(
    params: &TransformerParams,
    records: &[DatasetRecord],
    models_by_class: std::collections::HashMap<usize, &InstrumentModel<f64>>,
    rig: &CameraRig,
    grads: &mut TransformerParams,
) -> Result<LossBreakdown, TransformerError> {
    let config = &params.config;
    let observations: Vec<&crate::StereoObservation> =
        records.iter().map(|r| &r.observation).collect();
    let tokens = tokenize_batch(&observations, config, rig)?;
    let (raw, cache) = net::forward_cached(params, &tokens)?;

    let mut d_kp_raw = Mat::zeros(raw.kp_raw.rows, raw.kp_raw.cols);
    let mut d_pose_raw = Mat::zeros(raw.pose_raw.rows, raw.pose_raw.cols);
    let mut breakdown = LossBreakdown::default();

    for (b, record) in records.iter().enumerate() {
        let model = models_by_class
            .get(&record.class_id)
            .ok_or(TransformerError::ClassOutOfRange(record.class_id))?;
        let one = record_terms(
            config,
            &raw,
            b,
            record,
            model,
            &mut d_kp_raw,
            &mut d_pose_raw,
        )?;
        breakdown.add(&one);
    }

    net::backward(params, &cache, &d_kp_raw, &d_pose_raw, grads);
    drop(cache);
    Ok(breakdown)
}

/// Loss terms and raw-output cotangents for one record in a batch.
fn record_terms(
    config: &ModelConfig,
    raw: &RawOutputs,
    b: usize,
    record: &DatasetRecord,
    model: &InstrumentModel<f64>,
    d_kp_raw: &mut Mat,
    d_pose_raw: &mut Mat,
) -> Result<LossBreakdown, TransformerError> {
    let w = config.loss_weights;
    let rd = config.rotation_mode.dim();
    let pd = config.pose_dim();
    let pose_row = raw.pose_raw.row(b);

    // Ground-truth pose vector in the head's parameterization.
    let gt_rotation: Vec<f64> = match config.rotation_mode {
        RotationMode::SixD => record.pose.rotation6.to_vec(),
        RotationMode::AxisAngle3 => {
            let m = rot6d_to_matrix(&record.pose.rotation6)?;
            matrix_to_axis_angle(&m).to_vec()
        }
    };

    // Predicted pose quantities (translation scaled to mm).
    let t_mm = [
        pose_row[0] * OUTPUT_SCALE_MM,
        pose_row[1] * OUTPUT_SCALE_MM,
        pose_row[2] * OUTPUT_SCALE_MM,
    ];
    let rot_pred = &pose_row[3..3 + rd];
    let artic_pred = pose_row[3 + rd];

    // Term 1: pose vector difference.
    let mut delta = vec![0.0; pd];
    delta[0] = t_mm[0] - record.pose.translation[0];
    delta[1] = t_mm[1] - record.pose.translation[1];
    delta[2] = t_mm[2] - record.pose.translation[2];
    for i in 0..rd {
        delta[3 + i] = rot_pred[i] - gt_rotation[i];
    }
    delta[3 + rd] = artic_pred - record.pose.articulation;
    let pose_term = norm(&delta);
    if pose_term > 0.0 {
        let g = w.pose / pose_term;
        let row = d_pose_raw.row_mut(b);
        for (i, d) in delta.iter().enumerate() {
            let unit_scale = if i < 3 { OUTPUT_SCALE_MM } else { 1.0 };
            row[i] += g * d * unit_scale;
        }
    }

    // Predicted pose as a transform (regularized rotation path).
    let pred_rot6 = match config.rotation_mode {
        RotationMode::SixD => {
            let mut r6 = [0.0; 6];
            r6.copy_from_slice(rot_pred);
            r6
        }
        RotationMode::AxisAngle3 => {
            let aa = [rot_pred[0], rot_pred[1], rot_pred[2]];
            matrix_to_rot6d(axis_angle_to_matrix(&aa).matrix())?
        }
    };
    let pred_pose = Pose7D::new(t_mm, pred_rot6, artic_pred);
    let tf_pred = PoseTransform::new_safe(&pred_pose, model);
    let tf_gt = PoseTransform::new(&record.pose, model)?;

    // Term 2: stacked surface-vertex difference under both transforms.
    let diffs: Vec<[f64; 3]> = model
        .surface
        .iter()
        .map(|sp| {
            let p = tf_pred.apply(sp.part, &sp.position);
            let g = tf_gt.apply(sp.part, &sp.position);
            [p[0] - g[0], p[1] - g[1], p[2] - g[2]]
        })
        .collect();
    let vertex_term = norm(diffs.as_flattened());
    if vertex_term > 0.0 {
        let mut accum = PoseGradAccum::default();
        let g_scale = w.vertex / vertex_term;
        for (sp, d) in model.surface.iter().zip(&diffs) {
            let g = [d[0] * g_scale, d[1] * g_scale, d[2] * g_scale];
            accum.accumulate(&tf_pred, sp.part, &sp.position, &g);
        }
        let row = d_pose_raw.row_mut(b);
        match config.rotation_mode {
            RotationMode::SixD => {
                let d10 = accum.finish(&tf_pred);
                for i in 0..3 {
                    row[i] += d10[i] * OUTPUT_SCALE_MM;
                }
                for i in 0..6 {
                    row[3 + i] += d10[3 + i];
                }
                row[3 + rd] += d10[9];
            }
            RotationMode::AxisAngle3 => {
                let aa = [rot_pred[0], rot_pred[1], rot_pred[2]];
                let d_aa = axis_angle_vjp(&aa, &accum.d_rotation);
                for i in 0..3 {
                    row[i] += accum.d_translation[i] * OUTPUT_SCALE_MM;
                    row[3 + i] += d_aa[i];
                }
                row[3 + rd] += accum.d_theta;
            }
        }
    }

    // Term 3: stacked 3D-keypoint difference.
    let mut kp_delta = [[0.0; 3]; KEYPOINT_COUNT];
    for (k, d) in kp_delta.iter_mut().enumerate() {
        let row = raw.kp_raw.row(b * KEYPOINT_COUNT + k);
        for c in 0..3 {
            d[c] = row[c] * OUTPUT_SCALE_MM - record.keypoints3d[k][c];
        }
    }
    let kp3d_term = norm(kp_delta.as_flattened());
    if kp3d_term > 0.0 {
        let g = w.kp3d / kp3d_term * OUTPUT_SCALE_MM;
        for (k, d) in kp_delta.iter().enumerate() {
            let row = d_kp_raw.row_mut(b * KEYPOINT_COUNT + k);
            for c in 0..3 {
                row[c] += g * d[c];
            }
        }
    }

    Ok(LossBreakdown {
        total: w.pose * pose_term + w.vertex * vertex_term + w.kp3d * kp3d_term,
        pose_term,
        vertex_term,
        kp3d_term,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
