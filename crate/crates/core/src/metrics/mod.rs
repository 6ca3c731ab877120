//! Pose-quality metrics (MPVPE, ADD, ADD-S, ADD-S accuracy) and
//! classification confusion matrices.
//!
//! All pose metrics transform the model's surface sample with the full
//! articulated transform, so articulation error is penalized alongside the
//! rigid pose. MPVPE and ADD share the same mean-of-distances form and the
//! same 512-point surface set, which keeps numbers comparable across
//! reports.

pub mod fixtures;
mod report;

pub use report::{ClassStat, MetricReport};

use crate::geometry::{apply_pose, GeometryError, PointSet, Pose7D};
use crate::instruments::InstrumentModel;
use crate::math;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("pose pair classes differ")]
    ClassMismatch,
    #[error("empty input")]
    EmptyInput,
    #[error("prediction and ground-truth lists differ in length")]
    LengthMismatch,
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
}

/// Mean distance between corresponding posed surface points; also the
/// per-pair MPVPE.
pub fn add<R: Real>(
    pose_pred: &Pose7D<R>,
    pose_gt: &Pose7D<R>,
    model: &InstrumentModel<R>,
) -> Result<R, MetricsError> {
    let pred = apply_pose(pose_pred, model, PointSet::Surface)?;
    let gt = apply_pose(pose_gt, model, PointSet::Surface)?;
    if pred.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let sum: R = pred
        .iter()
        .zip(&gt)
        .map(|(a, b)| math::dist(a, b))
        .sum();
    Ok(sum / R::of(pred.len() as f64))
}

/// Symmetric variant: mean over ground-truth-posed points of the distance
/// to the nearest predicted-posed point. Always ≤ [`add`].
pub fn add_s<R: Real>(
    pose_pred: &Pose7D<R>,
    pose_gt: &Pose7D<R>,
    model: &InstrumentModel<R>,
) -> Result<R, MetricsError> {
    let pred = apply_pose(pose_pred, model, PointSet::Surface)?;
    let gt = apply_pose(pose_gt, model, PointSet::Surface)?;
    if pred.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let sum: R = gt
        .iter()
        .map(|g| {
            pred.iter()
                .map(|p| math::dist(g, p))
                .fold(R::infinity(), |acc, d| acc.min(d))
        })
        .sum();
    Ok(sum / R::of(gt.len() as f64))
}

/// One evaluated pose pair; `class_id` selects the model.
#[derive(Debug, Clone, Copy)]
pub struct PosePair<R> {
    pub class_id: usize,
    pub pred: Pose7D<R>,
    pub gt: Pose7D<R>,
}

/// Share of pairs whose ADD-S falls below `fraction` of the class diameter,
/// per class and overall.
pub fn add_s_accuracy(
    pairs: &[PosePair<f64>],
    models: &[InstrumentModel<f64>],
    fraction: f64,
) -> Result<MetricReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut hits = vec![0usize; models.len()];
    let mut counts = vec![0usize; models.len()];
    for pair in pairs {
        let model = models
            .get(pair.class_id)
            .ok_or(MetricsError::ClassMismatch)?;
        let d = add_s(&pair.pred, &pair.gt, model)?;
        counts[pair.class_id] += 1;
        if d < fraction * model.diameter {
            hits[pair.class_id] += 1;
        }
    }
    Ok(MetricReport::from_ratios(
        "add_s_accuracy",
        &hits,
        &counts,
        Some(fraction),
        models,
    ))
}

/// Per-class and aggregate MPVPE over pose pairs.
pub fn mpvpe_report(
    pairs: &[PosePair<f64>],
    models: &[InstrumentModel<f64>],
) -> Result<MetricReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sums = vec![0.0f64; models.len()];
    let mut counts = vec![0usize; models.len()];
    for pair in pairs {
        let model = models
            .get(pair.class_id)
            .ok_or(MetricsError::ClassMismatch)?;
        sums[pair.class_id] += add(&pair.pred, &pair.gt, model)?;
        counts[pair.class_id] += 1;
    }
    Ok(MetricReport::from_sums(
        "mpvpe_mm", &sums, &counts, None, models,
    ))
}

/// Row-normalized confusion matrix: `rows` index ground truth, `columns`
/// predictions; rows of absent classes stay zero.
pub fn confusion_matrix(
    pred_classes: &[usize],
    gt_classes: &[usize],
    class_count: usize,
) -> Result<Vec<Vec<f64>>, MetricsError> {
    if pred_classes.len() != gt_classes.len() {
        return Err(MetricsError::LengthMismatch);
    }
    let mut counts = vec![vec![0usize; class_count]; class_count];
    for (&p, &g) in pred_classes.iter().zip(gt_classes) {
        counts[g][p] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            if total == 0 {
                vec![0.0; class_count]
            } else {
                row.into_iter().map(|c| c as f64 / total as f64).collect()
            }
        })
        .collect())
}
