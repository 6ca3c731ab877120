//! Left/right detection pairing for a rectified rig.
//!
//! On a rectified pair, matching keypoints share image rows, so the pairing
//! cost is the mean vertical keypoint disparity over keypoints visible in
//! both detections, plus a large penalty for class disagreement. Greedy
//! minimum-cost selection; pairs above the rejection threshold stay
//! unmatched.

use super::{CameraRig, MonoDetection};
use crate::scalar::Real;

/// Added to the cost when the two detections disagree on class, pixels.
pub const EPIPOLAR_CLASS_PENALTY_PX: f64 = 1e3;

/// Pairs costlier than this are rejected, pixels.
pub const EPIPOLAR_REJECT_PX: f64 = 20.0;

/// Pairing cost, or `None` when the detections share no visible keypoints.
pub fn pair_cost<R: Real>(left: &MonoDetection<R>, right: &MonoDetection<R>) -> Option<R> {
    let mut sum = R::zero();
    let mut count = 0usize;
    for (l, r) in left.keypoints.iter().zip(&right.keypoints) {
        if l.visible && r.visible {
            sum += (l.v - r.v).abs();
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    let mut cost = sum / R::of(count as f64);
    if left.class_id != right.class_id {
        cost += R::of(EPIPOLAR_CLASS_PENALTY_PX);
    }
    Some(cost)
}

/// Greedy minimum-cost left/right pairing; each index used at most once,
/// pairs with cost above [`EPIPOLAR_REJECT_PX`] omitted.
pub fn epipolar_match<R: Real>(
    left_dets: &[MonoDetection<R>],
    right_dets: &[MonoDetection<R>],
    _rig: &CameraRig<R>,
) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(R, usize, usize)> = Vec::new();
    for (i, l) in left_dets.iter().enumerate() {
        for (j, r) in right_dets.iter().enumerate() {
            if let Some(cost) = pair_cost(l, r) {
                if cost <= R::of(EPIPOLAR_REJECT_PX) {
                    candidates.push((cost, i, j));
                }
            }
        }
    }
    // Stable order: by cost, then indices, so ties resolve deterministically.
    candidates.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut used_left = vec![false; left_dets.len()];
    let mut used_right = vec![false; right_dets.len()];
    let mut matches = Vec::new();
    for (_, i, j) in candidates {
        if !used_left[i] && !used_right[j] {
            used_left[i] = true;
            used_right[j] = true;
            matches.push((i, j));
        }
    }
    matches.sort_unstable();
    matches
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MonoKeypoint, Rect};
    use crate::KEYPOINT_COUNT;

    fn det(class_id: usize, v_base: f64, dv: f64) -> MonoDetection<f64> {
        let mut keypoints = [MonoKeypoint::default(); KEYPOINT_COUNT];
        for (i, kp) in keypoints.iter_mut().enumerate() {
            *kp = MonoKeypoint {
                u: 100.0 + 10.0 * i as f64,
                v: v_base + dv + 3.0 * i as f64,
                visible: true,
            };
        }
        MonoDetection {
            class_id,
            score: 0.9,
            bbox: Rect {
                x0: 90.0,
                y0: v_base - 10.0,
                x1: 230.0,
                y1: v_base + 50.0,
            },
            keypoints,
        }
    }

    #[test]
    fn same_class_small_row_offset_matches() {
        let rig = CameraRig::vr_default();
        let m = epipolar_match(&[det(2, 300.0, 0.0)], &[det(2, 300.0, 0.5)], &rig);
        assert_eq!(m, vec![(0, 0)]);
    }

    #[test]
    fn class_mismatch_blocks_the_pair() {
        let rig = CameraRig::vr_default();
        let m = epipolar_match(&[det(2, 300.0, 0.0)], &[det(3, 300.0, 0.5)], &rig);
        assert!(m.is_empty());
    }

    #[test]
    fn vertically_separated_objects_match_by_row() {
        let rig = CameraRig::vr_default();
        let left = [det(1, 100.0, 0.0), det(1, 300.0, 0.0)];
        let right = [det(1, 300.0, 0.4), det(1, 100.0, 0.2)];
        let m = epipolar_match(&left, &right, &rig);
        assert_eq!(m, vec![(0, 1), (1, 0)]);
    }
}
