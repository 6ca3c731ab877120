//! Two-stage score-aware association.
//!
//! Stage 1 greedily matches high-score detections to all tracks by IoU;
//! stage 2 recovers still-unmatched tracks with low-score detections at a
//! stricter IoU bar. Unmatched high-score detections seed new tracks; low
//! ones are discarded. Greedy instead of optimal assignment: deterministic,
//! O(n² log n), and verified equal to brute force on small instances by the
//! oracle tests.

use super::TrackerConfig;
use crate::geometry::Rect;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AssociationResult {
    /// `(track_index, detection_index)` pairs.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    /// High-score detections that should seed new tracks.
    pub new_track_candidates: Vec<usize>,
}

/// Associates predicted track boxes with scored detections. `track_ids`
/// break IoU ties toward the older (lower-id) track.
pub fn associate<R: Real>(
    track_boxes: &[Rect<R>],
    track_ids: &[u64],
    detections: &[(Rect<R>, R)],
    cfg: &TrackerConfig<R>,
) -> AssociationResult {
    assert_eq!(track_boxes.len(), track_ids.len());
    let high: Vec<usize> = (0..detections.len())
        .filter(|&d| detections[d].1 >= cfg.score_high)
        .collect();
    let low: Vec<usize> = (0..detections.len())
        .filter(|&d| {
            let s = detections[d].1;
            s >= cfg.score_low && s < cfg.score_high
        })
        .collect();

    let mut track_used = vec![false; track_boxes.len()];
    let mut det_used = vec![false; detections.len()];
    let mut matches = Vec::new();

    greedy_stage(
        track_boxes,
        track_ids,
        detections,
        &high,
        cfg.iou_first,
        &mut track_used,
        &mut det_used,
        &mut matches,
    );
    greedy_stage(
        track_boxes,
        track_ids,
        detections,
        &low,
        cfg.iou_second,
        &mut track_used,
        &mut det_used,
        &mut matches,
    );

    matches.sort_unstable();
    AssociationResult {
        matches,
        unmatched_tracks: (0..track_boxes.len()).filter(|&t| !track_used[t]).collect(),
        new_track_candidates: high.into_iter().filter(|&d| !det_used[d]).collect(),
    }
}

#[allow(clippy::too_many_arguments)]
fn greedy_stage<R: Real>(
    track_boxes: &[Rect<R>],
    track_ids: &[u64],
    detections: &[(Rect<R>, R)],
    candidates: &[usize],
    iou_min: R,
    track_used: &mut [bool],
    det_used: &mut [bool],
    matches: &mut Vec<(usize, usize)>,
) {
    let mut pairs: Vec<(R, u64, usize, usize)> = Vec::new();
    for (t, tb) in track_boxes.iter().enumerate() {
        if track_used[t] {
            continue;
        }
        for &d in candidates {
            let iou = tb.iou(&detections[d].0);
            if iou >= iou_min {
                pairs.push((iou, track_ids[t], t, d));
            }
        }
    }
    // Highest IoU first; ties to the lower track id, then detection index.
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.3.cmp(&b.3))
    });
    for (_, _, t, d) in pairs {
        if !track_used[t] && !det_used[d] {
            track_used[t] = true;
            det_used[d] = true;
            matches.push((t, d));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(x: f64, y: f64, w: f64, h: f64) -> Rect<f64> {
        Rect {
            x0: x,
            y0: y,
            x1: x + w,
            y1: y + h,
        }
    }

    #[test]
    fn single_overlapping_high_score_detection_matches() {
        let cfg = TrackerConfig::default();
        let out = associate(
            &[boxed(0.0, 0.0, 10.0, 10.0)],
            &[1],
            &[(boxed(1.0, 1.0, 10.0, 10.0), 0.9)],
            &cfg,
        );
        assert_eq!(out.matches, vec![(0, 0)]);
        assert!(out.unmatched_tracks.is_empty());
        assert!(out.new_track_candidates.is_empty());
    }

    #[test]
    fn low_score_detection_recovers_an_occluded_track() {
        let cfg = TrackerConfig::default();
        let out = associate(
            &[boxed(0.0, 0.0, 10.0, 10.0)],
            &[1],
            &[(boxed(0.5, 0.5, 10.0, 10.0), 0.2)],
            &cfg,
        );
        assert_eq!(out.matches, vec![(0, 0)]);
        assert!(out.new_track_candidates.is_empty(), "low score never seeds");
    }

    #[test]
    fn below_score_low_is_discarded() {
        let cfg = TrackerConfig::default();
        let out = associate(
            &[boxed(0.0, 0.0, 10.0, 10.0)],
            &[1],
            &[(boxed(0.0, 0.0, 10.0, 10.0), 0.05)],
            &cfg,
        );
        assert!(out.matches.is_empty());
        assert_eq!(out.unmatched_tracks, vec![0]);
        assert!(out.new_track_candidates.is_empty());
    }

    #[test]
    fn unmatched_high_score_seeds_new_track() {
        let cfg = TrackerConfig::default();
        let out = associate(
            &[boxed(0.0, 0.0, 10.0, 10.0)],
            &[1],
            &[
                (boxed(0.0, 0.0, 10.0, 10.0), 0.9),
                (boxed(200.0, 200.0, 10.0, 10.0), 0.9),
            ],
            &cfg,
        );
        assert_eq!(out.matches, vec![(0, 0)]);
        assert_eq!(out.new_track_candidates, vec![1]);
    }

    #[test]
    fn iou_ties_resolve_to_the_lower_track_id() {
        let cfg = TrackerConfig::default();
        // Two identical track boxes, one detection covering both equally.
        let out = associate(
            &[boxed(0.0, 0.0, 10.0, 10.0), boxed(0.0, 0.0, 10.0, 10.0)],
            &[7, 3],
            &[(boxed(0.0, 0.0, 10.0, 10.0), 0.9)],
            &cfg,
        );
        assert_eq!(out.matches, vec![(1, 0)], "track id 3 should win the tie");
    }
}
