//! Stateful tracking sessions: one per eye, paired per frame by epipolar
//! matching.
//!
//! Pipeline order per eye: Kalman predict → two-stage association → Kalman
//! update → 1€ keypoint smoothing → class vote. The left and right sessions
//! are independent; the stereo session pairs their per-frame outputs and
//! emits only paired tracks, keyed by the left track id.

use super::{associate, KalmanBox, OneEuroState, TrackerConfig};
use crate::geometry::{epipolar_match, merge_eyes, MonoKeypoint, Rect};
use crate::{CameraRig, MonoDetection, StereoObservation, KEYPOINT_COUNT};

/// One tracked object in one eye.
#[derive(Debug, Clone)]
pub struct Track {
    pub id: u64,
    pub kalman: KalmanBox<f64>,
    /// Histogram of detected classes; the reported class is its argmax.
    pub class_votes: Vec<u64>,
    pub age: u64,
    pub time_since_update: u64,
    pub score: f64,
    /// Latest smoothed keypoints.
    pub keypoints: [MonoKeypoint<f64>; KEYPOINT_COUNT],
    smoothers: [[OneEuroState<f64>; 2]; KEYPOINT_COUNT],
}

impl Track {
    fn new(id: u64, det: &MonoDetection, class_count: usize, t: f64, cfg: &TrackerConfig<f64>) -> Self {
        let mut track = Self {
            id,
            kalman: KalmanBox::from_measurement(&rect_to_cxcywh(&det.bbox)),
            class_votes: vec![0; class_count],
            age: 0,
            time_since_update: 0,
            score: det.score,
            keypoints: [MonoKeypoint::default(); KEYPOINT_COUNT],
            smoothers: Default::default(),
        };
        track.class_votes[det.class_id] += 1;
        track.smooth_keypoints(det, t, cfg);
        track
    }

    /// Majority class; ties resolve to the lower class id.
    pub fn voted_class(&self) -> usize {
        self.class_votes
            .iter()
            .enumerate()
            .max_by_key(|(i, &votes)| (votes, std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    fn smooth_keypoints(&mut self, det: &MonoDetection, t: f64, cfg: &TrackerConfig<f64>) {
        for (i, kp) in det.keypoints.iter().enumerate() {
            if kp.visible {
                let u = self.smoothers[i][0]
                    .step(&cfg.one_euro, kp.u, t)
                    .expect("frame timestamps strictly increase");
                let v = self.smoothers[i][1]
                    .step(&cfg.one_euro, kp.v, t)
                    .expect("frame timestamps strictly increase");
                self.keypoints[i] = MonoKeypoint {
                    u,
                    v,
                    visible: true,
                };
            } else {
                self.keypoints[i].visible = false;
            }
        }
    }

    fn as_detection(&self) -> MonoDetection {
        MonoDetection {
            class_id: self.voted_class(),
            score: self.score,
            bbox: cxcywh_to_rect(&self.kalman.measured_box()),
            keypoints: self.keypoints,
        }
    }
}

/// Single-eye tracking session. Stateful and order-dependent; run one per
/// eye.
pub struct EyeSession {
    config: TrackerConfig<f64>,
    class_count: usize,
    pub tracks: Vec<Track>,
    next_id: u64,
    frame: u64,
}

impl EyeSession {
    pub fn new(config: TrackerConfig<f64>, class_count: usize) -> Self {
        Self {
            config,
            class_count,
            tracks: Vec::new(),
            next_id: 0,
            frame: 0,
        }
    }

    pub fn step(&mut self, detections: &[MonoDetection]) {
        let cfg = self.config;
        let t = self.frame as f64 / cfg.rate_hz;

        for track in self.tracks.iter_mut() {
            track
                .kalman
                .predict(cfg.process_noise_pos, cfg.process_noise_vel);
            track.age += 1;
        }

        let track_boxes: Vec<Rect<f64>> = self
            .tracks
            .iter()
            .map(|tr| cxcywh_to_rect(&tr.kalman.measured_box()))
            .collect();
        let track_ids: Vec<u64> = self.tracks.iter().map(|tr| tr.id).collect();
        let scored: Vec<(Rect<f64>, f64)> =
            detections.iter().map(|d| (d.bbox, d.score)).collect();
        let result = associate(&track_boxes, &track_ids, &scored, &cfg);

        for &(ti, di) in &result.matches {
            let det = &detections[di];
            let track = &mut self.tracks[ti];
            track
                .kalman
                .update(&rect_to_cxcywh(&det.bbox), cfg.measurement_noise)
                .expect("innovation invertible with positive measurement noise");
            track.class_votes[det.class_id] += 1;
            track.score = det.score;
            track.time_since_update = 0;
            track.smooth_keypoints(det, t, &cfg);
        }
        for &ti in &result.unmatched_tracks {
            self.tracks[ti].time_since_update += 1;
        }
        for &di in &result.new_track_candidates {
            let track = Track::new(self.next_id, &detections[di], self.class_count, t, &cfg);
            self.next_id += 1;
            self.tracks.push(track);
        }
        let max_age = cfg.max_age;
        self.tracks.retain(|tr| tr.time_since_update <= max_age);
        self.frame += 1;
    }

    /// Tracks updated by a detection in the current frame.
    pub fn current_tracks(&self) -> impl Iterator<Item = &Track> {
        self.tracks.iter().filter(|tr| tr.time_since_update == 0)
    }
}

/// Paired left/right track output for one frame.
#[derive(Debug, Clone)]
pub struct TrackedObject {
    /// Left-eye track id.
    pub track_id: u64,
    pub class_id: usize,
    pub observation: StereoObservation,
}

pub struct StereoTrackerSession {
    pub left: EyeSession,
    pub right: EyeSession,
    rig: CameraRig,
}

impl StereoTrackerSession {
    pub fn new(config: TrackerConfig<f64>, class_count: usize, rig: CameraRig) -> Self {
        Self {
            left: EyeSession::new(config, class_count),
            right: EyeSession::new(config, class_count),
            rig,
        }
    }

    /// Advances both eyes one frame and returns the epipolar-paired tracks.
    pub fn track_frame(
        &mut self,
        left_dets: &[MonoDetection],
        right_dets: &[MonoDetection],
    ) -> Vec<TrackedObject> {
        self.left.step(left_dets);
        self.right.step(right_dets);

        let left_tracks: Vec<&Track> = self.left.current_tracks().collect();
        let right_tracks: Vec<&Track> = self.right.current_tracks().collect();
        let left_mono: Vec<MonoDetection> = left_tracks.iter().map(|tr| tr.as_detection()).collect();
        let right_mono: Vec<MonoDetection> =
            right_tracks.iter().map(|tr| tr.as_detection()).collect();

        let mut out: Vec<TrackedObject> = epipolar_match(&left_mono, &right_mono, &self.rig)
            .into_iter()
            .map(|(li, ri)| TrackedObject {
                track_id: left_tracks[li].id,
                class_id: left_tracks[li].voted_class(),
                observation: merge_eyes(&left_mono[li], &right_mono[ri]),
            })
            .collect();
        out.sort_by_key(|t| t.track_id);
        out
    }
}

fn rect_to_cxcywh(r: &Rect<f64>) -> [f64; 4] {
    let (cx, cy) = r.center();
    [cx, cy, r.width(), r.height()]
}

fn cxcywh_to_rect(b: &[f64; 4]) -> Rect<f64> {
    Rect {
        x0: b[0] - b[2] * 0.5,
        y0: b[1] - b[3] * 0.5,
        x1: b[0] + b[2] * 0.5,
        y1: b[1] + b[3] * 0.5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(x: f64, y: f64, class_id: usize, score: f64) -> MonoDetection {
        let mut keypoints = [MonoKeypoint::default(); KEYPOINT_COUNT];
        for (i, kp) in keypoints.iter_mut().enumerate() {
            *kp = MonoKeypoint {
                u: x + 5.0 * i as f64,
                v: y + 3.0 * i as f64,
                visible: true,
            };
        }
        MonoDetection {
            class_id,
            score,
            bbox: Rect {
                x0: x,
                y0: y,
                x1: x + 60.0,
                y1: y + 40.0,
            },
            keypoints,
        }
    }

    #[test]
    fn id_persists_across_frames() {
        let mut session = EyeSession::new(TrackerConfig::default(), 3);
        session.step(&[det(100.0, 100.0, 1, 0.9)]);
        let id0 = session.tracks[0].id;
        for i in 1..20 {
            session.step(&[det(100.0 + 2.0 * i as f64, 100.0, 1, 0.9)]);
            let current: Vec<_> = session.current_tracks().collect();
            assert_eq!(current.len(), 1);
            assert_eq!(current[0].id, id0);
        }
    }

    #[test]
    fn low_score_window_preserves_the_id() {
        let mut session = EyeSession::new(TrackerConfig::default(), 3);
        for i in 0..30 {
            let score = if (10..20).contains(&i) { 0.2 } else { 0.9 };
            session.step(&[det(50.0 + i as f64, 80.0, 2, score)]);
            let current: Vec<_> = session.current_tracks().collect();
            assert_eq!(current.len(), 1, "frame {i}");
            assert_eq!(current[0].id, 0, "frame {i}");
        }
        assert_eq!(session.tracks.len(), 1);
    }

    #[test]
    fn class_votes_outvote_sporadic_misclassificationation() {
        let mut session = EyeSession::new(TrackerConfig::default(), 4);
        for i in 0..20 {
            let class = if i % 7 == 3 { 0 } else { 2 };
            session.step(&[det(50.0, 80.0, class, 0.9)]);
        }
        assert_eq!(session.tracks[0].voted_class(), 2);
    }

    #[test]
    fn vote_argmax_is_scale_invariant() {
        let mut track_votes = vec![3u64, 9, 1];
        let argmax = |v: &Vec<u64>| {
            v.iter()
                .enumerate()
                .max_by_key(|(i, &c)| (c, std::cmp::Reverse(*i)))
                .unwrap()
                .0
        };
        let before = argmax(&track_votes);
        for v in track_votes.iter_mut() {
            *v *= 17;
        }
        assert_eq!(argmax(&track_votes), before);
    }

    #[test]
    fn stale_tracks_are_dropped_after_max_age() {
        let cfg = TrackerConfig {
            max_age: 3,
            ..TrackerConfig::default()
        };
        let mut session = EyeSession::new(cfg, 2);
        session.step(&[det(100.0, 100.0, 0, 0.9)]);
        for _ in 0..5 {
            session.step(&[]);
        }
        assert!(session.tracks.is_empty());
    }
}
