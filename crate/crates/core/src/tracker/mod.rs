//! Temporal stage: constant-velocity Kalman boxes, two-stage score-aware
//! association, per-keypoint 1€ smoothing, class-vote stabilization, and
//! stereo pairing of the per-eye track sets.

mod associate;
mod kalman;
mod one_euro;
mod session;

pub use associate::{associate, AssociationResult};
pub use kalman::KalmanBox;
pub use one_euro::{OneEuroConfig, OneEuroState};
pub use session::{EyeSession, StereoTrackerSession, Track, TrackedObject};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrackerError {
    /// Innovation covariance could not be inverted even after repair.
    #[error("singular innovation covariance")]
    SingularInnovation,
    /// 1€ filter timestamps must strictly increase.
    #[error("non-monotonic timestamps")]
    NonMonotonicTime,
}

/// Tracker thresholds; all values are config-exposed because the upstream
/// method leaves them unstated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig<R> {
    /// Detections at or above this score join stage-1 association.
    pub score_high: R,
    /// Detections below this score are discarded outright.
    pub score_low: R,
    /// Minimum IoU for a stage-1 match.
    pub iou_first: R,
    /// Minimum IoU for a stage-2 (low-score) match.
    pub iou_second: R,
    /// Frames a track survives without an update.
    pub max_age: u64,
    pub one_euro: OneEuroConfig<R>,
    /// Frame rate used to convert frame indices to 1€ timestamps, Hz.
    pub rate_hz: R,
    /// Kalman process noise, position block, px².
    pub process_noise_pos: R,
    /// Kalman process noise, velocity block, px²/frame².
    pub process_noise_vel: R,
    /// Kalman measurement noise, px².
    pub measurement_noise: R,
}

impl<R: Real> Default for TrackerConfig<R> {
    fn default() -> Self {
        Self {
            score_high: R::of(0.6),
            score_low: R::of(0.1),
            iou_first: R::of(0.3),
            iou_second: R::of(0.5),
            max_age: 30,
            one_euro: OneEuroConfig::default(),
            rate_hz: R::of(30.0),
            process_noise_pos: R::of(1.0),
            process_noise_vel: R::of(0.25),
            measurement_noise: R::of(1.0),
        }
    }
}
