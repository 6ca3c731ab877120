//! Post-detection stages of a stereo articulated-instrument pose pipeline.
//!
//! Given per-eye 2D keypoint detections of hinged surgical-style instruments,
//! this crate provides everything downstream of the detector, reproducible on
//! a CPU:
//!
//! - [`geometry`] — rotation representations (6-value continuous form,
//!   axis-angle), articulated rigid transforms, rectified stereo projection,
//!   triangulation, and epipolar left/right matching.
//! - [`instruments`] — procedural articulated two-part instrument models with
//!   canonical keypoints and surface samples.
//! - [`synth`] — random 7D pose sampling, stereo keypoint dataset and
//!   sequence generation, and a mock detector noise model.
//! - [`transformer`] — a small attention network regressing 7D pose and 3D
//!   keypoints from tokenized stereo keypoints, trained with a composite
//!   pose/vertex/keypoint loss and hand-written reverse-mode gradients.
//! - [`fitter`] — an optimization baseline: Adam descent on the 10 pose
//!   values minimizing stereo reprojection error.
//! - [`tracker`] — constant-velocity Kalman boxes, two-stage score-aware
//!   association, per-keypoint 1€ smoothing, class voting.
//! - [`metrics`] — MPVPE, ADD, ADD-S, ADD-S accuracy, confusion matrices.
//!
//! The geometry, filter, and metric kernels are generic over the scalar type
//! via [`Real`] (`f32` or `f64`); the pipeline stages and all file formats
//! are fixed to `f64`, re-exported here as concrete aliases.

pub mod fitter;
pub mod geometry;
pub mod instruments;
pub mod math;
pub mod matmul;
pub mod metrics;
pub mod optim;
pub mod rng;
pub mod scalar;
pub mod synth;
pub mod tracker;
pub mod transformer;

pub use scalar::Real;

/// Number of canonical keypoints per instrument.
pub const KEYPOINT_COUNT: usize = 12;

// Concrete f64 aliases used by the pipeline stages and file formats.
pub type Pose7D = geometry::Pose7D<f64>;
pub type RotationMatrix = geometry::RotationMatrix<f64>;
pub type CameraRig = geometry::CameraRig<f64>;
pub type StereoObservation = geometry::StereoObservation<f64>;
pub type StereoKeypoint = geometry::StereoKeypoint<f64>;
pub type MonoDetection = geometry::MonoDetection<f64>;
pub type Rect = geometry::Rect<f64>;
pub type InstrumentModel = instruments::InstrumentModel<f64>;
