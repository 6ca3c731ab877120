//! Stereo-keypoints → 7D-pose attention regressor.
//!
//! Thirteen tokens per object (12 keypoint tokens plus one learned pose
//! query token) pass through a pre-norm attention stack; a per-token head
//! reads 3D keypoints off the keypoint tokens and a pose head reads the 7D
//! pose off the query token. Training minimizes a composite of three L2
//! terms — pose vector, transformed surface vertices, 3D keypoints — with
//! hand-written reverse-mode gradients all the way through the articulated
//! transform and the rotation map.

mod checkpoint;
mod loss;
mod net;
mod params;
mod tokenize;
mod train;

pub use loss::{record_loss_and_grad, LossBreakdown};
pub use net::{forward, NetworkOutput, PoseRaw};
pub use params::TransformerParams;
pub use tokenize::{tokenize, tokenize_batch, TOKENS_PER_OBJECT};
pub use train::{evaluate_mpvpe, train, train_records, TrainHyper};

use crate::geometry::GeometryError;
use crate::synth::SynthError;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum TransformerError {
    #[error("class id {0} outside configured class count")]
    ClassOutOfRange(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("non-finite loss at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: usize, step: usize },
    #[error("synth: {0}")]
    Synth(#[from] SynthError),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
}

/// Input modality: mono zeroes the right-eye coordinate features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Mono,
    Stereo,
}

/// Rotation output parameterization of the pose head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationMode {
    /// Three axis-angle values; the ablation baseline.
    AxisAngle3,
    /// Six values orthonormalized by Gram-Schmidt; continuous over SO(3).
    SixD,
}

impl RotationMode {
    pub fn dim(self) -> usize {
        match self {
            RotationMode::AxisAngle3 => 3,
            RotationMode::SixD => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub pose: f64,
    pub vertex: f64,
    pub kp3d: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            pose: 1.0,
            vertex: 1.0,
            kp3d: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub layers: usize,
    pub hidden_dim: usize,
    pub heads: usize,
    pub modality: Modality,
    pub keypoint_onehot: bool,
    pub rotation_mode: RotationMode,
    pub class_count: usize,
    pub loss_weights: LossWeights,
}

impl ModelConfig {
    /// The full configuration: stereo + keypoint one-hot + 6D rotation at
    /// 5 layers / 128 hidden / 4 heads.
    pub fn full(class_count: usize) -> Self {
        Self {
            layers: 5,
            hidden_dim: 128,
            heads: 4,
            modality: Modality::Stereo,
            keypoint_onehot: true,
            rotation_mode: RotationMode::SixD,
            class_count,
            loss_weights: LossWeights::default(),
        }
    }

    /// The four ablation configurations in canonical order: mono, stereo,
    /// stereo+kp-onehot, stereo+kp-onehot+6d.
    pub fn ablation_ladder(class_count: usize) -> [(&'static str, Self); 4] {
        let full = Self::full(class_count);
        [
            (
                "mono",
                Self {
                    modality: Modality::Mono,
                    keypoint_onehot: false,
                    rotation_mode: RotationMode::AxisAngle3,
                    ..full
                },
            ),
            (
                "stereo",
                Self {
                    keypoint_onehot: false,
                    rotation_mode: RotationMode::AxisAngle3,
                    ..full
                },
            ),
            (
                "stereo+kp-onehot",
                Self {
                    rotation_mode: RotationMode::AxisAngle3,
                    ..full
                },
            ),
            ("stereo+kp-onehot+6d-rot", full),
        ]
    }

    pub fn validate(&self) -> Result<(), TransformerError> {
        if self.layers == 0 {
            return Err(TransformerError::ShapeMismatch("layers must be >= 1".into()));
        }
        if self.hidden_dim == 0 || self.hidden_dim % self.heads != 0 {
            return Err(TransformerError::ShapeMismatch(
                "hidden_dim must be a positive multiple of heads".into(),
            ));
        }
        if self.class_count == 0 {
            return Err(TransformerError::ShapeMismatch(
                "class_count must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Token feature length:
    /// `[uL, vL, uR, vR, vis, pose_flag] + onehot(12)? + onehot(C)`.
    pub fn feature_len(&self) -> usize {
        6 + if self.keypoint_onehot {
            crate::KEYPOINT_COUNT
        } else {
            0
        } + self.class_count
    }

    /// Pose head width: translation + rotation values + articulation.
    pub fn pose_dim(&self) -> usize {
        3 + self.rotation_mode.dim() + 1
    }

    pub fn ffn_dim(&self) -> usize {
        4 * self.hidden_dim
    }

    pub fn head_dim(&self) -> usize {
        self.hidden_dim / self.heads
    }
}
