//! Observation → token features.
//!
//! Each object becomes 13 tokens: one per keypoint slot plus one pose query
//! token (last). Feature layout per token:
//!
//! ```text
//! [uL/W, vL/H, uR/W, vR/H, vis, pose_flag, onehot12 (if enabled), onehotC]
//! ```
//!
//! Invisible keypoints carry zero coordinates and `vis = 0`; mono mode
//! zeroes the right-eye slots; the pose token carries only its flag and the
//! class one-hot. Coordinates are normalized by image size, so the features
//! are resolution-independent.

use super::{Modality, ModelConfig, TransformerError};
use crate::matmul::Mat;
use crate::{CameraRig, StereoObservation, KEYPOINT_COUNT};

pub const TOKENS_PER_OBJECT: usize = KEYPOINT_COUNT + 1;

/// Tokenizes one observation into a `13 × feature_len` matrix.
pub fn tokenize(
    obs: &StereoObservation,
    config: &ModelConfig,
    rig: &CameraRig,
) -> Result<Mat, TransformerError> {
    let mut out = Mat::zeros(TOKENS_PER_OBJECT, config.feature_len());
    write_tokens(obs, config, rig, &mut out, 0)?;
    Ok(out)
}

/// Tokenizes a batch into a `(n·13) × feature_len` matrix, objects stacked
/// in order.
pub fn tokenize_batch(
    observations: &[&StereoObservation],
    config: &ModelConfig,
    rig: &CameraRig,
) -> Result<Mat, TransformerError> {
    let mut out = Mat::zeros(
        observations.len() * TOKENS_PER_OBJECT,
        config.feature_len(),
    );
    for (i, obs) in observations.iter().enumerate() {
        write_tokens(obs, config, rig, &mut out, i * TOKENS_PER_OBJECT)?;
    }
    Ok(out)
}

fn write_tokens(
    obs: &StereoObservation,
    config: &ModelConfig,
    rig: &CameraRig,
    out: &mut Mat,
    row0: usize,
) -> Result<(), TransformerError> {
    if obs.class_id >= config.class_count {
        return Err(TransformerError::ClassOutOfRange(obs.class_id));
    }
    let class_base = 6 + if config.keypoint_onehot {
        KEYPOINT_COUNT
    } else {
        0
    };
    let (w, h) = (rig.image_width, rig.image_height);
    for (k, kp) in obs.keypoints.iter().enumerate() {
        let row = out.row_mut(row0 + k);
        if kp.visible {
            row[0] = kp.u_left / w;
            row[1] = kp.v_left / h;
            if config.modality == Modality::Stereo {
                row[2] = kp.u_right / w;
                row[3] = kp.v_right / h;
            }
            row[4] = 1.0;
        }
        if config.keypoint_onehot {
            row[6 + k] = 1.0;
        }
        row[class_base + obs.class_id] = 1.0;
    }
    let pose_row = out.row_mut(row0 + KEYPOINT_COUNT);
    pose_row[5] = 1.0;
    pose_row[class_base + obs.class_id] = 1.0;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::make_instrument_set;
    use crate::synth::{observe, PoseSampler};

    fn sample_obs() -> (StereoObservation, CameraRig) {
        let models = make_instrument_set(7, 5);
        let rig = CameraRig::vr_default();
        let pose = PoseSampler::new(3).sample(0, &models[2], &rig).unwrap();
        let (obs, _) = observe(&pose, &models[2], &rig).unwrap();
        (obs, rig)
    }

    #[test]
    fn stereo_tokens_have_normalized_nonzero_features() {
        let (obs, rig) = sample_obs();
        let config = ModelConfig::full(5);
        let t = tokenize(&obs, &config, &rig).unwrap();
        assert_eq!(t.rows, 13);
        assert_eq!(t.cols, config.feature_len());
        for k in 0..KEYPOINT_COUNT {
            let row = t.row(k);
            for &c in &row[0..4] {
                assert!(c > 0.0 && c < 1.0, "normalized coordinate {c}");
            }
            assert_eq!(row[4], 1.0);
            assert_eq!(row[5], 0.0);
            assert_eq!(row[6 + k], 1.0);
            assert_eq!(row[6 + KEYPOINT_COUNT + 2], 1.0);
        }
    }

    #[test]
    fn mono_mode_zeroes_right_eye_features() {
        let (obs, rig) = sample_obs();
        let config = ModelConfig {
            modality: Modality::Mono,
            ..ModelConfig::full(5)
        };
        let t = tokenize(&obs, &config, &rig).unwrap();
        for k in 0..KEYPOINT_COUNT {
            assert_eq!(t.row(k)[2], 0.0);
            assert_eq!(t.row(k)[3], 0.0);
            assert!(t.row(k)[0] != 0.0);
        }
    }

    #[test]
    fn invisible_keypoints_are_zeroed() {
        let (mut obs, rig) = sample_obs();
        obs.keypoints[5].visible = false;
        let config = ModelConfig::full(5);
        let t = tokenize(&obs, &config, &rig).unwrap();
        let row = t.row(5);
        assert_eq!(&row[0..5], &[0.0; 5]);
        assert_eq!(row[6 + 5], 1.0, "keypoint index one-hot survives");
    }

    #[test]
    fn pose_token_is_flag_plus_class() {
        let (obs, rig) = sample_obs();
        let config = ModelConfig::full(5);
        let t = tokenize(&obs, &config, &rig).unwrap();
        let row = t.row(KEYPOINT_COUNT);
        assert_eq!(&row[0..5], &[0.0; 5]);
        assert_eq!(row[5], 1.0);
        let nonzero: Vec<usize> = row
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(nonzero, vec![5, 6 + KEYPOINT_COUNT + 2]);
    }

    #[test]
    fn out_of_range_class_is_rejected() {
        let (mut obs, rig) = sample_obs();
        obs.class_id = 9;
        let config = ModelConfig::full(5);
        assert!(matches!(
            tokenize(&obs, &config, &rig),
            Err(TransformerError::ClassOutOfRange(9))
        ));
    }

    #[test]
    fn features_are_resolution_independent() {
        let (obs, rig) = sample_obs();
        let config = ModelConfig::full(5);
        let t1 = tokenize(&obs, &config, &rig).unwrap();

        let mut rig2 = rig;
        rig2.image_width *= 2.0;
        rig2.image_height *= 2.0;
        let mut obs2 = obs.clone();
        for kp in obs2.keypoints.iter_mut() {
            kp.u_left *= 2.0;
            kp.v_left *= 2.0;
            kp.u_right *= 2.0;
            kp.v_right *= 2.0;
        }
        let t2 = tokenize(&obs2, &config, &rig2).unwrap();
        for (a, b) in t1.data.iter().zip(&t2.data) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
