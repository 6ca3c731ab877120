//! Multi-object sequence generation for the tracking and fitting stages.
//!
//! Poses follow C¹ trajectories (Catmull-Rom splines through seeded
//! waypoints; translation in mm, rotation in the tangent space of a base
//! rotation, articulation as a clamped scalar spline). Occlusion windows
//! force a low detector score on chosen (object, frame) ranges.
//!
//! File format: header line, then one record per line ordered by frame then
//! object:
//!
//! ```text
//! frame gt_id class_id pose[10] 12 x (uL vL uR vR vis) 12 x (x y z) score boxL[4] boxR[4]
//! ```

use super::dataset::{fmt_f, parse_noise, parse_record, parse_rig};
use super::{DatasetRecord, NoiseConfig, SynthError};
use crate::geometry::{axis_angle_to_matrix, matrix_to_rot6d, THETA_MAX};
use crate::math::Vec3;
use crate::rng::{domain, stream};
use crate::{CameraRig, InstrumentModel, Pose7D, Rect};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const MAGIC: &str = "stereopose-sequence v1";

/// Trajectory family for generated sequences.
#[derive(Debug, Clone, PartialEq)]
pub enum MotionConfig {
    /// C¹ Catmull-Rom spline through `control_points` seeded waypoints.
    RandomSpline { control_points: usize },
    /// One fixed pose per object.
    Static,
    /// Two objects swap lateral positions at constant velocity, with boxes
    /// overlapping mid-sequence.
    Crossing,
}

/// Forces `score` on detections of `object` for frames in
/// `[start_frame, end_frame]` (inclusive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcclusionWindow {
    pub object: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFrameRecord {
    pub frame: usize,
    pub gt_id: usize,
    pub record: DatasetRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceHeader {
    pub seed: u64,
    pub frames: usize,
    pub objects: usize,
    pub class_count: usize,
    pub rig: CameraRig,
    pub noise: Option<NoiseConfig>,
}

#[allow(clippy::too_many_arguments)]
pub fn generate_sequence(
    models: &[InstrumentModel],
    rig: &CameraRig,
    seed: u64,
    n_frames: usize,
    n_objects: usize,
    motion: &MotionConfig,
    noise: Option<&NoiseConfig>,
    occlusions: &[OcclusionWindow],
    path: &Path,
) -> Result<(), SynthError> {
    assert!(n_frames >= 2, "a sequence needs at least two frames");
    assert!(n_objects >= 1);

    let trajectories: Vec<Trajectory> = (0..n_objects)
        .map(|o| Trajectory::build(seed, o, n_objects, models.len(), motion))
        .collect();

    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "{MAGIC} seed={seed} frames={n_frames} objects={n_objects} classes={} rig={} noise={}",
        models.len(),
        super::dataset::fmt_rig(rig),
        super::dataset::fmt_noise(noise)
    )?;

    for frame in 0..n_frames {
        for (o, traj) in trajectories.iter().enumerate() {
            let t = frame as f64 / (n_frames - 1) as f64;
            let pose = traj.pose_at(t);
            let model = &models[traj.class];
            let mut rng = stream(seed, domain::SEQUENCE, ((o as u64) << 32) | frame as u64);
            let mut record = make_sequence_record(&pose, model, rig, noise, models.len(), &mut rng)?;
            for window in occlusions {
                if window.object == o
                    && (window.start_frame..=window.end_frame).contains(&frame)
                {
                    record.observation.score = window.score;
                }
            }
            writeln!(w, "{}", format_sequence_record(frame, o, &record))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Like a dataset record, but keypoints leaving either image are marked
/// invisible instead of rejecting the pose.
fn make_sequence_record(
    pose: &Pose7D,
    model: &InstrumentModel,
    rig: &CameraRig,
    noise: Option<&NoiseConfig>,
    class_count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DatasetRecord, SynthError> {
    use crate::geometry::{apply_pose, project_point, Eye, PointSet};
    let kp3d = apply_pose(pose, model, PointSet::Keypoints)?;
    let mut keypoints = [crate::StereoKeypoint::default(); crate::KEYPOINT_COUNT];
    for (slot, p) in keypoints.iter_mut().zip(&kp3d) {
        let left = project_point(rig, Eye::Left, p);
        let right = project_point(rig, Eye::Right, p);
        *slot = match (left, right) {
            (Ok((ul, vl)), Ok((ur, vr))) => {
                let inside = ul >= 0.0
                    && ul < rig.image_width
                    && vl >= 0.0
                    && vl < rig.image_height
                    && ur >= 0.0
                    && ur < rig.image_width
                    && vr >= 0.0
                    && vr < rig.image_height;
                if inside {
                    crate::StereoKeypoint {
                        u_left: ul,
                        v_left: vl,
                        u_right: ur,
                        v_right: vr,
                        visible: true,
                    }
                } else {
                    Default::default()
                }
            }
            _ => Default::default(),
        };
    }
    let mut observation = crate::StereoObservation {
        class_id: model.class_id,
        keypoints,
        box_left: Default::default(),
        box_right: Default::default(),
        score: 1.0,
    };
    observation.refresh_boxes(super::BOX_PAD_PX);
    if let Some(noise) = noise {
        observation = super::perturb_observation(&observation, noise, class_count, rng);
    }
    let mut arr = [[0.0; 3]; crate::KEYPOINT_COUNT];
    for (a, p) in arr.iter_mut().zip(&kp3d) {
        *a = *p;
    }
    Ok(DatasetRecord {
        class_id: model.class_id,
        pose: *pose,
        observation,
        keypoints3d: arr,
    })
}

struct Trajectory {
    class: usize,
    translation: Spline3,
    base_rotation6: [f64; 6],
    rotation_tangent: Spline3,
    articulation: Spline1,
}

impl Trajectory {
    fn build(
        seed: u64,
        object: usize,
        n_objects: usize,
        class_count: usize,
        motion: &MotionConfig,
    ) -> Self {
        let mut rng = stream(seed, domain::SEQUENCE, 0xFFFF_0000 + object as u64);
        let class = rng.random_range(0..class_count);
        let base = super::uniform_rotation(&mut rng);
        let base_rotation6 = matrix_to_rot6d(base.matrix()).expect("orthonormal");
        let theta0 = rng.random_range(0.0..THETA_MAX);

        match motion {
            MotionConfig::Static => {
                let p = draw_center_point(&mut rng, object, n_objects);
                Self {
                    class,
                    translation: Spline3::constant(p),
                    base_rotation6,
                    rotation_tangent: Spline3::constant([0.0; 3]),
                    articulation: Spline1::constant(theta0),
                }
            }
            MotionConfig::Crossing => {
                let side = if object % 2 == 0 { 1.0 } else { -1.0 };
                let y = side * 30.0;
                let z = 800.0 + side * 40.0;
                let start = [side * 90.0, y, z];
                let end = [-side * 90.0, y, z];
                Self {
                    class,
                    translation: Spline3::linear(start, end),
                    base_rotation6,
                    rotation_tangent: Spline3::constant([0.0; 3]),
                    articulation: Spline1::constant(theta0),
                }
            }
            MotionConfig::RandomSpline { control_points } => {
                let k = (*control_points).max(2);
                let t_pts = (0..k)
                    .map(|_| draw_center_point(&mut rng, object, n_objects))
                    .collect();
                let w_pts = (0..k)
                    .map(|_| {
                        [
                            rng.random_range(-0.5..0.5),
                            rng.random_range(-0.5..0.5),
                            rng.random_range(-0.5..0.5),
                        ]
                    })
                    .collect();
                let a_pts = (0..k)
                    .map(|_| rng.random_range(0.05..THETA_MAX - 0.05))
                    .collect();
                Self {
                    class,
                    translation: Spline3 { points: t_pts },
                    base_rotation6,
                    rotation_tangent: Spline3 { points: w_pts },
                    articulation: Spline1 { points: a_pts },
                }
            }
        }
    }

    /// Pose at normalized time `t` in `[0, 1]`.
    fn pose_at(&self, t: f64) -> Pose7D {
        let translation = self.translation.eval(t);
        let omega = self.rotation_tangent.eval(t);
        let base = crate::geometry::rot6d_to_matrix(&self.base_rotation6).expect("valid base");
        let rot = base.compose(&axis_angle_to_matrix(&omega));
        let rotation6 = matrix_to_rot6d(rot.matrix()).expect("orthonormal");
        let articulation = self.articulation.eval(t).clamp(0.0, THETA_MAX);
        Pose7D::new(translation, rotation6, articulation)
    }
}

/// Working volume for sequence waypoints, conservatively inside the frustum;
/// objects are laterally separated by index so clean sequences do not
/// interpenetrate.
fn draw_center_point(rng: &mut ChaCha8Rng, object: usize, n_objects: usize) -> Vec3<f64> {
    let lane = if n_objects > 1 {
        (object as f64 / (n_objects - 1) as f64 - 0.5) * 160.0
    } else {
        0.0
    };
    [
        rng.random_range(-60.0..60.0),
        lane + rng.random_range(-20.0..20.0),
        rng.random_range(650.0..1100.0),
    ]
}

struct Spline3 {
    points: Vec<Vec3<f64>>,
}

impl Spline3 {
    fn constant(p: Vec3<f64>) -> Self {
        Self { points: vec![p, p] }
    }

    fn linear(a: Vec3<f64>, b: Vec3<f64>) -> Self {
        Self { points: vec![a, b] }
    }

    fn eval(&self, t: f64) -> Vec3<f64> {
        std::array::from_fn(|axis| {
            catmull_rom(&self.points.iter().map(|p| p[axis]).collect::<Vec<_>>(), t)
        })
    }
}

struct Spline1 {
    points: Vec<f64>,
}

impl Spline1 {
    fn constant(v: f64) -> Self {
        Self { points: vec![v, v] }
    }

    fn eval(&self, t: f64) -> f64 {
        catmull_rom(&self.points, t)
    }
}

/// Uniform Catmull-Rom over `points`, endpoints clamped; C¹ in `t ∈ [0,1]`.
fn catmull_rom(points: &[f64], t: f64) -> f64 {
    let k = points.len();
    debug_assert!(k >= 2);
    let s = t.clamp(0.0, 1.0) * (k - 1) as f64;
    let seg = (s.floor() as usize).min(k - 2);
    let u = s - seg as f64;
    let at = |i: isize| points[i.clamp(0, k as isize - 1) as usize];
    let (p0, p1, p2, p3) = (
        at(seg as isize - 1),
        at(seg as isize),
        at(seg as isize + 1),
        at(seg as isize + 2),
    );
    let u2 = u * u;
    let u3 = u2 * u;
    0.5 * ((2.0 * p1)
        + (-p0 + p2) * u
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2
        + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u3)
}

fn format_sequence_record(frame: usize, gt_id: usize, r: &DatasetRecord) -> String {
    let core = super::dataset::format_record(r);
    let mut s = format!("{frame} {gt_id} {core} {}", fmt_f(r.observation.score));
    for b in [&r.observation.box_left, &r.observation.box_right] {
        for v in [b.x0, b.y0, b.x1, b.y1] {
            s.push(' ');
            s.push_str(&fmt_f(v));
        }
    }
    s
}

pub fn read_sequence(
    path: &Path,
) -> Result<(SequenceHeader, Vec<SequenceFrameRecord>), SynthError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| SynthError::Parse("empty file".into()))??;
    let header = parse_seq_header(&header_line)?;

    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        let mut it = line.splitn(3, ' ');
        let frame: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| SynthError::Parse("bad frame index".into()))?;
        let gt_id: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| SynthError::Parse("bad gt id".into()))?;
        let rest = it
            .next()
            .ok_or_else(|| SynthError::Parse("record truncated".into()))?;

        // The record core parser ignores trailing fields, so split off the
        // score/box tail by token count.
        let tokens: Vec<&str> = rest.split_ascii_whitespace().collect();
        let core_len = 1 + 10 + crate::KEYPOINT_COUNT * 5 + crate::KEYPOINT_COUNT * 3;
        if tokens.len() != core_len + 1 + 8 {
            return Err(SynthError::Parse(format!(
                "expected {} fields, got {}",
                core_len + 9,
                tokens.len()
            )));
        }
        let mut record = parse_record(&tokens[..core_len].join(" "))?;
        let tail: Vec<f64> = tokens[core_len..]
            .iter()
            .map(|t| t.parse().map_err(|_| SynthError::Parse("bad tail".into())))
            .collect::<Result<_, _>>()?;
        record.observation.score = tail[0];
        record.observation.box_left = Rect {
            x0: tail[1],
            y0: tail[2],
            x1: tail[3],
            y1: tail[4],
        };
        record.observation.box_right = Rect {
            x0: tail[5],
            y0: tail[6],
            x1: tail[7],
            y1: tail[8],
        };
        records.push(SequenceFrameRecord {
            frame,
            gt_id,
            record,
        });
    }
    Ok((header, records))
}

fn parse_seq_header(line: &str) -> Result<SequenceHeader, SynthError> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| SynthError::Parse("bad sequence magic".into()))?;
    let mut header = SequenceHeader {
        seed: 0,
        frames: 0,
        objects: 0,
        class_count: 0,
        rig: CameraRig::vr_default(),
        noise: None,
    };
    for kv in rest.split_ascii_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| SynthError::Parse("bad header field".into()))?;
        match k {
            "seed" => header.seed = v.parse().map_err(|_| SynthError::Parse("seed".into()))?,
            "frames" => {
                header.frames = v.parse().map_err(|_| SynthError::Parse("frames".into()))?
            }
            "objects" => {
                header.objects = v.parse().map_err(|_| SynthError::Parse("objects".into()))?
            }
            "classes" => {
                header.class_count = v.parse().map_err(|_| SynthError::Parse("classes".into()))?
            }
            "rig" => header.rig = parse_rig(v)?,
            "noise" => header.noise = parse_noise(v)?,
            _ => return Err(SynthError::Parse(format!("unknown header key {k}"))),
        }
    }
    Ok(header)
}
