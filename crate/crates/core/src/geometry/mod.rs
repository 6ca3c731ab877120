//! Rotation representations, articulated world transforms, rectified stereo
//! projection, triangulation, and epipolar matching.
//!
//! Conventions: 3D in millimeters, 2D in pixels, articulation in radians.
//! The world frame is the left camera frame; the right camera sits at
//! `+baseline` on the world x axis with no relative rotation.

mod camera;
mod epipolar;
mod pose;
mod rotation;

pub use camera::{project, project_point, project_point_grad, triangulate, Eye, Z_MIN_MM};
pub use epipolar::{epipolar_match, EPIPOLAR_CLASS_PENALTY_PX, EPIPOLAR_REJECT_PX};
pub use pose::{apply_pose, apply_pose_points, PointSet, PoseGradAccum, PoseTransform};
pub use rotation::{
    axis_angle_to_matrix, axis_angle_vjp, matrix_to_axis_angle, matrix_to_rot6d, rot6d_forward,
    rot6d_forward_safe, rot6d_to_matrix, rot6d_vjp, Rot6dCache,
};

use crate::math::{self, Mat3, Vec3};
use crate::scalar::Real;
use crate::KEYPOINT_COUNT;

/// Upper articulation limit (scissors fully open), radians.
pub const THETA_MAX: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    /// The 6-value rotation cannot be orthonormalized (zero or parallel vectors).
    #[error("degenerate 6-value rotation input")]
    DegenerateRotation,
    /// A matrix violates the rotation-matrix invariants.
    #[error("matrix is not a rotation within tolerance")]
    InvalidRotation,
    /// Point `index` is at or behind the near plane of the selected camera.
    #[error("point {0} behind camera")]
    BehindCamera(usize),
    /// Left/right disparity too small to triangulate.
    #[error("disparity below minimum")]
    ZeroDisparity,
}

/// 7D pose: translation (mm), 6-value continuous rotation, hinge angle (rad).
///
/// `rotation6` holds the two unnormalized column vectors `a1, a2`; the
/// rotation matrix is recovered by Gram-Schmidt via [`rot6d_to_matrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose7D<R> {
    pub translation: Vec3<R>,
    pub rotation6: [R; 6],
    pub articulation: R,
}

impl<R: Real> Pose7D<R> {
    pub fn identity() -> Self {
        let (o, z) = (R::one(), R::zero());
        Self {
            translation: [z; 3],
            rotation6: [o, z, z, z, o, z],
            articulation: z,
        }
    }

    pub fn new(translation: Vec3<R>, rotation6: [R; 6], articulation: R) -> Self {
        Self {
            translation,
            rotation6,
            articulation,
        }
    }

    pub fn rotation_matrix(&self) -> Result<RotationMatrix<R>, GeometryError> {
        rot6d_to_matrix(&self.rotation6)
    }

    /// Flat layout `[t(3), r6(6), articulation]` used by the fitter and the
    /// network heads.
    pub fn to_array(&self) -> [R; 10] {
        let t = self.translation;
        let r = self.rotation6;
        [
            t[0], t[1], t[2], r[0], r[1], r[2], r[3], r[4], r[5], self.articulation,
        ]
    }

    pub fn from_array(a: &[R; 10]) -> Self {
        Self {
            translation: [a[0], a[1], a[2]],
            rotation6: [a[3], a[4], a[5], a[6], a[7], a[8]],
            articulation: a[9],
        }
    }

    /// Checks the representation invariants (orthonormalizability and the
    /// articulation range).
    pub fn validate(&self) -> Result<(), GeometryError> {
        rot6d_to_matrix(&self.rotation6)?;
        let theta = self.articulation.as_f64();
        if !(0.0..=THETA_MAX + 1e-12).contains(&theta) {
            return Err(GeometryError::DegenerateRotation);
        }
        Ok(())
    }
}

/// A validated member of SO(3), stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix<R>(Mat3<R>);

impl<R: Real> RotationMatrix<R> {
    /// Validates column orthonormality and `det = 1` within `1e-9`.
    pub fn new(m: Mat3<R>) -> Result<Self, GeometryError> {
        if rotation_defect(&m) > 1e-9 {
            return Err(GeometryError::InvalidRotation);
        }
        Ok(Self(m))
    }

    /// For matrices produced by constructions that guarantee the invariants.
    pub fn from_orthonormal(m: Mat3<R>) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(math::identity3())
    }

    pub fn matrix(&self) -> &Mat3<R> {
        &self.0
    }

    #[inline]
    pub fn apply(&self, v: &Vec3<R>) -> Vec3<R> {
        math::mat_vec(&self.0, v)
    }

    /// Applies the inverse rotation.
    #[inline]
    pub fn apply_inverse(&self, v: &Vec3<R>) -> Vec3<R> {
        math::mat_t_vec(&self.0, v)
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self(math::mat_mul(&self.0, &other.0))
    }
}

/// Worst violation of the SO(3) invariants: column norms, orthogonality,
/// determinant.
pub fn rotation_defect<R: Real>(m: &Mat3<R>) -> f64 {
    let cols: Vec<Vec3<R>> = (0..3).map(|j| math::column(m, j)).collect();
    let mut worst = (math::det3(m) - R::one()).abs().as_f64();
    for i in 0..3 {
        for j in i..3 {
            let d = math::dot(&cols[i], &cols[j]).as_f64();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((d - target).abs());
        }
    }
    worst
}

/// Rectified pinhole stereo pair. Intrinsics are shared by both eyes; the
/// right camera is displaced `baseline` mm along +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraRig<R> {
    pub fx: R,
    pub fy: R,
    pub cx: R,
    pub cy: R,
    pub image_width: R,
    pub image_height: R,
    pub baseline: R,
}

impl<R: Real> CameraRig<R> {
    /// VR-like default: fx=fy=1100 px, 1152x1152 image, 64 mm baseline.
    pub fn vr_default() -> Self {
        Self {
            fx: R::of(1100.0),
            fy: R::of(1100.0),
            cx: R::of(576.0),
            cy: R::of(576.0),
            image_width: R::of(1152.0),
            image_height: R::of(1152.0),
            baseline: R::of(64.0),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.fx > R::zero() && self.fy > R::zero() && self.baseline > R::zero()) {
            return Err("fx, fy, baseline must be positive".into());
        }
        if !(R::zero() <= self.cx && self.cx < self.image_width) {
            return Err("cx out of image".into());
        }
        if !(R::zero() <= self.cy && self.cy < self.image_height) {
            return Err("cy out of image".into());
        }
        Ok(())
    }

    /// True when `(u, v)` lies inside the image bounds extended by `margin`
    /// (fraction of each dimension).
    pub fn in_bounds(&self, u: R, v: R, margin: R) -> bool {
        let mw = self.image_width * margin;
        let mh = self.image_height * margin;
        u >= -mw && u <= self.image_width + mw && v >= -mh && v <= self.image_height + mh
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rect<R> {
    pub x0: R,
    pub y0: R,
    pub x1: R,
    pub y1: R,
}

impl<R: Real> Rect<R> {
    pub fn width(&self) -> R {
        self.x1 - self.x0
    }

    pub fn height(&self) -> R {
        self.y1 - self.y0
    }

    pub fn center(&self) -> (R, R) {
        let half = R::of(0.5);
        ((self.x0 + self.x1) * half, (self.y0 + self.y1) * half)
    }

    pub fn area(&self) -> R {
        (self.width().max(R::zero())) * (self.height().max(R::zero()))
    }

    pub fn iou(&self, other: &Self) -> R {
        let ix0 = self.x0.max(other.x0);
        let iy0 = self.y0.max(other.y0);
        let ix1 = self.x1.min(other.x1);
        let iy1 = self.y1.min(other.y1);
        let iw = (ix1 - ix0).max(R::zero());
        let ih = (iy1 - iy0).max(R::zero());
        let inter = iw * ih;
        let union = self.area() + other.area() - inter;
        if union <= R::zero() {
            R::zero()
        } else {
            inter / union
        }
    }

    /// Smallest rectangle containing all `(u, v)` points, or a degenerate
    /// zero rect when the iterator is empty.
    pub fn bounding(points: impl Iterator<Item = (R, R)>) -> Self {
        let mut any = false;
        let (mut x0, mut y0) = (R::infinity(), R::infinity());
        let (mut x1, mut y1) = (R::neg_infinity(), R::neg_infinity());
        for (u, v) in points {
            any = true;
            x0 = x0.min(u);
            y0 = y0.min(v);
            x1 = x1.max(u);
            y1 = y1.max(v);
        }
        if !any {
            return Self::default();
        }
        Self { x0, y0, x1, y1 }
    }

    pub fn padded(&self, pad: R) -> Self {
        Self {
            x0: self.x0 - pad,
            y0: self.y0 - pad,
            x1: self.x1 + pad,
            y1: self.y1 + pad,
        }
    }
}

/// One keypoint slot of a stereo observation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StereoKeypoint<R> {
    pub u_left: R,
    pub v_left: R,
    pub u_right: R,
    pub v_right: R,
    pub visible: bool,
}

/// Per-object stereo detection: 12 keypoint slots with left/right pixel
/// coordinates, visibility, boxes, class, and detector score.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoObservation<R> {
    pub class_id: usize,
    pub keypoints: [StereoKeypoint<R>; KEYPOINT_COUNT],
    pub box_left: Rect<R>,
    pub box_right: Rect<R>,
    pub score: R,
}

impl<R: Real> StereoObservation<R> {
    pub fn visible_count(&self) -> usize {
        self.keypoints.iter().filter(|k| k.visible).count()
    }

    /// Recomputes both boxes as the padded bounds of visible keypoints.
    pub fn refresh_boxes(&mut self, pad: R) {
        self.box_left = Rect::bounding(
            self.keypoints
                .iter()
                .filter(|k| k.visible)
                .map(|k| (k.u_left, k.v_left)),
        )
        .padded(pad);
        self.box_right = Rect::bounding(
            self.keypoints
                .iter()
                .filter(|k| k.visible)
                .map(|k| (k.u_right, k.v_right)),
        )
        .padded(pad);
    }

    /// Splits the stereo observation into per-eye detections.
    pub fn split_eyes(&self) -> (MonoDetection<R>, MonoDetection<R>) {
        let mut left = MonoDetection {
            class_id: self.class_id,
            score: self.score,
            bbox: self.box_left,
            keypoints: [MonoKeypoint::default(); KEYPOINT_COUNT],
        };
        let mut right = MonoDetection {
            class_id: self.class_id,
            score: self.score,
            bbox: self.box_right,
            keypoints: [MonoKeypoint::default(); KEYPOINT_COUNT],
        };
        for (i, k) in self.keypoints.iter().enumerate() {
            left.keypoints[i] = MonoKeypoint {
                u: k.u_left,
                v: k.v_left,
                visible: k.visible,
            };
            right.keypoints[i] = MonoKeypoint {
                u: k.u_right,
                v: k.v_right,
                visible: k.visible,
            };
        }
        (left, right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MonoKeypoint<R> {
    pub u: R,
    pub v: R,
    pub visible: bool,
}

/// Single-eye detection, the unit consumed by the tracker and by epipolar
/// matching.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoDetection<R> {
    pub class_id: usize,
    pub score: R,
    pub bbox: Rect<R>,
    pub keypoints: [MonoKeypoint<R>; KEYPOINT_COUNT],
}

/// Merges matched left/right detections back into a stereo observation.
pub fn merge_eyes<R: Real>(
    left: &MonoDetection<R>,
    right: &MonoDetection<R>,
) -> StereoObservation<R> {
    let mut keypoints = [StereoKeypoint::default(); KEYPOINT_COUNT];
    for (i, slot) in keypoints.iter_mut().enumerate() {
        let l = left.keypoints[i];
        let r = right.keypoints[i];
        *slot = StereoKeypoint {
            u_left: l.u,
            v_left: l.v,
            u_right: r.u,
            v_right: r.v,
            visible: l.visible && r.visible,
        };
    }
    StereoObservation {
        class_id: left.class_id,
        keypoints,
        box_left: left.bbox,
        box_right: right.bbox,
        score: left.score.min(right.score),
    }
}
