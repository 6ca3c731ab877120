//! Articulated world transform: part B rotates about the model hinge by the
//! articulation angle, then both parts receive the global rigid pose.
//!
//! [`PoseTransform`] caches everything needed to apply the transform;
//! [`PoseGradAccum`] pulls per-point cotangents back onto the 10 pose values
//! (translation, 6-value rotation, articulation), which is the backbone of
//! both the fitting baseline and the network's vertex loss term.

use super::rotation::{axis_angle_to_matrix, rot6d_forward, rot6d_forward_safe, rot6d_vjp, Rot6dCache};
use super::{GeometryError, Pose7D, RotationMatrix};
use crate::instruments::{InstrumentModel, Part};
use crate::math::{self, Mat3, Vec3};
use crate::scalar::Real;

/// Which canonical point set of the model to transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSet {
    Keypoints,
    Surface,
}

/// A pose bound to a model's hinge, ready to transform canonical points.
pub struct PoseTransform<R> {
    rotation: RotationMatrix<R>,
    cache: Rot6dCache<R>,
    translation: Vec3<R>,
    hinge_rot: RotationMatrix<R>,
    hinge_point: Vec3<R>,
    hinge_axis: Vec3<R>,
}

impl<R: Real> PoseTransform<R> {
    pub fn new(pose: &Pose7D<R>, model: &InstrumentModel<R>) -> Result<Self, GeometryError> {
        let (rotation, cache) = rot6d_forward(&pose.rotation6)?;
        Ok(Self::assemble(pose, model, rotation, cache))
    }

    /// Regularized variant for loss paths: degenerate rotations produce a
    /// finite near-rotation instead of an error.
    pub fn new_safe(pose: &Pose7D<R>, model: &InstrumentModel<R>) -> Self {
        let (rotation, cache) = rot6d_forward_safe(&pose.rotation6);
        Self::assemble(pose, model, rotation, cache)
    }

    fn assemble(
        pose: &Pose7D<R>,
        model: &InstrumentModel<R>,
        rotation: RotationMatrix<R>,
        cache: Rot6dCache<R>,
    ) -> Self {
        let hinge_rot = axis_angle_to_matrix(&math::scale(&model.hinge_axis, pose.articulation));
        Self {
            rotation,
            cache,
            translation: pose.translation,
            hinge_rot,
            hinge_point: model.hinge_point,
            hinge_axis: model.hinge_axis,
        }
    }

    pub fn rotation(&self) -> &RotationMatrix<R> {
        &self.rotation
    }

    /// Articulated point in the canonical frame (hinge applied, global pose
    /// not yet).
    #[inline]
    pub fn local_point(&self, part: Part, x: &Vec3<R>) -> Vec3<R> {
        match part {
            Part::A => *x,
            Part::B => {
                let rel = math::sub(x, &self.hinge_point);
                math::add(&self.hinge_point, &self.hinge_rot.apply(&rel))
            }
        }
    }

    #[inline]
    pub fn apply(&self, part: Part, x: &Vec3<R>) -> Vec3<R> {
        let local = self.local_point(part, x);
        math::add(&self.rotation.apply(&local), &self.translation)
    }
}

/// Accumulates `dL/dpose` from per-point cotangents `dL/d(world point)`.
#[derive(Debug, Clone)]
pub struct PoseGradAccum<R> {
    pub d_translation: Vec3<R>,
    pub d_rotation: Mat3<R>,
    pub d_theta: R,
}

impl<R: Real> Default for PoseGradAccum<R> {
    fn default() -> Self {
        Self {
            d_translation: [R::zero(); 3],
            d_rotation: [[R::zero(); 3]; 3],
            d_theta: R::zero(),
        }
    }
}

impl<R: Real> PoseGradAccum<R> {
    /// Adds the contribution of one transformed point with cotangent `g`.
    pub fn accumulate(&mut self, tf: &PoseTransform<R>, part: Part, x: &Vec3<R>, g: &Vec3<R>) {
        let local = tf.local_point(part, x);
        self.d_translation = math::add(&self.d_translation, g);
        math::add_outer(&mut self.d_rotation, g, &local);
        if part == Part::B {
            // d(world)/dθ = R · (ω × R_h(x − h)); the hinge point itself is
            // θ-independent.
            let y = tf.hinge_rot.apply(&math::sub(x, &tf.hinge_point));
            let spin = math::cross(&tf.hinge_axis, &y);
            self.d_theta += math::dot(&tf.rotation.apply_inverse(g), &spin);
        }
    }

    /// Collapses the matrix cotangent through Gram-Schmidt, producing the
    /// gradient in the `[t(3), r6(6), θ]` layout.
    pub fn finish(self, tf: &PoseTransform<R>) -> [R; 10] {
        let d_r6 = rot6d_vjp(&tf.cache, &self.d_rotation);
        [
            self.d_translation[0],
            self.d_translation[1],
            self.d_translation[2],
            d_r6[0],
            d_r6[1],
            d_r6[2],
            d_r6[3],
            d_r6[4],
            d_r6[5],
            self.d_theta,
        ]
    }
}

/// Transforms the selected canonical point set into the world frame.
pub fn apply_pose<R: Real>(
    pose: &Pose7D<R>,
    model: &InstrumentModel<R>,
    points: PointSet,
) -> Result<Vec<Vec3<R>>, GeometryError> {
    let tf = PoseTransform::new(pose, model)?;
    Ok(match points {
        PointSet::Keypoints => model
            .keypoints
            .iter()
            .map(|kp| tf.apply(kp.part, &kp.position))
            .collect(),
        PointSet::Surface => model
            .surface
            .iter()
            .map(|sp| tf.apply(sp.part, &sp.position))
            .collect(),
    })
}

/// Transforms arbitrary `(part, point)` pairs with one pose.
pub fn apply_pose_points<R: Real>(
    pose: &Pose7D<R>,
    model: &InstrumentModel<R>,
    points: &[(Part, Vec3<R>)],
) -> Result<Vec<Vec3<R>>, GeometryError> {
    let tf = PoseTransform::new(pose, model)?;
    Ok(points.iter().map(|(p, x)| tf.apply(*p, x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::make_instrument_set;

    fn test_model() -> InstrumentModel<f64> {
        make_instrument_set(7, 1).remove(0)
    }

    #[test]
    fn identity_pose_is_a_noop() {
        let model = test_model();
        let posed = apply_pose(&Pose7D::identity(), &model, PointSet::Keypoints).unwrap();
        for (kp, p) in model.keypoints.iter().zip(&posed) {
            assert!(math::dist(&kp.position, p) < 1e-12);
        }
    }

    #[test]
    fn pure_translation_shifts_everything() {
        let model = test_model();
        let mut pose = Pose7D::identity();
        pose.translation = [10.0, 0.0, 0.0];
        let posed = apply_pose(&pose, &model, PointSet::Surface).unwrap();
        for (sp, p) in model.surface.iter().zip(&posed) {
            let expect = [sp.position[0] + 10.0, sp.position[1], sp.position[2]];
            assert!(math::dist(&expect, p) < 1e-12);
        }
    }

    #[test]
    fn hinge_axis_points_are_articulation_fixed() {
        let model = test_model();
        let on_axis = math::add(&model.hinge_point, &math::scale(&model.hinge_axis, 7.5));
        let mut pose = Pose7D::identity();
        pose.articulation = 0.3;
        let moved = apply_pose_points(&pose, &model, &[(Part::B, on_axis)]).unwrap();
        pose.articulation = 0.0;
        let fixed = apply_pose_points(&pose, &model, &[(Part::B, on_axis)]).unwrap();
        assert!(math::dist(&moved[0], &fixed[0]) < 1e-12);
    }

    #[test]
    fn articulation_moves_part_b_only() {
        let model = test_model();
        let mut pose = Pose7D::identity();
        pose.articulation = 0.4;
        let posed = apply_pose(&pose, &model, PointSet::Keypoints).unwrap();
        for (kp, p) in model.keypoints.iter().zip(&posed) {
            let moved = math::dist(&kp.position, p) > 1e-9;
            match kp.part {
                Part::A => assert!(!moved, "part A keypoint moved"),
                Part::B => {
                    // Only points off the hinge axis move.
                    let rel = math::sub(&kp.position, &model.hinge_point);
                    let along = math::dot(&rel, &model.hinge_axis);
                    let radial =
                        math::sub(&rel, &math::scale(&model.hinge_axis, along));
                    if math::norm(&radial) > 1e-6 {
                        assert!(moved, "off-axis part B keypoint did not move");
                    }
                }
            }
        }
    }

    #[test]
    fn pose_gradient_matches_finite_differences() {
        let model = test_model();
        let pose = Pose7D {
            translation: [20.0, -30.0, 800.0],
            rotation6: [0.9, 0.2, -0.1, 0.05, 1.1, 0.3],
            articulation: 0.5,
        };
        // Scalar objective: sum of dot(w_i, world_i) with fixed weights.
        let pts: Vec<(Part, Vec3<f64>)> = model
            .keypoints
            .iter()
            .map(|kp| (kp.part, kp.position))
            .collect();
        let weights: Vec<Vec3<f64>> = (0..pts.len())
            .map(|i| {
                let t = i as f64;
                [0.3 + 0.1 * t, -0.2 + 0.05 * t, 0.4 - 0.07 * t]
            })
            .collect();

        let objective = |arr: &[f64; 10]| -> f64 {
            let p = Pose7D::from_array(arr);
            let world = apply_pose_points(&p, &model, &pts).unwrap();
            world
                .iter()
                .zip(&weights)
                .map(|(w, c)| math::dot(w, c))
                .sum()
        };

        let tf = PoseTransform::new(&pose, &model).unwrap();
        let mut accum = PoseGradAccum::default();
        for ((part, x), g) in pts.iter().zip(&weights) {
            accum.accumulate(&tf, *part, x, g);
        }
        let analytic = accum.finish(&tf);

        let base = pose.to_array();
        for i in 0..10 {
            let h = 1e-6 * base[i].abs().max(1.0);
            let mut plus = base;
            let mut minus = base;
            plus[i] += h;
            minus[i] -= h;
            let fd = (objective(&plus) - objective(&minus)) / (2.0 * h);
            let rel = (analytic[i] - fd).abs() / fd.abs().max(1e-6);
            assert!(rel < 1e-5, "i={i} analytic={} fd={fd}", analytic[i]);
        }
    }
}
