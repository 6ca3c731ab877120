//! Rectified pinhole projection and closed-form triangulation.

use super::{CameraRig, GeometryError};
use crate::math::Vec3;
use crate::scalar::Real;

/// Near-plane depth; points at or closer than this cannot be projected.
pub const Z_MIN_MM: f64 = 10.0;

/// Minimum disparity for triangulation, pixels.
pub const DISPARITY_MIN_PX: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eye {
    Left,
    Right,
}

/// Projects one world-frame point into the selected eye.
#[inline]
pub fn project_point<R: Real>(
    rig: &CameraRig<R>,
    eye: Eye,
    p: &Vec3<R>,
) -> Result<(R, R), GeometryError> {
    let x = match eye {
        Eye::Left => p[0],
        Eye::Right => p[0] - rig.baseline,
    };
    let z = p[2];
    if z <= R::of(Z_MIN_MM) {
        return Err(GeometryError::BehindCamera(0));
    }
    let u = rig.fx * x / z + rig.cx;
    let v = rig.fy * p[1] / z + rig.cy;
    Ok((u, v))
}

/// Projection with the 2×3 Jacobian `d(u,v)/d(world point)`.
#[inline]
pub fn project_point_grad<R: Real>(
    rig: &CameraRig<R>,
    eye: Eye,
    p: &Vec3<R>,
) -> Result<((R, R), [[R; 3]; 2]), GeometryError> {
    let x = match eye {
        Eye::Left => p[0],
        Eye::Right => p[0] - rig.baseline,
    };
    let z = p[2];
    if z <= R::of(Z_MIN_MM) {
        return Err(GeometryError::BehindCamera(0));
    }
    let inv_z = R::one() / z;
    let u = rig.fx * x * inv_z + rig.cx;
    let v = rig.fy * p[1] * inv_z + rig.cy;
    let jac = [
        [rig.fx * inv_z, R::zero(), -rig.fx * x * inv_z * inv_z],
        [R::zero(), rig.fy * inv_z, -rig.fy * p[1] * inv_z * inv_z],
    ];
    Ok(((u, v), jac))
}

/// Projects a batch of points, reporting the first offending index.
pub fn project<R: Real>(
    rig: &CameraRig<R>,
    eye: Eye,
    points: &[Vec3<R>],
) -> Result<Vec<(R, R)>, GeometryError> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| project_point(rig, eye, p).map_err(|_| GeometryError::BehindCamera(i)))
        .collect()
}

/// Closed-form rectified triangulation: `z = fx·b/d`, `v` averaged across
/// eyes for noise robustness.
pub fn triangulate<R: Real>(
    rig: &CameraRig<R>,
    left: (R, R),
    right: (R, R),
) -> Result<Vec3<R>, GeometryError> {
    let disparity = left.0 - right.0;
    if disparity <= R::of(DISPARITY_MIN_PX) {
        return Err(GeometryError::ZeroDisparity);
    }
    let z = rig.fx * rig.baseline / disparity;
    let x = (left.0 - rig.cx) * z / rig.fx;
    let v_mean = (left.1 + right.1) * R::of(0.5);
    let y = (v_mean - rig.cy) * z / rig.fy;
    Ok([x, y, z])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;

    fn rig() -> CameraRig<f64> {
        CameraRig::vr_default()
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let (u, v) = project_point(&rig(), Eye::Left, &[0.0, 0.0, 500.0]).unwrap();
        assert_eq!((u, v), (rig().cx, rig().cy));
    }

    #[test]
    fn pinhole_arithmetic() {
        let mut r = rig();
        r.fx = 1000.0;
        let (u, v) = project_point(&r, Eye::Left, &[50.0, 0.0, 1000.0]).unwrap();
        assert!((u - (r.cx + 50.0)).abs() < 1e-12);
        assert!((v - r.cy).abs() < 1e-12);
    }

    #[test]
    fn behind_camera_is_an_error() {
        assert_eq!(
            project(&rig(), Eye::Left, &[[0.0, 0.0, 500.0], [0.0, 0.0, -100.0]]),
            Err(GeometryError::BehindCamera(1))
        );
    }

    #[test]
    fn depth_from_disparity() {
        let mut r = rig();
        r.fx = 1000.0;
        r.baseline = 64.0;
        let p = triangulate(&r, (r.cx + 10.0, r.cy), (r.cx, r.cy)).unwrap();
        assert!((p[2] - 6400.0).abs() < 1e-9);
    }

    #[test]
    fn zero_disparity_is_an_error() {
        assert_eq!(
            triangulate(&rig(), (100.0, 50.0), (100.0, 50.0)),
            Err(GeometryError::ZeroDisparity)
        );
    }

    #[test]
    fn project_triangulate_round_trip() {
        let r = rig();
        let p = [37.0, -80.5, 912.0];
        let l = project_point(&r, Eye::Left, &p).unwrap();
        let rt = project_point(&r, Eye::Right, &p).unwrap();
        let back = triangulate(&r, l, rt).unwrap();
        assert!(math::dist(&p, &back) < 1e-9);
    }

    #[test]
    fn projection_jacobian_matches_finite_differences() {
        let r = rig();
        let p = [42.0, -17.0, 700.0];
        let (_, jac) = project_point_grad(&r, Eye::Right, &p).unwrap();
        let h = 1e-6;
        for axis in 0..3 {
            let mut plus = p;
            let mut minus = p;
            plus[axis] += h;
            minus[axis] -= h;
            let up = project_point(&r, Eye::Right, &plus).unwrap();
            let um = project_point(&r, Eye::Right, &minus).unwrap();
            let fd_u = (up.0 - um.0) / (2.0 * h);
            let fd_v = (up.1 - um.1) / (2.0 * h);
            assert!((jac[0][axis] - fd_u).abs() < 1e-6);
            assert!((jac[1][axis] - fd_v).abs() < 1e-6);
        }
    }
}
