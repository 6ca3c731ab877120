//! Rotation representations: the 6-value continuous form (two unnormalized
//! matrix columns, orthonormalized by Gram-Schmidt) and axis-angle.
//!
//! The 6-value form is what the pose head regresses; axis-angle is the
//! ablation baseline. `rot6d_forward`/`rot6d_vjp` expose the Gram-Schmidt
//! intermediates so losses can backpropagate a matrix cotangent onto the six
//! inputs in one pass.

use super::{GeometryError, RotationMatrix};
use crate::math::{self, Mat3, Vec3};
use crate::scalar::Real;

const DEGENERATE_EPS: f64 = 1e-12;

/// Gram-Schmidt intermediates kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Rot6dCache<R> {
    a2: Vec3<R>,
    b1: Vec3<R>,
    b2: Vec3<R>,
    n1: R,
    n2: R,
    proj: R,
}

/// Orthonormalizes `(a1, a2)` into a rotation matrix with columns
/// `b1 = a1/|a1|`, `b2 = normalize(a2 − (a2·b1)b1)`, `b3 = b1×b2`.
pub fn rot6d_to_matrix<R: Real>(r6: &[R; 6]) -> Result<RotationMatrix<R>, GeometryError> {
    rot6d_forward(r6).map(|(m, _)| m)
}

/// As [`rot6d_to_matrix`], also returning the cache for [`rot6d_vjp`].
pub fn rot6d_forward<R: Real>(
    r6: &[R; 6],
) -> Result<(RotationMatrix<R>, Rot6dCache<R>), GeometryError> {
    rot6d_forward_eps(r6, R::zero()).ok_or(GeometryError::DegenerateRotation)
}

/// Infallible variant used inside losses: both normalizations carry a 1e-8
/// additive regularizer, so degenerate head outputs yield a finite
/// near-rotation instead of an error.
pub fn rot6d_forward_safe<R: Real>(r6: &[R; 6]) -> (RotationMatrix<R>, Rot6dCache<R>) {
    rot6d_forward_eps(r6, R::of(1e-8)).expect("regularized norms are positive")
}

fn rot6d_forward_eps<R: Real>(
    r6: &[R; 6],
    reg: R,
) -> Option<(RotationMatrix<R>, Rot6dCache<R>)> {
    let a1 = [r6[0], r6[1], r6[2]];
    let a2 = [r6[3], r6[4], r6[5]];
    let eps = R::of(DEGENERATE_EPS);

    let n1 = math::norm(&a1) + reg;
    if n1 < eps {
        return None;
    }
    let b1 = math::scale(&a1, R::one() / n1);

    let proj = math::dot(&a2, &b1);
    let u2 = math::sub(&a2, &math::scale(&b1, proj));
    let n2 = math::norm(&u2) + reg;
    if n2 < eps {
        return None;
    }
    let b2 = math::scale(&u2, R::one() / n2);
    let b3 = math::cross(&b1, &b2);

    let m = [
        [b1[0], b2[0], b3[0]],
        [b1[1], b2[1], b3[1]],
        [b1[2], b2[2], b3[2]],
    ];
    Some((
        RotationMatrix::from_orthonormal(m),
        Rot6dCache {
            a2,
            b1,
            b2,
            n1,
            n2,
            proj,
        },
    ))
}

/// Pulls a cotangent on the rotation matrix back onto the six inputs.
pub fn rot6d_vjp<R: Real>(cache: &Rot6dCache<R>, d_matrix: &Mat3<R>) -> [R; 6] {
    let Rot6dCache {
        a2,
        b1,
        b2,
        n1,
        n2,
        proj,
    } = cache;

    let b3_bar = math::column(d_matrix, 2);
    // b3 = b1 × b2
    let mut b1_bar = math::add(&math::column(d_matrix, 0), &math::cross(b2, &b3_bar));
    let b2_bar = math::add(&math::column(d_matrix, 1), &math::cross(&b3_bar, b1));

    // b2 = u2 / n2
    let u2_bar = math::scale(
        &math::sub(&b2_bar, &math::scale(b2, math::dot(b2, &b2_bar))),
        R::one() / *n2,
    );

    // u2 = a2 − (a2·b1) b1
    let u2b1 = math::dot(&u2_bar, b1);
    let a2_bar = math::sub(&u2_bar, &math::scale(b1, u2b1));
    b1_bar = math::add(&b1_bar, &math::scale(a2, -u2b1));
    b1_bar = math::add(&b1_bar, &math::scale(&u2_bar, -*proj));

    // b1 = a1 / n1
    let a1_bar = math::scale(
        &math::sub(&b1_bar, &math::scale(b1, math::dot(b1, &b1_bar))),
        R::one() / *n1,
    );

    [a1_bar[0], a1_bar[1], a1_bar[2], a2_bar[0], a2_bar[1], a2_bar[2]]
}

/// First two columns of a rotation matrix; the inverse of [`rot6d_to_matrix`]
/// used for dataset labeling.
pub fn matrix_to_rot6d<R: Real>(m: &Mat3<R>) -> Result<[R; 6], GeometryError> {
    if super::rotation_defect(m) > 1e-6 {
        return Err(GeometryError::InvalidRotation);
    }
    Ok([
        m[0][0], m[1][0], m[2][0], m[0][1], m[1][1], m[2][1],
    ])
}

/// Rodrigues formula; the zero vector maps to the identity.
pub fn axis_angle_to_matrix<R: Real>(aa: &Vec3<R>) -> RotationMatrix<R> {
    let theta = math::norm(aa);
    let i = math::identity3::<R>();
    if theta < R::of(1e-8) {
        // Second-order expansion, orthonormal to O(theta^3).
        let k = skew(aa);
        let k2 = math::mat_mul(&k, &k);
        let mut m = i;
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] = m[r][c] + k[r][c] + R::of(0.5) * k2[r][c];
            }
        }
        return RotationMatrix::from_orthonormal(m);
    }
    let axis = math::scale(aa, R::one() / theta);
    let k = skew(&axis);
    let k2 = math::mat_mul(&k, &k);
    let (s, c) = (theta.sin(), theta.cos());
    let mut m = i;
    for r in 0..3 {
        for col in 0..3 {
            m[r][col] = m[r][col] + s * k[r][col] + (R::one() - c) * k2[r][col];
        }
    }
    RotationMatrix::from_orthonormal(m)
}

/// Log map: axis times angle in `[0, π]`. Inverse of
/// [`axis_angle_to_matrix`] up to the sign ambiguity at exactly π.
pub fn matrix_to_axis_angle<R: Real>(rot: &RotationMatrix<R>) -> Vec3<R> {
    let m = rot.matrix();
    let trace = m[0][0] + m[1][1] + m[2][2];
    let cos_theta = ((trace - R::one()) * R::of(0.5))
        .max(-R::one())
        .min(R::one());
    let theta = cos_theta.acos();

    let vee = [
        m[2][1] - m[1][2],
        m[0][2] - m[2][0],
        m[1][0] - m[0][1],
    ];

    if theta < R::of(1e-7) {
        return math::scale(&vee, R::of(0.5));
    }
    if theta.as_f64() > std::f64::consts::PI - 1e-5 {
        // Near π the vee part vanishes; recover the axis from the diagonal
        // of R = 2aaᵀ − I + O(π−θ).
        let half = R::of(0.5);
        let one = R::one();
        let ax = ((m[0][0] + one) * half).max(R::zero()).sqrt();
        let ay = ((m[1][1] + one) * half).max(R::zero()).sqrt();
        let az = ((m[2][2] + one) * half).max(R::zero()).sqrt();
        // Fix signs from the off-diagonal sums, anchored on the largest
        // component.
        let mut axis = [ax, ay, az];
        if ax >= ay && ax >= az {
            if m[0][1] + m[1][0] < R::zero() {
                axis[1] = -axis[1];
            }
            if m[0][2] + m[2][0] < R::zero() {
                axis[2] = -axis[2];
            }
        } else if ay >= ax && ay >= az {
            if m[0][1] + m[1][0] < R::zero() {
                axis[0] = -axis[0];
            }
            if m[1][2] + m[2][1] < R::zero() {
                axis[2] = -axis[2];
            }
        } else {
            if m[0][2] + m[2][0] < R::zero() {
                axis[0] = -axis[0];
            }
            if m[1][2] + m[2][1] < R::zero() {
                axis[1] = -axis[1];
            }
        }
        let n = math::norm(&axis);
        if n > R::zero() {
            return math::scale(&axis, theta / n);
        }
        return [theta, R::zero(), R::zero()];
    }
    math::scale(&vee, theta / (R::of(2.0) * theta.sin()))
}

/// Pulls a cotangent on `R(aa)` back onto the axis-angle vector.
///
/// Uses the closed form `∂R/∂aᵢ = (aᵢ[a]× + [a × (I−R)eᵢ]×)/|a|² · R`
/// (Gallego & Yezzi), with the skew-generator limit at the identity.
pub fn axis_angle_vjp<R: Real>(aa: &Vec3<R>, d_matrix: &Mat3<R>) -> Vec3<R> {
    let theta2 = math::dot(aa, aa);
    if theta2 < R::of(1e-14) {
        // ∂R/∂aᵢ → [eᵢ]× at the identity.
        return [
            d_matrix[2][1] - d_matrix[1][2],
            d_matrix[0][2] - d_matrix[2][0],
            d_matrix[1][0] - d_matrix[0][1],
        ];
    }
    let rot = axis_angle_to_matrix(aa);
    let m = rot.matrix();
    let mut out = [R::zero(); 3];
    for i in 0..3 {
        let mut e = [R::zero(); 3];
        e[i] = R::one();
        // v = a × (I − R)eᵢ
        let re = math::mat_vec(m, &e);
        let v = math::cross(aa, &math::sub(&e, &re));
        let w = math::add(&math::scale(aa, aa[i]), &v);
        let gen = [
            [R::zero(), -w[2], w[1]],
            [w[2], R::zero(), -w[0]],
            [-w[1], w[0], R::zero()],
        ];
        // ∂R/∂aᵢ = gen/θ² · R
        let dr = math::mat_mul(&gen, m);
        let mut s = R::zero();
        for r in 0..3 {
            for c in 0..3 {
                s += d_matrix[r][c] * dr[r][c];
            }
        }
        out[i] = s / theta2;
    }
    out
}

fn skew<R: Real>(v: &Vec3<R>) -> Mat3<R> {
    let z = R::zero();
    [
        [z, -v[2], v[1]],
        [v[2], z, -v[0]],
        [-v[1], v[0], z],
    ]
}
