//! Small fixed-size vector/matrix helpers over [`Real`] scalars.
//!
//! 3-vectors are plain `[R; 3]`, matrices row-major `[[R; 3]; 3]`; everything
//! here is allocation-free.

use crate::scalar::Real;

pub type Vec3<R> = [R; 3];
pub type Mat3<R> = [[R; 3]; 3];

#[inline]
pub fn dot<R: Real>(a: &Vec3<R>, b: &Vec3<R>) -> R {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<R: Real>(a: &Vec3<R>, b: &Vec3<R>) -> Vec3<R> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm<R: Real>(a: &Vec3<R>) -> R {
    dot(a, a).sqrt()
}

#[inline]
pub fn add<R: Real>(a: &Vec3<R>, b: &Vec3<R>) -> Vec3<R> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub<R: Real>(a: &Vec3<R>, b: &Vec3<R>) -> Vec3<R> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<R: Real>(a: &Vec3<R>, s: R) -> Vec3<R> {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dist<R: Real>(a: &Vec3<R>, b: &Vec3<R>) -> R {
    norm(&sub(a, b))
}

pub fn identity3<R: Real>() -> Mat3<R> {
    let (o, z) = (R::one(), R::zero());
    [[o, z, z], [z, o, z], [z, z, o]]
}

#[inline]
pub fn mat_vec<R: Real>(m: &Mat3<R>, v: &Vec3<R>) -> Vec3<R> {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

/// `mᵀ·v`, i.e. applying the inverse of a rotation matrix.
#[inline]
pub fn mat_t_vec<R: Real>(m: &Mat3<R>, v: &Vec3<R>) -> Vec3<R> {
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat_mul<R: Real>(a: &Mat3<R>, b: &Mat3<R>) -> Mat3<R> {
    let mut c = [[R::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, bk) in b.iter().enumerate() {
                c[i][j] = c[i][j] + a[i][k] * bk[j];
            }
        }
    }
    c
}

pub fn transpose<R: Real>(m: &Mat3<R>) -> Mat3<R> {
    let mut t = [[R::zero(); 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            t[j][i] = v;
        }
    }
    t
}

pub fn det3<R: Real>(m: &Mat3<R>) -> R {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Column `j` of a row-major matrix.
#[inline]
pub fn column<R: Real>(m: &Mat3<R>, j: usize) -> Vec3<R> {
    [m[0][j], m[1][j], m[2][j]]
}

/// Rank-one update `m += g·vᵀ`; the workhorse of the rotation gradients.
#[inline]
pub fn add_outer<R: Real>(m: &mut Mat3<R>, g: &Vec3<R>, v: &Vec3<R>) {
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = m[i][j] + g[i] * v[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_follows_right_hand_rule() {
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 1.0, 0.0];
        assert_eq!(cross(&x, &y), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn transpose_undoes_itself() {
        let m = [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        assert_eq!(transpose(&transpose(&m)), m);
    }

    #[test]
    fn mat_t_vec_matches_explicit_transpose() {
        let m = [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]];
        let v = [0.5, -1.0, 2.0];
        assert_eq!(mat_t_vec(&m, &v), mat_vec(&transpose(&m), &v));
    }
}
