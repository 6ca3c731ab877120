//! Constant-velocity Kalman filter on box state
//! `(cx, cy, w, h, vcx, vcy, vw, vh)`.

use super::TrackerError;
use crate::scalar::Real;

const N: usize = 8;
const M: usize = 4;

/// Filter state: mean and covariance. The covariance is re-symmetrized
/// after every step.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanBox<R> {
    pub state: [R; N],
    pub covariance: [[R; N]; N],
}

impl<R: Real> KalmanBox<R> {
    /// Initializes at a measured box with zero velocity and a wide velocity
    /// prior.
    pub fn from_measurement(z: &[R; M]) -> Self {
        let mut state = [R::zero(); N];
        state[..M].copy_from_slice(z);
        let mut covariance = [[R::zero(); N]; N];
        for i in 0..M {
            covariance[i][i] = R::of(1.0);
        }
        for i in M..N {
            covariance[i][i] = R::of(100.0);
        }
        Self { state, covariance }
    }

    /// Constant-velocity propagation; position entries gain their velocity,
    /// covariance grows by the process noise.
    pub fn predict(&mut self, q_pos: R, q_vel: R) {
        for i in 0..M {
            self.state[i] = self.state[i] + self.state[i + M];
        }
        // P = F P Fᵀ with F = [[I, I], [0, I]] in 4x4 blocks.
        let p = &self.covariance;
        let mut next = [[R::zero(); N]; N];
        for i in 0..N {
            for j in 0..N {
                let mut v = p[i][j];
                if i < M {
                    v = v + p[i + M][j];
                }
                if j < M {
                    v = v + p[i][j + M];
                }
                if i < M && j < M {
                    v = v + p[i + M][j + M];
                }
                next[i][j] = v;
            }
        }
        for (i, row) in next.iter_mut().enumerate() {
            row[i] = row[i] + if i < M { q_pos } else { q_vel };
        }
        self.covariance = next;
        self.symmetrize();
    }

    /// Standard measurement update with `H = [I 0]`. A singular innovation
    /// is repaired once by re-symmetrizing and adding 1e-6 jitter.
    pub fn update(&mut self, z: &[R; M], r_noise: R) -> Result<(), TrackerError> {
        for attempt in 0..2 {
            let mut s = [[R::zero(); M]; M];
            for i in 0..M {
                for j in 0..M {
                    s[i][j] = self.covariance[i][j];
                }
                s[i][i] = s[i][i] + r_noise;
            }
            match invert4(&s) {
                Some(s_inv) => {
                    // K = P Hᵀ S⁻¹  (N x M)
                    let mut gain = [[R::zero(); M]; N];
                    for i in 0..N {
                        for j in 0..M {
                            let mut v = R::zero();
                            for k in 0..M {
                                v = v + self.covariance[i][k] * s_inv[k][j];
                            }
                            gain[i][j] = v;
                        }
                    }
                    let mut innovation = [R::zero(); M];
                    for i in 0..M {
                        innovation[i] = z[i] - self.state[i];
                    }
                    for i in 0..N {
                        let mut v = R::zero();
                        for j in 0..M {
                            v = v + gain[i][j] * innovation[j];
                        }
                        self.state[i] = self.state[i] + v;
                    }
                    // P = (I − K H) P; H picks the first M rows of P.
                    let p = self.covariance;
                    for i in 0..N {
                        for j in 0..N {
                            let mut v = R::zero();
                            for k in 0..M {
                                v = v + gain[i][k] * p[k][j];
                            }
                            self.covariance[i][j] = p[i][j] - v;
                        }
                    }
                    self.symmetrize();
                    return Ok(());
                }
                None if attempt == 0 => {
                    self.symmetrize();
                    for i in 0..N {
                        self.covariance[i][i] = self.covariance[i][i] + R::of(1e-6);
                    }
                }
                None => return Err(TrackerError::SingularInnovation),
            }
        }
        unreachable!()
    }

    pub fn measured_box(&self) -> [R; M] {
        [self.state[0], self.state[1], self.state[2], self.state[3]]
    }

    pub fn covariance_trace(&self) -> R {
        (0..N).map(|i| self.covariance[i][i]).sum()
    }

    fn symmetrize(&mut self) {
        let half = R::of(0.5);
        for i in 0..N {
            for j in (i + 1)..N {
                let v = (self.covariance[i][j] + self.covariance[j][i]) * half;
                self.covariance[i][j] = v;
                self.covariance[j][i] = v;
            }
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting; `None` when a pivot
/// collapses.
fn invert4<R: Real>(m: &[[R; M]; M]) -> Option<[[R; M]; M]> {
    let mut a = *m;
    let mut inv = [[R::zero(); M]; M];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = R::one();
    }
    for col in 0..M {
        let mut pivot = col;
        for row in (col + 1)..M {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < R::of(1e-12) {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = R::one() / a[col][col];
        for j in 0..M {
            a[col][j] = a[col][j] * scale;
            inv[col][j] = inv[col][j] * scale;
        }
        for row in 0..M {
            if row == col {
                continue;
            }
            let f = a[row][col];
            for j in 0..M {
                a[row][j] = a[row][j] - f * a[col][j];
                inv[row][j] = inv[row][j] - f * inv[col][j];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filter() -> KalmanBox<f64> {
        KalmanBox::from_measurement(&[100.0, 50.0, 40.0, 20.0])
    }

    #[test]
    fn zero_velocity_prediction_keeps_the_box() {
        let mut k = filter();
        let before = k.measured_box();
        k.predict(1.0, 0.25);
        assert_eq!(k.measured_box(), before);
    }

    #[test]
    fn velocity_advances_position() {
        let mut k = filter();
        k.state[4] = 3.0;
        k.predict(1.0, 0.25);
        assert_eq!(k.state[0], 103.0);
    }

    #[test]
    fn prediction_grows_covariance_trace() {
        let mut k = filter();
        let before = k.covariance_trace();
        k.predict(1.0, 0.25);
        assert!(k.covariance_trace() > before);
    }

    #[test]
    fn update_with_predicted_measurement_keeps_the_mean() {
        let mut k = filter();
        let z = k.measured_box();
        k.update(&z, 1.0).unwrap();
        for (s, e) in k.measured_box().iter().zip(z) {
            assert!((s - e).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_measurement_noise_pins_position_to_measurement() {
        let mut k = filter();
        let z = [120.0, 60.0, 42.0, 22.0];
        k.update(&z, 1e-12).unwrap();
        for (s, e) in k.measured_box().iter().zip(z) {
            assert!((s - e).abs() < 1e-6);
        }
    }

    #[test]
    fn repeated_updates_converge_to_the_measurement() {
        let mut k = filter();
        let z = [200.0, 90.0, 30.0, 15.0];
        for _ in 0..50 {
            k.predict(1.0, 0.25);
            k.update(&z, 1.0).unwrap();
        }
        let b = k.measured_box();
        let err: f64 = b.iter().zip(z).map(|(s, e)| (s - e).abs()).sum();
        assert!(err < 1e-3, "residual {err}");
    }

    #[test]
    fn covariance_stays_symmetric_and_posterior_shrinks() {
        let mut k = filter();
        let mut rng_state = 1u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (rng_state >> 33) as f64 / (1u64 << 31) as f64
        };
        for _ in 0..10_000 {
            k.predict(1.0, 0.25);
            let prior = k.covariance;
            let z = [
                100.0 + 10.0 * next(),
                50.0 + 10.0 * next(),
                40.0 + next(),
                20.0 + next(),
            ];
            k.update(&z, 1.0).unwrap();
            for i in 0..8 {
                for j in 0..8 {
                    assert!((k.covariance[i][j] - k.covariance[j][i]).abs() < 1e-9);
                }
            }
            // Measured-block posterior ⪯ prior: check with random probes.
            for _ in 0..4 {
                let x: [f64; 4] = std::array::from_fn(|_| next() - 0.5);
                let quad = |p: &[[f64; 8]; 8]| {
                    let mut s = 0.0;
                    for i in 0..4 {
                        for j in 0..4 {
                            s += x[i] * p[i][j] * x[j];
                        }
                    }
                    s
                };
                assert!(quad(&k.covariance) <= quad(&prior) + 1e-9);
            }
        }
    }

    #[test]
    fn invert4_matches_identity_product() {
        let m: [[f64; 4]; 4] = [
            [4.0, 1.0, 0.5, 0.0],
            [1.0, 3.0, 0.2, 0.1],
            [0.5, 0.2, 5.0, 0.3],
            [0.0, 0.1, 0.3, 2.0],
        ];
        let inv = invert4(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    s += m[i][k] * inv[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-10);
            }
        }
    }
}
