//! 1€ filter: adaptive exponential smoothing whose cutoff rises with the
//! smoothed derivative, trading jitter against lag.

use super::TrackerError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneEuroConfig<R> {
    /// Cutoff floor, Hz; lower smooths more at rest.
    pub min_cutoff: R,
    /// Speed coefficient; higher reduces lag on fast motion.
    pub beta: R,
    /// Cutoff for the derivative estimate, Hz.
    pub d_cutoff: R,
}

impl<R: Real> Default for OneEuroConfig<R> {
    fn default() -> Self {
        Self {
            min_cutoff: R::of(1.0),
            beta: R::of(0.007),
            d_cutoff: R::of(1.0),
        }
    }
}

/// Per-signal filter state: smoothed value, smoothed derivative, last
/// timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OneEuroState<R> {
    prev: Option<(R, R, R)>,
}

impl<R: Real> OneEuroState<R> {
    /// Feeds one sample at time `t` seconds. The first sample passes
    /// through; later timestamps must strictly increase.
    pub fn step(&mut self, cfg: &OneEuroConfig<R>, x: R, t: R) -> Result<R, TrackerError> {
        let Some((x_prev, dx_prev, t_prev)) = self.prev else {
            self.prev = Some((x, R::zero(), t));
            return Ok(x);
        };
        let te = t - t_prev;
        if te <= R::zero() {
            return Err(TrackerError::NonMonotonicTime);
        }
        let dx = (x - x_prev) / te;
        let dx_hat = lowpass(smoothing_alpha(te, cfg.d_cutoff), dx, dx_prev);
        let cutoff = cfg.min_cutoff + cfg.beta * dx_hat.abs();
        let x_hat = lowpass(smoothing_alpha(te, cutoff), x, x_prev);
        self.prev = Some((x_hat, dx_hat, t));
        Ok(x_hat)
    }
}

/// `α = 1 / (1 + τ/Tₑ)` with `τ = 1/(2π f_c)`.
fn smoothing_alpha<R: Real>(te: R, cutoff: R) -> R {
    let tau = R::one() / (R::of(std::f64::consts::TAU) * cutoff);
    R::one() / (R::one() + tau / te)
}

fn lowpass<R: Real>(alpha: R, x: R, x_prev: R) -> R {
    // Incremental form: exact fixed point on constant signals.
    x_prev + alpha * (x - x_prev)
}
