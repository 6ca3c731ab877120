//! Adam over flat `f64` parameter slices; shared by network training and
//! pose fitting.

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second-moment state for one flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(cfg: AdamConfig, len: usize) -> Self {
        Self {
            cfg,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    /// One update; `lr_scale` multiplies the configured rate (for decay
    /// schedules), `param_scale` multiplies the step per parameter (for
    /// mixed-unit parameter vectors).
    pub fn step_scaled(
        &mut self,
        params: &mut [f64],
        grads: &[f64],
        lr_scale: f64,
        param_scale: Option<&[f64]>,
    ) {
        assert_eq!(params.len(), grads.len());
        assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let b1 = self.cfg.beta1;
        let b2 = self.cfg.beta2;
        let bias1 = 1.0 - b1.powi(self.t as i32);
        let bias2 = 1.0 - b2.powi(self.t as i32);
        let lr = self.cfg.lr * lr_scale;
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g;
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * g * g;
            let m_hat = self.m[i] / bias1;
            let v_hat = self.v[i] / bias2;
            let scale = param_scale.map_or(1.0, |s| s[i]);
            params[i] -= lr * scale * m_hat / (v_hat.sqrt() + self.cfg.eps);
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.step_scaled(params, grads, 1.0, None);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descends_a_quadratic() {
        let mut adam = Adam::new(
            AdamConfig {
                lr: 0.1,
                ..Default::default()
            },
            2,
        );
        let mut x = [5.0, -3.0];
        for _ in 0..500 {
            let g = [2.0 * x[0], 2.0 * x[1]];
            adam.step(&mut x, &g);
        }
        assert!(x[0].abs() < 1e-3 && x[1].abs() < 1e-3, "{x:?}");
    }

    #[test]
    fn param_scale_scales_the_step() {
        let cfg = AdamConfig::default();
        let mut a = Adam::new(cfg, 1);
        let mut b = Adam::new(cfg, 1);
        let mut xa = [0.0];
        let mut xb = [0.0];
        a.step_scaled(&mut xa, &[1.0], 1.0, None);
        b.step_scaled(&mut xb, &[1.0], 1.0, Some(&[100.0]));
        assert!((xb[0] / xa[0] - 100.0).abs() < 1e-12);
    }
}
