use serde::{Deserialize, Serialize};

use super::param::ParamStore;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam update of every parameter, then zero the
/// gradients.
pub fn adam_step(store: &mut ParamStore, cfg: &AdamConfig) {
    for p in store.iter_mut() {
        p.step += 1;
        let t = p.step as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        let values = p.value.as_mut_slice();
        let grads = p.grad.as_mut_slice();
        let m = p.first_moment.as_mut_slice();
        let v = p.second_moment.as_mut_slice();
        for i in 0..values.len() {
            let g = grads[i];
            if g == 0.0 && m[i] == 0.0 && v[i] == 0.0 {
                continue;
            }
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            values[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            grads[i] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Matrix;

    fn scalar_store(v: f64) -> (ParamStore, crate::nn::ParamId) {
        let mut s = ParamStore::new();
        let id = s.add("x", Matrix::from_vec(1, 1, vec![v]).unwrap());
        (s, id)
    }

    #[test]
    fn first_step_is_lr_times_sign() {
        let cfg = AdamConfig::default();
        for g in [3.0, -0.02, 1e-3] {
            let (mut s, id) = scalar_store(1.0);
            s.grad_mut(id).set(0, 0, g);
            adam_step(&mut s, &cfg);
            let update = s.value(id).get(0, 0) - 1.0;
            assert!((update + cfg.lr * g / (g.abs() + cfg.eps)).abs() < 1e-9);
            assert_eq!(s.grad(id).get(0, 0), 0.0);
            assert_eq!(s.get(id).step, 1);
        }
    }

    #[test]
    fn zero_gradient_leaves_value() {
        let (mut s, id) = scalar_store(0.25);
        adam_step(&mut s, &AdamConfig::default());
        assert_eq!(s.value(id).get(0, 0), 0.25);
    }

    #[test]
    fn constant_gradient_two_steps() {
        // with g = 1 both bias-corrected steps equal lr/(1+eps)
        let cfg = AdamConfig::default();
        let (mut s, id) = scalar_store(0.0);
        let mut trace = vec![0.0];
        for _ in 0..2 {
            s.grad_mut(id).set(0, 0, 1.0);
            adam_step(&mut s, &cfg);
            trace.push(s.value(id).get(0, 0));
        }
        assert!(trace[1] < trace[0] && trace[2] < trace[1]);
        let step = cfg.lr / (1.0 + cfg.eps);
        assert!((trace[2] + 2.0 * step).abs() < 1e-12);
    }
}
