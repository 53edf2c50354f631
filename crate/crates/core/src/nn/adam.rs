use serde::{Deserialize, Serialize};

use crate::error::{usage_err, Result};

/// Bias-corrected Adam over a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    first: Vec<f64>,
    second: Vec<f64>,
    steps: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        Self::with_betas(n_params, learning_rate, 0.9, 0.999, 1e-8)
    }

    pub fn with_betas(n_params: usize, learning_rate: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            first: vec![0.0; n_params],
            second: vec![0.0; n_params],
            steps: 0,
            learning_rate,
            beta1,
            beta2,
            eps,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(usage_err(format!(
                "adam state tracks {} parameters, got {} params / {} grads",
                self.first.len(),
                params.len(),
                grads.len()
            )));
        }
        self.steps += 1;
        let t = self.steps as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut())
            .zip(self.second.iter_mut())
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_matches_closed_form() {
        for g in [3.0, -0.25, 1e-3, -42.0] {
            let mut adam = AdamState::new(1, 0.01);
            let mut w = [0.5];
            adam.step(&mut w, &[g]).unwrap();
            // m_hat = g and v_hat = g^2 after bias correction.
            let expected = 0.5 - 0.01 * g / (g.abs() + 1e-8);
            assert!((w[0] - expected).abs() < 1e-10, "g = {g}");
        }
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut adam = AdamState::new(3, 0.1);
        let mut w = [1.0, -2.0, 3.5];
        for _ in 0..50 {
            adam.step(&mut w, &[0.0; 3]).unwrap();
        }
        assert_eq!(w, [1.0, -2.0, 3.5]);
    }

    #[test]
    fn minimises_quadratic() {
        let mut adam = AdamState::new(1, 0.1);
        let mut w = [1.0];
        for _ in 0..200 {
            let g = 2.0 * w[0];
            adam.step(&mut w, &[g]).unwrap();
        }
        assert!(w[0].abs() < 0.01, "w = {}", w[0]);
    }

    #[test]
    fn shape_mismatch_errors() {
        let mut adam = AdamState::new(2, 0.1);
        assert!(adam.step(&mut [0.0; 3], &[0.0; 3]).is_err());
    }
}
