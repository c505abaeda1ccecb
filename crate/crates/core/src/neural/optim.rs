use serde::{Deserialize, Serialize};

use super::{check_len, NeuralError};

/// Update rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Optimizer {
    Adam { beta1: f64, beta2: f64, eps: f64 },
    Sgd,
}

impl Optimizer {
    pub const fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl Default for Optimizer {
    fn default() -> Self {
        Self::adam()
    }
}

/// Optimizer hyperparameters plus per-tensor moment accumulators.
///
/// Accumulators are allocated on the first [`step`](Self::step) from the
/// shapes of the tensors passed in; later steps must pass the same shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub rule: Optimizer,
    pub lr: f64,
    pub step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new(rule: Optimizer, lr: f64) -> Self {
        Self {
            rule,
            lr,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn adam(lr: f64) -> Self {
        Self::new(Optimizer::adam(), lr)
    }

    pub fn first_moments(&self) -> &[Vec<f64>] {
        &self.first
    }

    pub fn second_moments(&self) -> &[Vec<f64>] {
        &self.second
    }

    /// One update of every tensor in `params` using the matching `grads`.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NeuralError> {
        if params.len() != grads.len() {
            return Err(NeuralError::TensorCount {
                expected: params.len(),
                found: grads.len(),
            });
        }
        for (p, g) in params.iter().zip(grads) {
            check_len("optimizer gradient", p.len(), g.len())?;
        }
        if self.first.is_empty() {
            self.first = params.iter().map(|p| vec![0.0; p.len()]).collect();
            self.second = self.first.clone();
        } else {
            if self.first.len() != params.len() {
                return Err(NeuralError::TensorCount {
                    expected: self.first.len(),
                    found: params.len(),
                });
            }
            for (m, p) in self.first.iter().zip(params.iter()) {
                check_len("optimizer state", m.len(), p.len())?;
            }
        }
        self.step += 1;
        match self.rule {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    for (x, dx) in p.iter_mut().zip(g.iter()) {
                        *x -= self.lr * dx;
                    }
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let t = self.step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for (((p, g), m), v) in params
                    .iter_mut()
                    .zip(grads)
                    .zip(&mut self.first)
                    .zip(&mut self.second)
                {
                    for i in 0..p.len() {
                        let gi = g[i];
                        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
                        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
                        let m_hat = m[i] / c1;
                        let v_hat = v[i] / c2;
                        p[i] -= self.lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = OptimizerState::adam(0.001);
        let mut p = vec![1.0, -2.0];
        s.step(&mut [&mut p[..]], &[&[0.0, 0.0]]).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        for g in [1e-3, 0.5, -7.0, 1e3] {
            let mut s = OptimizerState::adam(0.001);
            let mut p = [0.0];
            s.step(&mut [&mut p[..]], &[&[g]]).unwrap();
            assert!((p[0].abs() - 0.001).abs() < 1e-6, "g={g} Δ={}", p[0]);
            assert_eq!(p[0].signum(), -g.signum());
        }
    }

    #[test]
    fn two_steps_match_hand_trace() {
        let (lr, b1, b2, eps): (f64, f64, f64, f64) = (0.01, 0.9, 0.999, 1e-8);
        let mut s = OptimizerState::adam(lr);
        let mut p = [0.5];
        s.step(&mut [&mut p[..]], &[&[0.2]]).unwrap();
        s.step(&mut [&mut p[..]], &[&[-0.4]]).unwrap();

        // step 1: m = 0.02, v = 4e-5, m̂ = 0.2, v̂ = 0.04
        let p1 = 0.5 - lr * 0.2 / (0.04f64.sqrt() + eps);
        // step 2: m = 0.9·0.02 + 0.1·(-0.4) = -0.022
        //         v = 0.999·4e-5 + 0.001·0.16 = 1.9996e-4
        let m2 = b1 * 0.02 + (1.0 - b1) * -0.4;
        let v2 = b2 * 4e-5 + (1.0 - b2) * 0.16;
        let p2 = p1 - lr * (m2 / (1.0 - b1 * b1)) / ((v2 / (1.0 - b2 * b2)).sqrt() + eps);
        assert!((p[0] - p2).abs() < 1e-15, "{} vs {p2}", p[0]);
    }

    #[test]
    fn sgd_rule() {
        let mut s = OptimizerState::new(Optimizer::Sgd, 0.1);
        let mut p = [1.0];
        s.step(&mut [&mut p[..]], &[&[2.0]]).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let mut s = OptimizerState::adam(0.001);
        let mut p = [1.0];
        assert!(s.step(&mut [&mut p[..]], &[&[1.0, 2.0]]).is_err());
        s.step(&mut [&mut p[..]], &[&[1.0]]).unwrap();
        let mut q = [1.0, 2.0];
        assert!(s.step(&mut [&mut q[..]], &[&[1.0, 2.0]]).is_err());
    }
}
