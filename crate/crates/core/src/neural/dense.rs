use rand::Rng;

use super::{check_len, Matrix, NeuralError};

/// Fully connected layer `logits = vᵀ W + b` with `W` stored `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl DenseParams {
    pub fn zeros(input_dim: usize, output_dim: usize) -> Self {
        Self {
            weight: Matrix::zeros(input_dim, output_dim),
            bias: vec![0.0; output_dim],
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng>(input_dim: usize, output_dim: usize, rng: &mut R) -> Self {
        Self {
            weight: Matrix::glorot(input_dim, output_dim, rng),
            bias: vec![0.0; output_dim],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        check_len("dense bias", self.output_dim(), self.bias.len())
    }
}

pub fn dense_forward(params: &DenseParams, v: &[f64]) -> Result<Vec<f64>, NeuralError> {
    params.validate()?;
    check_len("dense input", params.input_dim(), v.len())?;
    let mut logits = params.bias.clone();
    params.weight.tmul_vec_acc(v, &mut logits);
    Ok(logits)
}

/// Accumulates `∂L/∂W` and `∂L/∂b` into `grads` and returns `∂L/∂v`.
pub fn dense_backward(
    params: &DenseParams,
    v: &[f64],
    grad_logits: &[f64],
    grads: &mut DenseParams,
) -> Result<Vec<f64>, NeuralError> {
    check_len("dense input", params.input_dim(), v.len())?;
    check_len("dense output gradient", params.output_dim(), grad_logits.len())?;
    check_len(
        "dense gradient container",
        params.weight.as_slice().len(),
        grads.weight.as_slice().len(),
    )?;
    grads.weight.add_outer(v, grad_logits);
    for (b, g) in grads.bias.iter_mut().zip(grad_logits) {
        *b += g;
    }
    let mut grad_v = vec![0.0; v.len()];
    params.weight.mul_vec_acc(grad_logits, &mut grad_v);
    Ok(grad_v)
}
