//! Small dense numerical kernel: row-major matrices, the GRU recurrence and
//! its exact reverse-mode gradient, a dense layer, sigmoid/BCE, Adam,
//! inverted dropout, and a central-difference gradient checker.
//!
//! Everything is `f64`. There is no autodiff; each layer pairs a forward
//! function with a hand-written backward that accumulates into a gradient
//! container of the same shape as its parameters.

mod activation;
mod dense;
mod dropout;
mod gradcheck;
mod gru;
mod loss;
mod matrix;
mod optim;

pub use activation::{sigmoid, sigmoid_vec};
pub use dense::{dense_backward, dense_forward, DenseParams};
pub use dropout::{dropout, dropout_mask};
pub use gradcheck::{grad_check, relative_error, GradCheckReport};
pub use gru::{
    gru_backward, gru_backward_into, gru_encode, gru_step, GruBackward, GruParams, GruStep, GruTrace,
};
pub use loss::{bce_loss, bce_with_logits, BCE_EPS};
pub use matrix::Matrix;
pub use optim::{Optimizer, OptimizerState};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("{context}: expected length {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("dropout rate must lie in [0, 1), got {0}")]
    DropoutRate(f64),
    #[error("optimizer received {found} tensors, state tracks {expected}")]
    TensorCount { expected: usize, found: usize },
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<(), NeuralError> {
    if expected == found {
        Ok(())
    } else {
        Err(NeuralError::Shape {
            context,
            expected,
            found,
        })
    }
}
