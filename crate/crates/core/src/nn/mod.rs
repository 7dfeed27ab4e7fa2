//! A small dense network engine with hand-written backward passes.
//!
//! Everything works on row-major `[batch, features]` tensors. Layers cache
//! what they need during a training forward pass and accumulate parameter
//! gradients on backward; the `infer` paths are pure.

mod activation;
mod adam;
mod batchnorm;
mod dense;
mod gradcheck;
mod loss;
mod scalar;
mod tensor;

pub use activation::{relu, relu_backward, softmax_groups, softmax_groups_backward, Relu};
pub use adam::{Adam, AdamConfig};
pub use batchnorm::{BatchNorm, BatchNormConfig};
pub use dense::Dense;
pub use gradcheck::{gradient_check, GradCheckable, GradReport, ParamReport};
pub use loss::{cce_loss, kl_divergence, softmax_cce_grad, LOG_CLAMP};
pub use scalar::Scalar;
pub use tensor::{Param, Tensor};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("shape mismatch in {op}: expected {expected:?}, got {actual:?}")]
    Shape {
        op: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("batch norm in training mode needs a batch of at least 2 rows, got {0}")]
    BatchTooSmall(usize),
    #[error("last dimension {dim} is not divisible by group size {group}")]
    Group { dim: usize, group: usize },
    #[error("non-finite gradient in parameter `{0}`")]
    NonFiniteGradient(String),
    #[error("layer `{0}` has no cached forward pass")]
    NoCache(&'static str),
}

pub type Result<T> = std::result::Result<T, NnError>;
