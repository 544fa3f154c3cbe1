//! Minimal dense numerics with reverse-mode differentiation.
//!
//! Everything the recurrent translation model needs — matrix-vector
//! products, gate nonlinearities, softmax, embedding row selection,
//! cross-entropy — is recorded on an eagerly evaluated tape ([`Graph`]) and
//! differentiated by one reverse sweep. The engine is single-threaded per
//! graph; tensors are plain values and may move between threads.

mod check;
mod graph;
mod lstm;
mod params;
mod tensor;

use thiserror::Error;

pub use check::{grad_check, DEFAULT_EPS};
pub use graph::{sigmoid, softmax, softmax_values, Graph, NodeId};
pub use lstm::{lstm_cell, run_lstm, zero_state, LstmState, LstmWeights};
pub use params::{apply_gradients, GradStore, ParamId, ParameterSet};
pub use tensor::Tensor;

/// Uniform initialization half-width for all weights.
pub const INIT_SCALE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum NumericsError {
    /// Operand shapes are inconsistent.
    #[error("shape error: {0}")]
    Shape(String),
    /// Input outside the operation's domain (e.g. empty vector).
    #[error("domain error: {0}")]
    Domain(String),
    /// API contract violated (bad index, non-scalar loss, ...).
    #[error("contract error: {0}")]
    Contract(String),
}
