//! Global-general-attention encoder-decoder with input feeding.
//!
//! A stacked (optionally bidirectional) LSTM encoder reads context-aware
//! word embeddings; the decoder is a stacked unidirectional LSTM whose
//! bottom layer consumes the previous target embedding concatenated with the
//! previous attentional vector. Attention scores are bilinear in the
//! previous decoder state and each encoder state.

mod checkpoint;
mod model;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{ContextError, ContextKind, IntegrationKind};
use crate::numerics::NumericsError;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use model::{DecoderState, EncoderStates, Model, RunMode, StepOutput};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

/// Encoder directionality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Uni,
    Bi,
}

impl Direction {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uni" => Some(Direction::Uni),
            "bi" => Some(Direction::Bi),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Uni => "uni",
            Direction::Bi => "bi",
        }
    }
}

/// Full architecture configuration. Every encoder/context/integration cell
/// of the experiment grid is expressible here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Word embedding dimension, shared by encoder, decoder, and context
    /// network inputs.
    pub d: usize,
    /// Decoder hidden size; bidirectional encoders use `hidden / 2` per
    /// direction so the concatenated state matches.
    pub hidden: usize,
    pub direction: Direction,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub context: ContextKind,
    pub integration: IntegrationKind,
    pub src_vocab: usize,
    pub tgt_vocab: usize,
    /// Dropout probability between stacked recurrent layers (training only).
    pub dropout: f64,
}

impl ModelConfig {
    /// A small baseline used as a starting point in tests and tools.
    pub fn toy(d: usize, src_vocab: usize, tgt_vocab: usize) -> Self {
        ModelConfig {
            d,
            hidden: d,
            direction: Direction::Bi,
            enc_layers: 2,
            dec_layers: 2,
            context: ContextKind::None,
            integration: IntegrationKind::Concat,
            src_vocab,
            tgt_vocab,
            dropout: 0.0,
        }
    }

    /// Hidden size per encoder direction.
    pub fn enc_hidden_per_dir(&self) -> usize {
        match self.direction {
            Direction::Uni => self.hidden,
            Direction::Bi => self.hidden / 2,
        }
    }

    /// Dimension of the context vector produced by the configured network.
    pub fn context_dim(&self) -> Option<usize> {
        match self.context {
            ContextKind::None => None,
            // bilstm: two directions of d/2; nbow and holstm: d.
            _ => Some(self.d),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.d == 0 || self.hidden == 0 {
            return Err(ModelError::Config("d and hidden must be positive".into()));
        }
        if self.enc_layers == 0 || self.dec_layers == 0 {
            return Err(ModelError::Config("layer counts must be positive".into()));
        }
        if self.src_vocab == 0 || self.tgt_vocab == 0 {
            return Err(ModelError::Config("vocabulary sizes must be positive".into()));
        }
        if self.direction == Direction::Bi && self.hidden % 2 != 0 {
            return Err(ModelError::Config(format!(
                "bi-directional encoder needs even hidden size, got {}",
                self.hidden
            )));
        }
        if self.context == ContextKind::Bilstm && self.d % 2 != 0 {
            return Err(ModelError::Config(format!(
                "bilstm context needs even embedding dim, got {}",
                self.d
            )));
        }
        if self.integration == IntegrationKind::Gate {
            if let Some(cd) = self.context_dim() {
                if cd != self.d {
                    return Err(ModelError::Config(format!(
                        "gate integration needs context dim {} == d {}",
                        cd, self.d
                    )));
                }
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ModelError::Config(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }
}
