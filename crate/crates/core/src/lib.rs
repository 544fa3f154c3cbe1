//! Context-aware neural machine translation at desk scale.
//!
//! The crate provides a complete small-corpus translation pipeline:
//!
//! * [`numerics`] — dense tensors with reverse-mode differentiation,
//!   LSTM cells, and a finite-difference gradient checker.
//! * [`context`] — per-word context vectors (bag-of-words, bidirectional
//!   LSTM, held-out LSTM) fused into word embeddings by gating or
//!   concatenation.
//! * [`seq2seq`] — the attention encoder-decoder with input feeding.
//! * [`training`] — SGD with halving-on-overfit schedule, norm clipping,
//!   same-length batching, and convergence stopping.
//! * [`inference`] — greedy and beam-search decoding.
//! * [`data`] — corpus ingestion, vocabulary construction, and a synthetic
//!   homograph corpus generator.
//! * [`eval`] — BLEU, an EM word aligner with grow-diag-final-and
//!   symmetrization, word-translation F1, sense-count bucketing, and paired
//!   bootstrap comparison.

pub mod config;
pub mod context;
pub mod data;
pub mod eval;
pub mod inference;
pub mod numerics;
pub mod seq2seq;
pub mod training;
