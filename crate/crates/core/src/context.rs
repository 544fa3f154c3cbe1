//! Context-aware word embeddings.
//!
//! A context network turns the whole source sentence into one context vector
//! per position: the bag-of-words average (identical at every position), a
//! single-layer bidirectional LSTM, or a held-out LSTM that re-reads the
//! sentence with the target position masked by a reserved symbol. The
//! context vector is fused with the lookup embedding either by elementwise
//! sigmoid gating or by projecting the concatenation back to embedding size.
//!
//! The embedding matrix is shared: the same table backs both the encoder
//! lookup and the context network's input mapping, so one `ParamId` serves
//! both and gradient updates through either path are visible to the other.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    lstm_cell, run_lstm, zero_state, Graph, LstmState, LstmWeights, NodeId, NumericsError,
    ParamId, ParameterSet, Tensor, INIT_SCALE,
};

#[derive(Debug, Error)]
pub enum ContextError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which context network to run. `None` disables integration entirely.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContextKind {
    None,
    Nbow,
    Bilstm,
    Holstm,
}

impl ContextKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(ContextKind::None),
            "nbow" => Some(ContextKind::Nbow),
            "bilstm" => Some(ContextKind::Bilstm),
            "holstm" => Some(ContextKind::Holstm),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ContextKind::None => "none",
            ContextKind::Nbow => "nbow",
            ContextKind::Bilstm => "bilstm",
            ContextKind::Holstm => "holstm",
        }
    }
}

/// How the context vector is fused with the lookup embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegrationKind {
    Gate,
    Concat,
}

impl IntegrationKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gate" => Some(IntegrationKind::Gate),
            "concat" => Some(IntegrationKind::Concat),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            IntegrationKind::Gate => "gate",
            IntegrationKind::Concat => "concat",
        }
    }
}

/// The shared source embedding matrix (`|V_s| x d`).
#[derive(Clone, Copy, Debug)]
pub struct EmbeddingTable {
    pub param: ParamId,
    pub vocab_size: usize,
    pub dim: usize,
}

/// Trainable weights of the chosen context network.
#[derive(Clone, Debug)]
pub enum ContextWeights {
    None,
    /// Averaging has no weights beyond the shared table.
    Nbow,
    Bilstm { fwd: LstmWeights, bwd: LstmWeights },
    Holstm { cell: LstmWeights, holdout_id: usize },
}

impl ContextWeights {
    /// Registers context-network parameters. The bidirectional network uses
    /// hidden size `d / 2` per direction so its context dimension is `d`;
    /// the held-out network uses hidden size `d`.
    pub fn init<R: Rng>(
        kind: ContextKind,
        params: &mut ParameterSet,
        d: usize,
        holdout_id: usize,
        rng: &mut R,
    ) -> Result<Self, ContextError> {
        match kind {
            ContextKind::None => Ok(ContextWeights::None),
            ContextKind::Nbow => Ok(ContextWeights::Nbow),
            ContextKind::Bilstm => {
                if d % 2 != 0 {
                    return Err(ContextError::Config(format!(
                        "bilstm context needs even embedding dim, got {d}"
                    )));
                }
                let fwd = LstmWeights::init(params, "ctx.fwd", d, d / 2, rng);
                let bwd = LstmWeights::init(params, "ctx.bwd", d, d / 2, rng);
                Ok(ContextWeights::Bilstm { fwd, bwd })
            }
            ContextKind::Holstm => {
                let cell = LstmWeights::init(params, "ctx.cell", d, d, rng);
                Ok(ContextWeights::Holstm { cell, holdout_id })
            }
        }
    }

    /// Dimension of the produced context vector, if any.
    pub fn dim(&self, d: usize) -> Option<usize> {
        match self {
            ContextWeights::None => None,
            ContextWeights::Nbow => Some(d),
            ContextWeights::Bilstm { fwd, .. } => Some(2 * fwd.hidden_size),
            ContextWeights::Holstm { cell, .. } => Some(cell.hidden_size),
        }
    }
}

/// Trainable weights of the fusion step.
#[derive(Clone, Debug)]
pub enum IntegrationWeights {
    Gate,
    /// Projection `W_3 (d x (d + ctx_dim))` back to embedding size.
    Concat { w3: ParamId },
}

impl IntegrationWeights {
    pub fn init<R: Rng>(
        kind: IntegrationKind,
        params: &mut ParameterSet,
        d: usize,
        ctx_dim: usize,
        rng: &mut R,
    ) -> Self {
        match kind {
            IntegrationKind::Gate => IntegrationWeights::Gate,
            IntegrationKind::Concat => {
                let w3 = params.add("ctx.w3", Tensor::uniform(&[d, d + ctx_dim], INIT_SCALE, rng));
                IntegrationWeights::Concat { w3 }
            }
        }
    }
}

/// Selects row `x` of the shared table: the lookup embedding.
pub fn lookup_embed(
    graph: &mut Graph,
    params: &ParameterSet,
    table: &EmbeddingTable,
    x: usize,
) -> Result<NodeId, NumericsError> {
    if x >= table.vocab_size {
        return Err(NumericsError::Contract(format!(
            "token index {x} out of range for vocabulary of {}",
            table.vocab_size
        )));
    }
    let m = graph.param(params, table.param);
    graph.row(m, x)
}

/// Average of the lookup embeddings; one vector for the whole sentence.
pub fn nbow_context(
    graph: &mut Graph,
    params: &ParameterSet,
    table: &EmbeddingTable,
    xs: &[usize],
) -> Result<NodeId, NumericsError> {
    if xs.is_empty() {
        return Err(NumericsError::Domain("nbow context of empty sentence".into()));
    }
    let mut acc = lookup_embed(graph, params, table, xs[0])?;
    for &x in &xs[1..] {
        let e = lookup_embed(graph, params, table, x)?;
        acc = graph.add(acc, e)?;
    }
    Ok(graph.scale_const(acc, 1.0 / xs.len() as f64))
}

/// One context vector per position: `[fwd_t ; bwd_t]` of a full-length
/// bidirectional recurrence over the lookup embeddings, zero initial states.
pub fn bilstm_context(
    graph: &mut Graph,
    params: &ParameterSet,
    table: &EmbeddingTable,
    fwd: &LstmWeights,
    bwd: &LstmWeights,
    xs: &[usize],
) -> Result<Vec<NodeId>, NumericsError> {
    if xs.is_empty() {
        return Err(NumericsError::Domain("bilstm context of empty sentence".into()));
    }
    let embeds: Vec<NodeId> = xs
        .iter()
        .map(|&x| lookup_embed(graph, params, table, x))
        .collect::<Result<_, _>>()?;
    let fwd_states = run_lstm(graph, params, fwd, &embeds)?;
    let rev_inputs: Vec<NodeId> = embeds.iter().rev().cloned().collect();
    let mut bwd_states = run_lstm(graph, params, bwd, &rev_inputs)?;
    bwd_states.reverse();
    fwd_states
        .iter()
        .zip(bwd_states.iter())
        .map(|(f, b)| graph.concat(&[f.h, b.h]))
        .collect()
}

/// Context for position `t` (0-based): replace `xs[t]` by the held-out
/// symbol, run a unidirectional recurrence over the whole replaced sequence,
/// and return the final hidden state.
pub fn holstm_context(
    graph: &mut Graph,
    params: &ParameterSet,
    table: &EmbeddingTable,
    cell: &LstmWeights,
    holdout_id: usize,
    xs: &[usize],
    t: usize,
) -> Result<NodeId, NumericsError> {
    if t >= xs.len() {
        return Err(NumericsError::Contract(format!(
            "held-out position {t} out of range for sentence of {}",
            xs.len()
        )));
    }
    let mut state = zero_state(graph, cell.hidden_size);
    for (i, &x) in xs.iter().enumerate() {
        let token = if i == t { holdout_id } else { x };
        let e = lookup_embed(graph, params, table, token)?;
        state = lstm_cell(graph, params, cell, e, state)?;
    }
    Ok(state.h)
}

/// `f'_e = e * sigmoid(c)`, elementwise.
pub fn gate_integrate(
    graph: &mut Graph,
    e: NodeId,
    c: NodeId,
) -> Result<NodeId, NumericsError> {
    if graph.value(e).shape() != graph.value(c).shape() {
        return Err(NumericsError::Shape(format!(
            "gate: embedding {:?} vs context {:?}",
            graph.value(e).shape(),
            graph.value(c).shape()
        )));
    }
    let gate = graph.sigmoid(c);
    graph.mul(e, gate)
}

/// `f'_e = W_3 [e ; c]`.
pub fn concat_integrate(
    graph: &mut Graph,
    e: NodeId,
    c: NodeId,
    w3: NodeId,
) -> Result<NodeId, NumericsError> {
    let joined = graph.concat(&[e, c])?;
    graph.matvec(w3, joined)
}

/// Embeds a full sentence: runs the chosen context network once, then fuses
/// per position. With `ContextWeights::None` this is a plain lookup.
pub fn contextual_embed_sequence(
    graph: &mut Graph,
    params: &ParameterSet,
    table: &EmbeddingTable,
    net: &ContextWeights,
    integration: &IntegrationWeights,
    xs: &[usize],
) -> Result<Vec<NodeId>, ContextError> {
    if xs.is_empty() {
        return Err(NumericsError::Domain("embedding of empty sentence".into()).into());
    }
    let embeds: Vec<NodeId> = xs
        .iter()
        .map(|&x| lookup_embed(graph, params, table, x))
        .collect::<Result<_, NumericsError>>()?;

    let contexts: Vec<NodeId> = match net {
        ContextWeights::None => return Ok(embeds),
        ContextWeights::Nbow => {
            let c = nbow_context(graph, params, table, xs)?;
            vec![c; xs.len()]
        }
        ContextWeights::Bilstm { fwd, bwd } => {
            bilstm_context(graph, params, table, fwd, bwd, xs)?
        }
        ContextWeights::Holstm { cell, holdout_id } => (0..xs.len())
            .map(|t| holstm_context(graph, params, table, cell, *holdout_id, xs, t))
            .collect::<Result<_, _>>()?,
    };

    if let IntegrationWeights::Gate = integration {
        let ctx_dim = graph.value(contexts[0]).len();
        if ctx_dim != table.dim {
            return Err(ContextError::Config(format!(
                "gate integration needs context dim {} == embedding dim {}",
                ctx_dim, table.dim
            )));
        }
    }

    embeds
        .iter()
        .zip(contexts.iter())
        .map(|(&e, &c)| match integration {
            IntegrationWeights::Gate => gate_integrate(graph, e, c),
            IntegrationWeights::Concat { w3 } => {
                let w3n = graph.param(params, *w3);
                concat_integrate(graph, e, c, w3n)
            }
        })
        .collect::<Result<_, NumericsError>>()
        .map_err(ContextError::from)
}
