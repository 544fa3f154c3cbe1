//! Greedy and beam-search decoding.
//!
//! Hypotheses are scored by summed log-probability with no length
//! normalization. Argmax ties break toward the lowest token index, and the
//! same ordering governs beam pruning, so a width-1 beam reproduces greedy
//! decoding token for token.

use std::cmp::Ordering;

use rayon::prelude::*;
use thiserror::Error;

use crate::data::{BOS_ID, EOS_ID};
use crate::numerics::Graph;
use crate::seq2seq::{DecoderState, Model, ModelError, RunMode};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: ModelError,
    },
}

/// A finished or pruned search hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    /// Emitted tokens, excluding begin/end markers.
    pub tokens: Vec<usize>,
    /// Sum of step log-probabilities (including the terminal token's).
    pub log_prob: f64,
    /// True iff the hypothesis ended with the end-of-sentence token.
    pub terminal: bool,
}

/// Beam output: the best hypothesis plus the n-best pool.
#[derive(Clone, Debug)]
pub struct BeamResult {
    pub best: Hypothesis,
    pub n_best: Vec<Hypothesis>,
}

fn argmax_lowest(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in dist.iter().enumerate().skip(1) {
        if *v > dist[best] {
            best = i;
        }
    }
    best
}

/// Emits the argmax token at every step until end-of-sentence or `max_len`
/// emitted tokens.
pub fn greedy_decode(
    model: &Model,
    xs: &[usize],
    max_len: usize,
) -> Result<Vec<usize>, InferenceError> {
    if max_len == 0 {
        return Err(InferenceError::Config("max_len must be at least 1".into()));
    }
    let mut graph = Graph::new();
    let enc = model.encode(&mut graph, xs, &mut RunMode::Eval)?;
    let mut state = model.init_decoder(&mut graph, &enc);
    let mut prev = BOS_ID;
    let mut out = Vec::new();
    for _ in 0..max_len {
        let step = model.decode_step(&mut graph, &state, prev, &enc, &mut RunMode::Eval)?;
        let token = argmax_lowest(graph.value(step.dist).data());
        if token == EOS_ID {
            break;
        }
        out.push(token);
        prev = token;
        state = step.state;
    }
    Ok(out)
}

struct BeamHyp {
    tokens: Vec<usize>,
    log_prob: f64,
    state: DecoderState,
    prev: usize,
}

/// Higher log-probability first; exact ties prefer the lexicographically
/// smaller token sequence (hence the lower token index).
fn hyp_order(a_logp: f64, a_tokens: &[usize], b_logp: f64, b_tokens: &[usize]) -> Ordering {
    b_logp
        .partial_cmp(&a_logp)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a_tokens.cmp(b_tokens))
}

/// Standard beam search over summed log-probabilities.
///
/// Finished hypotheses move to a completed pool (capped at `width`) and stop
/// expanding; the search ends when nothing is left to expand or `max_len`
/// steps have run. The best completed hypothesis wins; if nothing completed,
/// the best partial is returned.
pub fn beam_decode(
    model: &Model,
    xs: &[usize],
    width: usize,
    max_len: usize,
) -> Result<BeamResult, InferenceError> {
    if width == 0 {
        return Err(InferenceError::Config("beam width must be at least 1".into()));
    }
    if max_len == 0 {
        return Err(InferenceError::Config("max_len must be at least 1".into()));
    }
    let mut graph = Graph::new();
    let enc = model.encode(&mut graph, xs, &mut RunMode::Eval)?;
    let init = model.init_decoder(&mut graph, &enc);

    let mut live = vec![BeamHyp {
        tokens: Vec::new(),
        log_prob: 0.0,
        state: init,
        prev: BOS_ID,
    }];
    let mut completed: Vec<Hypothesis> = Vec::new();

    for _ in 0..max_len {
        if live.is_empty() {
            break;
        }
        // Every (hypothesis, token) continuation, scored.
        let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
        let mut steps = Vec::with_capacity(live.len());
        for (h, hyp) in live.iter().enumerate() {
            let step =
                model.decode_step(&mut graph, &hyp.state, hyp.prev, &enc, &mut RunMode::Eval)?;
            let dist = graph.value(step.dist).data();
            for (tok, p) in dist.iter().enumerate() {
                candidates.push((h, tok, hyp.log_prob + p.ln()));
            }
            steps.push(step.state);
        }
        candidates.sort_by(|a, b| {
            hyp_order(a.2, &[], b.2, &[])
                .then_with(|| live[a.0].tokens.cmp(&live[b.0].tokens))
                .then_with(|| a.1.cmp(&b.1))
        });

        let mut next = Vec::with_capacity(width);
        for &(h, tok, logp) in &candidates {
            if next.len() >= width {
                break;
            }
            if tok == EOS_ID {
                completed.push(Hypothesis {
                    tokens: live[h].tokens.clone(),
                    log_prob: logp,
                    terminal: true,
                });
            } else {
                let mut tokens = live[h].tokens.clone();
                tokens.push(tok);
                next.push(BeamHyp {
                    tokens,
                    log_prob: logp,
                    state: steps[h].clone(),
                    prev: tok,
                });
            }
        }
        completed.sort_by(|a, b| hyp_order(a.log_prob, &a.tokens, b.log_prob, &b.tokens));
        completed.truncate(width);
        live = next;
    }

    let best = if let Some(first) = completed.first() {
        first.clone()
    } else {
        // Nothing terminated within the budget: best partial.
        live.sort_by(|a, b| hyp_order(a.log_prob, &a.tokens, b.log_prob, &b.tokens));
        let h = live.first().expect("width >= 1 keeps at least one partial");
        Hypothesis {
            tokens: h.tokens.clone(),
            log_prob: h.log_prob,
            terminal: false,
        }
    };
    Ok(BeamResult { best, n_best: completed })
}

/// Translates a corpus of indexed sentences, order preserved. Sentences are
/// decoded independently against the shared model snapshot.
pub fn translate_corpus(
    model: &Model,
    sources: &[Vec<usize>],
    beam_width: usize,
    max_len_factor: usize,
) -> Result<Vec<Vec<usize>>, InferenceError> {
    if beam_width == 0 {
        return Err(InferenceError::Config("beam width must be at least 1".into()));
    }
    let results: Vec<Result<Vec<usize>, InferenceError>> = sources
        .par_iter()
        .enumerate()
        .map(|(i, xs)| {
            let max_len = max_len_factor * xs.len() + 5;
            let out = if beam_width == 1 {
                greedy_decode(model, xs, max_len)
            } else {
                beam_decode(model, xs, beam_width, max_len).map(|r| r.best.tokens)
            };
            out.map_err(|e| match e {
                InferenceError::Model(source) => InferenceError::Line { line: i + 1, source },
                other => other,
            })
        })
        .collect();
    results.into_iter().collect()
}
