use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::context::{
    contextual_embed_sequence, ContextKind, ContextWeights, EmbeddingTable, IntegrationKind,
    IntegrationWeights,
};
use crate::data::HOLDOUT_ID;
use crate::numerics::{
    lstm_cell, zero_state, Graph, LstmState, LstmWeights, NodeId, ParamId, ParameterSet, Tensor,
    INIT_SCALE,
};

use super::{Direction, ModelConfig, ModelError};

/// Whether a forward pass applies dropout.
pub enum RunMode<'r> {
    Eval,
    Train { rng: &'r mut dyn RngCore },
}

#[derive(Clone, Debug)]
enum EncoderLayer {
    Uni(LstmWeights),
    Bi { fwd: LstmWeights, bwd: LstmWeights },
}

/// Encoder output: per-position top-layer states plus per-layer finals used
/// to initialize the decoder.
pub struct EncoderStates {
    /// Top-layer hidden state per source position; in bi mode each is the
    /// concatenation of both directions and has decoder-hidden length.
    pub states: Vec<NodeId>,
    /// Per encoder layer, the final (h, c) after reading the sentence.
    pub finals: Vec<(NodeId, NodeId)>,
    /// Sentence summary: the last top-layer state.
    pub summary: NodeId,
}

/// Decoder recurrence state: stacked per-layer (h, c) plus the previous
/// attentional vector for input feeding.
#[derive(Clone)]
pub struct DecoderState {
    pub layers: Vec<LstmState>,
    pub g_hat: NodeId,
}

/// One decode step's outputs.
pub struct StepOutput {
    pub state: DecoderState,
    /// Unnormalized scores over the target vocabulary.
    pub logits: NodeId,
    /// `softmax(logits)`.
    pub dist: NodeId,
    /// Attention weights over source positions.
    pub attn: NodeId,
}

/// Result of a teacher-forced pass over one sentence pair.
pub struct ForwardPass {
    pub graph: Graph,
    pub loss: NodeId,
    /// Total cross-entropy (sum over predicted tokens).
    pub total: f64,
    /// Number of predicted tokens (target words plus terminal).
    pub tokens: usize,
}

/// The attention encoder-decoder with all trainable tensors.
pub struct Model {
    pub cfg: ModelConfig,
    pub params: ParameterSet,
    src_table: EmbeddingTable,
    tgt_table: EmbeddingTable,
    context: ContextWeights,
    integration: IntegrationWeights,
    encoder: Vec<EncoderLayer>,
    decoder: Vec<LstmWeights>,
    w_att: ParamId,
    w_out1: ParamId,
    w_out2: ParamId,
}

impl Model {
    /// Builds a model with uniform `[-0.1, 0.1]` initialization (forget
    /// biases at 1.0). The draw order is fixed, so a seed fully determines
    /// the parameters.
    pub fn new(cfg: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParameterSet::new();

        let src_table = EmbeddingTable {
            param: params.add(
                "embed.src",
                Tensor::uniform(&[cfg.src_vocab, cfg.d], INIT_SCALE, &mut rng),
            ),
            vocab_size: cfg.src_vocab,
            dim: cfg.d,
        };
        let tgt_table = EmbeddingTable {
            param: params.add(
                "embed.tgt",
                Tensor::uniform(&[cfg.tgt_vocab, cfg.d], INIT_SCALE, &mut rng),
            ),
            vocab_size: cfg.tgt_vocab,
            dim: cfg.d,
        };

        let context = ContextWeights::init(cfg.context, &mut params, cfg.d, HOLDOUT_ID, &mut rng)?;
        let integration = match cfg.context {
            ContextKind::None => IntegrationWeights::Gate, // unused
            _ => IntegrationWeights::init(
                cfg.integration,
                &mut params,
                cfg.d,
                cfg.context_dim().unwrap(),
                &mut rng,
            ),
        };

        let per_dir = cfg.enc_hidden_per_dir();
        let mut encoder = Vec::with_capacity(cfg.enc_layers);
        for l in 0..cfg.enc_layers {
            let input = if l == 0 { cfg.d } else { cfg.hidden };
            let layer = match cfg.direction {
                Direction::Uni => EncoderLayer::Uni(LstmWeights::init(
                    &mut params,
                    &format!("enc.l{l}"),
                    input,
                    per_dir,
                    &mut rng,
                )),
                Direction::Bi => EncoderLayer::Bi {
                    fwd: LstmWeights::init(
                        &mut params,
                        &format!("enc.l{l}.fwd"),
                        input,
                        per_dir,
                        &mut rng,
                    ),
                    bwd: LstmWeights::init(
                        &mut params,
                        &format!("enc.l{l}.bwd"),
                        input,
                        per_dir,
                        &mut rng,
                    ),
                },
            };
            encoder.push(layer);
        }

        let mut decoder = Vec::with_capacity(cfg.dec_layers);
        for l in 0..cfg.dec_layers {
            // Input feeding: the bottom layer reads [f_d(y_prev) ; g_hat].
            let input = if l == 0 { cfg.d + cfg.hidden } else { cfg.hidden };
            decoder.push(LstmWeights::init(
                &mut params,
                &format!("dec.l{l}"),
                input,
                cfg.hidden,
                &mut rng,
            ));
        }

        let w_att = params.add(
            "att.w",
            Tensor::uniform(&[cfg.hidden, cfg.hidden], INIT_SCALE, &mut rng),
        );
        let w_out1 = params.add(
            "out.w1",
            Tensor::uniform(&[cfg.hidden, 2 * cfg.hidden], INIT_SCALE, &mut rng),
        );
        let w_out2 = params.add(
            "out.w2",
            Tensor::uniform(&[cfg.tgt_vocab, cfg.hidden], INIT_SCALE, &mut rng),
        );

        Ok(Model {
            cfg,
            params,
            src_table,
            tgt_table,
            context,
            integration,
            encoder,
            decoder,
            w_att,
            w_out1,
            w_out2,
        })
    }

    /// The shared source embedding table (also the context network's input
    /// mapping — one storage, one id).
    pub fn source_table(&self) -> &EmbeddingTable {
        &self.src_table
    }

    pub fn context_weights(&self) -> &ContextWeights {
        &self.context
    }

    /// Total number of scalar parameters.
    pub fn num_params(&self) -> usize {
        self.params.num_values()
    }

    fn dropout(&self, graph: &mut Graph, x: NodeId, mode: &mut RunMode) -> NodeId {
        let p = self.cfg.dropout;
        match mode {
            RunMode::Train { rng } if p > 0.0 => {
                let keep = 1.0 - p;
                let n = graph.value(x).len();
                let mask: Vec<f64> = (0..n)
                    .map(|_| if rng.gen::<f64>() < p { 0.0 } else { 1.0 / keep })
                    .collect();
                let m = graph.constant(Tensor::vector(mask));
                graph.mul(x, m).expect("mask has matching shape")
            }
            _ => x,
        }
    }

    /// Runs the stacked encoder over the context-aware embeddings.
    pub fn encode(
        &self,
        graph: &mut Graph,
        xs: &[usize],
        mode: &mut RunMode,
    ) -> Result<EncoderStates, ModelError> {
        if xs.is_empty() {
            return Err(ModelError::Domain("cannot encode an empty sentence".into()));
        }
        let mut inputs = contextual_embed_sequence(
            graph,
            &self.params,
            &self.src_table,
            &self.context,
            &self.integration,
            xs,
        )?;

        let mut finals = Vec::with_capacity(self.encoder.len());
        for (l, layer) in self.encoder.iter().enumerate() {
            if l > 0 {
                inputs = inputs
                    .into_iter()
                    .map(|x| self.dropout(graph, x, mode))
                    .collect();
            }
            let (outputs, fin) = match layer {
                EncoderLayer::Uni(w) => {
                    let states = run_layer(graph, &self.params, w, &inputs)?;
                    let last = *states.last().unwrap();
                    (states.iter().map(|s| s.h).collect::<Vec<_>>(), (last.h, last.c))
                }
                EncoderLayer::Bi { fwd, bwd } => {
                    let f_states = run_layer(graph, &self.params, fwd, &inputs)?;
                    let rev: Vec<NodeId> = inputs.iter().rev().cloned().collect();
                    let b_states_rev = run_layer(graph, &self.params, bwd, &rev)?;
                    let f_last = *f_states.last().unwrap();
                    let b_last = *b_states_rev.last().unwrap();
                    let mut outputs = Vec::with_capacity(inputs.len());
                    for (t, f) in f_states.iter().enumerate() {
                        let b = b_states_rev[inputs.len() - 1 - t];
                        outputs.push(graph.concat(&[f.h, b.h]).map_err(ModelError::from)?);
                    }
                    let fh = graph.concat(&[f_last.h, b_last.h])?;
                    let fc = graph.concat(&[f_last.c, b_last.c])?;
                    (outputs, (fh, fc))
                }
            };
            finals.push(fin);
            inputs = outputs;
        }
        let summary = *inputs.last().unwrap();
        Ok(EncoderStates { states: inputs, finals, summary })
    }

    /// Decoder start state: layer `l` takes encoder layer `l`'s finals
    /// (zeros beyond the encoder depth); the attentional vector starts at 0.
    pub fn init_decoder(&self, graph: &mut Graph, enc: &EncoderStates) -> DecoderState {
        let layers = (0..self.cfg.dec_layers)
            .map(|l| match enc.finals.get(l) {
                Some(&(h, c)) => LstmState { h, c },
                None => zero_state(graph, self.cfg.hidden),
            })
            .collect();
        let g_hat = graph.constant(Tensor::zeros(&[self.cfg.hidden]));
        DecoderState { layers, g_hat }
    }

    /// Bilinear attention over the encoder states, conditioned on the
    /// previous decoder hidden state. Returns the context vector and the
    /// weights.
    pub fn attention(
        &self,
        graph: &mut Graph,
        g_prev: NodeId,
        enc_states: &[NodeId],
    ) -> Result<(NodeId, NodeId), ModelError> {
        let w = graph.param(&self.params, self.w_att);
        let mut scores = Vec::with_capacity(enc_states.len());
        for &h in enc_states {
            let wh = graph.matvec(w, h)?;
            scores.push(graph.dot(g_prev, wh)?);
        }
        let score_vec = graph.concat(&scores)?;
        let alpha = graph.softmax(score_vec)?;
        let mut acc: Option<NodeId> = None;
        for (k, &h) in enc_states.iter().enumerate() {
            let ak = graph.slice(alpha, k, 1)?;
            let term = graph.scale_by(ak, h)?;
            acc = Some(match acc {
                None => term,
                Some(prev) => graph.add(prev, term)?,
            });
        }
        Ok((acc.unwrap(), alpha))
    }

    /// One teacher-forced or free-running decoder step.
    pub fn decode_step(
        &self,
        graph: &mut Graph,
        state: &DecoderState,
        y_prev: usize,
        enc: &EncoderStates,
        mode: &mut RunMode,
    ) -> Result<StepOutput, ModelError> {
        if y_prev >= self.cfg.tgt_vocab {
            return Err(ModelError::Numerics(crate::numerics::NumericsError::Contract(
                format!(
                    "target token {y_prev} out of vocabulary of {}",
                    self.cfg.tgt_vocab
                ),
            )));
        }
        let tgt_m = graph.param(&self.params, self.tgt_table.param);
        let emb = graph.row(tgt_m, y_prev)?;
        let mut input = graph.concat(&[emb, state.g_hat])?;

        // Attention conditions on the previous top-layer hidden state.
        let g_prev = state.layers.last().unwrap().h;

        let mut new_layers = Vec::with_capacity(self.decoder.len());
        for (l, w) in self.decoder.iter().enumerate() {
            if l > 0 {
                input = self.dropout(graph, input, mode);
            }
            let s = lstm_cell(graph, &self.params, w, input, state.layers[l])?;
            input = s.h;
            new_layers.push(s);
        }
        let top = new_layers.last().unwrap().h;

        let (a_t, alpha) = self.attention(graph, g_prev, &enc.states)?;
        let w1 = graph.param(&self.params, self.w_out1);
        let joined = graph.concat(&[top, a_t])?;
        let pre = graph.matvec(w1, joined)?;
        let g_hat = graph.tanh(pre);
        let w2 = graph.param(&self.params, self.w_out2);
        let logits = graph.matvec(w2, g_hat)?;
        let dist = graph.softmax(logits)?;

        Ok(StepOutput {
            state: DecoderState { layers: new_layers, g_hat },
            logits,
            dist,
            attn: alpha,
        })
    }

    /// Teacher-forced cross-entropy over one pair. `ys` must carry the
    /// begin-of-sentence and terminal tokens.
    pub fn forward(
        &self,
        xs: &[usize],
        ys: &[usize],
        mode: &mut RunMode,
    ) -> Result<ForwardPass, ModelError> {
        if ys.len() < 2 {
            return Err(ModelError::Domain(
                "target must contain begin and end tokens".into(),
            ));
        }
        let mut graph = Graph::new();
        let enc = self.encode(&mut graph, xs, mode)?;
        let mut state = self.init_decoder(&mut graph, &enc);
        let mut loss: Option<NodeId> = None;
        for t in 1..ys.len() {
            let step = self.decode_step(&mut graph, &state, ys[t - 1], &enc, mode)?;
            let l = graph.nll(step.logits, ys[t])?;
            loss = Some(match loss {
                None => l,
                Some(prev) => graph.add(prev, l)?,
            });
            state = step.state;
        }
        let loss = loss.unwrap();
        let total = graph.value(loss).item();
        Ok(ForwardPass { graph, loss, total, tokens: ys.len() - 1 })
    }

    /// Convenience wrapper returning only (total cross-entropy, token count).
    pub fn forward_loss(
        &self,
        xs: &[usize],
        ys: &[usize],
        mode: &mut RunMode,
    ) -> Result<(f64, usize), ModelError> {
        let pass = self.forward(xs, ys, mode)?;
        Ok((pass.total, pass.tokens))
    }
}

fn run_layer(
    graph: &mut Graph,
    params: &ParameterSet,
    w: &LstmWeights,
    inputs: &[NodeId],
) -> Result<Vec<LstmState>, ModelError> {
    let mut state = zero_state(graph, w.hidden_size);
    let mut out = Vec::with_capacity(inputs.len());
    for &x in inputs {
        state = lstm_cell(graph, params, w, x, state)?;
        out.push(state);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::IntegrationKind;
    use crate::numerics::softmax_values;

    fn cfg(direction: Direction, d: usize) -> ModelConfig {
        ModelConfig {
            d,
            hidden: d,
            direction,
            enc_layers: 2,
            dec_layers: 2,
            context: ContextKind::None,
            integration: IntegrationKind::Concat,
            src_vocab: 7,
            tgt_vocab: 9,
            dropout: 0.0,
        }
    }

    fn zero_model(mut c: ModelConfig) -> Model {
        c.dropout = 0.0;
        let mut m = Model::new(c, 0).unwrap();
        let n = m.params.len();
        for i in 0..n {
            let id = ParamId(i);
            for v in m.params.get_mut(id).data_mut() {
                *v = 0.0;
            }
        }
        m
    }

    #[test]
    fn encode_bi_shapes() {
        let mut c = cfg(Direction::Bi, 8);
        c.hidden = 16;
        let m = Model::new(c, 1).unwrap();
        let mut g = Graph::new();
        let enc = m.encode(&mut g, &[1, 2, 3, 4], &mut RunMode::Eval).unwrap();
        assert_eq!(enc.states.len(), 4);
        for s in &enc.states {
            assert_eq!(g.value(*s).shape(), &[16]);
        }
        assert_eq!(enc.finals.len(), 2);
    }

    #[test]
    fn encode_zero_params_zero_states() {
        let m = zero_model(cfg(Direction::Bi, 4));
        let mut g = Graph::new();
        let enc = m.encode(&mut g, &[1, 2, 3], &mut RunMode::Eval).unwrap();
        for s in enc.states {
            assert!(g.value(s).data().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn encode_empty_is_domain_error() {
        let m = Model::new(cfg(Direction::Uni, 4), 3).unwrap();
        let mut g = Graph::new();
        assert!(matches!(
            m.encode(&mut g, &[], &mut RunMode::Eval),
            Err(ModelError::Domain(_))
        ));
    }

    #[test]
    fn uni_encoder_prefix_property() {
        let m = Model::new(cfg(Direction::Uni, 6), 5).unwrap();
        let mut g = Graph::new();
        let a = m.encode(&mut g, &[1, 2, 3, 4], &mut RunMode::Eval).unwrap();
        let b = m.encode(&mut g, &[1, 2, 3, 6], &mut RunMode::Eval).unwrap();
        for t in 0..3 {
            assert_eq!(
                g.value(a.states[t]).data(),
                g.value(b.states[t]).data(),
                "uni state at {t} must not depend on the future"
            );
        }
        assert_ne!(g.value(a.states[3]).data(), g.value(b.states[3]).data());
    }

    #[test]
    fn attention_zero_weight_is_mean_pool() {
        let mut m = Model::new(cfg(Direction::Uni, 4), 8).unwrap();
        for v in m.params.get_mut(m.w_att).data_mut() {
            *v = 0.0;
        }
        let mut g = Graph::new();
        let h1 = g.constant(Tensor::vector(vec![1.0, 0.0, 0.0, 2.0]));
        let h2 = g.constant(Tensor::vector(vec![3.0, 4.0, 0.0, 0.0]));
        let q = g.constant(Tensor::vector(vec![1.0, 1.0, 1.0, 1.0]));
        let (a, alpha) = m.attention(&mut g, q, &[h1, h2]).unwrap();
        assert_eq!(g.value(alpha).data(), &[0.5, 0.5]);
        assert_eq!(g.value(a).data(), &[2.0, 2.0, 0.0, 1.0]);
    }

    #[test]
    fn attention_single_position() {
        let m = Model::new(cfg(Direction::Uni, 4), 8).unwrap();
        let mut g = Graph::new();
        let h1 = g.constant(Tensor::vector(vec![1.0, -1.0, 2.0, 0.5]));
        let q = g.constant(Tensor::vector(vec![0.3, 0.1, 0.0, -0.2]));
        let (a, alpha) = m.attention(&mut g, q, &[h1]).unwrap();
        assert_eq!(g.value(alpha).data(), &[1.0]);
        assert_eq!(g.value(a).data(), g.value(h1).data());
    }

    #[test]
    fn attention_hand_softmax() {
        // Scores [1, 2] via a crafted W_att and unit vectors.
        let mut m = Model::new(cfg(Direction::Uni, 2), 8).unwrap();
        // W_att = I, g_prev = [1, 0], h1 = [1, 0] -> 1, h2 = [2, 0] -> 2.
        let w = m.params.get_mut(m.w_att);
        w.data_mut().copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        let mut g = Graph::new();
        let q = g.constant(Tensor::vector(vec![1.0, 0.0]));
        let h1 = g.constant(Tensor::vector(vec![1.0, 0.0]));
        let h2 = g.constant(Tensor::vector(vec![2.0, 0.0]));
        let (a, alpha) = m.attention(&mut g, q, &[h1, h2]).unwrap();
        let expect = softmax_values(&[1.0, 2.0]);
        for (x, y) in g.value(alpha).data().iter().zip(expect.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        let a0 = expect[0] * 1.0 + expect[1] * 2.0;
        assert!((g.value(a).data()[0] - a0).abs() < 1e-12);
    }

    #[test]
    fn attention_weights_sum_to_one_and_convex_hull() {
        let m = Model::new(cfg(Direction::Bi, 8), 21).unwrap();
        let mut g = Graph::new();
        let enc = m.encode(&mut g, &[1, 4, 2, 6, 3], &mut RunMode::Eval).unwrap();
        let mut state = m.init_decoder(&mut g, &enc);
        for y in [2usize, 5, 1] {
            let step = m.decode_step(&mut g, &state, y, &enc, &mut RunMode::Eval).unwrap();
            let alpha = g.value(step.attn).data();
            assert!((alpha.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            // a_t stays inside the box spanned by the encoder states.
            let (a_node, _) = m.attention(&mut g, state.layers.last().unwrap().h, &enc.states).unwrap();
            let a = g.value(a_node).data();
            let mut max_inf = 0.0f64;
            for s in &enc.states {
                max_inf = max_inf.max(
                    g.value(*s).data().iter().map(|v| v.abs()).fold(0.0, f64::max),
                );
            }
            assert!(a.iter().all(|v| v.abs() <= max_inf + 1e-12));
            state = step.state;
        }
    }

    #[test]
    fn decode_distribution_is_probability_vector() {
        let m = Model::new(cfg(Direction::Bi, 6), 33).unwrap();
        let mut g = Graph::new();
        let enc = m.encode(&mut g, &[2, 3, 1], &mut RunMode::Eval).unwrap();
        let state = m.init_decoder(&mut g, &enc);
        let step = m.decode_step(&mut g, &state, 2, &enc, &mut RunMode::Eval).unwrap();
        let dist = g.value(step.dist).data();
        assert_eq!(dist.len(), 9);
        assert!(dist.iter().all(|p| *p >= 0.0));
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn decode_zero_params_uniform() {
        let m = zero_model(cfg(Direction::Uni, 4));
        let mut g = Graph::new();
        let enc = m.encode(&mut g, &[1, 2], &mut RunMode::Eval).unwrap();
        let state = m.init_decoder(&mut g, &enc);
        let step = m.decode_step(&mut g, &state, 0, &enc, &mut RunMode::Eval).unwrap();
        for p in g.value(step.dist).data() {
            assert!((p - 1.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decode_rejects_out_of_vocab_token() {
        let m = Model::new(cfg(Direction::Uni, 4), 2).unwrap();
        let mut g = Graph::new();
        let enc = m.encode(&mut g, &[1], &mut RunMode::Eval).unwrap();
        let state = m.init_decoder(&mut g, &enc);
        assert!(m.decode_step(&mut g, &state, 9, &enc, &mut RunMode::Eval).is_err());
    }

    #[test]
    fn teacher_forcing_emits_one_distribution_per_target_token() {
        let m = Model::new(cfg(Direction::Bi, 6), 12).unwrap();
        let mut g = Graph::new();
        let enc = m.encode(&mut g, &[1, 2, 3], &mut RunMode::Eval).unwrap();
        let mut state = m.init_decoder(&mut g, &enc);
        let ys = [2usize, 5, 6, 7, 3]; // bos a b c eos
        let mut dists = 0;
        for t in 1..ys.len() {
            let step = m.decode_step(&mut g, &state, ys[t - 1], &enc, &mut RunMode::Eval).unwrap();
            dists += 1;
            state = step.state;
        }
        assert_eq!(dists, 4);
    }

    #[test]
    fn zero_model_loss_is_m_log_v() {
        let m = zero_model(cfg(Direction::Bi, 4));
        let ys = [2usize, 4, 5, 3]; // three predictions
        let (total, tokens) = m.forward_loss(&[1, 2], &ys, &mut RunMode::Eval).unwrap();
        assert_eq!(tokens, 3);
        let expect = 3.0 * (9f64).ln();
        assert!((total - expect).abs() < 1e-9, "{total} vs {expect}");
    }

    #[test]
    fn forward_is_deterministic_without_dropout() {
        let m = Model::new(cfg(Direction::Bi, 6), 77).unwrap();
        let (a, _) = m.forward_loss(&[1, 2, 3], &[2, 5, 3], &mut RunMode::Eval).unwrap();
        let (b, _) = m.forward_loss(&[1, 2, 3], &[2, 5, 3], &mut RunMode::Eval).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn dropout_draws_change_training_loss() {
        let mut c = cfg(Direction::Uni, 6);
        c.dropout = 0.5;
        let m = Model::new(c, 9).unwrap();
        let mut rng1 = ChaCha8Rng::seed_from_u64(1);
        let mut rng2 = ChaCha8Rng::seed_from_u64(2);
        let (a, _) = m
            .forward_loss(&[1, 2, 3], &[2, 5, 3], &mut RunMode::Train { rng: &mut rng1 })
            .unwrap();
        let (b, _) = m
            .forward_loss(&[1, 2, 3], &[2, 5, 3], &mut RunMode::Train { rng: &mut rng2 })
            .unwrap();
        assert_ne!(a, b);
    }
}
