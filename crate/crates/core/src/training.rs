//! The training recipe: plain SGD from learning rate 1 with sticky halving
//! once the dev perplexity worsens, global-norm-5 gradient rescaling,
//! exact-same-length batching capped at 256, length-50 filtering, and a
//! 0.01-delta perplexity stopping rule.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::data::IndexedCorpus;
use crate::numerics::{apply_gradients, GradStore, NumericsError, ParameterSet};
use crate::seq2seq::{save_checkpoint, Model, ModelError, RunMode};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite gradient in tensor {tensor}")]
    NonFiniteGrad { tensor: String },
    #[error("training diverged at epoch {epoch}; parameters restored to epoch {last_good}")]
    Diverged { epoch: usize, last_good: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Training hyperparameters; the defaults are the published recipe.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Initial SGD learning rate.
    pub lr: f64,
    /// Global L2 norm above which gradients are rescaled.
    pub clip_norm: f64,
    /// Maximum sentences per mini-batch.
    pub max_batch: usize,
    /// Sentence pairs longer than this on either side are dropped.
    pub max_len: usize,
    /// Stop once |ppl_e - ppl_{e-1}| falls below this.
    pub convergence_delta: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1.0,
            clip_norm: 5.0,
            max_batch: 256,
            max_len: 50,
            convergence_delta: 0.01,
            max_epochs: 100,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.lr <= 0.0
            || self.clip_norm <= 0.0
            || self.max_batch == 0
            || self.max_len == 0
            || self.convergence_delta <= 0.0
            || self.max_epochs == 0
        {
            return Err(TrainError::Config(
                "all training parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean per-token training cross-entropy over the epoch.
    pub train_loss: f64,
    pub dev_ppl: f64,
    /// Learning rate used during this epoch.
    pub lr: f64,
    /// Wall-clock seconds, floored to whole seconds.
    pub seconds: u64,
}

/// Per-epoch history plus the epochs at which halving fired.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
    pub halvings: Vec<usize>,
}

impl TrainLog {
    pub fn tsv_header() -> &'static str {
        "epoch\ttrain_loss\tdev_ppl\tlr\tseconds\n"
    }

    pub fn tsv_row(rec: &EpochRecord) -> String {
        format!(
            "{}\t{:.6}\t{:.6}\t{}\t{}\n",
            rec.epoch, rec.train_loss, rec.dev_ppl, rec.lr, rec.seconds
        )
    }
}

/// Groups pairs by exact (source length, target length), splits groups into
/// batches of at most `max_batch`, and shuffles the batch order. Pairs
/// longer than `max_len` words on either side are dropped first;
/// within-batch order follows the corpus.
pub fn make_batches(
    corpus: &IndexedCorpus,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<usize>>, TrainError> {
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for i in 0..corpus.len() {
        let (s_len, t_len) = corpus.word_lengths(i);
        if s_len > cfg.max_len || t_len > cfg.max_len {
            continue;
        }
        groups.entry((s_len, t_len)).or_default().push(i);
    }
    let mut batches = Vec::new();
    for (_, members) in groups {
        for chunk in members.chunks(cfg.max_batch) {
            batches.push(chunk.to_vec());
        }
    }
    if batches.is_empty() {
        return Err(TrainError::Config(
            "corpus is empty after length filtering".into(),
        ));
    }
    batches.shuffle(rng);
    Ok(batches)
}

/// Rescales `grads` to global norm `clip_norm` when exceeded, then applies
/// `theta -= lr * grads`. Returns the post-clip global norm.
pub fn sgd_step(
    params: &mut ParameterSet,
    grads: &mut GradStore,
    lr: f64,
    clip_norm: f64,
) -> Result<f64, TrainError> {
    if let Some(tensor) = grads.first_non_finite(params) {
        return Err(TrainError::NonFiniteGrad { tensor });
    }
    let norm = grads.global_norm();
    let applied = if norm > clip_norm {
        grads.scale(clip_norm / norm);
        clip_norm
    } else {
        norm
    };
    apply_gradients(params, grads, lr);
    Ok(applied)
}

/// Sticky halving: the rate is untouched while dev perplexity improves
/// monotonically; from the first epoch whose perplexity exceeds its
/// predecessor onward, it halves after every epoch.
pub fn lr_schedule(dev_ppl_history: &[f64], lr: f64) -> f64 {
    let overfit = dev_ppl_history.windows(2).any(|w| w[1] > w[0]);
    if overfit {
        lr / 2.0
    } else {
        lr
    }
}

/// Corpus perplexity `exp(sum CE / sum tokens)` with dropout disabled.
pub fn perplexity(model: &Model, corpus: &IndexedCorpus) -> Result<f64, TrainError> {
    if corpus.is_empty() {
        return Err(TrainError::Domain("perplexity of empty corpus".into()));
    }
    let mut total = 0.0;
    let mut tokens = 0usize;
    for (xs, ys) in &corpus.pairs {
        let (ce, n) = model.forward_loss(xs, ys, &mut RunMode::Eval)?;
        total += ce;
        tokens += n;
    }
    Ok((total / tokens as f64).exp())
}

/// Derives an independent dropout stream per sentence so that batch-level
/// parallelism cannot perturb the draw order.
fn sentence_rng(seed: u64, epoch: usize, batch: usize, member: usize) -> ChaCha8Rng {
    let mut x = seed
        ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (batch as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ (member as u64).wrapping_mul(0x94D0_49BB_1331_11EB);
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    ChaCha8Rng::seed_from_u64(x)
}

/// Gradient of one batch: per-sentence passes may run in parallel, but the
/// reduction order is fixed (chunked, then by index), so results are
/// bit-reproducible regardless of thread count.
fn batch_gradients(
    model: &Model,
    corpus: &IndexedCorpus,
    batch: &[usize],
    seed: u64,
    epoch: usize,
    batch_no: usize,
) -> Result<(GradStore, f64, usize), TrainError> {
    const CHUNK: usize = 16;
    let mut acc = GradStore::zeros_like(&model.params);
    let mut loss = 0.0;
    let mut tokens = 0usize;
    for (c, chunk) in batch.chunks(CHUNK).enumerate() {
        let results: Vec<Result<(GradStore, f64, usize), TrainError>> = chunk
            .par_iter()
            .enumerate()
            .map(|(k, &i)| {
                let (xs, ys) = &corpus.pairs[i];
                let mut rng = sentence_rng(seed, epoch, batch_no, c * CHUNK + k);
                let pass = model.forward(xs, ys, &mut RunMode::Train { rng: &mut rng })?;
                let grads = pass.graph.backward(pass.loss, &model.params)?;
                Ok((grads, pass.total, pass.tokens))
            })
            .collect();
        for r in results {
            let (g, l, n) = r?;
            acc.accumulate(&g);
            loss += l;
            tokens += n;
        }
    }
    Ok((acc, loss, tokens))
}

/// Full training loop. Each epoch shuffles pre-formed batches, normalizes
/// batch gradients by target token count, clips, and steps; dev perplexity
/// then drives the halving schedule and the stopping rule. When `out_dir`
/// is given, `epoch<N>.ckpt` and a TSV log row are written per epoch.
///
/// The context network (when present) sits inside the same graph as the
/// encoder-decoder, so its parameters receive gradients in the same step.
pub fn train(
    model: &mut Model,
    corpus: &IndexedCorpus,
    dev: &IndexedCorpus,
    cfg: &TrainConfig,
    out_dir: Option<&Path>,
) -> Result<TrainLog, TrainError> {
    cfg.validate()?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|source| TrainError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    let log_path = out_dir.map(|d| d.join("train_log.tsv"));
    if let Some(p) = &log_path {
        write_log(p, TrainLog::tsv_header())?;
    }

    let mut log = TrainLog::default();
    let mut lr = cfg.lr;
    let mut ppl_history: Vec<f64> = Vec::new();
    let mut last_good: Option<(usize, ParameterSet)> = None;

    for epoch in 1..=cfg.max_epochs {
        let started = Instant::now();
        let mut shuffle_rng = sentence_rng(cfg.seed, epoch, usize::MAX, 0);
        let batches = make_batches(corpus, cfg, &mut shuffle_rng)?;

        let mut epoch_loss = 0.0;
        let mut epoch_tokens = 0usize;
        for (b, batch) in batches.iter().enumerate() {
            let (mut grads, loss, tokens) =
                batch_gradients(model, corpus, batch, cfg.seed, epoch, b)?;
            grads.scale(1.0 / tokens as f64);
            match sgd_step(&mut model.params, &mut grads, lr, cfg.clip_norm) {
                Ok(_) => {}
                Err(TrainError::NonFiniteGrad { tensor }) => {
                    return Err(diverged(model, last_good, epoch, &tensor));
                }
                Err(e) => return Err(e),
            }
            epoch_loss += loss;
            epoch_tokens += tokens;
        }

        let dev_ppl = perplexity(model, dev)?;
        if !dev_ppl.is_finite() {
            return Err(diverged(model, last_good, epoch, "dev perplexity"));
        }

        let record = EpochRecord {
            epoch,
            train_loss: epoch_loss / epoch_tokens as f64,
            dev_ppl,
            lr,
            seconds: started.elapsed().as_secs(),
        };
        if let Some(p) = &log_path {
            append_log(p, &TrainLog::tsv_row(&record))?;
        }
        if let Some(dir) = out_dir {
            save_checkpoint(model, &dir.join(format!("epoch{epoch}.ckpt")))?;
        }
        log.epochs.push(record);
        last_good = Some((epoch, model.params.clone()));

        ppl_history.push(dev_ppl);
        let next_lr = lr_schedule(&ppl_history, lr);
        if next_lr < lr {
            log.halvings.push(epoch);
        }
        lr = next_lr;

        if ppl_history.len() >= 2 {
            let delta = (ppl_history[ppl_history.len() - 1]
                - ppl_history[ppl_history.len() - 2])
                .abs();
            if delta < cfg.convergence_delta {
                break;
            }
        }
    }
    Ok(log)
}

fn diverged(
    model: &mut Model,
    last_good: Option<(usize, ParameterSet)>,
    epoch: usize,
    _what: &str,
) -> TrainError {
    let last = match last_good {
        Some((e, params)) => {
            model.params = params;
            e
        }
        None => 0,
    };
    TrainError::Diverged { epoch, last_good: last }
}

fn write_log(path: &PathBuf, contents: &str) -> Result<(), TrainError> {
    std::fs::write(path, contents).map_err(|source| TrainError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn append_log(path: &PathBuf, row: &str) -> Result<(), TrainError> {
    let mut f = OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|source| TrainError::Io {
            path: path.display().to_string(),
            source,
        })?;
    f.write_all(row.as_bytes()).map_err(|source| TrainError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Tensor;

    fn corpus_of(lengths: &[(usize, usize)]) -> IndexedCorpus {
        // Token values are irrelevant for batching; use 1s.
        let pairs = lengths
            .iter()
            .map(|&(s, t)| {
                let src = vec![1usize; s];
                let mut tgt = vec![2usize];
                tgt.extend(vec![1usize; t]);
                tgt.push(3);
                (src, tgt)
            })
            .collect();
        IndexedCorpus { pairs }
    }

    #[test]
    fn batches_group_by_exact_length() {
        let mut lengths = vec![(3, 4); 5];
        lengths.extend(vec![(3, 5); 2]);
        let corpus = corpus_of(&lengths);
        let cfg = TrainConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batches = make_batches(&corpus, &cfg, &mut rng).unwrap();
        let mut sizes: Vec<usize> = batches.iter().map(|b| b.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 5]);
        // Members of one batch share their length pair.
        for b in &batches {
            let first = corpus.word_lengths(b[0]);
            assert!(b.iter().all(|&i| corpus.word_lengths(i) == first));
        }
    }

    #[test]
    fn batches_filter_long_sentences() {
        let corpus = corpus_of(&[(51, 3), (3, 51), (50, 50), (2, 2)]);
        let cfg = TrainConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batches = make_batches(&corpus, &cfg, &mut rng).unwrap();
        let kept: Vec<usize> = batches.into_iter().flatten().collect();
        assert_eq!(kept.len(), 2);
        assert!(kept.contains(&2) && kept.contains(&3));
    }

    #[test]
    fn batches_split_at_max_size() {
        let corpus = corpus_of(&vec![(4, 4); 300]);
        let cfg = TrainConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batches = make_batches(&corpus, &cfg, &mut rng).unwrap();
        let mut sizes: Vec<usize> = batches.iter().map(|b| b.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![44, 256]);
    }

    #[test]
    fn empty_after_filter_is_config_error() {
        let corpus = corpus_of(&[(60, 60)]);
        let cfg = TrainConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            make_batches(&corpus, &cfg, &mut rng),
            Err(TrainError::Config(_))
        ));
    }

    fn single_param(value: &[f64]) -> (ParameterSet, GradStore) {
        let mut p = ParameterSet::new();
        p.add("w", Tensor::vector(value.to_vec()));
        let g = GradStore::zeros_like(&p);
        (p, g)
    }

    #[test]
    fn sgd_plain_update() {
        let (mut p, mut g) = single_param(&[1.0]);
        g.get_mut(crate::numerics::ParamId(0)).data_mut()[0] = 0.2;
        sgd_step(&mut p, &mut g, 1.0, 5.0).unwrap();
        assert!((p.get(crate::numerics::ParamId(0)).data()[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn sgd_rescales_above_clip() {
        let (mut p, mut g) = single_param(&[0.0, 0.0]);
        // norm 10 -> halved.
        let id = crate::numerics::ParamId(0);
        g.get_mut(id).data_mut().copy_from_slice(&[6.0, 8.0]);
        let norm = sgd_step(&mut p, &mut g, 1.0, 5.0).unwrap();
        assert!((norm - 5.0).abs() < 1e-12);
        assert!((g.get(id).data()[0] - 3.0).abs() < 1e-12);
        assert!((g.get(id).data()[1] - 4.0).abs() < 1e-12);
        assert!((p.get(id).data()[0] - -3.0).abs() < 1e-12);
    }

    #[test]
    fn sgd_leaves_small_gradients_alone() {
        let (mut p, mut g) = single_param(&[0.0]);
        let id = crate::numerics::ParamId(0);
        g.get_mut(id).data_mut()[0] = 3.0;
        let norm = sgd_step(&mut p, &mut g, 1.0, 5.0).unwrap();
        assert!((norm - 3.0).abs() < 1e-12);
        assert!((p.get(id).data()[0] - -3.0).abs() < 1e-12);
    }

    #[test]
    fn sgd_rejects_non_finite_with_tensor_name() {
        let (mut p, mut g) = single_param(&[0.0]);
        g.get_mut(crate::numerics::ParamId(0)).data_mut()[0] = f64::NAN;
        match sgd_step(&mut p, &mut g, 1.0, 5.0) {
            Err(TrainError::NonFiniteGrad { tensor }) => assert_eq!(tensor, "w"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schedule_monotone_improvement_keeps_lr() {
        assert_eq!(lr_schedule(&[10.0, 9.0, 8.0], 1.0), 1.0);
    }

    #[test]
    fn schedule_halves_and_stays_halving() {
        // ppl [10, 9, 9.5]: halve after epoch 3, and keep halving afterwards
        // whatever the later perplexities do.
        let lr3 = lr_schedule(&[10.0, 9.0, 9.5], 1.0);
        assert_eq!(lr3, 0.5);
        let lr4 = lr_schedule(&[10.0, 9.0, 9.5, 8.0], lr3);
        assert_eq!(lr4, 0.25);
        let lr5 = lr_schedule(&[10.0, 9.0, 9.5, 8.0, 7.0], lr4);
        assert_eq!(lr5, 0.125);
    }

    #[test]
    fn schedule_single_epoch_keeps_lr() {
        assert_eq!(lr_schedule(&[10.0], 1.0), 1.0);
    }
}
