//! Corpus ingestion, vocabularies, and the synthetic homograph corpus.
//!
//! Input corpora are UTF-8 text, one sentence per line, whitespace-separated
//! tokens. Tokenization itself is out of scope: ingest pre-tokenized text.

mod synth;
mod vocab;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

pub use synth::{gen_homograph_corpus, Homograph, HomographSpec, Sense, SenseLabel, Slot, Template};
pub use vocab::{Vocabulary, BOS_ID, EOS_ID, HOLDOUT_ID, NUM_RESERVED, PAD_ID, UNK_ID};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("ingestion error at line {line}: {message}")]
    Ingest { line: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_string(path: &Path, contents: &str) -> Result<(), DataError> {
    fs::write(path, contents).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Aligned tokenized sentence pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub pairs: Vec<(Vec<String>, Vec<String>)>,
}

impl ParallelCorpus {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Splits one line into tokens; empty lines are rejected by ingestion.
pub fn tokenize_line(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_string).collect()
}

/// Reads a single corpus side: one sentence per line.
pub fn read_lines(path: &Path) -> Result<Vec<Vec<String>>, DataError> {
    let text = read_to_string(path)?;
    Ok(text.lines().map(tokenize_line).collect())
}

/// Ingests a parallel corpus from two files with matching line counts.
/// Empty sentences on either side are rejected with their line number.
pub fn read_parallel(src: &Path, tgt: &Path) -> Result<ParallelCorpus, DataError> {
    let src_lines = read_lines(src)?;
    let tgt_lines = read_lines(tgt)?;
    if src_lines.len() != tgt_lines.len() {
        return Err(DataError::Ingest {
            line: src_lines.len().min(tgt_lines.len()) + 1,
            message: format!(
                "line counts differ: {} source vs {} target",
                src_lines.len(),
                tgt_lines.len()
            ),
        });
    }
    let mut pairs = Vec::with_capacity(src_lines.len());
    for (i, (s, t)) in src_lines.into_iter().zip(tgt_lines).enumerate() {
        if s.is_empty() || t.is_empty() {
            return Err(DataError::Ingest {
                line: i + 1,
                message: "empty sentence".into(),
            });
        }
        pairs.push((s, t));
    }
    Ok(ParallelCorpus { pairs })
}

/// A corpus mapped to vocabulary indices. Targets are wrapped with
/// begin/end-of-sentence ids; sources are not.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexedCorpus {
    pub pairs: Vec<(Vec<usize>, Vec<usize>)>,
}

impl IndexedCorpus {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Source length and unwrapped target length of pair `i`, in words.
    pub fn word_lengths(&self, i: usize) -> (usize, usize) {
        let (s, t) = &self.pairs[i];
        (s.len(), t.len().saturating_sub(2))
    }
}

/// Builds a vocabulary from one corpus side: the `k` most frequent tokens
/// are kept (ties broken lexicographically), everything else maps to the
/// unknown id. Reserved symbols never enter the count.
pub fn build_vocab<'a, I>(sentences: I, k: usize) -> Result<Vocabulary, DataError>
where
    I: IntoIterator<Item = &'a Vec<String>>,
{
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut any = false;
    for sent in sentences {
        any = true;
        for tok in sent {
            if Vocabulary::is_reserved_token(tok) {
                continue;
            }
            *counts.entry(tok.as_str()).or_insert(0) += 1;
        }
    }
    if !any || counts.is_empty() {
        return Err(DataError::Domain("cannot build vocabulary from empty corpus".into()));
    }
    // Sort by descending count, then token order (BTreeMap gives us the
    // lexicographic order for free on ties).
    let mut items: Vec<(&str, u64)> = counts.into_iter().collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    items.truncate(k);
    Ok(Vocabulary::with_tokens(items.into_iter().map(|(t, _)| t)))
}

/// Maps a parallel corpus to indices. Out-of-vocabulary tokens become the
/// unknown id; targets get begin/end wrapping.
pub fn index_corpus(
    corpus: &ParallelCorpus,
    src_vocab: &Vocabulary,
    tgt_vocab: &Vocabulary,
) -> IndexedCorpus {
    let pairs = corpus
        .pairs
        .iter()
        .map(|(s, t)| {
            let src: Vec<usize> = s.iter().map(|tok| src_vocab.index_of(tok)).collect();
            let mut tgt = Vec::with_capacity(t.len() + 2);
            tgt.push(BOS_ID);
            tgt.extend(t.iter().map(|tok| tgt_vocab.index_of(tok)));
            tgt.push(EOS_ID);
            (src, tgt)
        })
        .collect();
    IndexedCorpus { pairs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sents(lines: &[&str]) -> Vec<Vec<String>> {
        lines.iter().map(|l| tokenize_line(l)).collect()
    }

    #[test]
    fn vocab_keeps_top_k_by_frequency() {
        let corpus = sents(&["a a a b b c"]);
        let v = build_vocab(&corpus, 2).unwrap();
        assert!(v.contains("a"));
        assert!(v.contains("b"));
        assert!(!v.contains("c"));
        assert_eq!(v.index_of("c"), UNK_ID);
    }

    #[test]
    fn vocab_ties_break_lexicographically() {
        let corpus = sents(&["b a b a"]);
        let v = build_vocab(&corpus, 1).unwrap();
        assert!(v.contains("a"));
        assert!(!v.contains("b"));
    }

    #[test]
    fn vocab_empty_corpus_is_domain_error() {
        let corpus: Vec<Vec<String>> = vec![];
        assert!(matches!(
            build_vocab(&corpus, 5),
            Err(DataError::Domain(_))
        ));
    }

    #[test]
    fn vocab_round_trip_identity() {
        let corpus = sents(&["x y z w"]);
        let v = build_vocab(&corpus, 10).unwrap();
        for id in 0..v.len() {
            let tok = v.token_of(id).unwrap();
            assert_eq!(v.index_of(tok), id);
        }
    }

    #[test]
    fn reserved_literals_never_enter_vocab() {
        let corpus = sents(&["<unk> w w <pad>"]);
        let v = build_vocab(&corpus, 10).unwrap();
        // The literal stays mapped to the reserved id, not a fresh one.
        assert_eq!(v.index_of("<unk>"), UNK_ID);
        assert_eq!(v.token_of(UNK_ID), Some("<unk>"));
        assert!(v.contains("w"));
    }

    #[test]
    fn indexing_wraps_target_and_maps_oov() {
        let corpus = ParallelCorpus {
            pairs: vec![(
                tokenize_line("a b zzz"),
                tokenize_line("a b"),
            )],
        };
        let v = build_vocab(corpus.pairs.iter().map(|p| &p.0), 2).unwrap();
        let idx = index_corpus(&corpus, &v, &v);
        let (src, tgt) = &idx.pairs[0];
        assert_eq!(src[2], UNK_ID);
        assert_eq!(tgt[0], BOS_ID);
        assert_eq!(*tgt.last().unwrap(), EOS_ID);
        assert_eq!(tgt.len(), 4);
        // In-vocabulary tokens round-trip exactly.
        assert_eq!(v.token_of(src[0]), Some("a"));
        assert_eq!(v.token_of(src[1]), Some("b"));
    }

    #[test]
    fn parallel_ingestion_rejects_mismatched_lines() {
        let dir = tempfile::tempdir().unwrap();
        let s = dir.path().join("s.txt");
        let t = dir.path().join("t.txt");
        std::fs::write(&s, "a b\nc d\n").unwrap();
        std::fs::write(&t, "x y\n").unwrap();
        let err = read_parallel(&s, &t).unwrap_err();
        assert!(matches!(err, DataError::Ingest { line: 2, .. }));
    }

    #[test]
    fn parallel_ingestion_rejects_empty_sentence() {
        let dir = tempfile::tempdir().unwrap();
        let s = dir.path().join("s.txt");
        let t = dir.path().join("t.txt");
        std::fs::write(&s, "a b\n\n").unwrap();
        std::fs::write(&t, "x\ny\n").unwrap();
        let err = read_parallel(&s, &t).unwrap_err();
        assert!(matches!(err, DataError::Ingest { line: 2, .. }));
    }
}
