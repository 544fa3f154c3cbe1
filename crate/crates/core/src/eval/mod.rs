//! The measurement pipeline: corpus BLEU, an EM lexical aligner with
//! grow-diag-final-and symmetrization, alignment-derived word-translation
//! precision/recall/F1 with micro-averaging, sense-count bucketing, and
//! paired bootstrap comparison.

mod aligner;
mod bleu;
mod f1;

use std::collections::BTreeSet;

use thiserror::Error;

pub use aligner::{align, grow_diag_final_and, train_aligner, AlignDirection, LexTable};
pub use bleu::bleu;
pub use f1::{
    bootstrap_compare, report_to_json, report_to_tsv, sense_bucket_report, word_translation_f1,
    BucketPoint, Counts, HomographReport, SenseDictionary, TranslationPair,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract error: {0}")]
    Contract(String),
    #[error("ingestion error at line {line}: {message}")]
    Ingest { line: usize, message: String },
}

/// Links of one sentence pair: 0-based (source, target) position pairs.
pub type Links = BTreeSet<(usize, usize)>;

/// Per-pair alignment link sets for a corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlignmentSet {
    pub links: Vec<Links>,
}

impl AlignmentSet {
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// Parses Pharaoh text: one line per pair, space-separated `i-j` links.
pub fn parse_pharaoh(text: &str) -> Result<AlignmentSet, EvalError> {
    let mut links = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let mut set = Links::new();
        for piece in line.split_whitespace() {
            let Some((i, j)) = piece.split_once('-') else {
                return Err(EvalError::Ingest {
                    line: idx + 1,
                    message: format!("expected `i-j`, got `{piece}`"),
                });
            };
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| EvalError::Ingest {
                    line: idx + 1,
                    message: format!("bad position `{s}`"),
                })
            };
            set.insert((parse(i)?, parse(j)?));
        }
        links.push(set);
    }
    Ok(AlignmentSet { links })
}

/// Formats links as Pharaoh text (links in sorted order).
pub fn format_pharaoh(set: &AlignmentSet) -> String {
    let mut out = String::new();
    for links in &set.links {
        let mut first = true;
        for (i, j) in links {
            if !first {
                out.push(' ');
            }
            out.push_str(&format!("{i}-{j}"));
            first = false;
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pharaoh_round_trip() {
        let text = "0-0 1-2 2-1\n\n3-3\n";
        let set = parse_pharaoh(text).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.links[0].len(), 3);
        assert!(set.links[1].is_empty());
        assert_eq!(format_pharaoh(&set), text);
    }

    #[test]
    fn pharaoh_rejects_malformed_with_line() {
        let err = parse_pharaoh("0-0\n1:2\n").unwrap_err();
        assert!(matches!(err, EvalError::Ingest { line: 2, .. }));
    }
}
