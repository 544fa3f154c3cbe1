use std::collections::HashMap;
use std::path::Path;

use super::{write_string, DataError};

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const BOS_ID: usize = 2;
pub const EOS_ID: usize = 3;
/// Reserved symbol used by the held-out context network; never produced by
/// tokenization.
pub const HOLDOUT_ID: usize = 4;
pub const NUM_RESERVED: usize = 5;

const RESERVED_TOKENS: [&str; NUM_RESERVED] = ["<pad>", "<unk>", "<s>", "</s>", "<$>"];

/// Bidirectional token <-> index map with fixed reserved entries at the
/// front: pad, unk, begin, end, held-out symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from regular tokens in rank order; reserved
    /// entries are prepended automatically.
    pub fn with_tokens<'a, I: IntoIterator<Item = &'a str>>(tokens: I) -> Self {
        let mut v = Vocabulary { tokens: Vec::new(), index: HashMap::new() };
        for t in RESERVED_TOKENS {
            v.push(t);
        }
        for t in tokens {
            if !v.index.contains_key(t) {
                v.push(t);
            }
        }
        v
    }

    fn push(&mut self, token: &str) {
        self.index.insert(token.to_string(), self.tokens.len());
        self.tokens.push(token.to_string());
    }

    pub fn is_reserved_token(token: &str) -> bool {
        RESERVED_TOKENS.contains(&token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Index of `token`, or the unknown id if unseen.
    pub fn index_of(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token_of(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// Regular (non-reserved) tokens in rank order.
    pub fn regular_tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens[NUM_RESERVED..].iter().map(String::as_str)
    }

    /// One token per line, rank order, reserved entries first.
    pub fn save(&self, path: &Path) -> Result<(), DataError> {
        let mut out = String::new();
        for t in &self.tokens {
            out.push_str(t);
            out.push('\n');
        }
        write_string(path, &out)
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = super::read_to_string(path)?;
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() < NUM_RESERVED {
            return Err(DataError::Validation(format!(
                "vocabulary file {} is missing reserved entries",
                path.display()
            )));
        }
        for (i, expect) in RESERVED_TOKENS.iter().enumerate() {
            if lines[i] != *expect {
                return Err(DataError::Validation(format!(
                    "vocabulary file {} line {}: expected reserved token {expect}, got {}",
                    path.display(),
                    i + 1,
                    lines[i]
                )));
            }
        }
        Ok(Vocabulary::with_tokens(lines[NUM_RESERVED..].iter().copied()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_ids_are_stable() {
        let v = Vocabulary::with_tokens(["hello"]);
        assert_eq!(v.index_of("<pad>"), PAD_ID);
        assert_eq!(v.index_of("<unk>"), UNK_ID);
        assert_eq!(v.index_of("<s>"), BOS_ID);
        assert_eq!(v.index_of("</s>"), EOS_ID);
        assert_eq!(v.index_of("<$>"), HOLDOUT_ID);
        assert_eq!(v.index_of("hello"), NUM_RESERVED);
    }

    #[test]
    fn unseen_maps_to_unk() {
        let v = Vocabulary::with_tokens(["a"]);
        assert_eq!(v.index_of("never-seen"), UNK_ID);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        let v = Vocabulary::with_tokens(["b", "a", "c"]);
        v.save(&path).unwrap();
        let w = Vocabulary::load(&path).unwrap();
        assert_eq!(v, w);
    }
}
