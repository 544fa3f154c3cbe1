//! Flat `key = value` configuration files.
//!
//! One format serves the training CLI and the checkpoint header. Unknown
//! keys are rejected with their line number; later assignments win, so
//! command-line overrides can simply be appended.

use thiserror::Error;

use crate::context::{ContextKind, IntegrationKind};
use crate::seq2seq::{Direction, ModelConfig};
use crate::training::TrainConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("config line {line}: bad value for `{key}`: {message}")]
    BadValue { key: String, line: usize, message: String },
    #[error("config line {line}: expected `key = value`")]
    Malformed { line: usize },
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are
/// skipped. Returns `(key, value, line_number)` triples in file order.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String, usize)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = stripped.trim();
        if trimmed.is_empty() {
            continue;
        }
        let Some((k, v)) = trimmed.split_once('=') else {
            return Err(ConfigError::Malformed { line });
        };
        out.push((k.trim().to_string(), v.trim().to_string(), line));
    }
    Ok(out)
}

/// The full experiment configuration: architecture plus training recipe
/// plus the vocabulary truncation limit.
#[derive(Clone, Debug, PartialEq)]
pub struct FullConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    /// Keep the top-k most frequent words per side.
    pub vocab_size: usize,
}

impl Default for FullConfig {
    fn default() -> Self {
        FullConfig {
            // Vocabulary sizes are placeholders until the corpora are read.
            model: ModelConfig {
                d: 500,
                hidden: 500,
                direction: Direction::Bi,
                enc_layers: 2,
                dec_layers: 2,
                context: ContextKind::None,
                integration: IntegrationKind::Concat,
                src_vocab: 0,
                tgt_vocab: 0,
                dropout: 0.3,
            },
            train: TrainConfig::default(),
            vocab_size: 50_000,
        }
    }
}

impl FullConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = FullConfig::default();
        for (key, value, line) in parse_kv(text)? {
            cfg.apply(&key, &value, line)?;
        }
        Ok(cfg)
    }

    /// Applies one assignment; rejects unknown keys.
    pub fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::BadValue {
            key: key.to_string(),
            line,
            message,
        };
        match key {
            "d" => self.model.d = parse_num(key, value, line)?,
            "hidden" => self.model.hidden = parse_num(key, value, line)?,
            "direction" => {
                self.model.direction = Direction::parse(value)
                    .ok_or_else(|| bad("expected uni|bi".into()))?;
            }
            "enc_layers" => self.model.enc_layers = parse_num(key, value, line)?,
            "dec_layers" => self.model.dec_layers = parse_num(key, value, line)?,
            "context" => {
                self.model.context = ContextKind::parse(value)
                    .ok_or_else(|| bad("expected none|nbow|bilstm|holstm".into()))?;
            }
            "integration" => {
                self.model.integration = IntegrationKind::parse(value)
                    .ok_or_else(|| bad("expected gate|concat".into()))?;
            }
            "dropout" => self.model.dropout = parse_num(key, value, line)?,
            "vocab_size" => self.vocab_size = parse_num(key, value, line)?,
            "lr" => self.train.lr = parse_num(key, value, line)?,
            "clip_norm" => self.train.clip_norm = parse_num(key, value, line)?,
            "max_batch" => self.train.max_batch = parse_num(key, value, line)?,
            "max_len" => self.train.max_len = parse_num(key, value, line)?,
            "convergence_delta" => self.train.convergence_delta = parse_num(key, value, line)?,
            "max_epochs" => self.train.max_epochs = parse_num(key, value, line)?,
            "seed" => self.train.seed = parse_num(key, value, line)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                    line,
                })
            }
        }
        Ok(())
    }

    /// The resolved configuration, echoed into every output directory.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let t = &self.train;
        format!(
            "d = {}\nhidden = {}\ndirection = {}\nenc_layers = {}\ndec_layers = {}\n\
             context = {}\nintegration = {}\ndropout = {}\nvocab_size = {}\n\
             lr = {}\nclip_norm = {}\nmax_batch = {}\nmax_len = {}\n\
             convergence_delta = {}\nmax_epochs = {}\nseed = {}\n",
            m.d,
            m.hidden,
            m.direction.as_str(),
            m.enc_layers,
            m.dec_layers,
            m.context.as_str(),
            m.integration.as_str(),
            m.dropout,
            self.vocab_size,
            t.lr,
            t.clip_norm,
            t.max_batch,
            t.max_len,
            t.convergence_delta,
            t.max_epochs,
            t.seed
        )
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        line,
        message: format!("could not parse `{value}`"),
    })
}

/// Serializes the architecture section alone (used by checkpoints, where
/// vocabulary sizes are already final).
pub fn model_to_text(cfg: &ModelConfig) -> String {
    format!(
        "d = {}\nhidden = {}\ndirection = {}\nenc_layers = {}\ndec_layers = {}\n\
         context = {}\nintegration = {}\nsrc_vocab = {}\ntgt_vocab = {}\ndropout = {}\n",
        cfg.d,
        cfg.hidden,
        cfg.direction.as_str(),
        cfg.enc_layers,
        cfg.dec_layers,
        cfg.context.as_str(),
        cfg.integration.as_str(),
        cfg.src_vocab,
        cfg.tgt_vocab,
        cfg.dropout
    )
}

pub fn model_from_text(text: &str) -> Result<ModelConfig, ConfigError> {
    let mut cfg = FullConfig::default().model;
    for (key, value, line) in parse_kv(text)? {
        match key.as_str() {
            "src_vocab" => cfg.src_vocab = parse_num(&key, &value, line)?,
            "tgt_vocab" => cfg.tgt_vocab = parse_num(&key, &value, line)?,
            "d" => cfg.d = parse_num(&key, &value, line)?,
            "hidden" => cfg.hidden = parse_num(&key, &value, line)?,
            "direction" => {
                cfg.direction = Direction::parse(&value).ok_or(ConfigError::BadValue {
                    key,
                    line,
                    message: "expected uni|bi".into(),
                })?;
            }
            "enc_layers" => cfg.enc_layers = parse_num(&key, &value, line)?,
            "dec_layers" => cfg.dec_layers = parse_num(&key, &value, line)?,
            "context" => {
                cfg.context = ContextKind::parse(&value).ok_or(ConfigError::BadValue {
                    key,
                    line,
                    message: "expected none|nbow|bilstm|holstm".into(),
                })?;
            }
            "integration" => {
                cfg.integration = IntegrationKind::parse(&value).ok_or(ConfigError::BadValue {
                    key,
                    line,
                    message: "expected gate|concat".into(),
                })?;
            }
            "dropout" => cfg.dropout = parse_num(&key, &value, line)?,
            _ => return Err(ConfigError::UnknownKey { key, line }),
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_paper_values() {
        let c = FullConfig::default();
        assert_eq!(c.train.lr, 1.0);
        assert_eq!(c.train.clip_norm, 5.0);
        assert_eq!(c.train.max_batch, 256);
        assert_eq!(c.train.max_len, 50);
        assert_eq!(c.model.dropout, 0.3);
        assert_eq!(c.train.convergence_delta, 0.01);
        assert_eq!(c.vocab_size, 50_000);
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let err = FullConfig::from_text("d = 8\nfrobnicate = 1\n").unwrap_err();
        match err {
            ConfigError::UnknownKey { key, line } => {
                assert_eq!(key, "frobnicate");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let cfg = FullConfig::from_text("# comment\n\nd = 16 # inline\n").unwrap();
        assert_eq!(cfg.model.d, 16);
    }

    #[test]
    fn resolved_text_round_trips() {
        let mut cfg = FullConfig::default();
        cfg.model.d = 32;
        cfg.model.context = ContextKind::Bilstm;
        cfg.train.seed = 7;
        let back = FullConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn model_section_round_trips() {
        let mut cfg = FullConfig::default().model;
        cfg.src_vocab = 61;
        cfg.tgt_vocab = 59;
        cfg.context = ContextKind::Holstm;
        cfg.integration = IntegrationKind::Gate;
        let back = model_from_text(&model_to_text(&cfg)).unwrap();
        assert_eq!(cfg, back);
    }
}
