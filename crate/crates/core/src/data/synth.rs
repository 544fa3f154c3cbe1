use std::collections::HashSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{write_string, DataError, ParallelCorpus};

/// Slot roles inside a sentence template.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Filler,
    Homograph,
    Cue,
}

/// One sentence layout: exactly one homograph slot and one cue slot, the
/// rest fillers. Inventories carry both cue-before and cue-after layouts so
/// only bidirectional context suffices in general.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template(pub Vec<Slot>);

/// One sense of a homograph: the cue word that signals it and the correct
/// target-side translation of the homograph under that sense.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sense {
    pub cue: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homograph {
    pub token: String,
    pub senses: Vec<Sense>,
}

/// Specification of the synthetic homograph corpus.
///
/// Target sentences are word-by-word translations in source order: fillers
/// map through the filler lexicon, the cue is copied verbatim, and the
/// homograph maps to the sense target selected by the cue.
#[derive(Clone, Debug)]
pub struct HomographSpec {
    pub homographs: Vec<Homograph>,
    /// Disjoint filler lexicon: (source token, target token).
    pub fillers: Vec<(String, String)>,
    pub templates: Vec<Template>,
    /// Sentence length range covered by the template inventory.
    pub len_range: (usize, usize),
    pub seed: u64,
}

/// Gold annotation for one generated line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SenseLabel {
    pub line: usize,
    pub homograph: String,
    pub gold_target: String,
}

impl HomographSpec {
    /// Builds a ready-to-use spec: `h<i>` homographs with `cue<i>_<j>` cue
    /// words and `s<i>_<j>` sense targets, plus a filler lexicon `f<k>` ->
    /// `F<k>`. Four templates per sentence length cover cue-before and
    /// cue-after layouts.
    pub fn synthetic(
        n_homographs: usize,
        senses_per: usize,
        n_fillers: usize,
        len_range: (usize, usize),
        seed: u64,
    ) -> Self {
        let homographs = (0..n_homographs)
            .map(|i| Homograph {
                token: format!("h{i}"),
                senses: (0..senses_per)
                    .map(|j| Sense {
                        cue: format!("cue{i}_{j}"),
                        target: format!("s{i}_{j}"),
                    })
                    .collect(),
            })
            .collect();
        let fillers = (0..n_fillers)
            .map(|k| (format!("f{k}"), format!("F{k}")))
            .collect();
        let mut templates = Vec::new();
        for len in len_range.0..=len_range.1 {
            debug_assert!(len >= 2);
            let mut push = |h: usize, c: usize| {
                let mut slots = vec![Slot::Filler; len];
                slots[h] = Slot::Homograph;
                slots[c] = Slot::Cue;
                templates.push(Template(slots));
            };
            // Extremes and interior positions, both orders.
            push(0, len - 1);
            push(len - 1, 0);
            if len >= 4 {
                push(len / 3, 2 * len / 3);
                push(2 * len / 3, len / 3);
            }
        }
        HomographSpec { homographs, fillers, templates, len_range, seed }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.homographs.is_empty() {
            return Err(DataError::Validation("no homographs in spec".into()));
        }
        if self.templates.is_empty() {
            return Err(DataError::Validation("no templates in spec".into()));
        }
        if self.fillers.is_empty() {
            return Err(DataError::Validation("no fillers in spec".into()));
        }
        let homograph_tokens: HashSet<&str> =
            self.homographs.iter().map(|h| h.token.as_str()).collect();
        if homograph_tokens.len() != self.homographs.len() {
            return Err(DataError::Validation("duplicate homograph tokens".into()));
        }
        let mut cues = HashSet::new();
        let mut targets = HashSet::new();
        for h in &self.homographs {
            if h.senses.len() < 2 {
                return Err(DataError::Validation(format!(
                    "homograph {} needs at least two senses",
                    h.token
                )));
            }
            for s in &h.senses {
                if homograph_tokens.contains(s.cue.as_str()) {
                    return Err(DataError::Validation(format!(
                        "cue {} collides with a homograph token",
                        s.cue
                    )));
                }
                if !cues.insert(s.cue.as_str()) {
                    return Err(DataError::Validation(format!("duplicate cue {}", s.cue)));
                }
                if !targets.insert(s.target.as_str()) {
                    return Err(DataError::Validation(format!(
                        "colliding sense target {}",
                        s.target
                    )));
                }
            }
        }
        for (src, tgt) in &self.fillers {
            if homograph_tokens.contains(src.as_str()) || cues.contains(src.as_str()) {
                return Err(DataError::Validation(format!(
                    "filler {src} collides with a homograph or cue"
                )));
            }
            if targets.contains(tgt.as_str()) || cues.contains(tgt.as_str()) {
                return Err(DataError::Validation(format!(
                    "filler target {tgt} collides with a sense target or cue"
                )));
            }
        }
        for t in &self.templates {
            let h = t.0.iter().filter(|s| **s == Slot::Homograph).count();
            let c = t.0.iter().filter(|s| **s == Slot::Cue).count();
            if h != 1 || c != 1 {
                return Err(DataError::Validation(
                    "template must contain exactly one homograph and one cue slot".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Generates `n_pairs` sentence pairs plus gold sense labels.
///
/// (homograph, sense) combinations are cycled round-robin so counts stay
/// balanced; template and filler choices come from the seeded generator.
pub fn gen_homograph_corpus(
    spec: &HomographSpec,
    n_pairs: usize,
) -> Result<(ParallelCorpus, Vec<SenseLabel>), DataError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let combos: Vec<(usize, usize)> = spec
        .homographs
        .iter()
        .enumerate()
        .flat_map(|(i, h)| (0..h.senses.len()).map(move |j| (i, j)))
        .collect();

    let mut pairs = Vec::with_capacity(n_pairs);
    let mut labels = Vec::with_capacity(n_pairs);
    for line in 0..n_pairs {
        let (hi, si) = combos[line % combos.len()];
        let homograph = &spec.homographs[hi];
        let sense = &homograph.senses[si];
        let template = &spec.templates[rng.gen_range(0..spec.templates.len())];

        let mut src = Vec::with_capacity(template.0.len());
        let mut tgt = Vec::with_capacity(template.0.len());
        for slot in &template.0 {
            match slot {
                Slot::Filler => {
                    let (s, t) = &spec.fillers[rng.gen_range(0..spec.fillers.len())];
                    src.push(s.clone());
                    tgt.push(t.clone());
                }
                Slot::Homograph => {
                    src.push(homograph.token.clone());
                    tgt.push(sense.target.clone());
                }
                Slot::Cue => {
                    src.push(sense.cue.clone());
                    tgt.push(sense.cue.clone());
                }
            }
        }
        pairs.push((src, tgt));
        labels.push(SenseLabel {
            line,
            homograph: homograph.token.clone(),
            gold_target: sense.target.clone(),
        });
    }
    Ok((ParallelCorpus { pairs }, labels))
}

/// Sidecar format: `line<TAB>homograph<TAB>gold_target`.
pub fn write_labels(path: &Path, labels: &[SenseLabel]) -> Result<(), DataError> {
    let mut out = String::new();
    for l in labels {
        out.push_str(&format!("{}\t{}\t{}\n", l.line, l.homograph, l.gold_target));
    }
    write_string(path, &out)
}

pub fn read_labels(path: &Path) -> Result<Vec<SenseLabel>, DataError> {
    let text = super::read_to_string(path)?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split('\t');
        let (a, b, c) = (parts.next(), parts.next(), parts.next());
        match (a, b, c) {
            (Some(n), Some(h), Some(t)) => labels.push(SenseLabel {
                line: n.parse().map_err(|_| DataError::Ingest {
                    line: i + 1,
                    message: format!("bad line index {n}"),
                })?,
                homograph: h.to_string(),
                gold_target: t.to_string(),
            }),
            _ => {
                return Err(DataError::Ingest {
                    line: i + 1,
                    message: "expected three tab-separated fields".into(),
                })
            }
        }
    }
    Ok(labels)
}

/// Writes one corpus side, one space-joined sentence per line.
pub fn write_corpus_side<'a, I>(path: &Path, sentences: I) -> Result<(), DataError>
where
    I: IntoIterator<Item = &'a Vec<String>>,
{
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.join(" "));
        out.push('\n');
    }
    write_string(path, &out)
}
