use std::collections::HashMap;

use super::EvalError;

/// Corpus-level BLEU in `[0, 1]`: geometric mean of modified n-gram
/// precisions (n = 1..max_n) times the brevity penalty.
///
/// Smoothing: for n >= 2 only, when the raw match count is zero, one is
/// added to both numerator and denominator. A zero unigram match count
/// yields exactly 0.
pub fn bleu(
    references: &[Vec<String>],
    hypotheses: &[Vec<String>],
    max_n: usize,
) -> Result<f64, EvalError> {
    if references.len() != hypotheses.len() {
        return Err(EvalError::Contract(format!(
            "{} references vs {} hypotheses",
            references.len(),
            hypotheses.len()
        )));
    }
    if max_n == 0 {
        return Err(EvalError::Contract("max_n must be at least 1".into()));
    }

    let mut matches = vec![0usize; max_n];
    let mut totals = vec![0usize; max_n];
    let mut ref_len = 0usize;
    let mut hyp_len = 0usize;

    for (r, h) in references.iter().zip(hypotheses.iter()) {
        ref_len += r.len();
        hyp_len += h.len();
        for n in 1..=max_n {
            let ref_grams = ngram_counts(r, n);
            let hyp_grams = ngram_counts(h, n);
            for (gram, count) in &hyp_grams {
                let clip = ref_grams.get(gram).copied().unwrap_or(0);
                matches[n - 1] += (*count).min(clip);
                totals[n - 1] += count;
            }
        }
    }

    if hyp_len == 0 {
        return Ok(0.0);
    }
    let brevity = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };

    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let (m, t) = (matches[n - 1], totals[n - 1]);
        let p = if n == 1 {
            if m == 0 {
                return Ok(0.0);
            }
            m as f64 / t as f64
        } else if m == 0 {
            (m + 1) as f64 / (t + 1) as f64
        } else {
            m as f64 / t as f64
        };
        log_sum += p.ln();
    }
    Ok(brevity * (log_sum / max_n as f64).exp())
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for i in 0..=tokens.len() - n {
            *counts.entry(&tokens[i..i + n]).or_insert(0) += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn identical_corpus_scores_one() {
        let refs = vec![sent("the cat sat"), sent("on a mat today")];
        assert_eq!(bleu(&refs, &refs, 4).unwrap(), 1.0);
    }

    #[test]
    fn hand_derived_score() {
        let refs = vec![sent("a b c d")];
        let hyps = vec![sent("a b c d e")];
        let got = bleu(&refs, &hyps, 4).unwrap();
        // (4/5 * 3/4 * 2/3 * 1/2)^(1/4) = 0.2^0.25
        let expect = 0.2f64.powf(0.25);
        assert!((got - expect).abs() < 5e-5, "{got} vs {expect}");
        assert!((got - 0.6687).abs() < 5e-5);
    }

    #[test]
    fn empty_overlap_is_small_but_defined() {
        let refs = vec![sent("a b c d")];
        let hyps = vec![sent("x y z w")];
        let got = bleu(&refs, &hyps, 4).unwrap();
        assert!(got < 0.05);
        assert!(got >= 0.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        let refs = vec![sent("a")];
        assert!(matches!(bleu(&refs, &[], 4), Err(EvalError::Contract(_))));
    }

    #[test]
    fn order_invariance() {
        let refs = vec![sent("a b c d"), sent("x y z")];
        let hyps = vec![sent("a b d c"), sent("x z y")];
        let fwd = bleu(&refs, &hyps, 4).unwrap();
        let rev_refs: Vec<_> = refs.iter().rev().cloned().collect();
        let rev_hyps: Vec<_> = hyps.iter().rev().cloned().collect();
        let rev = bleu(&rev_refs, &rev_hyps, 4).unwrap();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn short_hypothesis_pays_brevity_penalty() {
        let refs = vec![sent("a b c d e f")];
        let hyps = vec![sent("a b c")];
        let full = vec![sent("a b c d e f")];
        let long_score = bleu(&refs, &full, 4).unwrap();
        let short_score = bleu(&refs, &hyps, 4).unwrap();
        assert!(short_score < long_score);
    }
}
