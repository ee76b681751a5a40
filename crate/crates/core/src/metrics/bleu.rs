use std::collections::HashMap;

use super::{ngram_counts, MetricsError};

const MAX_N: usize = 4;
// Same smoothing constants as the COCO scorer, so all-zero orders give ~0
// rather than a division error.
const TINY: f64 = 1e-15;
const SMALL: f64 = 1e-9;

/// Corpus-level BLEU-1..4 with clipped counts, closest reference length
/// and brevity penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BleuScores {
    pub cumulative: [f64; MAX_N],
    pub candidate_length: usize,
    pub reference_length: usize,
}

impl BleuScores {
    pub fn bleu4(&self) -> f64 {
        self.cumulative[MAX_N - 1]
    }
}

/// Scores tokenized candidates against one or more tokenized references each.
pub fn bleu_tokenized(candidates: &[String], references: &[Vec<String>]) -> Result<BleuScores, MetricsError> {
    super::check_lengths(candidates.len(), references.len())?;
    let mut guess = [0usize; MAX_N];
    let mut correct = [0usize; MAX_N];
    let (mut test_len, mut ref_len) = (0usize, 0usize);

    for (cand, refs) in candidates.iter().zip(references) {
        let words: Vec<&str> = cand.split_whitespace().collect();
        let mut max_ref: HashMap<Vec<&str>, usize> = HashMap::new();
        let mut ref_lens = Vec::with_capacity(refs.len());
        for r in refs {
            let rw: Vec<&str> = r.split_whitespace().collect();
            ref_lens.push(rw.len());
            for (g, c) in ngram_counts(&rw, MAX_N) {
                let e = max_ref.entry(g).or_insert(0);
                *e = (*e).max(c);
            }
        }
        let closest = ref_lens
            .iter()
            .copied()
            .min_by_key(|&l| (l.abs_diff(words.len()), l))
            .ok_or(MetricsError::NoReference)?;
        test_len += words.len();
        ref_len += closest;
        for k in 1..=MAX_N {
            guess[k - 1] += (words.len() + 1).saturating_sub(k);
        }
        for (g, c) in ngram_counts(&words, MAX_N) {
            correct[g.len() - 1] += c.min(max_ref.get(&g).copied().unwrap_or(0));
        }
    }

    let mut cumulative = [0.0; MAX_N];
    let mut product = 1.0;
    for k in 0..MAX_N {
        product *= (correct[k] as f64 + TINY) / (guess[k] as f64 + SMALL);
        cumulative[k] = product.powf(1.0 / (k + 1) as f64);
    }
    let ratio = (test_len as f64 + TINY) / (ref_len as f64 + SMALL);
    if ratio < 1.0 {
        let bp = (1.0 - 1.0 / ratio).exp();
        cumulative.iter_mut().for_each(|b| *b *= bp);
    }
    Ok(BleuScores { cumulative, candidate_length: test_len, reference_length: ref_len })
}
