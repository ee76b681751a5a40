//! CIDEr-D: tf-idf weighted n-gram cosine with clipping and a Gaussian
//! length penalty, idf taken over the reference side of the corpus.

use std::collections::HashMap;

use super::{ngram_counts, MetricsError};

const MAX_N: usize = 4;
const SIGMA: f64 = 6.0;

struct TfIdf<'a> {
    vec: [HashMap<Vec<&'a str>, f64>; MAX_N],
    norm: [f64; MAX_N],
    /// Bigram count. The reference scorer measures the length penalty in
    /// bigrams, not words.
    length: usize,
}

fn to_tfidf<'a>(counts: HashMap<Vec<&'a str>, usize>, df: &HashMap<Vec<&'a str>, f64>, log_n: f64) -> TfIdf<'a> {
    let mut vec: [HashMap<Vec<&str>, f64>; MAX_N] = Default::default();
    let mut norm = [0.0; MAX_N];
    let mut length = 0;
    for (gram, tf) in counts {
        let n = gram.len() - 1;
        let doc_freq = df.get(&gram).copied().unwrap_or(0.0).max(1.0).ln();
        let w = tf as f64 * (log_n - doc_freq);
        norm[n] += w * w;
        if n == 1 {
            length += tf;
        }
        vec[n].insert(gram, w);
    }
    norm.iter_mut().for_each(|x| *x = x.sqrt());
    TfIdf { vec, norm, length }
}

fn similarity(hyp: &TfIdf<'_>, reference: &TfIdf<'_>) -> [f64; MAX_N] {
    let delta = hyp.length as f64 - reference.length as f64;
    let penalty = (-(delta * delta) / (2.0 * SIGMA * SIGMA)).exp();
    let mut val = [0.0; MAX_N];
    for (n, v) in val.iter_mut().enumerate() {
        for (gram, &h) in &hyp.vec[n] {
            let r = reference.vec[n].get(gram).copied().unwrap_or(0.0);
            *v += h.min(r) * r;
        }
        if hyp.norm[n] != 0.0 && reference.norm[n] != 0.0 {
            *v /= hyp.norm[n] * reference.norm[n];
        }
        *v *= penalty;
    }
    val
}

/// Per-document CIDEr-D scores (scaled by 10) of tokenized captions.
pub fn cider_per_document(candidates: &[String], references: &[Vec<String>]) -> Result<Vec<f64>, MetricsError> {
    super::check_lengths(candidates.len(), references.len())?;
    let tokenized_refs: Vec<Vec<Vec<&str>>> =
        references.iter().map(|refs| refs.iter().map(|r| r.split_whitespace().collect()).collect()).collect();

    let mut df: HashMap<Vec<&str>, f64> = HashMap::new();
    let ref_counts: Vec<Vec<HashMap<Vec<&str>, usize>>> = tokenized_refs
        .iter()
        .map(|refs| refs.iter().map(|r| ngram_counts(r, MAX_N)).collect())
        .collect();
    for refs in &ref_counts {
        let distinct: std::collections::HashSet<&Vec<&str>> = refs.iter().flat_map(|c| c.keys()).collect();
        for g in distinct {
            *df.entry(g.clone()).or_insert(0.0) += 1.0;
        }
    }
    let log_n = (candidates.len() as f64).ln();

    let mut scores = Vec::with_capacity(candidates.len());
    for (cand, refs) in candidates.iter().zip(ref_counts) {
        if refs.is_empty() {
            return Err(MetricsError::NoReference);
        }
        let words: Vec<&str> = cand.split_whitespace().collect();
        let hyp = to_tfidf(ngram_counts(&words, MAX_N), &df, log_n);
        let mut total = [0.0; MAX_N];
        let n_refs = refs.len();
        for r in refs {
            let reference = to_tfidf(r, &df, log_n);
            let s = similarity(&hyp, &reference);
            total.iter_mut().zip(s).for_each(|(t, v)| *t += v);
        }
        let mean = total.iter().sum::<f64>() / MAX_N as f64;
        scores.push(mean / n_refs as f64 * 10.0);
    }
    Ok(scores)
}

/// Corpus-mean CIDEr-D of tokenized captions.
pub fn cider_tokenized(candidates: &[String], references: &[Vec<String>]) -> Result<f64, MetricsError> {
    let scores = cider_per_document(candidates, references)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}
