//! Shared inputs for the criterion benchmarks.

use newscap_core::synth::{generate, SynthConfig, SyntheticCorpus};
use newscap_core::CorpusStyle;

pub fn corpus(docs: usize, style: CorpusStyle) -> SyntheticCorpus {
    generate(&SynthConfig { docs, style, ..Default::default() })
}

/// Candidate/reference pairs: each caption against the first sentence of
/// its own article.
pub fn caption_pairs(synth: &SyntheticCorpus) -> (Vec<String>, Vec<String>) {
    synth.corpus.iter().map(|d| (d.sentences[0].text.clone(), d.caption.clone())).unzip()
}
