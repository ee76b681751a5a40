//! Brute-force checkers written independently of the library's own
//! matching code: plain scans over the raw strings.

#![allow(dead_code)]

use std::collections::HashSet;

use newscap_core::alignment::{AlignmentSample, SampleMeta, SentProvenance};
use newscap_core::context::SupplementedContext;
use newscap_core::{Document, Entity, Label};

fn word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Does `needle` occur in `hay` with no word character glued on either side?
pub fn mentions(hay: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let hay: Vec<char> = hay.chars().collect();
    let needle: Vec<char> = needle.chars().collect();
    if needle.len() > hay.len() {
        return false;
    }
    for start in 0..=hay.len() - needle.len() {
        if hay[start..start + needle.len()] != needle[..] {
            continue;
        }
        let end = start + needle.len();
        let left_ok = start == 0 || !(word_char(hay[start - 1]) && word_char(needle[0]));
        let right_ok = end == hay.len() || !(word_char(hay[end]) && word_char(needle[needle.len() - 1]));
        if left_ok && right_ok {
            return true;
        }
    }
    false
}

pub const NON_VISUAL: [Label; 7] = [Label::Date, Label::Time, Label::Percent, Label::Money, Label::Quantity, Label::Ordinal, Label::Cardinal];

pub fn visual_surfaces(caption_entities: &[Entity]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for e in caption_entities {
        if !NON_VISUAL.contains(&e.label) && !out.contains(&e.surface) {
            out.push(e.surface.clone());
        }
    }
    out
}

/// Caption surfaces also present among article surfaces, by caption position, once each.
pub fn expected_targets(caption_entities: &[Entity], article_entities: &[Entity]) -> Vec<String> {
    let mut caption: Vec<&Entity> = caption_entities.iter().collect();
    caption.sort_by_key(|e| e.span.0);
    let mut out: Vec<String> = Vec::new();
    for e in caption {
        if article_entities.iter().any(|a| a.surface == e.surface) && !out.contains(&e.surface) {
            out.push(e.surface.clone());
        }
    }
    out
}

/// Violations in one document's sentence-selection set.
pub fn check_sent_set(doc: &Document, caption_entities: &[Entity], set: &[AlignmentSample]) -> Vec<String> {
    let visual = visual_surfaces(caption_entities);
    let mut errors = Vec::new();
    let mut caption_positives = 0;
    for s in set {
        let SampleMeta::Sent { provenance, sentence_index, .. } = &s.metadata else {
            errors.push(format!("{}: not a SENT sample", s.id));
            continue;
        };
        let hit = visual.iter().any(|v| mentions(&s.input_context, v));
        match provenance {
            SentProvenance::Positive => {
                if !hit || s.target != "yes" {
                    errors.push(format!("{}: positive without visual caption entity", s.id));
                }
                if sentence_index.map(|i| doc.sentences[i].text.as_str()) != Some(s.input_context.as_str()) {
                    errors.push(format!("{}: positive is not an article sentence", s.id));
                }
            }
            SentProvenance::Negative => {
                if hit || s.target != "no" {
                    errors.push(format!("{}: negative mentions a visual caption entity", s.id));
                }
            }
            SentProvenance::CaptionAsPositive => {
                caption_positives += 1;
                if s.input_context != doc.caption || s.target != "yes" {
                    errors.push(format!("{}: caption sample is not the caption labelled yes", s.id));
                }
            }
        }
    }
    if !set.is_empty() && caption_positives != 1 {
        errors.push(format!("{}: caption appears {caption_positives} times as positive", doc.doc_id));
    }
    if set.is_empty() && !visual.is_empty() {
        errors.push(format!("{}: no samples despite visual caption entities", doc.doc_id));
    }
    errors
}

pub fn check_ent_sample(caption_entities: &[Entity], article_entities: &[Entity], sample: &AlignmentSample) -> Vec<String> {
    let expected = expected_targets(caption_entities, article_entities);
    let mut errors = Vec::new();
    if sample.target != expected.join(", ") {
        errors.push(format!("{}: target {:?}, expected {:?}", sample.id, sample.target, expected));
    }
    if let SampleMeta::Ent { targets, .. } = &sample.metadata {
        if targets != &expected {
            errors.push(format!("{}: metadata targets differ", sample.id));
        }
    }
    errors
}

fn words(s: &str) -> usize {
    s.split_whitespace().count()
}

/// Budget and ordering violations of one context.
pub fn check_context(doc: &Document, ctx: &SupplementedContext, budget: usize) -> Vec<String> {
    let mut errors = Vec::new();
    let sentence_part = match ctx.final_text.rsplit_once('\n') {
        Some((s, _)) if !ctx.entity_hints.is_empty() => s,
        _ => ctx.final_text.as_str(),
    };
    if words(sentence_part) > budget {
        errors.push(format!("{} {}: {} words > {budget}", doc.doc_id, ctx.regime, words(sentence_part)));
    }
    if ctx.base_sentence_indices.windows(2).any(|w| w[0] >= w[1]) {
        errors.push(format!("{} {}: indices not strictly ascending", doc.doc_id, ctx.regime));
    }
    if ctx.base_sentence_indices.iter().any(|&i| i >= doc.sentences.len()) {
        errors.push(format!("{} {}: index out of range", doc.doc_id, ctx.regime));
    }
    errors
}

/// Every included sentence must mention some caption entity surface.
pub fn check_oracle_sent(doc: &Document, caption_entities: &[Entity], ctx: &SupplementedContext) -> Vec<String> {
    let surfaces: HashSet<&str> = caption_entities.iter().map(|e| e.surface.as_str()).collect();
    ctx.base_sentence_indices
        .iter()
        .filter(|&&i| !surfaces.iter().any(|s| mentions(&doc.sentences[i].text, s)))
        .map(|i| format!("{}: oracle sentence {i} shares no caption entity", doc.doc_id))
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn boundary_scan() {
        assert!(super::mentions("Obama spoke.", "Obama"));
        assert!(!super::mentions("Obamas spoke.", "Obama"));
        assert!(super::mentions("(Obama)", "Obama"));
        assert!(!super::mentions("", "Obama"));
    }
}
