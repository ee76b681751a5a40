//! Textual input regimes.
//!
//! Every context is a set of whole article sentences kept in article order,
//! optionally followed by one line of entity hints. The one exception is
//! the prefix-style origin context, whose last sentence may be cut at the
//! word budget.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::entity_targets;
use crate::corpus::{CorpusStyle, Document};
use crate::ner::Entity;
use crate::text::{contains_surface, first_words, word_count};

pub const DEFAULT_ORIGIN_BUDGET: usize = 500;
pub const DEFAULT_SENTENCE_CAP: usize = 600;
pub const DEFAULT_ENTITY_PROMPT: &str = "The possible related entities are:";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("document {doc_id:?} has no image_position, required for {style} windows")]
    MissingImagePosition { doc_id: String, style: CorpusStyle },
    #[error("sentence index {index} out of range for document {doc_id:?} ({len} sentences)")]
    InvalidSentenceIndex { doc_id: String, index: usize, len: usize },
    #[error("word budget must be at least 1")]
    ZeroBudget,
    #[error("unknown regime {0:?}")]
    UnknownRegime(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Origin,
    Full,
    OriginLonger,
    OracleSent,
    OracleEnt,
    OracleSentEnt,
    Supplemented,
}

impl Regime {
    pub const ALL: [Regime; 7] = [
        Regime::Origin,
        Regime::Full,
        Regime::OriginLonger,
        Regime::OracleSent,
        Regime::OracleEnt,
        Regime::OracleSentEnt,
        Regime::Supplemented,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Origin => "origin",
            Regime::Full => "full",
            Regime::OriginLonger => "origin_longer",
            Regime::OracleSent => "oracle_sent",
            Regime::OracleEnt => "oracle_ent",
            Regime::OracleSentEnt => "oracle_sent_ent",
            Regime::Supplemented => "supplemented",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = ContextError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['-', '+'], "_");
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == key)
            .ok_or_else(|| ContextError::UnknownRegime(s.to_string()))
    }
}

/// Budgets and prompt shared by the regimes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextConfig {
    pub style: CorpusStyle,
    pub origin_budget: usize,
    pub sentence_cap: usize,
    pub entity_prompt: String,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig {
            style: CorpusStyle::GoodNews,
            origin_budget: DEFAULT_ORIGIN_BUDGET,
            sentence_cap: DEFAULT_SENTENCE_CAP,
            entity_prompt: DEFAULT_ENTITY_PROMPT.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupplementedContext {
    pub doc_id: String,
    pub regime: Regime,
    /// Included sentences, strictly ascending.
    pub base_sentence_indices: Vec<usize>,
    pub entity_hints: Vec<String>,
    pub final_text: String,
    /// Words in the sentence portion of `final_text`.
    pub sentence_word_count: usize,
    /// Words in the whole of `final_text`, entity line included.
    pub total_word_count: usize,
}

impl SupplementedContext {
    /// The sentence portion of `final_text`, without the entity line.
    pub fn sentence_text(&self) -> &str {
        if self.entity_hints.is_empty() {
            &self.final_text
        } else {
            self.final_text.rsplit_once('\n').map_or("", |(s, _)| s)
        }
    }
}

fn entity_line(prompt: &str, entities: &[String]) -> Option<String> {
    (!entities.is_empty()).then(|| format!("{prompt} {}", entities.join(", ")))
}

fn assemble(doc: &Document, regime: Regime, indices: Vec<usize>, sentence_text: String, hints: Vec<String>, prompt: &str) -> SupplementedContext {
    let sentence_word_count = word_count(&sentence_text);
    let final_text = match entity_line(prompt, &hints) {
        Some(line) if sentence_text.is_empty() => line,
        Some(line) => format!("{sentence_text}\n{line}"),
        None => sentence_text,
    };
    SupplementedContext {
        doc_id: doc.doc_id.clone(),
        regime,
        base_sentence_indices: indices,
        entity_hints: hints,
        total_word_count: word_count(&final_text),
        final_text,
        sentence_word_count,
    }
}

fn join_sentences(doc: &Document, indices: &[usize]) -> String {
    indices.iter().map(|&i| doc.sentences[i].text.as_str()).collect::<Vec<_>>().join(" ")
}

fn dedup_preserving_order(entities: &[String]) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    entities.iter().filter(|e| seen.insert(e.as_str())).cloned().collect()
}

/// Whole sentences in ascending order, stopping at the first one that
/// would push the total past `cap`.
fn capped(doc: &Document, indices: impl IntoIterator<Item = usize>, cap: usize) -> Vec<usize> {
    capped_by(indices, cap, |i| doc.sentences[i].word_count)
}

fn capped_by(indices: impl IntoIterator<Item = usize>, cap: usize, words: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut total = 0;
    let mut out = Vec::new();
    for i in indices {
        let w = words(i);
        if total + w > cap {
            break;
        }
        total += w;
        out.push(i);
    }
    out
}

/// The origin's last sentence and its text when the origin budget cut it.
fn partial_origin_sentence(doc: &Document, origin: &SupplementedContext) -> Option<(usize, String)> {
    let (&last, rest) = origin.base_sentence_indices.split_last()?;
    let before: usize = rest.iter().map(|&i| doc.sentences[i].word_count).sum();
    let kept = origin.sentence_word_count.checked_sub(before)?;
    if kept >= doc.sentences[last].word_count {
        return None;
    }
    Some((last, first_words(&doc.sentences[last].text, kept)))
}

/// Prefix window: the first `budget` words; the last sentence may be cut.
fn prefix_window(doc: &Document, budget: usize) -> (Vec<usize>, String) {
    let indices: Vec<usize> = doc.sentences.iter().take_while(|s| s.start_word < budget).map(|s| s.index).collect();
    (indices, first_words(&doc.normalized_article(), budget))
}

/// Window around the image: forward from the image sentence for half the
/// budget, then backward for the rest, then forward again if the start of
/// the article was reached. A single anchor sentence longer than the whole
/// budget is cut to the budget.
fn image_window(doc: &Document, image_position: usize, budget: usize) -> (Vec<usize>, String) {
    let Some(anchor) = doc.sentence_at_word(image_position) else {
        return (Vec::new(), String::new());
    };
    let anchor_words = doc.sentences[anchor].word_count;
    if anchor_words > budget {
        return (vec![anchor], first_words(&doc.sentences[anchor].text, budget));
    }
    let forward_share = budget - budget / 2;
    let mut total = anchor_words;
    let mut last = anchor;
    while last + 1 < doc.sentences.len() && total + doc.sentences[last + 1].word_count <= forward_share.max(anchor_words) {
        last += 1;
        total += doc.sentences[last].word_count;
    }
    let mut first = anchor;
    while first > 0 && total + doc.sentences[first - 1].word_count <= budget {
        first -= 1;
        total += doc.sentences[first].word_count;
    }
    if first == 0 {
        while last + 1 < doc.sentences.len() && total + doc.sentences[last + 1].word_count <= budget {
            last += 1;
            total += doc.sentences[last].word_count;
        }
    }
    let indices: Vec<usize> = (first..=last).collect();
    let text = join_sentences(doc, &indices);
    (indices, text)
}

fn windowed(doc: &Document, style: CorpusStyle, budget: usize, regime: Regime) -> Result<SupplementedContext, ContextError> {
    if budget == 0 {
        return Err(ContextError::ZeroBudget);
    }
    let (indices, text) = match style {
        CorpusStyle::NyTimes => {
            let position = doc
                .image_position
                .ok_or_else(|| ContextError::MissingImagePosition { doc_id: doc.doc_id.clone(), style })?;
            image_window(doc, position, budget)
        }
        CorpusStyle::GoodNews | CorpusStyle::Generic => prefix_window(doc, budget),
    };
    Ok(assemble(doc, regime, indices, text, Vec::new(), ""))
}

/// The traditional context: a word prefix (prefix styles) or a window of
/// whole sentences around the image (NYTimes style).
pub fn origin_context(doc: &Document, style: CorpusStyle, budget_words: usize) -> Result<SupplementedContext, ContextError> {
    windowed(doc, style, budget_words, Regime::Origin)
}

/// The origin rule at the realized length of a supplemented context, never
/// below the default origin budget.
pub fn origin_longer_context(
    doc: &Document,
    style: CorpusStyle,
    default_budget: usize,
    supplemented: &SupplementedContext,
) -> Result<SupplementedContext, ContextError> {
    windowed(doc, style, default_budget.max(supplemented.total_word_count), Regime::OriginLonger)
}

pub fn full_context(doc: &Document) -> SupplementedContext {
    let indices: Vec<usize> = (0..doc.sentences.len()).collect();
    assemble(doc, Regime::Full, indices, doc.normalized_article(), Vec::new(), "")
}

/// Sentences mentioning any caption entity surface (all labels), ascending.
pub fn oracle_sentences(doc: &Document, caption_entities: &[Entity]) -> Vec<usize> {
    let surfaces = crate::ner::dedup_surfaces(caption_entities);
    doc.sentences
        .iter()
        .filter(|s| surfaces.iter().any(|e| contains_surface(&s.text, e)))
        .map(|s| s.index)
        .collect()
}

/// Caption entities also found in the article, in caption order.
pub fn oracle_entities(caption_entities: &[Entity], article_entities: &[Entity]) -> Vec<String> {
    entity_targets(caption_entities, article_entities)
}

/// Merges selected sentences into the origin context and appends the
/// entity hint line.
///
/// The union of origin and selected indices is walked in article order and
/// cut at the first sentence that would exceed `sentence_cap` words. An
/// origin sentence cut by the origin budget stays cut unless selected.
pub fn supplement_context(
    doc: &Document,
    selected_sentences: &[usize],
    selected_entities: &[String],
    origin: &SupplementedContext,
    sentence_cap: usize,
    entity_prompt: &str,
) -> Result<SupplementedContext, ContextError> {
    if sentence_cap == 0 {
        return Err(ContextError::ZeroBudget);
    }
    if let Some(&index) = selected_sentences.iter().find(|&&i| i >= doc.sentences.len()) {
        return Err(ContextError::InvalidSentenceIndex { doc_id: doc.doc_id.clone(), index, len: doc.sentences.len() });
    }
    let partial = partial_origin_sentence(doc, origin).filter(|(i, _)| !selected_sentences.contains(i));
    let text_of = |i: usize| match &partial {
        Some((p, text)) if *p == i => text.as_str(),
        _ => doc.sentences[i].text.as_str(),
    };
    let merged: BTreeSet<usize> = origin.base_sentence_indices.iter().chain(selected_sentences).copied().collect();
    let indices = capped_by(merged, sentence_cap, |i| word_count(text_of(i)));
    let text = indices.iter().map(|&i| text_of(i)).collect::<Vec<_>>().join(" ");
    Ok(assemble(doc, Regime::Supplemented, indices, text, dedup_preserving_order(selected_entities), entity_prompt))
}

/// Oracle regimes built from the reference caption's entities.
///
/// * `OracleSent`: only the oracle sentences, capped.
/// * `OracleEnt`: the origin sentences plus the oracle entity line.
/// * `OracleSentEnt`: origin supplemented with oracle sentences and entities.
pub fn oracle_context(
    doc: &Document,
    regime: Regime,
    origin: &SupplementedContext,
    caption_entities: &[Entity],
    article_entities: &[Entity],
    config: &ContextConfig,
) -> SupplementedContext {
    let sentences = oracle_sentences(doc, caption_entities);
    let entities = oracle_entities(caption_entities, article_entities);
    let mut ctx = match regime {
        Regime::OracleSent => {
            let indices = capped(doc, sentences, config.sentence_cap);
            let text = join_sentences(doc, &indices);
            assemble(doc, regime, indices, text, Vec::new(), "")
        }
        Regime::OracleEnt => {
            let indices = origin.base_sentence_indices.clone();
            assemble(doc, regime, indices, origin.sentence_text().to_string(), entities, &config.entity_prompt)
        }
        _ => supplement_context(doc, &sentences, &entities, origin, config.sentence_cap, &config.entity_prompt)
            .expect("oracle indices come from the document"),
    };
    ctx.regime = if regime == Regime::OracleSent || regime == Regime::OracleEnt { regime } else { Regime::OracleSentEnt };
    ctx
}

/// One line of the context dump.
pub fn write_context<W: Write>(mut out: W, ctx: &SupplementedContext) -> io::Result<()> {
    serde_json::to_writer(&mut out, ctx)?;
    out.write_all(b"\n")
}
