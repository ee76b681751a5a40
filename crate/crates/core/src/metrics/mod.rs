//! Caption evaluation: BLEU-4, ROUGE-L and CIDEr-D following the COCO
//! caption toolkit, plus entity-level precision/recall breakdowns.
//!
//! Scores are kept in natural units; [`EvalReport::render_table`] applies
//! the ×100 presentation scaling.

mod bleu;
mod cider;
mod rouge;
mod tokenize;

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bleu::{bleu_tokenized, BleuScores};
pub use cider::{cider_per_document, cider_tokenized};
pub use rouge::{rouge_l_single, rouge_tokenized};
pub use tokenize::tokenize_caption;

use crate::ner::{match_surfaces, surface_counts, Entity, MatchCounts, NerError, Tagger, TextField, TextRef};
use crate::text::contains_surface;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("{candidates} candidates but {references} references")]
    LengthMismatch { candidates: usize, references: usize },
    #[error("a candidate has no reference")]
    NoReference,
    #[error("METEOR value {0} outside [0, 1]")]
    MeteorOutOfRange(f64),
    #[error(transparent)]
    Ner(#[from] NerError),
}

pub(crate) fn check_lengths(candidates: usize, references: usize) -> Result<(), MetricsError> {
    if candidates != references {
        return Err(MetricsError::LengthMismatch { candidates, references });
    }
    if candidates == 0 {
        return Err(MetricsError::EmptyCorpus);
    }
    Ok(())
}

pub(crate) fn ngram_counts<'a>(words: &[&'a str], max_n: usize) -> HashMap<Vec<&'a str>, usize> {
    let mut counts = HashMap::new();
    for n in 1..=max_n {
        for w in words.windows(n) {
            *counts.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

fn tokenize_pairs(candidates: &[String], references: &[String]) -> Result<(Vec<String>, Vec<Vec<String>>), MetricsError> {
    check_lengths(candidates.len(), references.len())?;
    Ok((
        candidates.iter().map(|c| tokenize_caption(c)).collect(),
        references.iter().map(|r| vec![tokenize_caption(r)]).collect(),
    ))
}

/// Corpus BLEU-4 of raw captions, one reference each.
pub fn bleu4(candidates: &[String], references: &[String]) -> Result<f64, MetricsError> {
    let (c, r) = tokenize_pairs(candidates, references)?;
    Ok(bleu_tokenized(&c, &r)?.bleu4())
}

/// Mean ROUGE-L (β = 1.2) of raw captions.
pub fn rouge_l(candidates: &[String], references: &[String]) -> Result<f64, MetricsError> {
    let (c, r) = tokenize_pairs(candidates, references)?;
    rouge_tokenized(&c, &r)
}

/// Mean CIDEr-D of raw captions.
pub fn cider(candidates: &[String], references: &[String]) -> Result<f64, MetricsError> {
    let (c, r) = tokenize_pairs(candidates, references)?;
    cider_tokenized(&c, &r)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecallCounts {
    pub matched: usize,
    pub total: usize,
}

impl RecallCounts {
    pub fn recall(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OutOfTrainScores {
    pub counts: MatchCounts,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityScores {
    pub counts: MatchCounts,
    pub precision: f64,
    pub recall: f64,
    pub in_context: RecallCounts,
    pub out_context: RecallCounts,
    pub in_context_recall: f64,
    pub out_context_recall: f64,
    pub out_of_train: Option<OutOfTrainScores>,
}

/// Entities of one evaluated document, together with the textual context
/// the caption was generated from.
#[derive(Debug, Clone)]
pub struct DocumentEntities<'a> {
    pub generated: Vec<Entity>,
    pub reference: Vec<Entity>,
    pub context: &'a str,
}

/// Aggregates exact-match entity statistics over documents.
///
/// A reference surface is in-context when it occurs at a word boundary in
/// the document's context; every occurrence of that surface shares the
/// classification. Matches are clipped per surface, so the in- and
/// out-of-context matched counts add up to the overall true positives.
pub fn entity_scores(docs: &[DocumentEntities<'_>], train_index: Option<&HashSet<String>>) -> EntityScores {
    let mut scores = EntityScores::default();
    let mut oot = MatchCounts::default();
    for doc in docs {
        let gen = surface_counts(doc.generated.iter().map(|e| e.surface.as_str()));
        let reference = surface_counts(doc.reference.iter().map(|e| e.surface.as_str()));
        scores.counts += match_surfaces(
            doc.generated.iter().map(|e| e.surface.as_str()),
            doc.reference.iter().map(|e| e.surface.as_str()),
        );
        for (surface, &r) in &reference {
            let matched = r.min(gen.get(surface).copied().unwrap_or(0));
            let bucket = if contains_surface(doc.context, surface) { &mut scores.in_context } else { &mut scores.out_context };
            bucket.matched += matched;
            bucket.total += r;
        }
        if let Some(index) = train_index {
            let unseen = |e: &&Entity| !index.contains(&e.surface);
            oot += match_surfaces(
                doc.generated.iter().filter(unseen).map(|e| e.surface.as_str()),
                doc.reference.iter().filter(unseen).map(|e| e.surface.as_str()),
            );
        }
    }
    (scores.precision, scores.recall) = scores.counts.precision_recall();
    scores.in_context_recall = scores.in_context.recall();
    scores.out_context_recall = scores.out_context.recall();
    scores.out_of_train = train_index.map(|_| {
        let (precision, recall) = oot.precision_recall();
        OutOfTrainScores { counts: oot, precision, recall }
    });
    scores
}

/// One evaluated document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalItem {
    pub doc_id: String,
    pub generated: String,
    pub reference: String,
    pub context: String,
}

/// Tags generated and reference captions and aggregates entity statistics.
pub fn entity_report(items: &[EvalItem], tagger: &Tagger, train_index: Option<&HashSet<String>>) -> Result<EntityScores, MetricsError> {
    let docs = items
        .iter()
        .map(|it| {
            Ok(DocumentEntities {
                generated: tagger.tag(TextRef::new(&it.doc_id, TextField::Generated, &it.generated))?,
                reference: tagger.tag(TextRef::new(&it.doc_id, TextField::Caption, &it.reference))?,
                context: &it.context,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    Ok(entity_scores(&docs, train_index))
}

/// Surfaces of all entities in training contexts and captions.
pub fn build_train_index<'a>(entities: impl IntoIterator<Item = &'a Entity>) -> HashSet<String> {
    entities.into_iter().map(|e| e.surface.clone()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalScore {
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub documents: usize,
    pub bleu4: f64,
    pub rouge_l: f64,
    pub cider: f64,
    pub meteor: Option<ExternalScore>,
    pub entity_precision: f64,
    pub entity_recall: f64,
    pub in_context_recall: f64,
    pub out_context_recall: f64,
    pub out_of_train_precision: Option<f64>,
    pub out_of_train_recall: Option<f64>,
    pub entities: EntityScores,
}

impl EvalReport {
    pub fn from_parts(documents: usize, bleu4: f64, rouge_l: f64, cider: f64, entities: EntityScores) -> Self {
        EvalReport {
            documents,
            bleu4,
            rouge_l,
            cider,
            meteor: None,
            entity_precision: entities.precision,
            entity_recall: entities.recall,
            in_context_recall: entities.in_context_recall,
            out_context_recall: entities.out_context_recall,
            out_of_train_precision: entities.out_of_train.map(|o| o.precision),
            out_of_train_recall: entities.out_of_train.map(|o| o.recall),
            entities,
        }
    }

    /// Human-readable table, every score ×100 with two decimals.
    pub fn render_table(&self) -> String {
        let pct = |v: f64| format!("{:.2}", v * 100.0);
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), pct);
        let mut rows = vec![
            ("BLEU-4", pct(self.bleu4)),
            ("METEOR", self.meteor.map_or_else(|| "not computed".to_string(), |m| format!("{} (external)", pct(m.value)))),
            ("ROUGE-L", pct(self.rouge_l)),
            ("CIDEr", pct(self.cider)),
            ("Entity P", pct(self.entity_precision)),
            ("Entity R", pct(self.entity_recall)),
            ("In-context R", pct(self.in_context_recall)),
            ("Out-context R", pct(self.out_context_recall)),
        ];
        if self.entities.out_of_train.is_some() {
            rows.push(("Out-of-train P", opt(self.out_of_train_precision)));
            rows.push(("Out-of-train R", opt(self.out_of_train_recall)));
        }
        let mut out = format!("documents: {}\n", self.documents);
        for (name, value) in rows {
            let _ = writeln!(out, "{name:<16}{value:>20}");
        }
        out
    }
}

/// Computes every metric for the given documents.
pub fn evaluate(items: &[EvalItem], tagger: &Tagger, train_index: Option<&HashSet<String>>) -> Result<EvalReport, MetricsError> {
    if items.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let candidates: Vec<String> = items.iter().map(|i| tokenize_caption(&i.generated)).collect();
    let references: Vec<Vec<String>> = items.iter().map(|i| vec![tokenize_caption(&i.reference)]).collect();
    let bleu = bleu_tokenized(&candidates, &references)?;
    let rouge = rouge_tokenized(&candidates, &references)?;
    let cider = cider_tokenized(&candidates, &references)?;
    let entities = entity_report(items, tagger, train_index)?;
    Ok(EvalReport::from_parts(items.len(), bleu.bleu4(), rouge, cider, entities))
}

/// Attaches an externally computed METEOR score.
pub fn merge_external_meteor(mut report: EvalReport, value: f64) -> Result<EvalReport, MetricsError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(MetricsError::MeteorOutOfRange(value));
    }
    report.meteor = Some(ExternalScore { value, provenance: Provenance::External });
    Ok(report)
}
