//! Named entities: recognition, the visual/non-visual policy, and
//! exact-match comparison.

mod tagger;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use tagger::{AnnotationStore, GazetteerTagger, TextField, TextRef, Tagger};

#[derive(Debug, Error)]
pub enum NerError {
    #[error("unknown entity label {0:?}")]
    UnknownLabel(String),
    #[error("{path}:{line}: {message}")]
    BadLine { path: String, line: usize, message: String },
    #[error("no external annotations for doc_id {doc_id:?} ({field})")]
    MissingAnnotation { doc_id: String, field: TextField },
    #[error("annotation for doc_id {doc_id:?} does not match its text: {message}")]
    SpanMismatch { doc_id: String, message: String },
    #[error("visual policy must treat DATE as non-visual")]
    PolicyWithoutDate,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// The closed label set of the OntoNotes scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Person,
    Org,
    Gpe,
    Loc,
    Event,
    Fac,
    Norp,
    WorkOfArt,
    Product,
    Law,
    Language,
    Date,
    Time,
    Percent,
    Money,
    Quantity,
    Ordinal,
    Cardinal,
}

impl Label {
    pub const ALL: [Label; 18] = [
        Label::Person,
        Label::Org,
        Label::Gpe,
        Label::Loc,
        Label::Event,
        Label::Fac,
        Label::Norp,
        Label::WorkOfArt,
        Label::Product,
        Label::Law,
        Label::Language,
        Label::Date,
        Label::Time,
        Label::Percent,
        Label::Money,
        Label::Quantity,
        Label::Ordinal,
        Label::Cardinal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Person => "PERSON",
            Label::Org => "ORG",
            Label::Gpe => "GPE",
            Label::Loc => "LOC",
            Label::Event => "EVENT",
            Label::Fac => "FAC",
            Label::Norp => "NORP",
            Label::WorkOfArt => "WORK_OF_ART",
            Label::Product => "PRODUCT",
            Label::Law => "LAW",
            Label::Language => "LANGUAGE",
            Label::Date => "DATE",
            Label::Time => "TIME",
            Label::Percent => "PERCENT",
            Label::Money => "MONEY",
            Label::Quantity => "QUANTITY",
            Label::Ordinal => "ORDINAL",
            Label::Cardinal => "CARDINAL",
        }
    }
}

impl FromStr for Label {
    type Err = NerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| NerError::UnknownLabel(s.to_string()))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where an entity was found. Spans are relative to that text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntitySource {
    Article,
    Caption,
    Sentence(usize),
    Generated,
    Other,
}

/// A recognized entity. `span` is a half-open range of character offsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entity {
    pub surface: String,
    pub label: Label,
    pub span: (usize, usize),
    pub source: EntitySource,
}

impl Entity {
    pub fn new(surface: impl Into<String>, label: Label, span: (usize, usize), source: EntitySource) -> Self {
        Entity { surface: surface.into(), label, span, source }
    }
}

/// Labels whose entities cannot be depicted in a photograph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisualEntityPolicy {
    non_visual: BTreeSet<Label>,
}

impl Default for VisualEntityPolicy {
    fn default() -> Self {
        VisualEntityPolicy {
            non_visual: BTreeSet::from([
                Label::Date,
                Label::Time,
                Label::Percent,
                Label::Money,
                Label::Quantity,
                Label::Ordinal,
                Label::Cardinal,
            ]),
        }
    }
}

impl VisualEntityPolicy {
    pub fn new(non_visual: impl IntoIterator<Item = Label>) -> Result<Self, NerError> {
        let non_visual: BTreeSet<Label> = non_visual.into_iter().collect();
        if !non_visual.contains(&Label::Date) {
            return Err(NerError::PolicyWithoutDate);
        }
        Ok(VisualEntityPolicy { non_visual })
    }

    /// Parses a policy file: one label per line, `#` comments allowed.
    pub fn parse(text: &str, path: &str) -> Result<Self, NerError> {
        let mut labels = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let label = line.parse().map_err(|e: NerError| NerError::BadLine {
                path: path.to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
            labels.push(label);
        }
        Self::new(labels)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NerError> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn is_visual(&self, label: Label) -> bool {
        !self.non_visual.contains(&label)
    }

    pub fn non_visual_labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.non_visual.iter().copied()
    }
}

/// Keeps the entities whose label can be depicted, in input order.
pub fn visual_entities(entities: &[Entity], policy: &VisualEntityPolicy) -> Vec<Entity> {
    entities.iter().filter(|e| policy.is_visual(e.label)).cloned().collect()
}

/// Exact-match counts between generated and reference entities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl MatchCounts {
    pub fn precision_recall(&self) -> (f64, f64) {
        entity_pr(self.true_positives, self.false_positives, self.false_negatives)
    }
}

impl std::ops::AddAssign for MatchCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.true_positives += rhs.true_positives;
        self.false_positives += rhs.false_positives;
        self.false_negatives += rhs.false_negatives;
    }
}

pub(crate) fn surface_counts<'a, I>(surfaces: I) -> HashMap<&'a str, usize>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts = HashMap::new();
    for s in surfaces {
        *counts.entry(s).or_insert(0) += 1;
    }
    counts
}

/// Case-sensitive surface matching with multiset clipping: every reference
/// occurrence can absorb at most one generated occurrence.
pub fn match_entities(generated: &[Entity], reference: &[Entity]) -> MatchCounts {
    match_surfaces(generated.iter().map(|e| e.surface.as_str()), reference.iter().map(|e| e.surface.as_str()))
}

pub fn match_surfaces<'a>(
    generated: impl IntoIterator<Item = &'a str>,
    reference: impl IntoIterator<Item = &'a str>,
) -> MatchCounts {
    let gen = surface_counts(generated);
    let reference = surface_counts(reference);
    let tp: usize = gen.iter().map(|(s, &g)| g.min(reference.get(s).copied().unwrap_or(0))).sum();
    MatchCounts {
        true_positives: tp,
        false_positives: gen.values().sum::<usize>() - tp,
        false_negatives: reference.values().sum::<usize>() - tp,
    }
}

/// Precision and recall; an empty denominator yields 0.
pub fn entity_pr(tp: usize, fp: usize, fn_: usize) -> (f64, f64) {
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    (ratio(tp, tp + fp), ratio(tp, tp + fn_))
}

/// Distinct surfaces in order of first appearance.
pub fn dedup_surfaces<'a>(entities: impl IntoIterator<Item = &'a Entity>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    entities
        .into_iter()
        .filter(|e| seen.insert(e.surface.as_str()))
        .map(|e| e.surface.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ent(s: &str, label: Label) -> Entity {
        Entity::new(s, label, (0, s.chars().count()), EntitySource::Other)
    }

    fn ents(surfaces: &[&str]) -> Vec<Entity> {
        surfaces.iter().map(|s| ent(s, Label::Person)).collect()
    }

    #[test]
    fn date_is_not_visual() {
        let out = visual_entities(&[ent("Obama", Label::Person), ent("Tuesday", Label::Date)], &VisualEntityPolicy::default());
        assert_eq!(out, vec![ent("Obama", Label::Person)]);
        assert!(visual_entities(&[], &VisualEntityPolicy::default()).is_empty());
    }

    #[test]
    fn default_policy_drops_numeric_classes() {
        let input = [ent("40 percent", Label::Percent), ent("$3", Label::Money)];
        assert!(visual_entities(&input, &VisualEntityPolicy::default()).is_empty());
        // brute force over every label: exactly the seven numeric/temporal classes are dropped
        let dropped: Vec<Label> = Label::ALL
            .into_iter()
            .filter(|&l| visual_entities(&[ent("x", l)], &VisualEntityPolicy::default()).is_empty())
            .collect();
        assert_eq!(
            dropped,
            vec![Label::Date, Label::Time, Label::Percent, Label::Money, Label::Quantity, Label::Ordinal, Label::Cardinal]
        );
    }

    #[test]
    fn policy_file() {
        let p = VisualEntityPolicy::parse("# non-visual\nDATE\nTIME\n", "p").unwrap();
        assert!(!p.is_visual(Label::Time));
        assert!(p.is_visual(Label::Money));
        assert!(matches!(VisualEntityPolicy::parse("TIME\n", "p"), Err(NerError::PolicyWithoutDate)));
        assert!(matches!(VisualEntityPolicy::parse("DATE\nFOO\n", "p"), Err(NerError::BadLine { line: 2, .. })));
    }

    #[test]
    fn matching_examples() {
        let m = match_entities(&ents(&["Paris", "Obama"]), &ents(&["Obama", "UN"]));
        assert_eq!((m.true_positives, m.false_positives, m.false_negatives), (1, 1, 1));
        let m = match_entities(&ents(&["Obama", "Obama"]), &ents(&["Obama", "Obama"]));
        assert_eq!((m.true_positives, m.false_positives, m.false_negatives), (2, 0, 0));
        let m = match_entities(&ents(&["Obama", "Obama", "Obama"]), &ents(&["Obama"]));
        assert_eq!((m.true_positives, m.false_positives, m.false_negatives), (1, 2, 0));
        let m = match_entities(&ents(&["obama"]), &ents(&["Obama"]));
        assert_eq!(m.true_positives, 0);
    }

    #[test]
    fn pr_examples() {
        assert_eq!(entity_pr(1, 1, 1), (0.5, 0.5));
        assert_eq!(entity_pr(0, 0, 0), (0.0, 0.0));
        assert_eq!(entity_pr(3, 1, 2), (0.75, 0.6));
    }

    /// Maximum bipartite matching on surface equality, by augmenting paths.
    fn brute_force_tp(gen: &[String], reference: &[String]) -> usize {
        fn augment(g: usize, gen: &[String], r: &[String], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
            for j in 0..r.len() {
                if gen[g] == r[j] && !seen[j] {
                    seen[j] = true;
                    if owner[j].is_none_or(|o| augment(o, gen, r, seen, owner)) {
                        owner[j] = Some(g);
                        return true;
                    }
                }
            }
            false
        }
        let mut owner = vec![None; reference.len()];
        (0..gen.len())
            .filter(|&g| augment(g, gen, reference, &mut vec![false; reference.len()], &mut owner))
            .count()
    }

    fn surfaces() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(prop::sample::select(vec!["Obama", "UN", "Paris", "obama", "Lucy Bronze"]), 0..8)
            .prop_map(|v| v.into_iter().map(String::from).collect())
    }

    proptest! {
        #[test]
        fn clipped_matching_equals_bipartite(gen in surfaces(), reference in surfaces()) {
            let m = match_surfaces(gen.iter().map(String::as_str), reference.iter().map(String::as_str));
            prop_assert_eq!(m.true_positives, brute_force_tp(&gen, &reference));
            let swapped = match_surfaces(reference.iter().map(String::as_str), gen.iter().map(String::as_str));
            prop_assert_eq!(m.true_positives, swapped.true_positives);
            prop_assert!(m.true_positives <= gen.len().min(reference.len()));
            prop_assert_eq!(m.true_positives + m.false_positives, gen.len());
            prop_assert_eq!(m.true_positives + m.false_negatives, reference.len());
        }

        #[test]
        fn policy_is_idempotent(labels in prop::collection::vec(prop::sample::select(Label::ALL.to_vec()), 0..10)) {
            let policy = VisualEntityPolicy::default();
            let input: Vec<Entity> = labels.iter().map(|&l| ent("e", l)).collect();
            let once = visual_entities(&input, &policy);
            prop_assert_eq!(visual_entities(&once, &policy), once);
        }
    }
}
