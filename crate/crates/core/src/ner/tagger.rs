use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Entity, EntitySource, Label, NerError};
use crate::text::{byte_to_char, char_slice, is_word_char};

/// Which text of a record is being tagged; also the key of external
/// annotation records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextField {
    Article,
    Caption,
    Generated,
}

impl fmt::Display for TextField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TextField::Article => "article",
            TextField::Caption => "caption",
            TextField::Generated => "generated",
        })
    }
}

impl From<TextField> for EntitySource {
    fn from(f: TextField) -> Self {
        match f {
            TextField::Article => EntitySource::Article,
            TextField::Caption => EntitySource::Caption,
            TextField::Generated => EntitySource::Generated,
        }
    }
}

/// A text to tag together with the key external annotations are stored under.
#[derive(Debug, Clone, Copy)]
pub struct TextRef<'a> {
    pub doc_id: &'a str,
    pub field: TextField,
    pub text: &'a str,
}

impl<'a> TextRef<'a> {
    pub fn new(doc_id: &'a str, field: TextField, text: &'a str) -> Self {
        TextRef { doc_id, field, text }
    }
}

struct Candidate {
    start: usize,
    end: usize,
    label: Label,
    priority: usize,
}

/// Dictionary lookup plus a handful of regular-expression rules for the
/// numeric and temporal classes. Overlapping candidates are resolved
/// longest first, then leftmost, then dictionary before rules.
#[derive(Debug, Clone)]
pub struct GazetteerTagger {
    /// Entries keyed by their leading word (or first char when the surface
    /// does not start with a word character).
    by_head: HashMap<String, Vec<(String, Label)>>,
    patterns: Vec<(Regex, Label)>,
    len: usize,
}

fn head_key(surface: &str) -> String {
    let head: String = surface.chars().take_while(|&c| is_word_char(c)).collect();
    if head.is_empty() {
        surface.chars().next().map(String::from).unwrap_or_default()
    } else {
        head
    }
}

fn default_patterns() -> Vec<(Regex, Label)> {
    const WEEKDAYS: &str = "Monday|Tuesday|Wednesday|Thursday|Friday|Saturday|Sunday";
    const MONTHS: &str = "January|February|March|April|May|June|July|August|September|October|November|December";
    let rules = [
        (format!(r"\b(?:{MONTHS})(?: \d{{1,2}})?(?:, \d{{4}})?\b"), Label::Date),
        (format!(r"\b(?:{WEEKDAYS})\b"), Label::Date),
        (r"\b(?:19|20)\d{2}\b".to_string(), Label::Date),
        (r"\b\d{1,2}(?::\d{2})? ?(?:a\.m\.|p\.m\.)".to_string(), Label::Time),
        (r"\b\d+(?:\.\d+)?(?: percent|%)".to_string(), Label::Percent),
        (r"\$\d[\d,]*(?:\.\d+)?(?: (?:million|billion|trillion)\b)?".to_string(), Label::Money),
        (r"\b(?:first|second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth|\d+(?:st|nd|rd|th))\b".to_string(), Label::Ordinal),
        (r"\b\d[\d,]*(?:\.\d+)?\b".to_string(), Label::Cardinal),
    ];
    rules
        .into_iter()
        .map(|(re, label)| (Regex::new(&re).expect("built-in pattern compiles"), label))
        .collect()
}

impl Default for GazetteerTagger {
    fn default() -> Self {
        GazetteerTagger { by_head: HashMap::new(), patterns: default_patterns(), len: 0 }
    }
}

impl GazetteerTagger {
    /// An empty dictionary with the built-in rules.
    pub fn new() -> Self {
        Self::default()
    }

    /// A dictionary without any rules.
    pub fn dictionary_only() -> Self {
        GazetteerTagger { patterns: Vec::new(), ..Self::default() }
    }

    /// Drops the built-in rules, keeping the dictionary.
    pub fn without_rules(mut self) -> Self {
        self.patterns.clear();
        self
    }

    pub fn from_entries<S: Into<String>>(entries: impl IntoIterator<Item = (S, Label)>) -> Self {
        let mut tagger = Self::new();
        for (surface, label) in entries {
            tagger.insert(surface, label);
        }
        tagger
    }

    /// Adds an entry. A surface already present keeps its first label.
    pub fn insert(&mut self, surface: impl Into<String>, label: Label) {
        let surface = surface.into();
        if surface.is_empty() {
            return;
        }
        let bucket = self.by_head.entry(head_key(&surface)).or_default();
        if bucket.iter().all(|(s, _)| *s != surface) {
            bucket.push((surface, label));
            self.len += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Parses `surface<TAB>label` lines; blank lines and `#` comments are skipped.
    pub fn parse_gazetteer(&mut self, text: &str, path: &str) -> Result<(), NerError> {
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| NerError::BadLine { path: path.to_string(), line: i + 1, message };
            let (surface, label) = line.split_once('\t').ok_or_else(|| bad("expected surface<TAB>label".into()))?;
            let label: Label = label.trim().parse().map_err(|e: NerError| bad(e.to_string()))?;
            self.insert(surface.trim(), label);
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NerError> {
        let path = path.as_ref();
        let mut tagger = Self::new();
        tagger.parse_gazetteer(&fs::read_to_string(path)?, &path.display().to_string())?;
        Ok(tagger)
    }

    fn candidates(&self, text: &str) -> Vec<Candidate> {
        let mut out = Vec::new();
        let mut prev: Option<char> = None;
        for (pos, c) in text.char_indices() {
            let at_word_start = is_word_char(c) && !prev.is_some_and(is_word_char);
            let key = if at_word_start {
                let end = text[pos..].find(|ch: char| !is_word_char(ch)).map_or(text.len(), |e| pos + e);
                Some(&text[pos..end])
            } else if !is_word_char(c) && !c.is_whitespace() {
                Some(&text[pos..pos + c.len_utf8()])
            } else {
                None
            };
            prev = Some(c);
            let Some(bucket) = key.and_then(|k| self.by_head.get(k)) else {
                continue;
            };
            for (surface, label) in bucket {
                if !text[pos..].starts_with(surface.as_str()) {
                    continue;
                }
                let end = pos + surface.len();
                let glued_left = !at_word_start && surface.starts_with(is_word_char);
                let glued_right = surface.ends_with(is_word_char) && text[end..].starts_with(is_word_char);
                if !glued_left && !glued_right {
                    out.push(Candidate { start: pos, end, label: *label, priority: 0 });
                }
            }
        }
        for (i, (re, label)) in self.patterns.iter().enumerate() {
            for m in re.find_iter(text) {
                out.push(Candidate { start: m.start(), end: m.end(), label: *label, priority: i + 1 });
            }
        }
        out
    }

    /// Entities in ascending span order with character-offset spans.
    pub fn tag(&self, text: &str, source: EntitySource) -> Vec<Entity> {
        let mut candidates = self.candidates(text);
        candidates.sort_by_key(|c| (std::cmp::Reverse(c.end - c.start), c.start, c.priority));
        let mut taken = vec![false; text.len()];
        let mut accepted: Vec<Candidate> = Vec::new();
        for c in candidates {
            if taken[c.start..c.end].iter().any(|&t| t) {
                continue;
            }
            taken[c.start..c.end].iter_mut().for_each(|t| *t = true);
            accepted.push(c);
        }
        accepted.sort_by_key(|c| c.start);
        accepted
            .into_iter()
            .map(|c| {
                let start = byte_to_char(text, c.start);
                let len = text[c.start..c.end].chars().count();
                Entity::new(&text[c.start..c.end], c.label, (start, start + len), source)
            })
            .collect()
    }
}

#[derive(Debug, Deserialize)]
struct AnnotationRecord {
    doc_id: String,
    field: TextField,
    entities: Vec<AnnotatedEntity>,
}

#[derive(Debug, Deserialize)]
struct AnnotatedEntity {
    surface: String,
    label: String,
    start_char: usize,
    end_char: usize,
}

/// Entity annotations produced elsewhere, replayed verbatim.
#[derive(Debug, Clone, Default)]
pub struct AnnotationStore {
    records: HashMap<(String, TextField), Vec<Entity>>,
}

impl AnnotationStore {
    pub fn from_reader<R: BufRead>(reader: R, path: &str) -> Result<Self, NerError> {
        let mut store = AnnotationStore::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| NerError::BadLine { path: path.to_string(), line: i + 1, message };
            let rec: AnnotationRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            let mut entities = rec
                .entities
                .into_iter()
                .map(|a| {
                    let label: Label = a.label.parse().map_err(|e: NerError| bad(e.to_string()))?;
                    if a.end_char < a.start_char {
                        return Err(bad(format!("span {}..{} is reversed", a.start_char, a.end_char)));
                    }
                    Ok(Entity::new(a.surface, label, (a.start_char, a.end_char), rec.field.into()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            entities.sort_by_key(|e| e.span);
            store.records.insert((rec.doc_id, rec.field), entities);
        }
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NerError> {
        let path = path.as_ref();
        Self::from_reader(BufReader::new(File::open(path)?), &path.display().to_string())
    }

    pub fn insert(&mut self, doc_id: impl Into<String>, field: TextField, entities: Vec<Entity>) {
        self.records.insert((doc_id.into(), field), entities);
    }

    /// Looks up the annotations for `text` and checks every span against it.
    pub fn lookup(&self, text: TextRef<'_>) -> Result<Vec<Entity>, NerError> {
        let entities = self
            .records
            .get(&(text.doc_id.to_string(), text.field))
            .ok_or_else(|| NerError::MissingAnnotation { doc_id: text.doc_id.to_string(), field: text.field })?;
        for e in entities {
            if char_slice(text.text, e.span.0, e.span.1) != Some(e.surface.as_str()) {
                return Err(NerError::SpanMismatch {
                    doc_id: text.doc_id.to_string(),
                    message: format!("{:?} at {}..{} ({})", e.surface, e.span.0, e.span.1, text.field),
                });
            }
        }
        Ok(entities.clone())
    }
}

/// Either the built-in recognizer or imported annotations.
#[derive(Debug, Clone)]
pub enum Tagger {
    Gazetteer(GazetteerTagger),
    Annotations(AnnotationStore),
}

impl Tagger {
    pub fn tag(&self, text: TextRef<'_>) -> Result<Vec<Entity>, NerError> {
        match self {
            Tagger::Gazetteer(g) => Ok(g.tag(text.text, text.field.into())),
            Tagger::Annotations(store) => store.lookup(text),
        }
    }
}

impl From<GazetteerTagger> for Tagger {
    fn from(g: GazetteerTagger) -> Self {
        Tagger::Gazetteer(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::surface_occurrences;

    fn pairs(entities: &[Entity]) -> Vec<(&str, Label)> {
        entities.iter().map(|e| (e.surface.as_str(), e.label)).collect()
    }

    #[test]
    fn gazetteer_hits() {
        let g = GazetteerTagger::from_entries([("Lucy Bronze", Label::Person), ("England", Label::Gpe)]);
        let out = g.tag("Lucy Bronze plays for England", EntitySource::Caption);
        assert_eq!(pairs(&out), vec![("Lucy Bronze", Label::Person), ("England", Label::Gpe)]);
        assert_eq!(out[1].span, (22, 29));
    }

    #[test]
    fn weekday_rule() {
        let out = GazetteerTagger::new().tag("on Tuesday", EntitySource::Other);
        assert_eq!(pairs(&out), vec![("Tuesday", Label::Date)]);
    }

    #[test]
    fn numeric_rules() {
        let out = GazetteerTagger::new().tag("Shares rose 40 percent to $3.2 billion on March 5, 2019.", EntitySource::Other);
        assert_eq!(
            pairs(&out),
            vec![("40 percent", Label::Percent), ("$3.2 billion", Label::Money), ("March 5, 2019", Label::Date)]
        );
    }

    #[test]
    fn longest_match_wins() {
        let entries = [("New York", Label::Gpe), ("New York City", Label::Gpe), ("York", Label::Gpe)];
        let g = GazetteerTagger::from_entries(entries);
        let text = "He moved to New York City last year.";
        let out = g.tag(text, EntitySource::Other);
        assert_eq!(pairs(&out), vec![("New York City", Label::Gpe)]);

        // brute force: every dictionary occurrence overlaps the chosen span and is no longer
        let chosen = (text.find("New York City").unwrap(), text.find("New York City").unwrap() + 13);
        for (surface, _) in entries {
            for pos in surface_occurrences(text, surface) {
                let end = pos + surface.len();
                assert!(pos < chosen.1 && chosen.0 < end, "{surface} escaped resolution");
                assert!(end - pos <= chosen.1 - chosen.0);
            }
        }
    }

    #[test]
    fn leftmost_among_equal_length() {
        let g = GazetteerTagger::from_entries([("A B", Label::Org), ("B C", Label::Org)]);
        assert_eq!(pairs(&g.tag("A B C", EntitySource::Other)), vec![("A B", Label::Org)]);
    }

    #[test]
    fn dictionary_respects_word_boundaries() {
        let g = GazetteerTagger::from_entries([("UN", Label::Org)]);
        assert!(g.tag("UNESCO and SUN", EntitySource::Other).is_empty());
        assert_eq!(g.tag("the UN.", EntitySource::Other).len(), 1);
    }

    #[test]
    fn gazetteer_file() {
        let mut g = GazetteerTagger::dictionary_only();
        g.parse_gazetteer("# people\nLucy Bronze\tPERSON\nEngland\tGPE\n", "g.tsv").unwrap();
        assert_eq!(g.len(), 2);
        let err = g.parse_gazetteer("Paris\tCITY\n", "g.tsv").unwrap_err();
        assert!(matches!(err, NerError::BadLine { line: 1, .. }));
    }

    #[test]
    fn spans_are_char_offsets() {
        let g = GazetteerTagger::from_entries([("Zürich", Label::Gpe)]);
        let text = "Café in Zürich";
        let e = &g.tag(text, EntitySource::Other)[0];
        assert_eq!(char_slice(text, e.span.0, e.span.1), Some("Zürich"));
    }

    #[test]
    fn annotations_replay_and_missing_key() {
        let data = r#"{"doc_id":"d1","field":"caption","entities":[{"surface":"Obama","label":"PERSON","start_char":0,"end_char":5}]}"#;
        let store = AnnotationStore::from_reader(data.as_bytes(), "a.jsonl").unwrap();
        let tagger = Tagger::Annotations(store);
        let out = tagger.tag(TextRef::new("d1", TextField::Caption, "Obama waves.")).unwrap();
        assert_eq!(pairs(&out), vec![("Obama", Label::Person)]);
        let err = tagger.tag(TextRef::new("d2", TextField::Caption, "x")).unwrap_err();
        assert!(err.to_string().contains("\"d2\""), "{err}");
        let err = tagger.tag(TextRef::new("d1", TextField::Caption, "Biden waves.")).unwrap_err();
        assert!(matches!(err, NerError::SpanMismatch { .. }));
    }
}
