//! Corpus ingestion: one JSON record per line in, validated [`Document`]s out.

mod segment;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use segment::segment_sentences;

use crate::text;

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed record at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing field {field} at line {line}")]
    MissingField { field: &'static str, line: usize },
    #[error("invalid field {field} at line {line}: {message}")]
    InvalidField { field: &'static str, line: usize, message: String },
    #[error("duplicate doc_id {doc_id:?} at line {line}")]
    DuplicateId { doc_id: String, line: usize },
    #[error("unknown corpus style {0:?}")]
    UnknownStyle(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" | "valid" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

/// How the traditional textual context is cut out of an article.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CorpusStyle {
    /// Prefix of the article.
    #[default]
    GoodNews,
    /// Window around the image position.
    NyTimes,
    Generic,
}

impl FromStr for CorpusStyle {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "goodnews" => Ok(CorpusStyle::GoodNews),
            "nytimes" | "nytimes800k" => Ok(CorpusStyle::NyTimes),
            "generic" => Ok(CorpusStyle::Generic),
            _ => Err(CorpusError::UnknownStyle(s.to_string())),
        }
    }
}

impl fmt::Display for CorpusStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusStyle::GoodNews => "goodnews",
            CorpusStyle::NyTimes => "nytimes",
            CorpusStyle::Generic => "generic",
        })
    }
}

/// A sentence of an article, addressed by word offsets into the article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub start_word: usize,
    pub end_word: usize,
    pub word_count: usize,
}

impl Sentence {
    pub fn new(index: usize, text: String, start_word: usize, end_word: usize) -> Self {
        Sentence { index, text, start_word, end_word, word_count: end_word - start_word }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub article_text: String,
    pub sentences: Vec<Sentence>,
    pub caption: String,
    pub image_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_position: Option<usize>,
    pub split: Split,
}

impl Document {
    /// Builds a document, segmenting the article. Callers are expected to
    /// have rejected empty articles and captions already.
    pub fn new(
        doc_id: impl Into<String>,
        article_text: impl Into<String>,
        caption: impl Into<String>,
        image_ref: impl Into<String>,
        image_position: Option<usize>,
        split: Split,
    ) -> Self {
        let article_text = article_text.into();
        let sentences = segment_sentences(&article_text);
        Document {
            doc_id: doc_id.into(),
            article_text,
            sentences,
            caption: caption.into(),
            image_ref: image_ref.into(),
            image_position,
            split,
        }
    }

    pub fn total_words(&self) -> usize {
        self.sentences.last().map_or(0, |s| s.end_word)
    }

    /// Whitespace-normalized article text.
    pub fn normalized_article(&self) -> String {
        self.sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ")
    }

    /// Index of the sentence holding word `word`; a position equal to the
    /// total word count maps to the last sentence.
    pub fn sentence_at_word(&self, word: usize) -> Option<usize> {
        if self.sentences.is_empty() {
            return None;
        }
        let i = self.sentences.partition_point(|s| s.end_word <= word);
        Some(i.min(self.sentences.len() - 1))
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    doc_id: Option<String>,
    article: Option<String>,
    caption: Option<String>,
    image_ref: Option<String>,
    image_position: Option<i64>,
    split: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub style: CorpusStyle,
    pub documents: usize,
    pub splits: SplitCounts,
}

/// An immutable, validated collection of documents.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    style: CorpusStyle,
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

fn required(value: Option<String>, field: &'static str, line: usize) -> Result<String, CorpusError> {
    value.ok_or(CorpusError::MissingField { field, line })
}

fn non_empty(value: String, field: &'static str, line: usize) -> Result<String, CorpusError> {
    if value.trim().is_empty() {
        return Err(CorpusError::InvalidField { field, line, message: "empty text".into() });
    }
    Ok(value)
}

impl Corpus {
    pub fn new(style: CorpusStyle) -> Self {
        Corpus { style, ..Default::default() }
    }

    /// Reads records in the ingestion format, one JSON object per line.
    /// Blank lines are skipped; line numbers in errors are 1-based.
    pub fn ingest_reader<R: BufRead>(reader: R, style: CorpusStyle) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::new(style);
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawRecord = serde_json::from_str(&line)
                .map_err(|e| CorpusError::Malformed { line: line_no, message: e.to_string() })?;
            let doc = Self::validate(raw, line_no)?;
            corpus.push(doc, line_no)?;
        }
        Ok(corpus)
    }

    pub fn ingest_jsonl(path: impl AsRef<Path>, style: CorpusStyle) -> Result<Self, CorpusError> {
        let file = File::open(path)?;
        Self::ingest_reader(BufReader::new(file), style)
    }

    fn validate(raw: RawRecord, line: usize) -> Result<Document, CorpusError> {
        let doc_id = required(raw.doc_id, "doc_id", line)?;
        let article = non_empty(required(raw.article, "article", line)?, "article", line)?;
        let caption = non_empty(required(raw.caption, "caption", line)?, "caption", line)?;
        let image_ref = required(raw.image_ref, "image_ref", line)?;
        let split = required(raw.split, "split", line)?
            .parse::<Split>()
            .map_err(|message| CorpusError::InvalidField { field: "split", line, message })?;
        let doc = Document::new(doc_id, article, caption, image_ref, None, split);
        let image_position = match raw.image_position {
            None => None,
            Some(p) if p < 0 || p as usize > doc.total_words() => {
                return Err(CorpusError::InvalidField {
                    field: "image_position",
                    line,
                    message: format!("{p} outside 0..={}", doc.total_words()),
                })
            }
            Some(p) => Some(p as usize),
        };
        Ok(Document { image_position, ..doc })
    }

    /// Adds a document; `line` is only used for error reporting.
    pub fn push(&mut self, doc: Document, line: usize) -> Result<(), CorpusError> {
        if self.by_id.contains_key(&doc.doc_id) {
            return Err(CorpusError::DuplicateId { doc_id: doc.doc_id, line });
        }
        self.by_id.insert(doc.doc_id.clone(), self.docs.len());
        self.docs.push(doc);
        Ok(())
    }

    pub fn from_documents(style: CorpusStyle, docs: Vec<Document>) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::new(style);
        for (i, doc) in docs.into_iter().enumerate() {
            corpus.push(doc, i + 1)?;
        }
        Ok(corpus)
    }

    pub fn style(&self) -> CorpusStyle {
        self.style
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    pub fn split_counts(&self) -> SplitCounts {
        let mut counts = SplitCounts::default();
        for doc in &self.docs {
            match doc.split {
                Split::Train => counts.train += 1,
                Split::Validation => counts.validation += 1,
                Split::Test => counts.test += 1,
            }
        }
        counts
    }

    pub fn manifest(&self) -> Manifest {
        Manifest { style: self.style, documents: self.len(), splits: self.split_counts() }
    }

    /// Serializes the validated documents, one per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for doc in &self.docs {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    /// Writes `corpus.jsonl` and `manifest.json` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<Manifest, CorpusError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        self.write_jsonl(BufWriter::new(File::create(dir.join(CORPUS_FILE))?))?;
        let manifest = self.manifest();
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::from)?;
        text.push('\n');
        fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(manifest)
    }

    /// Loads a directory previously produced by [`Corpus::write_dir`].
    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let dir = dir.as_ref();
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)
            .map_err(|e| CorpusError::Malformed { line: 0, message: format!("manifest: {e}") })?;
        let mut corpus = Corpus::new(manifest.style);
        let reader = BufReader::new(File::open(dir.join(CORPUS_FILE))?);
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = serde_json::from_str(&line)
                .map_err(|e| CorpusError::Malformed { line: i + 1, message: e.to_string() })?;
            corpus.push(doc, i + 1)?;
        }
        if corpus.len() != manifest.documents {
            return Err(CorpusError::Malformed {
                line: 0,
                message: format!("manifest lists {} documents, found {}", manifest.documents, corpus.len()),
            });
        }
        Ok(corpus)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.docs.iter()
    }
}

/// Per-split counts keyed by split name, for summaries.
pub fn split_table(counts: &SplitCounts) -> BTreeMap<&'static str, usize> {
    BTreeMap::from([("train", counts.train), ("validation", counts.validation), ("test", counts.test)])
}

/// Word count, re-exported here because every budget in the corpus is in words.
pub fn word_count(text: &str) -> usize {
    text::word_count(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest(s: &str) -> Result<Corpus, CorpusError> {
        Corpus::ingest_reader(s.as_bytes(), CorpusStyle::GoodNews)
    }

    #[test]
    fn empty_file() {
        assert_eq!(ingest("").unwrap().len(), 0);
    }

    #[test]
    fn one_record_three_sentences() {
        let c = ingest(
            r#"{"doc_id":"d1","article":"It rained. She left. Mr. Lee stayed home.","caption":"Rain.","image_ref":"img/1.jpg","split":"train"}"#,
        )
        .unwrap();
        assert_eq!(c.len(), 1);
        let d = c.get("d1").unwrap();
        assert_eq!(d.sentences.len(), 3);
        assert_eq!(d.sentences[2].text, "Mr. Lee stayed home.");
        assert_eq!(c.split_counts(), SplitCounts { train: 1, validation: 0, test: 0 });
    }

    #[test]
    fn missing_caption_names_line() {
        let err = ingest(r#"{"doc_id":"d1","article":"A b.","image_ref":"x","split":"test"}"#).unwrap_err();
        assert_eq!(err.to_string(), "missing field caption at line 1");
    }

    #[test]
    fn malformed_and_duplicate() {
        let good = r#"{"doc_id":"d1","article":"A b.","caption":"c","image_ref":"x","split":"test"}"#;
        let err = ingest(&format!("{good}\n{{not json")).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }), "{err}");
        let err = ingest(&format!("{good}\n\n{good}")).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { line: 3, .. }), "{err}");
    }

    #[test]
    fn image_position_bounds() {
        let rec = |p: i64| {
            format!(r#"{{"doc_id":"d","article":"A b c.","caption":"c","image_ref":"x","image_position":{p},"split":"train"}}"#)
        };
        assert_eq!(ingest(&rec(3)).unwrap().get("d").unwrap().image_position, Some(3));
        assert!(matches!(ingest(&rec(4)), Err(CorpusError::InvalidField { field: "image_position", .. })));
        assert!(ingest(&rec(-1)).is_err());
    }

    #[test]
    fn empty_article_rejected() {
        let err = ingest(r#"{"doc_id":"d","article":"  ","caption":"c","image_ref":"x","split":"train"}"#).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidField { field: "article", .. }));
    }

    #[test]
    fn sentence_lookup_by_word() {
        let d = Document::new("d", "A b. C d e. F.", "c", "x", None, Split::Test);
        assert_eq!(d.sentence_at_word(0), Some(0));
        assert_eq!(d.sentence_at_word(2), Some(1));
        assert_eq!(d.sentence_at_word(5), Some(2));
        assert_eq!(d.sentence_at_word(6), Some(2));
    }
}
