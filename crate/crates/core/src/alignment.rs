//! Training samples for the three alignment tasks and their grouping.
//!
//! * **SENT** – does a sentence mention a visual entity of the caption?
//!   Positives are the article sentences holding the most distinct visual
//!   caption entities plus the caption itself; negatives are hard negatives
//!   drawn from the same article's sentences that hold none.
//! * **ENT** – list the caption entities that also occur among the article
//!   entities, in caption order.
//! * **CAP** – the caption itself, given a textual context.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::seq::{IteratorRandom, SliceRandom};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{Regime, SupplementedContext};
use crate::corpus::Document;
use crate::ner::{dedup_surfaces, visual_entities, Entity, VisualEntityPolicy};
use crate::seed::keyed_rng;
use crate::text::{contains_surface, word_count};

pub const YES: &str = "yes";
pub const NO: &str = "no";
/// Separator between listed entity surfaces in targets and contexts.
pub const ENTITY_SEPARATOR: &str = ", ";
/// Prefix of the entity list appended to the ENT input context.
pub const ENTITY_LIST_PREFIX: &str = "Entities:";

#[derive(Debug, Error)]
pub enum AlignmentError {
    #[error("negative sample count must be non-negative, got {0}")]
    NegativeCount(i64),
    #[error("cannot assemble mini-groups: the {0} stream is empty")]
    EmptyStream(Task),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Task {
    Sent,
    Ent,
    Cap,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Sent => "SENT",
            Task::Ent => "ENT",
            Task::Cap => "CAP",
        })
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SENT" => Ok(Task::Sent),
            "ENT" => Ok(Task::Ent),
            "CAP" => Ok(Task::Cap),
            _ => Err(format!("unknown task {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentProvenance {
    Positive,
    Negative,
    CaptionAsPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleMeta {
    Sent {
        /// `None` for the caption-as-positive sample.
        sentence_index: Option<usize>,
        provenance: SentProvenance,
        /// Distinct visual caption entities found in the input.
        visual_entity_hits: usize,
    },
    Ent {
        candidates: Vec<String>,
        targets: Vec<String>,
    },
    Cap {
        regime: Regime,
        context_words: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSample {
    pub id: String,
    pub task: Task,
    pub doc_id: String,
    pub image_ref: String,
    pub input_context: String,
    pub target: String,
    pub metadata: SampleMeta,
}

/// How many hard negatives to draw per document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeCount {
    /// As many negatives as positives (caption included).
    #[default]
    Balanced,
    Fixed(usize),
}

impl NegativeCount {
    pub fn from_arg(n: i64) -> Result<Self, AlignmentError> {
        usize::try_from(n).map(NegativeCount::Fixed).map_err(|_| AlignmentError::NegativeCount(n))
    }
}

impl FromStr for NegativeCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "balanced" {
            return Ok(NegativeCount::Balanced);
        }
        let n: i64 = s.parse().map_err(|_| format!("expected \"balanced\" or a count, got {s:?}"))?;
        NegativeCount::from_arg(n).map_err(|e| e.to_string())
    }
}

impl fmt::Display for NegativeCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegativeCount::Balanced => f.write_str("balanced"),
            NegativeCount::Fixed(n) => write!(f, "{n}"),
        }
    }
}

/// Distinct visual caption surfaces, in caption order.
fn visual_surfaces(caption_entities: &[Entity], policy: &VisualEntityPolicy) -> Vec<String> {
    dedup_surfaces(&visual_entities(caption_entities, policy))
}

fn hits(text: &str, surfaces: &[String]) -> usize {
    surfaces.iter().filter(|s| contains_surface(text, s)).count()
}

/// Entity-aware sentence selection samples for one document.
///
/// Emits nothing when the caption has no visual entity. Samples are ordered
/// positives (article order), the caption, then negatives (article order).
pub fn build_sentence_selection(
    doc: &Document,
    caption_entities: &[Entity],
    policy: &VisualEntityPolicy,
    negatives: NegativeCount,
    seed: u64,
) -> Vec<AlignmentSample> {
    let visual = visual_surfaces(caption_entities, policy);
    if visual.is_empty() {
        return Vec::new();
    }
    let counts: Vec<usize> = doc.sentences.iter().map(|s| hits(&s.text, &visual)).collect();
    let best = counts.iter().copied().max().unwrap_or(0);

    let sample = |k: usize, input: &str, sentence_index: Option<usize>, provenance, hit_count: usize| AlignmentSample {
        id: format!("{}/sent/{k}", doc.doc_id),
        task: Task::Sent,
        doc_id: doc.doc_id.clone(),
        image_ref: doc.image_ref.clone(),
        input_context: input.to_string(),
        target: if hit_count > 0 { YES } else { NO }.to_string(),
        metadata: SampleMeta::Sent { sentence_index, provenance, visual_entity_hits: hit_count },
    };

    let mut out = Vec::new();
    if best > 0 {
        for (s, &c) in doc.sentences.iter().zip(&counts) {
            if c == best {
                out.push(sample(out.len(), &s.text, Some(s.index), SentProvenance::Positive, c));
            }
        }
    }
    out.push(sample(
        out.len(),
        &doc.caption,
        None,
        SentProvenance::CaptionAsPositive,
        hits(&doc.caption, &visual),
    ));

    let want = match negatives {
        NegativeCount::Balanced => out.len(),
        NegativeCount::Fixed(n) => n,
    };
    let pool = counts.iter().enumerate().filter(|(_, &c)| c == 0).map(|(i, _)| i);
    let mut rng = keyed_rng(seed, &doc.doc_id);
    let mut chosen = pool.choose_multiple(&mut rng, want);
    chosen.sort_unstable();
    for i in chosen {
        out.push(sample(out.len(), &doc.sentences[i].text, Some(i), SentProvenance::Negative, 0));
    }
    out
}

/// Caption entity surfaces that also occur among the article entity
/// surfaces, ordered by first appearance in the caption, each listed once.
/// All labels count, visual or not.
pub fn entity_targets(caption_entities: &[Entity], article_entities: &[Entity]) -> Vec<String> {
    let in_article: HashSet<&str> = article_entities.iter().map(|e| e.surface.as_str()).collect();
    let mut by_position: Vec<&Entity> = caption_entities.iter().collect();
    by_position.sort_by_key(|e| e.span.0);
    dedup_surfaces(by_position.into_iter().filter(|e| in_article.contains(e.surface.as_str())))
}

/// Article text followed by the deduplicated article entity list.
pub fn entity_selection_input(article: &str, candidates: &[String]) -> String {
    format!("{article}\n{ENTITY_LIST_PREFIX} {}", candidates.join(ENTITY_SEPARATOR))
}

pub fn build_entity_selection(doc: &Document, caption_entities: &[Entity], article_entities: &[Entity]) -> AlignmentSample {
    let targets = entity_targets(caption_entities, article_entities);
    let mut sorted: Vec<&Entity> = article_entities.iter().collect();
    sorted.sort_by_key(|e| e.span.0);
    let candidates = dedup_surfaces(sorted);
    AlignmentSample {
        id: format!("{}/ent", doc.doc_id),
        task: Task::Ent,
        doc_id: doc.doc_id.clone(),
        image_ref: doc.image_ref.clone(),
        input_context: entity_selection_input(&doc.normalized_article(), &candidates),
        target: targets.join(ENTITY_SEPARATOR),
        metadata: SampleMeta::Ent { candidates, targets },
    }
}

pub fn build_caption_sample(doc: &Document, context: &SupplementedContext) -> AlignmentSample {
    AlignmentSample {
        id: format!("{}/cap", doc.doc_id),
        task: Task::Cap,
        doc_id: doc.doc_id.clone(),
        image_ref: doc.image_ref.clone(),
        input_context: context.final_text.clone(),
        target: doc.caption.clone(),
        metadata: SampleMeta::Cap { regime: context.regime, context_words: word_count(&context.final_text) },
    }
}

/// Two captioning samples, one document's sentence-selection set and one
/// entity-selection sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiniGroup {
    pub cap_samples: [AlignmentSample; 2],
    pub sent_set: Vec<AlignmentSample>,
    pub ent_sample: AlignmentSample,
}

/// Sample ids of one group, as written to the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupManifestEntry {
    pub group: usize,
    pub cap: [String; 2],
    pub sent: Vec<String>,
    pub ent: String,
}

impl MiniGroup {
    pub fn manifest_entry(&self, group: usize) -> GroupManifestEntry {
        GroupManifestEntry {
            group,
            cap: [self.cap_samples[0].id.clone(), self.cap_samples[1].id.clone()],
            sent: self.sent_set.iter().map(|s| s.id.clone()).collect(),
            ent: self.ent_sample.id.clone(),
        }
    }
}

/// Samples that could not complete a group.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leftovers {
    pub cap: Vec<String>,
    pub sent_sets: Vec<Vec<String>>,
    pub ent: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub groups: Vec<MiniGroup>,
    pub leftovers: Leftovers,
}

impl Assembly {
    pub fn manifest(&self) -> Vec<GroupManifestEntry> {
        self.groups.iter().enumerate().map(|(i, g)| g.manifest_entry(i)).collect()
    }
}

/// Shuffles each stream with the seed and deals out groups until one
/// stream runs dry. Whatever remains is returned in `leftovers`.
pub fn assemble_minigroups(
    mut cap: Vec<AlignmentSample>,
    mut sent_sets: Vec<Vec<AlignmentSample>>,
    mut ent: Vec<AlignmentSample>,
    seed: u64,
) -> Result<Assembly, AlignmentError> {
    if cap.is_empty() {
        return Err(AlignmentError::EmptyStream(Task::Cap));
    }
    if sent_sets.iter().all(Vec::is_empty) {
        return Err(AlignmentError::EmptyStream(Task::Sent));
    }
    if ent.is_empty() {
        return Err(AlignmentError::EmptyStream(Task::Ent));
    }
    sent_sets.retain(|s| !s.is_empty());
    cap.shuffle(&mut keyed_rng(seed, "minigroup/cap"));
    sent_sets.shuffle(&mut keyed_rng(seed, "minigroup/sent"));
    ent.shuffle(&mut keyed_rng(seed, "minigroup/ent"));

    let n = (cap.len() / 2).min(sent_sets.len()).min(ent.len());
    let leftovers = Leftovers {
        cap: cap[2 * n..].iter().map(|s| s.id.clone()).collect(),
        sent_sets: sent_sets[n..].iter().map(|set| set.iter().map(|s| s.id.clone()).collect()).collect(),
        ent: ent[n..].iter().map(|s| s.id.clone()).collect(),
    };
    let mut caps = cap.into_iter();
    let groups = sent_sets
        .into_iter()
        .zip(ent)
        .take(n)
        .map(|(sent_set, ent_sample)| MiniGroup {
            cap_samples: [caps.next().expect("counted"), caps.next().expect("counted")],
            sent_set,
            ent_sample,
        })
        .collect();
    Ok(Assembly { groups, leftovers })
}

pub fn write_samples<'a, W: Write>(mut out: W, samples: impl IntoIterator<Item = &'a AlignmentSample>) -> io::Result<()> {
    for s in samples {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_samples<R: BufRead>(reader: R) -> Result<Vec<AlignmentSample>, AlignmentError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| AlignmentError::Malformed { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}
