pub mod alignment;
pub mod context;
pub mod evaluate;
pub mod generate;
pub mod ingest;
pub mod loss;
pub mod mock;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use newscap_core::context::ContextConfig;
use newscap_core::corpus::Split;
use newscap_core::ner::{AnnotationStore, GazetteerTagger};
use newscap_core::{Corpus, CorpusStyle, Document, Tagger};
use serde::Serialize;

use crate::config::Settings;
use crate::error::{input, CliError, Result};
use crate::Common;

/// Entity source: imported annotations or the gazetteer tagger.
#[derive(Debug, Args, Default)]
pub struct TaggerArgs {
    /// Gazetteer file, `surface<TAB>LABEL` per line.
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    /// Pre-computed entity annotations (JSONL); take precedence over the gazetteer.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
}

/// Context budgets and prompt.
#[derive(Debug, Args, Default)]
pub struct BudgetArgs {
    #[arg(long)]
    pub style: Option<CorpusStyle>,
    #[arg(long)]
    pub origin_budget: Option<usize>,
    #[arg(long)]
    pub sentence_cap: Option<usize>,
    #[arg(long)]
    pub entity_prompt: Option<String>,
}

pub fn settings(common: &Common) -> Result<Settings> {
    let mut s = Settings::load(common.config.as_deref())?;
    s.flag("seed", common.seed).flag("jobs", common.jobs);
    if let Some(c) = &common.config {
        s.note("config", c.display());
    }
    Ok(s)
}

pub fn out_dir(common: &Common, settings: &mut Settings) -> Result<PathBuf> {
    let out = common.out.clone().ok_or_else(|| CliError::Usage("--out is required".into()))?;
    fs::create_dir_all(&out)?;
    settings.note("out", out.display());
    Ok(out)
}

pub fn jobs(settings: &mut Settings) -> Result<usize> {
    let default = std::thread::available_parallelism().map_or(1, |n| n.get());
    let jobs = settings.get("jobs", default)?;
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    Ok(jobs)
}

pub fn context_config(settings: &mut Settings, args: &BudgetArgs, corpus_style: CorpusStyle) -> Result<ContextConfig> {
    settings
        .flag("style", args.style)
        .flag("origin_budget", args.origin_budget)
        .flag("sentence_cap", args.sentence_cap)
        .flag("entity_prompt", args.entity_prompt.as_ref());
    let defaults = ContextConfig::default();
    let config = ContextConfig {
        style: settings.get("style", corpus_style)?,
        origin_budget: settings.get("origin_budget", defaults.origin_budget)?,
        sentence_cap: settings.get("sentence_cap", defaults.sentence_cap)?,
        entity_prompt: settings.get("entity_prompt", defaults.entity_prompt)?,
    };
    if config.origin_budget == 0 || config.sentence_cap == 0 {
        return Err(CliError::Usage("budgets must be at least 1 word".into()));
    }
    Ok(config)
}

pub fn tagger(settings: &mut Settings, args: &TaggerArgs) -> Result<Tagger> {
    settings.flag("annotations", args.annotations.as_ref().map(|p| p.display())).flag("gazetteer", args.gazetteer.as_ref().map(|p| p.display()));
    if let Some(path) = settings.get_opt::<String>("annotations")? {
        return Ok(Tagger::Annotations(AnnotationStore::load(input(Path::new(&path))?)?));
    }
    let path: String = settings.require("gazetteer")?;
    Ok(Tagger::Gazetteer(GazetteerTagger::load(input(Path::new(&path))?)?))
}

pub fn read_corpus(settings: &mut Settings, dir: &Path) -> Result<Corpus> {
    settings.note("corpus", dir.display());
    Ok(Corpus::read_dir(input(dir)?)?)
}

/// Documents of the requested split, or all of them.
pub fn select_split<'a>(settings: &mut Settings, corpus: &'a Corpus, flag: Option<Split>) -> Result<Vec<&'a Document>> {
    settings.flag("split", flag);
    let split: Option<Split> = settings.get_opt("split")?;
    if split.is_none() {
        settings.note("split", "all");
    }
    Ok(corpus.iter().filter(|d| split.is_none_or(|s| d.split == s)).collect())
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(input(path)?)?))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a, S: Serialize> {
    command: &'a str,
    config: &'a std::collections::BTreeMap<String, String>,
    stats: S,
}

/// Writes `summary.json` with the resolved configuration.
pub fn write_summary<S: Serialize>(out: &Path, command: &str, settings: &Settings, stats: S) -> Result<String> {
    let summary = Summary { command, config: settings.resolved(), stats };
    let text = serde_json::to_string_pretty(&summary)?;
    fs::write(out.join("summary.json"), format!("{text}\n"))?;
    Ok(text)
}

/// Writes `summary.json` and prints it.
pub fn summarize<S: Serialize>(out: &Path, command: &str, settings: &Settings, stats: S) -> Result<()> {
    println!("{}", write_summary(out, command, settings, stats)?);
    Ok(())
}

/// Maps `f` over `items` on up to `jobs` threads, keeping input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let chunk = items.len().div_ceil(jobs.max(1)).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| scope.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

pub struct DocEntities {
    pub caption: Vec<newscap_core::Entity>,
    pub article: Vec<newscap_core::Entity>,
}

pub fn tag_document(tagger: &Tagger, doc: &Document) -> Result<DocEntities> {
    use newscap_core::ner::{TextField, TextRef};
    Ok(DocEntities {
        caption: tagger.tag(TextRef::new(&doc.doc_id, TextField::Caption, &doc.caption))?,
        article: tagger.tag(TextRef::new(&doc.doc_id, TextField::Article, &doc.article_text))?,
    })
}

/// Contexts that need nothing beyond the document and, for the oracle
/// regimes, its entities.
pub fn static_context(
    doc: &Document,
    regime: newscap_core::Regime,
    config: &ContextConfig,
    entities: Option<&DocEntities>,
) -> Result<newscap_core::SupplementedContext> {
    use newscap_core::context::{full_context, oracle_context, origin_context};
    use newscap_core::Regime;
    let origin = origin_context(doc, config.style, config.origin_budget)?;
    match regime {
        Regime::Origin => Ok(origin),
        Regime::Full => Ok(full_context(doc)),
        Regime::OracleSent | Regime::OracleEnt | Regime::OracleSentEnt => {
            let e = entities.ok_or_else(|| CliError::Usage(format!("regime {regime} needs --gazetteer or --annotations")))?;
            Ok(oracle_context(doc, regime, &origin, &e.caption, &e.article, config))
        }
        Regime::Supplemented | Regime::OriginLonger => {
            Err(CliError::Usage(format!("regime {regime} needs model output; use build-context --generations")))
        }
    }
}
