use std::collections::HashMap;
use std::io::BufRead;
use std::path::PathBuf;

use clap::Args;
use newscap_core::context::origin_longer_context;
use newscap_core::corpus::Split;
use newscap_core::gateway::GenerationRecord;
use newscap_core::{Regime, SupplementedContext};
use serde::Serialize;

use super::{context_config, jobs, open, out_dir, par_map, read_corpus, select_split, settings, static_context, summarize, tag_document, write_jsonl, BudgetArgs, TaggerArgs};
use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::Common;

#[derive(Debug, Args)]
pub struct ContextArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub regime: Option<Regime>,
    #[command(flatten)]
    pub budgets: BudgetArgs,
    /// Needed by the oracle regimes.
    #[command(flatten)]
    pub tagger: TaggerArgs,
    /// Output of `generate`, needed by the supplemented and origin-longer regimes.
    #[arg(long)]
    pub generations: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<Split>,
}

#[derive(Serialize)]
struct Stats {
    documents: usize,
    mean_words: f64,
    mean_article_fraction: f64,
    max_sentence_words: usize,
}

pub fn read_generations(path: &std::path::Path) -> Result<HashMap<String, GenerationRecord>> {
    let mut out = HashMap::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GenerationRecord = serde_json::from_str(&line).map_err(|e| CliError::Schema(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.insert(rec.doc_id.clone(), rec);
    }
    Ok(out)
}

fn has_tagger(s: &Settings, args: &TaggerArgs) -> bool {
    args.gazetteer.is_some() || args.annotations.is_some() || s.has("gazetteer") || s.has("annotations")
}

pub fn run(common: &Common, args: ContextArgs) -> Result<()> {
    let mut s = settings(common)?;
    let corpus = read_corpus(&mut s, &args.corpus)?;
    let config = context_config(&mut s, &args.budgets, corpus.style())?;
    s.flag("regime", args.regime);
    let regime: Regime = s.get("regime", Regime::Origin)?;
    let needs_entities = matches!(regime, Regime::OracleSent | Regime::OracleEnt | Regime::OracleSentEnt);
    let tagger = if needs_entities || has_tagger(&s, &args.tagger) { Some(super::tagger(&mut s, &args.tagger)?) } else { None };
    let generations = match &args.generations {
        Some(path) => {
            s.note("generations", path.display());
            Some(read_generations(path)?)
        }
        None => None,
    };
    let jobs = jobs(&mut s)?;
    let docs = select_split(&mut s, &corpus, args.split)?;
    let out = out_dir(common, &mut s)?;

    let contexts: Vec<Result<SupplementedContext>> = par_map(&docs, jobs, |doc| match regime {
        Regime::Supplemented | Regime::OriginLonger => {
            let gens = generations.as_ref().ok_or_else(|| CliError::Usage(format!("regime {regime} needs --generations")))?;
            let supplemented = gens
                .get(&doc.doc_id)
                .and_then(|g| g.context.clone())
                .ok_or_else(|| CliError::Schema(format!("no generated context for {}", doc.doc_id)))?;
            if regime == Regime::Supplemented {
                Ok(supplemented)
            } else {
                Ok(origin_longer_context(doc, config.style, config.origin_budget, &supplemented)?)
            }
        }
        _ => {
            let entities = match &tagger {
                Some(t) if needs_entities => Some(tag_document(t, doc)?),
                _ => None,
            };
            static_context(doc, regime, &config, entities.as_ref())
        }
    });
    let contexts = contexts.into_iter().collect::<Result<Vec<_>>>()?;
    write_jsonl(&out.join("contexts.jsonl"), &contexts)?;

    let n = contexts.len().max(1) as f64;
    let stats = Stats {
        documents: contexts.len(),
        mean_words: contexts.iter().map(|c| c.total_word_count as f64).sum::<f64>() / n,
        mean_article_fraction: contexts
            .iter()
            .zip(&docs)
            .map(|(c, d)| c.sentence_word_count as f64 / d.total_words().max(1) as f64)
            .sum::<f64>()
            / n,
        max_sentence_words: contexts.iter().map(|c| c.sentence_word_count).max().unwrap_or(0),
    };
    summarize(&out, "build-context", &s, stats)
}
