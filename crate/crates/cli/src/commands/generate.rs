use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::Args;
use newscap_core::corpus::Split;
use newscap_core::gateway::{
    read_trace, replay_batch, run_batch, Endpoint, EntityScope, GatewayError, MockModel, MockTransport, PipelineConfig, TraceSink, Transport,
};
use newscap_core::ner::GazetteerTagger;
use newscap_core::Document;
use serde::Serialize;

use super::{context_config, create, jobs, open, out_dir, read_corpus, select_split, settings, summarize, write_jsonl, BudgetArgs};
use crate::error::{input, CliError, Result};
use crate::Common;

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// `mock`, `cmd:<command line>`, `tcp:<host:port>` or `unix:<path>`.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Gazetteer for the mock endpoint.
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    #[command(flatten)]
    pub budgets: BudgetArgs,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    /// Text the entity request covers: origin, origin_plus_selected or full_article.
    #[arg(long)]
    pub entity_scope: Option<EntityScope>,
    #[arg(long)]
    pub split: Option<Split>,
    /// Answer requests from a recorded trace instead of an endpoint.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

#[derive(Serialize)]
pub struct Prediction<'a> {
    pub doc_id: &'a str,
    pub caption: &'a str,
}

#[derive(Serialize)]
struct Stats {
    documents: usize,
    succeeded: usize,
    failed: usize,
    trace: Option<String>,
}

fn mock_model(gazetteer: &Path, corpus: &newscap_core::Corpus) -> Result<Arc<MockModel>> {
    let tagger = GazetteerTagger::load(input(gazetteer)?)?.without_rules();
    Ok(Arc::new(MockModel::with_corpus(tagger, corpus)))
}

pub fn run(common: &Common, args: GenerateArgs) -> Result<()> {
    let mut s = settings(common)?;
    let corpus = read_corpus(&mut s, &args.corpus)?;
    let context = context_config(&mut s, &args.budgets, corpus.style())?;
    s.flag("timeout_ms", args.timeout_ms).flag("entity_scope", args.entity_scope);
    let config = PipelineConfig {
        context,
        timeout: Duration::from_millis(s.get("timeout_ms", PipelineConfig::default().timeout.as_millis() as u64)?),
        entity_scope: s.get("entity_scope", EntityScope::default())?,
    };
    let jobs = jobs(&mut s)?;
    let docs: Vec<Document> = select_split(&mut s, &corpus, args.split)?.into_iter().cloned().collect();
    let out = out_dir(common, &mut s)?;

    let (records, trace) = match &args.replay {
        Some(path) => {
            s.note("replay", path.display());
            let events = read_trace(open(path)?)?;
            (replay_batch(&docs, &events, &config), None)
        }
        None => {
            s.flag("endpoint", args.endpoint.as_ref()).flag("gazetteer", args.gazetteer.as_ref().map(|p| p.display()));
            let endpoint: Endpoint = s.require::<String>("endpoint")?.parse()?;
            s.note("endpoint", &endpoint);
            let mock = match endpoint {
                Endpoint::Mock => Some(mock_model(Path::new(&s.require::<String>("gazetteer")?), &corpus)?),
                _ => None,
            };
            let trace_path = out.join("trace.jsonl");
            let sink = TraceSink::new(create(&trace_path)?);
            let connect = || -> Result<Box<dyn Transport + Send>, GatewayError> {
                match &mock {
                    Some(m) => Ok(Box::new(MockTransport::new(m.clone()))),
                    None => Ok(Box::new(endpoint.connect()?)),
                }
            };
            (run_batch(&docs, connect, &config, jobs, Some(&sink)), Some(trace_path.display().to_string()))
        }
    };

    write_jsonl(&out.join("generations.jsonl"), &records)?;
    write_jsonl(
        &out.join("predictions.jsonl"),
        records.iter().filter_map(|r| r.caption.as_deref().map(|caption| Prediction { doc_id: &r.doc_id, caption })),
    )?;
    write_jsonl(&out.join("contexts.jsonl"), records.iter().filter_map(|r| r.context.as_ref()))?;
    let failed: Vec<&str> = records.iter().filter(|r| r.error.is_some()).map(|r| r.doc_id.as_str()).collect();
    summarize(&out, "generate", &s, Stats { documents: records.len(), succeeded: records.len() - failed.len(), failed: failed.len(), trace })?;
    if !failed.is_empty() {
        for r in records.iter().filter(|r| r.error.is_some()) {
            eprintln!("{}: {}", r.doc_id, r.error.as_deref().unwrap_or_default());
        }
        return Err(CliError::Protocol(format!("{} of {} documents failed", failed.len(), records.len())));
    }
    Ok(())
}
