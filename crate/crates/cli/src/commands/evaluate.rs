use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use clap::Args;
use newscap_core::context::origin_context;
use newscap_core::metrics::{evaluate, merge_external_meteor, EvalItem};
use newscap_core::SupplementedContext;
use serde::Deserialize;

use super::{context_config, open, out_dir, read_corpus, settings, write_summary, BudgetArgs, TaggerArgs};
use crate::error::{input, CliError, Result};
use crate::Common;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// One `{"doc_id", "caption"}` record per line; `generate` output works too.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Contexts the captions were generated from (default: those recorded
    /// with the predictions, else the origin context).
    #[arg(long)]
    pub contexts: Option<PathBuf>,
    #[command(flatten)]
    pub tagger: TaggerArgs,
    #[command(flatten)]
    pub budgets: BudgetArgs,
    /// Entity surfaces seen in training data, one per line.
    #[arg(long)]
    pub train_index: Option<PathBuf>,
    /// Externally computed METEOR in [0, 1].
    #[arg(long)]
    pub meteor: Option<f64>,
}

#[derive(Deserialize)]
struct PredictionIn {
    doc_id: String,
    caption: Option<String>,
    #[serde(default)]
    context: Option<SupplementedContext>,
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CliError::Schema(format!("{}:{}: {e}", path.display(), i + 1)))?);
    }
    Ok(out)
}

pub fn run(common: &Common, args: EvaluateArgs) -> Result<()> {
    let mut s = settings(common)?;
    let corpus = read_corpus(&mut s, &args.corpus)?;
    let config = context_config(&mut s, &args.budgets, corpus.style())?;
    let tagger = super::tagger(&mut s, &args.tagger)?;
    s.note("predictions", args.predictions.display());
    let predictions: Vec<PredictionIn> = read_lines(&args.predictions)?;
    let explicit: Option<HashMap<String, SupplementedContext>> = match &args.contexts {
        Some(path) => {
            s.note("contexts", path.display());
            Some(read_lines::<SupplementedContext>(path)?.into_iter().map(|c| (c.doc_id.clone(), c)).collect())
        }
        None => None,
    };
    s.flag("train_index", args.train_index.as_ref().map(|p| p.display())).flag("meteor", args.meteor);
    let train_index: Option<HashSet<String>> = match s.get_opt::<String>("train_index")? {
        Some(path) => {
            let text = fs::read_to_string(input(Path::new(&path))?)?;
            Some(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
        }
        None => None,
    };
    let meteor: Option<f64> = s.get_opt("meteor")?;
    let out = out_dir(common, &mut s)?;

    let mut items = Vec::new();
    for p in predictions {
        let Some(caption) = p.caption else { continue };
        let doc = corpus.get(&p.doc_id).ok_or_else(|| CliError::Schema(format!("prediction for unknown document {}", p.doc_id)))?;
        let context = match explicit.as_ref().map(|m| m.get(&p.doc_id)) {
            Some(Some(c)) => c.final_text.clone(),
            Some(None) => return Err(CliError::Schema(format!("no context for {}", p.doc_id))),
            None => match p.context {
                Some(c) => c.final_text,
                None => origin_context(doc, config.style, config.origin_budget)?.final_text,
            },
        };
        items.push(EvalItem { doc_id: p.doc_id, generated: caption, reference: doc.caption.clone(), context });
    }
    let mut report = evaluate(&items, &tagger, train_index.as_ref())?;
    if let Some(m) = meteor {
        report = merge_external_meteor(report, m)?;
    }
    let table = report.render_table();
    fs::write(out.join("report.txt"), &table)?;
    write_summary(&out, "evaluate", &s, &report)?;
    print!("{table}");
    Ok(())
}
