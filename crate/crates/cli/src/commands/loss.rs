use std::path::PathBuf;

use clap::Args;
use newscap_core::loss::{audit, read_logprob_records, TaskWeights};
use newscap_core::CorpusStyle;

use super::{open, out_dir, settings, summarize};
use crate::error::{CliError, Result};
use crate::Common;

#[derive(Debug, Args)]
pub struct LossArgs {
    /// One `{"sample_id", "task", "logprobs"}` record per line.
    #[arg(long)]
    pub logprobs: PathBuf,
    /// Weight preset: goodnews, nytimes or base (captioning only).
    #[arg(long)]
    pub weights: Option<String>,
    /// Picks the preset when --weights is not given.
    #[arg(long)]
    pub style: Option<CorpusStyle>,
    #[arg(long)]
    pub w_sent: Option<f64>,
    #[arg(long)]
    pub w_ent: Option<f64>,
    #[arg(long)]
    pub w_cap: Option<f64>,
}

fn preset(name: &str) -> Result<TaskWeights> {
    match name {
        "goodnews" => Ok(TaskWeights::goodnews()),
        "nytimes" => Ok(TaskWeights::nytimes()),
        "base" => Ok(TaskWeights::base()),
        other => Err(CliError::Usage(format!("unknown weight preset {other:?}"))),
    }
}

pub fn run(common: &Common, args: LossArgs) -> Result<()> {
    let mut s = settings(common)?;
    s.flag("style", args.style)
        .flag("weights", args.weights.as_ref())
        .flag("w_sent", args.w_sent)
        .flag("w_ent", args.w_ent)
        .flag("w_cap", args.w_cap);
    let base = match s.get_opt::<String>("weights")? {
        Some(name) => preset(&name)?,
        None => TaskWeights::for_style(s.get("style", CorpusStyle::default())?),
    };
    let weights = TaskWeights::new(s.get("w_sent", base.w_sent)?, s.get("w_ent", base.w_ent)?, s.get("w_cap", base.w_cap)?)?;
    s.note("logprobs", args.logprobs.display());
    let records = read_logprob_records(open(&args.logprobs)?)?;
    let out = out_dir(common, &mut s)?;
    let result = audit(&records, weights)?;
    std::fs::write(out.join("loss.json"), serde_json::to_string_pretty(&result)? + "\n")?;
    summarize(&out, "loss-audit", &s, &result)
}
