use std::path::PathBuf;

use clap::Args;
use newscap_core::corpus::split_table;
use newscap_core::{Corpus, CorpusStyle};
use serde::Serialize;

use super::{open, out_dir, settings, summarize};
use crate::error::Result;
use crate::Common;

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw corpus, one JSON record per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub style: Option<CorpusStyle>,
}

#[derive(Serialize)]
struct Stats {
    documents: usize,
    sentences: usize,
    words: usize,
    splits: std::collections::BTreeMap<&'static str, usize>,
}

pub fn run(common: &Common, args: IngestArgs) -> Result<()> {
    let mut s = settings(common)?;
    s.flag("style", args.style);
    let style = s.get("style", CorpusStyle::default())?;
    s.note("input", args.input.display());
    let corpus = Corpus::ingest_reader(open(&args.input)?, style)?;
    let out = out_dir(common, &mut s)?;
    let manifest = corpus.write_dir(&out)?;
    let stats = Stats {
        documents: corpus.len(),
        sentences: corpus.iter().map(|d| d.sentences.len()).sum(),
        words: corpus.iter().map(|d| d.total_words()).sum(),
        splits: split_table(&manifest.splits),
    };
    summarize(&out, "ingest", &s, stats)
}
