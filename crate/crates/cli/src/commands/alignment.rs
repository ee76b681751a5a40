use std::fs;
use std::path::PathBuf;

use clap::Args;
use newscap_core::alignment::{
    assemble_minigroups, build_caption_sample, build_entity_selection, build_sentence_selection, AlignmentSample, GroupManifestEntry, Leftovers,
    NegativeCount,
};
use newscap_core::corpus::Split;
use newscap_core::{Regime, VisualEntityPolicy};
use serde::Serialize;

use super::{context_config, jobs, out_dir, par_map, read_corpus, select_split, settings, static_context, summarize, tag_document, write_jsonl, BudgetArgs, TaggerArgs};
use crate::error::{input, CliError, Result};
use crate::Common;

#[derive(Debug, Args)]
pub struct AlignmentArgs {
    /// Ingested corpus directory.
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub tagger: TaggerArgs,
    #[command(flatten)]
    pub budgets: BudgetArgs,
    /// Non-visual labels, one per line (default: the numeric and temporal classes).
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Hard negatives per document: a count or "balanced".
    #[arg(long, allow_hyphen_values = true)]
    pub negatives: Option<String>,
    /// Context regime of the captioning samples.
    #[arg(long)]
    pub regime: Option<Regime>,
    /// Split to draw samples from (default: train).
    #[arg(long)]
    pub split: Option<Split>,
}

#[derive(Serialize)]
struct Groups<'a> {
    groups: Vec<GroupManifestEntry>,
    leftovers: &'a Leftovers,
}

#[derive(Serialize)]
struct Stats {
    documents: usize,
    sent_samples: usize,
    docs_without_visual_entities: usize,
    ent_samples: usize,
    cap_samples: usize,
    groups: usize,
}

pub fn run(common: &Common, args: AlignmentArgs) -> Result<()> {
    let mut s = settings(common)?;
    let corpus = read_corpus(&mut s, &args.corpus)?;
    let tagger = super::tagger(&mut s, &args.tagger)?;
    let config = context_config(&mut s, &args.budgets, corpus.style())?;
    s.flag("policy", args.policy.as_ref().map(|p| p.display()))
        .flag("negatives", args.negatives.as_ref())
        .flag("regime", args.regime)
        .flag("split", args.split.or(Some(Split::Train)));
    let policy = match s.get_opt::<String>("policy")? {
        Some(path) => VisualEntityPolicy::load(input(path.as_ref())?)?,
        None => VisualEntityPolicy::default(),
    };
    let negatives: NegativeCount = s.get("negatives", NegativeCount::Balanced)?;
    let regime: Regime = s.get("regime", Regime::Origin)?;
    let seed: u64 = s.get("seed", 0)?;
    let jobs = jobs(&mut s)?;
    let docs = select_split(&mut s, &corpus, None)?;
    let out = out_dir(common, &mut s)?;

    type DocSamples = (Vec<AlignmentSample>, AlignmentSample, AlignmentSample);
    let per_doc: Vec<Result<DocSamples>> = par_map(&docs, jobs, |doc| {
        let entities = tag_document(&tagger, doc)?;
        let sent = build_sentence_selection(doc, &entities.caption, &policy, negatives, seed);
        let ent = build_entity_selection(doc, &entities.caption, &entities.article);
        let ctx = static_context(doc, regime, &config, Some(&entities))?;
        Ok((sent, ent, build_caption_sample(doc, &ctx)))
    });
    let mut sent_sets = Vec::new();
    let mut ent = Vec::new();
    let mut cap = Vec::new();
    for r in per_doc {
        let (s, e, c) = r?;
        sent_sets.push(s);
        ent.push(e);
        cap.push(c);
    }
    if docs.is_empty() {
        return Err(CliError::Schema("no documents in the selected split".into()));
    }
    write_jsonl(&out.join("sent.jsonl"), sent_sets.iter().flatten())?;
    write_jsonl(&out.join("ent.jsonl"), &ent)?;
    write_jsonl(&out.join("cap.jsonl"), &cap)?;

    let stats = Stats {
        documents: docs.len(),
        sent_samples: sent_sets.iter().map(Vec::len).sum(),
        docs_without_visual_entities: sent_sets.iter().filter(|s| s.is_empty()).count(),
        ent_samples: ent.len(),
        cap_samples: cap.len(),
        groups: 0,
    };
    let assembly = assemble_minigroups(cap, sent_sets, ent, seed)?;
    let groups = Groups { groups: assembly.manifest(), leftovers: &assembly.leftovers };
    fs::write(out.join("groups.json"), serde_json::to_string_pretty(&groups)? + "\n")?;
    summarize(&out, "build-alignment", &s, Stats { groups: assembly.groups.len(), ..stats })
}
