mod common;

use common::checks;
use newscap_core::alignment::{build_entity_selection, build_sentence_selection, NegativeCount};
use newscap_core::context::{oracle_context, origin_context, supplement_context, ContextConfig};
use newscap_core::ner::{EntitySource, GazetteerTagger};
use newscap_core::synth::{generate, SynthConfig};
use newscap_core::{CorpusStyle, Regime, VisualEntityPolicy};
use rand::seq::IteratorRandom;
use rand::SeedableRng;

fn tag_doc(tagger: &GazetteerTagger, doc: &newscap_core::Document) -> (Vec<newscap_core::Entity>, Vec<newscap_core::Entity>) {
    (tagger.tag(&doc.caption, EntitySource::Caption), tagger.tag(&doc.normalized_article(), EntitySource::Article))
}

#[test]
fn alignment_construction_is_sound() {
    let synth = generate(&SynthConfig::default());
    let tagger = synth.tagger();
    let policy = VisualEntityPolicy::default();
    let mut violations = Vec::new();
    let mut with_samples = 0;
    for doc in synth.corpus.iter() {
        let (cap, art) = tag_doc(&tagger, doc);
        let set = build_sentence_selection(doc, &cap, &policy, NegativeCount::Balanced, 7);
        with_samples += usize::from(!set.is_empty());
        violations.extend(checks::check_sent_set(doc, &cap, &set));
        violations.extend(checks::check_ent_sample(&cap, &art, &build_entity_selection(doc, &cap, &art)));
    }
    assert!(violations.is_empty(), "{violations:#?}");
    assert!(with_samples > 150);
}

#[test]
fn contexts_respect_budgets() {
    for style in [CorpusStyle::GoodNews, CorpusStyle::NyTimes] {
        let synth = generate(&SynthConfig { style, docs: 60, min_sentences: 30, max_sentences: 60, ..Default::default() });
        let tagger = synth.tagger();
        let config = ContextConfig { style, ..Default::default() };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut violations = Vec::new();
        for doc in synth.corpus.iter() {
            let (cap, art) = tag_doc(&tagger, doc);
            let origin = origin_context(doc, style, 500).unwrap();
            violations.extend(checks::check_context(doc, &origin, 500));
            let picks: Vec<usize> = (0..doc.sentences.len()).choose_multiple(&mut rng, 12);
            let all: Vec<usize> = (0..doc.sentences.len()).collect();
            for sel in [&picks, &all] {
                let supp = supplement_context(doc, sel, &["X".to_string()], &origin, 600, &config.entity_prompt).unwrap();
                violations.extend(checks::check_context(doc, &supp, 600));
            }
            let oracle = oracle_context(doc, Regime::OracleSent, &origin, &cap, &art, &config);
            violations.extend(checks::check_context(doc, &oracle, 600));
            violations.extend(checks::check_oracle_sent(doc, &cap, &oracle));
        }
        assert!(violations.is_empty(), "{violations:#?}");
    }
}
