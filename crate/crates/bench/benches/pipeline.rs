use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use newscap_bench::corpus;
use newscap_core::alignment::{build_entity_selection, build_sentence_selection, NegativeCount};
use newscap_core::context::origin_context;
use newscap_core::gateway::{run_batch, GatewayError, MockModel, MockTransport, PipelineConfig};
use newscap_core::ner::EntitySource;
use newscap_core::{CorpusStyle, Document, VisualEntityPolicy};
use std::hint::black_box;

fn tagging_and_alignment(c: &mut Criterion) {
    let synth = corpus(200, CorpusStyle::GoodNews);
    let tagger = synth.tagger();
    let policy = VisualEntityPolicy::default();
    c.bench_function("tag 200 articles", |b| {
        b.iter(|| synth.corpus.iter().map(|d| tagger.tag(black_box(&d.normalized_article()), EntitySource::Article).len()).sum::<usize>())
    });
    let tagged: Vec<_> = synth
        .corpus
        .iter()
        .map(|d| (tagger.tag(&d.caption, EntitySource::Caption), tagger.tag(&d.normalized_article(), EntitySource::Article)))
        .collect();
    c.bench_function("alignment 200 docs", |b| {
        b.iter(|| {
            for (doc, (cap, art)) in synth.corpus.iter().zip(&tagged) {
                black_box(build_sentence_selection(doc, cap, &policy, NegativeCount::Balanced, 7));
                black_box(build_entity_selection(doc, cap, art));
            }
        })
    });
    for style in [CorpusStyle::GoodNews, CorpusStyle::NyTimes] {
        let synth = corpus(200, style);
        c.bench_function(&format!("origin context 200 docs ({style})"), |b| {
            b.iter(|| synth.corpus.iter().map(|d| origin_context(d, style, 500).unwrap().total_word_count).sum::<usize>())
        });
    }
}

fn mock_generation(c: &mut Criterion) {
    let synth = corpus(100, CorpusStyle::GoodNews);
    let model = Arc::new(MockModel::with_corpus(synth.tagger(), &synth.corpus));
    let docs: Vec<Document> = synth.corpus.documents().to_vec();
    let config = PipelineConfig::default();
    let mut group = c.benchmark_group("mock generation 100 docs");
    group.sample_size(20);
    for jobs in [1, 4] {
        group.bench_function(format!("jobs {jobs}"), |b| {
            b.iter_batched(
                || model.clone(),
                |m| run_batch(&docs, || Ok::<_, GatewayError>(MockTransport::new(m.clone())), &config, jobs, None),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, tagging_and_alignment, mock_generation);
criterion_main!(benches);
