use criterion::{criterion_group, criterion_main, Criterion};
use newscap_bench::{caption_pairs, corpus};
use newscap_core::metrics::{bleu4, cider, rouge_l, tokenize_caption};
use newscap_core::CorpusStyle;
use std::hint::black_box;

fn metrics(c: &mut Criterion) {
    let synth = corpus(500, CorpusStyle::GoodNews);
    let (cand, refs) = caption_pairs(&synth);
    c.bench_function("tokenize 500 captions", |b| b.iter(|| cand.iter().map(|s| tokenize_caption(black_box(s)).len()).sum::<usize>()));
    c.bench_function("bleu4 500", |b| b.iter(|| bleu4(black_box(&cand), black_box(&refs)).unwrap()));
    c.bench_function("rouge_l 500", |b| b.iter(|| rouge_l(black_box(&cand), black_box(&refs)).unwrap()));
    c.bench_function("cider 500", |b| b.iter(|| cider(black_box(&cand), black_box(&refs)).unwrap()));
}

criterion_group!(benches, metrics);
criterion_main!(benches);
