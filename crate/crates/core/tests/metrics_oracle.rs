//! Frozen scores from the reference COCO caption scorers on the fixture in
//! tests/data/metric_fixture.jsonl (regenerate with tools/coco_reference_scores.py).

use approx::assert_abs_diff_eq;
use newscap_core::metrics::{bleu_tokenized, cider_per_document, cider_tokenized, rouge_tokenized, tokenize_caption};
use proptest::prelude::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct Pair {
    candidate: String,
    reference: String,
}

fn fixture() -> (Vec<String>, Vec<Vec<String>>) {
    let text = include_str!("data/metric_fixture.jsonl");
    let pairs: Vec<Pair> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let c = pairs.iter().map(|p| p.candidate.clone()).collect();
    let r = pairs.iter().map(|p| vec![p.reference.clone()]).collect();
    (c, r)
}

fn halve(c: &str) -> String {
    let w: Vec<&str> = c.split_whitespace().collect();
    w[..(w.len() / 2).max(1)].join(" ")
}

#[test]
fn fixture_is_tokenizer_fixed_point() {
    let (c, r) = fixture();
    for s in c.iter().chain(r.iter().flatten()) {
        assert_eq!(&tokenize_caption(s), s);
    }
}

#[test]
fn bleu_matches_reference_scorer() {
    let (c, r) = fixture();
    let b = bleu_tokenized(&c, &r).unwrap();
    let expected = [0.6957494407143272, 0.6698092830225795, 0.6489625674263048, 0.6287760134392254];
    for (got, want) in b.cumulative.iter().zip(expected) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-4);
    }
}

#[test]
fn rouge_matches_reference_scorer() {
    let (c, r) = fixture();
    assert_abs_diff_eq!(rouge_tokenized(&c, &r).unwrap(), 0.6803580492531212, epsilon = 1e-4);
}

#[test]
fn cider_matches_reference_scorer() {
    let (c, r) = fixture();
    assert_abs_diff_eq!(cider_tokenized(&c, &r).unwrap(), 5.467161434982542, epsilon = 1e-3);
    let per_doc = cider_per_document(&c, &r).unwrap();
    let first5 = [6.875051223674245, 6.766857599598556, 7.185491104783887, 9.999999999999998, 10.0];
    for (got, want) in per_doc.iter().zip(first5) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-3);
    }
}

#[test]
fn truncated_candidates_match_reference_scorer() {
    let (c, r) = fixture();
    let c: Vec<String> = c.iter().map(|s| halve(s)).collect();
    assert_abs_diff_eq!(bleu_tokenized(&c, &r).unwrap().bleu4(), 0.23266941980048692, epsilon = 1e-4);
    assert_abs_diff_eq!(rouge_tokenized(&c, &r).unwrap(), 0.43016566323107136, epsilon = 1e-4);
    assert_abs_diff_eq!(cider_tokenized(&c, &r).unwrap(), 2.6507127081662585, epsilon = 1e-3);
    let per_doc = cider_per_document(&c, &r).unwrap();
    let first5 = [5.372746033926068, 1.3668398053953754, 7.002797647210159, 3.9642084438440506, 2.887553497858068];
    for (got, want) in per_doc.iter().zip(first5) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-3);
    }
}

#[test]
fn identical_corpus_scores() {
    let (_, r) = fixture();
    let c: Vec<String> = r.iter().map(|x| x[0].clone()).collect();
    assert_abs_diff_eq!(bleu_tokenized(&c, &r).unwrap().bleu4(), 1.0, epsilon = 1e-9);
    assert_abs_diff_eq!(rouge_tokenized(&c, &r).unwrap(), 1.0, epsilon = 1e-12);
    assert!(cider_tokenized(&c, &r).unwrap() > 5.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn corpus_scores_ignore_document_order(perm in Just((0..50usize).collect::<Vec<_>>()).prop_shuffle()) {
        let (c, r) = fixture();
        let pc: Vec<String> = perm.iter().map(|&i| c[i].clone()).collect();
        let pr: Vec<Vec<String>> = perm.iter().map(|&i| r[i].clone()).collect();
        prop_assert!((bleu_tokenized(&c, &r).unwrap().bleu4() - bleu_tokenized(&pc, &pr).unwrap().bleu4()).abs() < 1e-12);
        prop_assert!((rouge_tokenized(&c, &r).unwrap() - rouge_tokenized(&pc, &pr).unwrap()).abs() < 1e-12);
        prop_assert!((cider_tokenized(&c, &r).unwrap() - cider_tokenized(&pc, &pr).unwrap()).abs() < 1e-9);
    }
}
