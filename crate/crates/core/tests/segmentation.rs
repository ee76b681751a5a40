use newscap_core::corpus::{segment_sentences, word_count, Corpus, CorpusStyle, Document, Split};
use newscap_core::text::normalize_whitespace;
use proptest::prelude::*;

const FIXTURE: &str = include_str!("data/segmentation_fixture.txt");

/// Documents of the hand-segmented fixture: expected sentences per document.
fn fixture_documents() -> Vec<Vec<&'static str>> {
    FIXTURE
        .split("\n\n")
        .map(|block| block.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).collect::<Vec<_>>())
        .filter(|doc| !doc.is_empty())
        .collect()
}

#[test]
fn hand_segmented_fixture() {
    let docs = fixture_documents();
    assert_eq!(docs.iter().map(Vec::len).sum::<usize>(), 50);
    for expected in docs {
        let article = expected.join(" ");
        let got: Vec<String> = segment_sentences(&article).into_iter().map(|s| s.text).collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn fixed_length_article() {
    let article: String = (0..451).map(|i| if i % 15 == 14 { "end.".to_string() } else { format!("w{i}") }).collect::<Vec<_>>().join(" ");
    assert_eq!(word_count(&article), 451);
    let doc = Document::new("d", article, "c", "x", None, Split::Test);
    assert_eq!(doc.total_words(), 451);
}

#[test]
fn ingestion_is_deterministic() {
    let records: String = fixture_documents()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            serde_json::json!({"doc_id": format!("d{i}"), "article": d.join("  \n"), "caption": d[0],
                               "image_ref": format!("img/{i}.jpg"), "split": "train"})
                .to_string()
                + "\n"
        })
        .collect();
    let serialize = || {
        let c = Corpus::ingest_reader(records.as_bytes(), CorpusStyle::GoodNews).unwrap();
        let mut buf = Vec::new();
        c.write_jsonl(&mut buf).unwrap();
        buf
    };
    assert_eq!(serialize(), serialize());
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "Mr.", "Dr.", "the", "The", "end.", "End.", "Why?", "stop!", "J.", "U.S.", "\"Yes.\"", "(see", "it.)", "3.5", "a", "Paris",
    ])
    .prop_map(String::from)
}

proptest! {
    #[test]
    fn segmentation_invariants(words in prop::collection::vec(word(), 0..60), seps in prop::collection::vec(prop::sample::select(vec![" ", "  ", "\n", "\t "]), 60)) {
        let text: String = words.iter().zip(&seps).map(|(w, s)| format!("{w}{s}")).collect();
        let sentences = segment_sentences(&text);
        let joined = sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
        prop_assert_eq!(joined, normalize_whitespace(&text));
        let mut expected_start = 0;
        for (i, s) in sentences.iter().enumerate() {
            prop_assert_eq!(s.index, i);
            prop_assert_eq!(s.start_word, expected_start);
            prop_assert!(s.word_count >= 1);
            prop_assert_eq!(s.word_count, s.end_word - s.start_word);
            prop_assert_eq!(s.word_count, word_count(&s.text));
            expected_start = s.end_word;
        }
        prop_assert_eq!(expected_start, word_count(&text));
    }
}
