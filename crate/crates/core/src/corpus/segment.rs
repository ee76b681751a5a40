//! Rule-based sentence segmentation over whitespace tokens.
//!
//! A token closes a sentence when, after stripping trailing closing quotes
//! and brackets, it ends in `.`, `!` or `?`, unless one of these holds:
//!
//! * the token is a listed abbreviation (`data/abbreviations.txt`) or a
//!   single-letter initial such as `J.`;
//! * the following token starts with a lowercase letter.
//!
//! Sentences are contiguous token ranges, so word offsets line up exactly
//! with [`crate::text::word_count`].

use std::collections::HashSet;
use std::sync::OnceLock;

use super::Sentence;

const ABBREVIATIONS: &str = include_str!("../../data/abbreviations.txt");
const CLOSERS: &[char] = &['"', '\'', '\u{201d}', '\u{2019}', ')', ']', '}'];

fn abbreviations() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        ABBREVIATIONS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

fn is_initial(core: &str) -> bool {
    let mut chars = core.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_uppercase())
}

fn closes_sentence(token: &str, next: Option<&str>) -> bool {
    let core = token.trim_end_matches(CLOSERS);
    let Some(last) = core.chars().next_back() else {
        return false;
    };
    if !matches!(last, '.' | '!' | '?') {
        return false;
    }
    let Some(next) = next else {
        return true;
    };
    if next.chars().next().is_some_and(char::is_lowercase) {
        return false;
    }
    if last == '.' && core.len() == token.len() {
        let lower = core.to_lowercase();
        if abbreviations().contains(lower.as_str()) || is_initial(core) {
            return false;
        }
    }
    true
}

/// Splits `text` into sentences. Total and deterministic; empty or
/// whitespace-only input yields no sentences.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    for i in 0..tokens.len() {
        if closes_sentence(tokens[i], tokens.get(i + 1).copied()) || i + 1 == tokens.len() {
            sentences.push(Sentence::new(sentences.len(), tokens[start..=i].join(" "), start, i + 1));
            start = i + 1;
        }
    }
    sentences
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(s: &str) -> Vec<String> {
        segment_sentences(s).into_iter().map(|s| s.text).collect()
    }

    #[test]
    fn simple_terminals() {
        assert_eq!(texts("It rained. She left."), vec!["It rained.", "She left."]);
        assert!(texts("").is_empty());
        assert!(texts("   ").is_empty());
    }

    #[test]
    fn abbreviation_does_not_split() {
        assert_eq!(
            texts("Mr. Smith arrived in Washington. He spoke."),
            vec!["Mr. Smith arrived in Washington.", "He spoke."]
        );
    }

    #[test]
    fn unterminated_tail_is_a_sentence() {
        assert_eq!(texts("One. two three"), vec!["One. two three"]);
        assert_eq!(texts("One. Two three"), vec!["One.", "Two three"]);
    }

    #[test]
    fn quoted_terminal() {
        assert_eq!(texts("\"Go home.\" He left."), vec!["\"Go home.\"", "He left."]);
    }

    #[test]
    fn offsets_are_contiguous() {
        let s = segment_sentences("A b. C d e. F.");
        let spans: Vec<_> = s.iter().map(|s| (s.start_word, s.end_word, s.word_count)).collect();
        assert_eq!(spans, vec![(0, 2, 2), (2, 5, 3), (5, 6, 1)]);
    }
}
