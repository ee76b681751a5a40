//! PTB-style caption tokenization as applied before scoring: lowercase,
//! split punctuation and clitics off words, then drop punctuation tokens.

const DROPPED: &[&str] = &["''", "'", "\"", "``", "`", ".", "?", "!", ",", ":", "-", "--", "...", ";"];
const LEADING: &[char] = &['$', '"', '\'', '`', '(', '[', '{', '\u{201c}', '\u{2018}'];
const TRAILING: &[char] = &['%', '"', '\'', '`', ')', ']', '}', '.', ',', ';', ':', '!', '?', '\u{201d}', '\u{2019}'];
const BRACKETS: &[char] = &['(', ')', '[', ']', '{', '}'];
const CLITICS: &[&str] = &["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];

fn keep(token: &str) -> bool {
    !token.is_empty() && !DROPPED.contains(&token) && !(token.chars().count() == 1 && token.starts_with(BRACKETS))
}

/// A word-internal period (as in `u.s.`) means the final period is part of
/// the token rather than punctuation.
fn is_abbreviation(word: &str) -> bool {
    word.ends_with('.') && word[..word.len() - 1].contains('.')
}

fn split_word(word: &str, out: &mut Vec<String>) {
    let mut rest = word;
    while let Some(c) = rest.chars().next().filter(|c| LEADING.contains(c)) {
        out.push(c.to_string());
        rest = &rest[c.len_utf8()..];
    }
    let mut trailing = Vec::new();
    loop {
        if let Some(dots) = rest.strip_suffix("...") {
            trailing.push("...".to_string());
            rest = dots;
            continue;
        }
        if is_abbreviation(rest) {
            break;
        }
        match rest.chars().next_back().filter(|c| TRAILING.contains(c)) {
            Some(c) => {
                trailing.push(c.to_string());
                rest = &rest[..rest.len() - c.len_utf8()];
            }
            None => break,
        }
    }
    let clitic = CLITICS.iter().find(|c| rest.len() > c.len() && rest.ends_with(*c));
    match clitic {
        Some(c) => {
            out.push(rest[..rest.len() - c.len()].to_string());
            out.push(c.to_string());
        }
        None => out.push(rest.to_string()),
    }
    out.extend(trailing.into_iter().rev());
}

/// Tokenizes a caption and returns the kept tokens joined by single spaces.
pub fn tokenize_caption(caption: &str) -> String {
    let lower = caption.to_lowercase();
    let mut tokens = Vec::new();
    for word in lower.split_whitespace() {
        split_word(word, &mut tokens);
    }
    tokens.retain(|t| keep(t));
    tokens.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_punctuation_and_lowercases() {
        assert_eq!(tokenize_caption("A man's dog, running."), "a man 's dog running");
        assert_eq!(tokenize_caption("\"Hello,\" she said (quietly)!"), "hello she said quietly");
        assert_eq!(tokenize_caption("It isn't over -- yet..."), "it is n't over yet");
        assert_eq!(tokenize_caption("The U.S. team"), "the u.s. team");
        assert_eq!(tokenize_caption("40% at $3.50"), "40 % at $ 3.50");
        assert_eq!(tokenize_caption(""), "");
    }

    #[test]
    fn identity_on_pretokenized() {
        let s = "pope francis waves to supporters in berlin";
        assert_eq!(tokenize_caption(s), s);
    }
}
