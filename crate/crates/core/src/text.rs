//! Word accounting and word-boundary surface matching shared by every module.

/// Collapses every run of whitespace into a single space and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Number of whitespace-delimited tokens.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// The first `n` whitespace tokens joined by single spaces.
pub fn first_words(text: &str, n: usize) -> String {
    text.split_whitespace().take(n).collect::<Vec<_>>().join(" ")
}

#[inline]
pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Byte offsets at which `surface` occurs in `text` without being glued to
/// a neighbouring word character. The boundary is only enforced on a side
/// where the surface itself starts (or ends) with a word character, which
/// matches the usual `\b` semantics.
pub fn surface_occurrences<'a>(text: &'a str, surface: &'a str) -> impl Iterator<Item = usize> + 'a {
    let first = surface.chars().next();
    let last = surface.chars().next_back();
    let mut from = 0;
    std::iter::from_fn(move || {
        if surface.is_empty() {
            return None;
        }
        while from <= text.len() {
            let pos = from + text[from..].find(surface)?;
            let end = pos + surface.len();
            from = pos + text[pos..].chars().next().map_or(1, char::len_utf8);
            let left_ok = !first.is_some_and(is_word_char)
                || !text[..pos].chars().next_back().is_some_and(is_word_char);
            let right_ok = !last.is_some_and(is_word_char)
                || !text[end..].chars().next().is_some_and(is_word_char);
            if left_ok && right_ok {
                return Some(pos);
            }
        }
        None
    })
}

/// True when `surface` occurs in `text` at a word boundary.
pub fn contains_surface(text: &str, surface: &str) -> bool {
    surface_occurrences(text, surface).next().is_some()
}

/// Converts a byte offset into a character offset.
pub fn byte_to_char(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

/// Slices `text` by character offsets; `None` when out of range.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let s = indices.nth(start)?;
    let e = if end == start { s } else { indices.nth(end - start - 1)? };
    Some(&text[s..e])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_words() {
        assert_eq!(word_count("a b  c"), 3);
        assert_eq!(word_count(""), 0);
        assert_eq!(word_count("  \n\t "), 0);
    }

    #[test]
    fn boundary_matching() {
        assert!(contains_surface("Lucy Bronze scored twice.", "Lucy Bronze"));
        assert!(!contains_surface("Bronzed skin", "Bronze"));
        assert!(!contains_surface("UNESCO", "UN"));
        assert!(contains_surface("the UN, in", "UN"));
        assert!(contains_surface("cost $3 today", "$3"));
        assert!(!contains_surface("cost $30 today", "$3"));
        assert!(contains_surface("(Obama)", "Obama"));
        let hits: Vec<_> = surface_occurrences("Ann met Ann and Anne", "Ann").collect();
        assert_eq!(hits, vec![0, 8]);
    }

    #[test]
    fn char_offsets() {
        let t = "Café Zürich";
        assert_eq!(char_slice(t, 5, 11), Some("Zürich"));
        assert_eq!(byte_to_char(t, t.find("Zürich").unwrap()), 5);
        assert_eq!(char_slice(t, 0, 0), Some(""));
        assert_eq!(char_slice(t, 5, 12), None);
    }
}
