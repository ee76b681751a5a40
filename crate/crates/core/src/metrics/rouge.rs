use super::MetricsError;

const BETA: f64 = 1.2;

fn lcs_len(a: &[&str], b: &[&str]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; short.len() + 1];
    let mut cur = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// ROUGE-L F-measure of one candidate against its references, using the
/// best precision and best recall over references.
pub fn rouge_l_single(candidate: &str, references: &[String]) -> f64 {
    let c: Vec<&str> = candidate.split_whitespace().collect();
    if c.is_empty() {
        return 0.0;
    }
    let (mut p_max, mut r_max) = (0.0f64, 0.0f64);
    for r in references {
        let rw: Vec<&str> = r.split_whitespace().collect();
        if rw.is_empty() {
            continue;
        }
        let lcs = lcs_len(&rw, &c) as f64;
        p_max = p_max.max(lcs / c.len() as f64);
        r_max = r_max.max(lcs / rw.len() as f64);
    }
    if p_max == 0.0 || r_max == 0.0 {
        return 0.0;
    }
    ((1.0 + BETA * BETA) * p_max * r_max) / (r_max + BETA * BETA * p_max)
}

/// Mean ROUGE-L over the corpus.
pub fn rouge_tokenized(candidates: &[String], references: &[Vec<String>]) -> Result<f64, MetricsError> {
    super::check_lengths(candidates.len(), references.len())?;
    let total: f64 = candidates.iter().zip(references).map(|(c, r)| rouge_l_single(c, r)).sum();
    Ok(total / candidates.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcs() {
        let a: Vec<&str> = "a b c d e".split(' ').collect();
        let b: Vec<&str> = "a c e x".split(' ').collect();
        assert_eq!(lcs_len(&a, &b), 3);
        assert_eq!(lcs_len(&b, &a), 3);
        assert_eq!(lcs_len(&a, &[]), 0);
    }
}
