//! Sentence-level chrF.
//!
//! Whitespace is removed before extracting character n-grams. For each order
//! with n-grams on both sides, precision and recall are computed from clipped
//! match counts; precision and recall are averaged over those orders and
//! combined into one F-beta score. This matches the sacreBLEU 2.x default
//! (`chrF`, char order 6, beta 2, no word n-grams).

use std::collections::HashMap;

use super::MetricError;

pub const DEFAULT_MAX_CHAR_N: usize = 6;
pub const DEFAULT_BETA: f64 = 2.0;

/// chrF with the default order (6) and beta (2), in `[0, 1]`.
pub fn chrf(hypothesis: &str, reference: &str) -> f64 {
    chrf_with(hypothesis, reference, DEFAULT_MAX_CHAR_N, DEFAULT_BETA).expect("default order is valid")
}

pub fn chrf_with(hypothesis: &str, reference: &str, max_char_n: usize, beta: f64) -> Result<f64, MetricError> {
    if max_char_n == 0 {
        return Err(MetricError::InvalidOrder);
    }
    let hyp: Vec<char> = hypothesis.chars().filter(|c| !c.is_whitespace()).collect();
    let refc: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    match (hyp.is_empty(), refc.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }

    let mut precision = 0.0;
    let mut recall = 0.0;
    let mut effective = 0usize;
    for n in 1..=max_char_n {
        if hyp.len() < n || refc.len() < n {
            continue;
        }
        let ref_counts = ngram_counts(&refc, n);
        let mut hyp_counts = ngram_counts(&hyp, n);
        let matches: usize = hyp_counts
            .drain()
            .map(|(g, c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        precision += matches as f64 / (hyp.len() - n + 1) as f64;
        recall += matches as f64 / (refc.len() - n + 1) as f64;
        effective += 1;
    }
    if effective == 0 {
        return Ok(0.0);
    }
    precision /= effective as f64;
    recall /= effective as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    let b2 = beta * beta;
    let score = (1.0 + b2) * precision * recall / (b2 * precision + recall);
    Ok(score.clamp(0.0, 1.0))
}

fn ngram_counts(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut counts = HashMap::with_capacity(chars.len());
    for gram in chars.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Mean over segments of the best chrF against any of the segment's references.
pub fn corpus_chrf<'a, I, R>(segments: I) -> Option<f64>
where
    I: IntoIterator<Item = (&'a str, R)>,
    R: IntoIterator<Item = &'a str>,
{
    let mut total = 0.0;
    let mut n = 0usize;
    for (hyp, refs) in segments {
        let best = refs.into_iter().map(|r| chrf(hyp, r)).fold(0.0, f64::max);
        total += best;
        n += 1;
    }
    (n > 0).then(|| total / n as f64)
}
