use crate::lexicon::UnigramModel;

/// Log-score of one candidate word: its unigram log-probability, or
/// `-(3 + 2 * len)` for out-of-vocabulary strings.
pub fn word_score(word: &str, model: &UnigramModel) -> f64 {
    model
        .log_prob(word)
        .unwrap_or_else(|| -(3.0 + 2.0 * word.chars().count() as f64))
}

/// Splits a hashtag into its maximum-likelihood word sequence.
///
/// Underscores are hard boundaries. When no split scores strictly better
/// than the whole body, the lowercased body is returned as one word.
pub fn segment_hashtag(tag: &str, model: &UnigramModel) -> Vec<String> {
    let body = tag.strip_prefix('#').unwrap_or(tag).to_lowercase();
    body.split('_')
        .filter(|p| !p.is_empty())
        .flat_map(|p| segment_body(p, model).0)
        .collect()
}

/// Dynamic program over split points. Returns the segmentation and its score.
pub fn segment_body(body: &str, model: &UnigramModel) -> (Vec<String>, f64) {
    let bounds: Vec<usize> = body
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(body.len()))
        .collect();
    let n = bounds.len() - 1;
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut best = vec![f64::NEG_INFINITY; n + 1];
    let mut back = vec![0usize; n + 1];
    best[0] = 0.0;
    for end in 1..=n {
        for start in 0..end {
            let s = best[start] + word_score(&body[bounds[start]..bounds[end]], model);
            if s > best[end] {
                best[end] = s;
                back[end] = start;
            }
        }
    }
    let mut words = Vec::new();
    let mut end = n;
    while end > 0 {
        let start = back[end];
        words.push(body[bounds[start]..bounds[end]].to_string());
        end = start;
    }
    words.reverse();
    (words, best[n])
}
