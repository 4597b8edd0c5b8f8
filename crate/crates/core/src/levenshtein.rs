//! Levenshtein edit distance, two-row dynamic programming over chars.

/// Minimum number of single-character insertions, deletions, or
/// substitutions turning `a` into `b`.
pub fn distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }

    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (cur[j] + 1).min(prev[j + 1] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Distance after folding both strings to lowercase, the form identifier
/// ranking uses (`mTags` vs `tags` should look close).
pub fn distance_case_insensitive(a: &str, b: &str) -> usize {
    distance(&a.to_lowercase(), &b.to_lowercase())
}

/// Distance divided by the longer (case-folded) length, in [0, 1].
/// Two empty strings normalize to 0.
pub fn normalized_case_insensitive(a: &str, b: &str) -> f64 {
    let fa = a.to_lowercase();
    let fb = b.to_lowercase();
    let max_len = fa.chars().count().max(fb.chars().count());
    if max_len == 0 {
        return 0.0;
    }
    distance(&fa, &fb) as f64 / max_len as f64
}
