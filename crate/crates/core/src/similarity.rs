//! Edit-distance based value comparison.

/// Minimum normalized similarity for two canonical values to count as equal.
pub const FUZZY_THRESHOLD: f64 = 0.85;

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(ca != cb);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - dist / max_len`; two empty strings are identical.
pub fn normalized_similarity(a: &str, b: &str) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / max_len as f64
}

/// Fuzzy equality of two canonical values.
pub fn values_match(pred: &str, gold: &str) -> bool {
    pred == gold || normalized_similarity(pred, gold) >= FUZZY_THRESHOLD
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distances() {
        assert_eq!(levenshtein("", ""), 0);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("cristopher", "christopher"), 1);
        assert_eq!(levenshtein("3pm", "noon"), 4);
        assert_eq!(levenshtein("café", "cafe"), 1);
    }

    #[test]
    fn match_examples() {
        assert!(values_match("new york", "new york"));
        // 1 - 1/11 = 0.909
        assert!(values_match("cristopher", "christopher"));
        assert!(!values_match("3pm", "noon"));
        assert!(!values_match("jess", "jack"));
        assert!(!values_match("3pm", "4pm"));
    }

    proptest! {
        #[test]
        fn symmetric(a in "[a-e ]{0,12}", b in "[a-e ]{0,12}") {
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
            prop_assert_eq!(values_match(&a, &b), values_match(&b, &a));
        }

        #[test]
        fn similarity_in_unit_range(a in ".{0,10}", b in ".{0,10}") {
            let s = normalized_similarity(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
