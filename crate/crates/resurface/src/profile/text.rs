//! Edit-distance similarity ratios for profile strings.
//!
//! The default ratio weighs substitutions at twice the cost of an insertion
//! or deletion and normalizes by the combined length:
//!
//! ```text
//! ratio(a, b) = (|a| + |b| - d2(a, b)) / (|a| + |b|)
//! ```
//!
//! where `d2` is the edit distance with substitution cost 2. Because a
//! substitution then never beats a delete+insert pair, `d2 = |a| + |b| -
//! 2·LCS(a, b)` and the ratio is the fraction of characters sitting in the
//! longest common subsequence — the classic similarity used by diff-style
//! matchers. A plain variant, `1 - d(a, b) / max(|a|, |b|)` with unit costs,
//! is available behind [`RatioVariant::Simple`].
//!
//! Strings compare as Unicode scalar values, case-sensitively. Two empty
//! strings are defined to be identical (ratio 1).

/// Which normalized similarity to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatioVariant {
    /// `(|a|+|b|-d2)/(|a|+|b|)` with substitutions costing 2 (the default).
    #[default]
    IndelWeighted,
    /// `1 - d/max(|a|,|b|)` with unit-cost edits.
    Simple,
}

/// Similarity of `a` and `b` under the default indel-weighted ratio, in
/// `[0, 1]`; 1 exactly for identical strings (including two empty ones).
pub fn levenshtein_ratio(a: &str, b: &str) -> f64 {
    levenshtein_ratio_with(a, b, RatioVariant::IndelWeighted)
}

/// Similarity of `a` and `b` under the chosen [`RatioVariant`].
pub fn levenshtein_ratio_with(a: &str, b: &str, variant: RatioVariant) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    match variant {
        RatioVariant::IndelWeighted => {
            let total = a.len() + b.len();
            if total == 0 {
                return 1.0;
            }
            let d2 = edit_distance(&a, &b, 2);
            (total - d2) as f64 / total as f64
        }
        RatioVariant::Simple => {
            let longest = a.len().max(b.len());
            if longest == 0 {
                return 1.0;
            }
            let d = edit_distance(&a, &b, 1);
            1.0 - d as f64 / longest as f64
        }
    }
}

/// Edit distance with unit insert/delete cost and the given substitution
/// cost, in O(|a|·|b|) time and O(min row) space.
fn edit_distance(a: &[char], b: &[char], substitution_cost: usize) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    // One rolling row over b, prev holding the row for a[..i].
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut current = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        current[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let substitute = prev[j] + if ca == cb { 0 } else { substitution_cost };
            let delete = prev[j + 1] + 1;
            let insert = current[j] + 1;
            current[j + 1] = substitute.min(delete).min(insert);
        }
        std::mem::swap(&mut prev, &mut current);
    }
    prev[b.len()]
}
