//! Agreement scorers for scene boundaries and detected errors.

use serde::{Deserialize, Serialize};

use crate::analysis::ErrorSegment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMatchReport {
    pub jaccard_similarity: f64,
    pub matched: usize,
    pub total_a: usize,
    pub total_b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorScoreReport {
    pub precision: f64,
    pub recall: f64,
    pub matched: usize,
    pub predicted: usize,
    pub ground_truth: usize,
}

/// One entry of `ground_truth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSpan {
    pub kind: String,
    pub start: f64,
    pub end: f64,
}

/// Greedy in-order one-to-one matching of two sorted boundary lists.
///
/// Two boundaries match when they are strictly less than `tolerance` apart.
/// The walk advances whichever unmatched boundary is earlier, so the result
/// does not depend on argument order. Two empty lists agree perfectly.
pub fn score_boundaries(a: &[f64], b: &[f64], tolerance: f64) -> BoundaryMatchReport {
    let (mut i, mut j, mut matched) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        if (a[i] - b[j]).abs() < tolerance {
            matched += 1;
            i += 1;
            j += 1;
        } else if a[i] < b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    let union = a.len() + b.len() - matched;
    BoundaryMatchReport {
        jaccard_similarity: if union == 0 { 1.0 } else { matched as f64 / union as f64 },
        matched,
        total_a: a.len(),
        total_b: b.len(),
    }
}

/// Gap between two spans; zero or negative when they touch or overlap.
fn span_gap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.1).max(b.0 - a.1)
}

/// Precision / recall of predicted error segments against labeled spans.
///
/// Each prediction, in order, claims the first unmatched ground-truth span
/// that overlaps it or whose nearest endpoint is less than `tolerance` away.
/// Kinds are not compared. With no predictions precision is 1; with no
/// ground truth recall is 1.
pub fn score_errors(predicted: &[ErrorSegment], ground_truth: &[LabeledSpan], tolerance: f64) -> ErrorScoreReport {
    let mut taken = vec![false; ground_truth.len()];
    let mut matched = 0;
    for p in predicted {
        let hit = ground_truth
            .iter()
            .enumerate()
            .find(|(k, g)| !taken[*k] && span_gap((p.start, p.end), (g.start, g.end)) < tolerance);
        if let Some((k, _)) = hit {
            taken[k] = true;
            matched += 1;
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    ErrorScoreReport {
        precision: ratio(matched, predicted.len()),
        recall: ratio(matched, ground_truth.len()),
        matched,
        predicted: predicted.len(),
        ground_truth: ground_truth.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ErrorKind;
    use proptest::prelude::*;

    fn seg(start: f64, end: f64) -> ErrorSegment {
        ErrorSegment {
            kind: ErrorKind::Blur,
            start,
            end,
        }
    }

    fn gt(start: f64, end: f64) -> LabeledSpan {
        LabeledSpan {
            kind: "blur".into(),
            start,
            end,
        }
    }

    #[test]
    fn identical_and_disjoint() {
        let a = [10.0, 20.0, 30.0];
        assert_eq!(score_boundaries(&a, &a, 3.0).jaccard_similarity, 1.0);
        let b = [13.0, 23.0, 33.0];
        assert_eq!(score_boundaries(&a, &b, 3.0).jaccard_similarity, 0.0);
    }

    #[test]
    fn three_vs_three() {
        let r = score_boundaries(&[10.0, 50.0, 90.0], &[11.5, 52.9, 200.0], 3.0);
        assert_eq!(r.matched, 2);
        assert_eq!(r.jaccard_similarity, 0.5);
    }

    #[test]
    fn tolerance_is_strict() {
        assert_eq!(score_boundaries(&[0.0], &[2.99], 3.0).matched, 1);
        assert_eq!(score_boundaries(&[0.0], &[3.0], 3.0).matched, 0);
        assert_eq!(score_boundaries(&[], &[], 3.0).jaccard_similarity, 1.0);
    }

    #[test]
    fn error_scores() {
        let r = score_errors(&[], &[gt(0.0, 1.0)], 3.0);
        assert_eq!((r.precision, r.recall), (1.0, 0.0));
        // overlap
        let r = score_errors(&[seg(5.0, 9.0)], &[gt(8.0, 12.0)], 3.0);
        assert_eq!(r.matched, 1);
        // near miss by 2.5 s
        let r = score_errors(&[seg(5.0, 9.0)], &[gt(11.5, 12.0)], 3.0);
        assert_eq!(r.matched, 1);
        // exactly tolerance apart
        let r = score_errors(&[seg(5.0, 9.0)], &[gt(12.0, 13.0)], 3.0);
        assert_eq!(r.matched, 0);
        // one ground-truth span cannot be claimed twice
        let r = score_errors(&[seg(5.0, 9.0), seg(6.0, 8.0)], &[gt(5.0, 9.0)], 3.0);
        assert_eq!((r.matched, r.precision, r.recall), (1, 0.5, 1.0));
    }

    proptest! {
        #[test]
        fn boundary_score_is_symmetric(
            mut a in proptest::collection::vec(0.0f64..300.0, 0..30),
            mut b in proptest::collection::vec(0.0f64..300.0, 0..30),
        ) {
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            let ab = score_boundaries(&a, &b, 3.0);
            let ba = score_boundaries(&b, &a, 3.0);
            prop_assert_eq!(ab.jaccard_similarity, ba.jaccard_similarity);
            prop_assert_eq!(ab.matched, ba.matched);
            let union = (ab.total_a + ab.total_b - ab.matched) as f64;
            if union > 0.0 {
                prop_assert_eq!(ab.jaccard_similarity, ab.matched as f64 / union);
            }
        }
    }
}
