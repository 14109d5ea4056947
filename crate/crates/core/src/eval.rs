//! Ground-truth comparison: interval IOU, one-to-one matching, and
//! precision/recall/F1 over a threshold sweep.

use serde::{Deserialize, Serialize};

use crate::series::Region;

/// Scores at one IOU threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub tau: f64,
    pub match_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Intersection-over-union of two inclusive integer intervals.
pub fn iou(r1: Region, r2: Region) -> f64 {
    let inter_lo = r1.start.max(r2.start);
    let inter_hi = r1.end.min(r2.end);
    if inter_lo > inter_hi {
        return 0.0;
    }
    let inter = (inter_hi - inter_lo + 1) as f64;
    let union = (r1.len() + r2.len()) as f64 - inter;
    inter / union
}

/// Greatest number of one-to-one pairings with IOU >= tau.
///
/// Both lists are sorted internally; each predicted region then greedily
/// takes the earliest still-unmatched truth region it matches.
pub fn match_count(predicted: &[Region], truth: &[Region], tau: f64) -> usize {
    let mut preds = predicted.to_vec();
    let mut truths = truth.to_vec();
    preds.sort();
    truths.sort();
    let mut used = vec![false; truths.len()];
    let mut count = 0;
    for p in &preds {
        for (i, t) in truths.iter().enumerate() {
            if !used[i] && iou(*p, *t) >= tau {
                used[i] = true;
                count += 1;
                break;
            }
        }
    }
    count
}

/// Precision, recall, and F1 at one threshold. Empty inputs score zero
/// rather than NaN.
pub fn prf1(predicted: &[Region], truth: &[Region], tau: f64) -> MatchReport {
    let matches = match_count(predicted, truth, tau);
    let precision = if predicted.is_empty() {
        0.0
    } else {
        matches as f64 / predicted.len() as f64
    };
    let recall = if truth.is_empty() {
        0.0
    } else {
        matches as f64 / truth.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    MatchReport {
        tau,
        match_count: matches,
        precision,
        recall,
        f1,
    }
}

/// One report per threshold, thresholds sorted ascending.
pub fn f1_sweep(predicted: &[Region], truth: &[Region], taus: &[f64]) -> Vec<MatchReport> {
    let mut taus = taus.to_vec();
    taus.sort_by(|a, b| a.partial_cmp(b).expect("thresholds are finite"));
    taus.iter().map(|&t| prf1(predicted, truth, t)).collect()
}

/// Count-only scoring for marker-style ground truth: the first k returned
/// regions count as correct, where k is the number of marks.
pub fn prf1_count_only(num_predicted: usize, num_truth: usize) -> MatchReport {
    let matches = num_predicted.min(num_truth);
    let precision = if num_predicted == 0 {
        0.0
    } else {
        matches as f64 / num_predicted as f64
    };
    let recall = if num_truth == 0 {
        0.0
    } else {
        matches as f64 / num_truth as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    MatchReport {
        tau: 0.0,
        match_count: matches,
        precision,
        recall,
        f1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn r(start: usize, end: usize) -> Region {
        Region::new(start, end)
    }

    #[test]
    fn iou_identity_overlap_disjoint() {
        assert_relative_eq!(iou(r(0, 9), r(0, 9)), 1.0);
        assert_relative_eq!(iou(r(0, 9), r(5, 14)), 5.0 / 15.0);
        assert_relative_eq!(iou(r(0, 9), r(20, 29)), 0.0);
    }

    #[test]
    fn iou_is_symmetric() {
        let mut rng = crate::rng::substream(51, "iou");
        for _ in 0..200 {
            let a = rng.gen_range(0..50);
            let b = a + rng.gen_range(0..30);
            let c = rng.gen_range(0..50);
            let d = c + rng.gen_range(0..30);
            assert_eq!(
                iou(r(a, b), r(c, d)).to_bits(),
                iou(r(c, d), r(a, b)).to_bits()
            );
        }
    }

    #[test]
    fn identical_lists_match_fully_even_at_tau_one() {
        let regions = vec![r(0, 9), r(20, 29), r(50, 59)];
        assert_eq!(match_count(&regions, &regions, 1.0), 3);
    }

    #[test]
    fn only_overlapping_pairs_match() {
        let predicted = vec![r(0, 9), r(20, 29)];
        let truth = vec![r(0, 9), r(50, 59)];
        assert_eq!(match_count(&predicted, &truth, 0.5), 1);
    }

    fn brute_force_matching(predicted: &[Region], truth: &[Region], tau: f64) -> usize {
        // Exhaustive assignment of predictions to distinct truths.
        fn rec(
            p: usize,
            predicted: &[Region],
            truth: &[Region],
            used: &mut Vec<bool>,
            tau: f64,
        ) -> usize {
            if p == predicted.len() {
                return 0;
            }
            let mut best = rec(p + 1, predicted, truth, used, tau);
            for t in 0..truth.len() {
                if !used[t] && iou(predicted[p], truth[t]) >= tau {
                    used[t] = true;
                    best = best.max(1 + rec(p + 1, predicted, truth, used, tau));
                    used[t] = false;
                }
            }
            best
        }
        rec(0, predicted, truth, &mut vec![false; truth.len()], tau)
    }

    fn random_side(rng: &mut impl Rng) -> Vec<Region> {
        // Sorted regions with bounded pairwise overlap, the shape real
        // instance lists take: lengths within a factor-two band, no
        // nesting.
        let k = rng.gen_range(0..=6);
        let min_len = rng.gen_range(3..=10usize);
        let max_len = 2 * min_len - 1;
        let mut out = Vec::new();
        let mut cursor = 0usize;
        for _ in 0..k {
            let len = rng.gen_range(min_len..=max_len);
            let gap = rng.gen_range(0..=12) as isize - (min_len as isize - 1);
            let start = (cursor as isize + gap)
                .max(cursor as isize - (min_len as isize - 1))
                .max(0) as usize;
            out.push(r(start, start + len - 1));
            cursor = start + len;
        }
        out
    }

    #[test]
    fn greedy_matching_equals_brute_force_on_random_cases() {
        let mut rng = crate::rng::substream(52, "match");
        for case in 0..1000 {
            let predicted = random_side(&mut rng);
            let truth = random_side(&mut rng);
            let tau = rng.gen_range(1..=9) as f64 / 10.0;
            let greedy = match_count(&predicted, &truth, tau);
            let optimal = brute_force_matching(&predicted, &truth, tau);
            assert_eq!(
                greedy, optimal,
                "case {case}: tau {tau}, predicted {predicted:?}, truth {truth:?}"
            );
        }
    }

    #[test]
    fn prf1_hand_case_and_conventions() {
        let predicted = vec![r(0, 9), r(100, 109)];
        let truth = vec![r(0, 9), r(50, 59)];
        let report = prf1(&predicted, &truth, 0.5);
        assert_eq!(report.match_count, 1);
        assert_relative_eq!(report.precision, 0.5);
        assert_relative_eq!(report.recall, 0.5);
        assert_relative_eq!(report.f1, 0.5);

        assert_relative_eq!(prf1(&truth, &truth, 1.0).f1, 1.0);
        assert_relative_eq!(prf1(&[], &truth, 0.5).f1, 0.0);
        assert_relative_eq!(prf1(&predicted, &[], 0.5).f1, 0.0);
    }

    #[test]
    fn sweep_is_monotone_non_increasing() {
        let truth = vec![r(0, 19), r(40, 59), r(80, 99)];
        let predicted = vec![r(5, 24), r(40, 59), r(85, 104), r(200, 219)];
        let taus: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
        let reports = f1_sweep(&predicted, &truth, &taus);
        for pair in reports.windows(2) {
            assert!(pair[1].f1 <= pair[0].f1 + 1e-12);
            assert!(pair[1].match_count <= pair[0].match_count);
        }
    }

    #[test]
    fn shifted_predictions_drop_at_the_analytic_threshold() {
        // Equal lengths L with shift L/2 give IOU = (L/2) / (3L/2) = 1/3.
        let truth = vec![r(0, 19), r(100, 119)];
        let predicted = vec![r(10, 29), r(110, 129)];
        let below = prf1(&predicted, &truth, 0.33);
        let above = prf1(&predicted, &truth, 0.34);
        assert_relative_eq!(below.f1, 1.0);
        assert_relative_eq!(above.f1, 0.0);
    }

    #[test]
    fn empty_predictions_sweep_to_zero() {
        let truth = vec![r(0, 9)];
        for report in f1_sweep(&[], &truth, &[0.1, 0.5, 0.9]) {
            assert_eq!(report.match_count, 0);
            assert_eq!(report.f1, 0.0);
        }
    }

    #[test]
    fn count_only_mode_takes_the_first_k() {
        let report = prf1_count_only(4, 3);
        assert_eq!(report.match_count, 3);
        assert_relative_eq!(report.precision, 0.75);
        assert_relative_eq!(report.recall, 1.0);
        assert_eq!(prf1_count_only(0, 3).f1, 0.0);
    }
}
