//! Structure scores: how far a subsequence sits from the nearest sampled
//! Gaussian random walk. High scores mark stretches unlikely to be noise;
//! they drive both shape sampling and seed generation.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Candidate shape lengths: powers of two in `[8, max]`.
pub fn power_of_two_lengths(max: usize) -> Vec<usize> {
    let mut lengths = Vec::new();
    let mut m = crate::config::MIN_SHAPE_LEN;
    while m <= max {
        lengths.push(m);
        m *= 2;
    }
    lengths
}

/// A fixed collection of Gaussian random walks matched to one series.
///
/// Walks are sampled once with unit-variance steps and rescaled per
/// dimension by that dimension's estimated step deviation, so a single
/// ensemble serves every score query for the series.
#[derive(Debug, Clone)]
pub struct WalkEnsemble {
    /// `num_walks` standard-normal-step walks, each of length N.
    pub walks: Vec<Vec<f64>>,
    /// Per-dimension step deviation: sqrt of the sample mean of squared
    /// first differences over the full series.
    pub sigma: Vec<f64>,
    n: usize,
}

impl WalkEnsemble {
    pub fn build<R: Rng>(ts: &TimeSeries, num_walks: usize, rng: &mut R) -> Self {
        let n = ts.len();
        let sigma = ts
            .dims()
            .map(|dim| {
                let ss: f64 = dim.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            })
            .collect();
        let walks = (0..num_walks)
            .map(|_| {
                let mut level = 0.0;
                (0..n)
                    .map(|_| {
                        let step: f64 = rng.sample(StandardNormal);
                        level += step;
                        level
                    })
                    .collect()
            })
            .collect();
        WalkEnsemble { walks, sigma, n }
    }

    /// Series length the ensemble was built for.
    pub fn series_len(&self) -> usize {
        self.n
    }

    /// Structure score of one subsequence of dimension `dim` starting at
    /// `start`: the minimum over walks of the mean-centered squared
    /// distance to the aligned walk window, normalized by length.
    ///
    /// Both operands are mean-centered, so the score is invariant to
    /// constant offsets and is always >= 0.
    pub fn score(&self, sub: &[f64], dim: usize, start: usize) -> Result<f64> {
        let m = sub.len();
        if m < 2 {
            return Err(Error::input(format!(
                "structure scores need subsequences of length >= 2; got {m}"
            )));
        }
        if start + m > self.n {
            return Err(Error::input(format!(
                "no walk window of length {m} exists at start {start} (walk length {})",
                self.n
            )));
        }
        let sigma = self.sigma[dim];
        let mu_sub = sub.iter().sum::<f64>() / m as f64;
        let mut best = f64::INFINITY;
        for walk in &self.walks {
            let window = &walk[start..start + m];
            let mu_walk = window.iter().sum::<f64>() / m as f64;
            let mut acc = 0.0;
            for (x, w) in sub.iter().zip(window) {
                let d = (x - mu_sub) - sigma * (w - mu_walk);
                acc += d * d;
            }
            let score = acc / m as f64;
            if score < best {
                best = score;
            }
        }
        Ok(best.max(0.0))
    }
}

/// Structure scores of every subsequence, per (dimension, length, start).
#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub lengths: Vec<usize>,
    /// `scores[dim][length_index][start]`, with `N - M + 1` starts per length.
    pub scores: Vec<Vec<Vec<f64>>>,
}

impl ScoreTable {
    pub fn get(&self, dim: usize, length: usize, start: usize) -> Option<f64> {
        let li = self.lengths.iter().position(|&m| m == length)?;
        self.scores.get(dim)?.get(li)?.get(start).copied()
    }

    pub fn num_entries(&self) -> usize {
        self.scores
            .iter()
            .map(|dim| dim.iter().map(Vec::len).sum::<usize>())
            .sum()
    }

    /// Sum of per-dimension scores at one (length, start); the
    /// dimension-aggregated score for multivariate series.
    pub fn summed_over_dims(&self, length: usize, start: usize) -> Option<f64> {
        let li = self.lengths.iter().position(|&m| m == length)?;
        let mut total = 0.0;
        for dim in &self.scores {
            total += *dim.get(li)?.get(start)?;
        }
        Some(total)
    }
}

/// Computes the full score table for the given subsequence lengths.
///
/// For each walk the subsequence-vs-walk residual is a fixed difference
/// series, and the aligned-window score equals the population variance of
/// that residual over the window; prefix sums make every (length, start)
/// query O(1), so the whole table costs O(D * num_walks * lengths * N).
pub fn structure_scores_all(
    ts: &TimeSeries,
    ensemble: &WalkEnsemble,
    lengths: &[usize],
) -> ScoreTable {
    let n = ts.len();
    let mut scores: Vec<Vec<Vec<f64>>> = (0..ts.num_dims())
        .map(|_| {
            lengths
                .iter()
                .map(|&m| vec![f64::INFINITY; n.saturating_sub(m) + 1])
                .collect()
        })
        .collect();

    let mut diff = vec![0.0; n];
    let mut sum1 = vec![0.0; n + 1];
    let mut sum2 = vec![0.0; n + 1];
    for (d, dim) in ts.dims().enumerate() {
        let sigma = ensemble.sigma[d];
        for walk in &ensemble.walks {
            for i in 0..n {
                diff[i] = dim[i] - sigma * walk[i];
            }
            for i in 0..n {
                sum1[i + 1] = sum1[i] + diff[i];
                sum2[i + 1] = sum2[i] + diff[i] * diff[i];
            }
            for (li, &m) in lengths.iter().enumerate() {
                if m > n {
                    continue;
                }
                let mf = m as f64;
                let row = &mut scores[d][li];
                for start in 0..=n - m {
                    let s1 = sum1[start + m] - sum1[start];
                    let s2 = sum2[start + m] - sum2[start];
                    let var = ((s2 - s1 * s1 / mf) / mf).max(0.0);
                    if var < row[start] {
                        row[start] = var;
                    }
                }
            }
        }
    }

    ScoreTable {
        lengths: lengths.to_vec(),
        scores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_relative_eq;

    fn series_from(dim: Vec<f64>) -> TimeSeries {
        TimeSeries::new(vec![dim], None).unwrap()
    }

    #[test]
    fn length_ladder_covers_powers_of_two() {
        assert_eq!(power_of_two_lengths(64), vec![8, 16, 32, 64]);
        assert_eq!(power_of_two_lengths(100), vec![8, 16, 32, 64]);
        assert_eq!(power_of_two_lengths(7), Vec::<usize>::new());
    }

    #[test]
    fn constant_series_scores_zero() {
        // sigma = 0 makes every walk constant; both operands mean-center
        // to zero.
        let ts = series_from(vec![3.5; 64]);
        let mut rng = substream(1, "walks");
        let ens = WalkEnsemble::build(&ts, 10, &mut rng);
        let score = ens.score(&ts.dim(0)[4..20], 0, 4).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn identical_copy_scores_zero() {
        let ts = series_from((0..50).map(|i| (i as f64 * 0.3).sin()).collect());
        let mut rng = substream(2, "walks");
        let mut ens = WalkEnsemble::build(&ts, 5, &mut rng);
        // Plant an exact copy of the subsequence in one walk (sigma = 1
        // would be needed for exactness, so rescale the planted values).
        let sigma = ens.sigma[0];
        for i in 0..50 {
            ens.walks[2][i] = ts.dim(0)[i] / sigma;
        }
        let score = ens.score(&ts.dim(0)[10..30], 0, 10).unwrap();
        assert_relative_eq!(score, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sine_score_matches_straight_line_reimplementation() {
        // Oracle: re-evaluate the definition directly over the identical
        // walk ensemble.
        let n = 256;
        let ts = series_from((0..n).map(|i| 2.0 * (i as f64 * 0.2).sin()).collect());
        let mut rng = substream(3, "walks");
        let ens = WalkEnsemble::build(&ts, 100, &mut rng);

        let m = 32;
        let start = 40;
        let sub = &ts.dim(0)[start..start + m];
        let got = ens.score(sub, 0, start).unwrap();

        let mut expected = f64::INFINITY;
        for walk in &ens.walks {
            let scaled: Vec<f64> = walk[start..start + m]
                .iter()
                .map(|w| w * ens.sigma[0])
                .collect();
            let mu_t = sub.iter().sum::<f64>() / m as f64;
            let mu_w = scaled.iter().sum::<f64>() / m as f64;
            let mut acc = 0.0;
            for i in 0..m {
                let d = (sub[i] - mu_t) - (scaled[i] - mu_w);
                acc += d * d;
            }
            expected = expected.min(acc / m as f64);
        }
        assert!(got > 0.0);
        assert!((got - expected).abs() <= 0.05 * expected.abs());
        assert_relative_eq!(got, expected, max_relative = 1e-9);
    }

    #[test]
    fn mean_shift_leaves_scores_unchanged() {
        let base: Vec<f64> = (0..80)
            .map(|i| (i as f64 * 0.37).sin() + 0.1 * i as f64)
            .collect();
        let shifted: Vec<f64> = base.iter().map(|v| v + 123.45).collect();
        let ts_a = series_from(base);
        let ts_b = series_from(shifted);
        // First differences are identical, so sigma and thus the walks'
        // scaling agree; use the same rng stream for both ensembles.
        let ens_a = WalkEnsemble::build(&ts_a, 20, &mut substream(4, "walks"));
        let ens_b = WalkEnsemble::build(&ts_b, 20, &mut substream(4, "walks"));
        let a = ens_a.score(&ts_a.dim(0)[5..25], 0, 5).unwrap();
        let b = ens_b.score(&ts_b.dim(0)[5..25], 0, 5).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn table_entry_count_matches_start_counting() {
        let ts = series_from((0..100).map(|i| (i as f64).sin()).collect());
        let ens = WalkEnsemble::build(&ts, 3, &mut substream(5, "walks"));
        let table = structure_scores_all(&ts, &ens, &[8, 16]);
        // N - M + 1 starts per length: 93 + 85.
        assert_eq!(table.num_entries(), 178);
    }

    #[test]
    fn summed_scores_equal_per_dimension_sums() {
        let ts = TimeSeries::new(
            vec![
                (0..60).map(|i| (i as f64 * 0.5).sin()).collect(),
                (0..60).map(|i| (i as f64 * 0.9).cos() * 2.0).collect(),
            ],
            None,
        )
        .unwrap();
        let ens = WalkEnsemble::build(&ts, 8, &mut substream(6, "walks"));
        let table = structure_scores_all(&ts, &ens, &[8, 16]);
        let summed = table.summed_over_dims(16, 7).unwrap();
        let by_hand = table.get(0, 16, 7).unwrap() + table.get(1, 16, 7).unwrap();
        assert_relative_eq!(summed, by_hand, max_relative = 1e-12);
    }

    #[test]
    fn table_agrees_with_direct_scoring() {
        let ts = TimeSeries::new(
            vec![
                (0..120).map(|i| (i as f64 * 0.21).sin() * 1.5).collect(),
                (0..120).map(|i| ((i * i) as f64 * 0.001).cos()).collect(),
            ],
            None,
        )
        .unwrap();
        let ens = WalkEnsemble::build(&ts, 25, &mut substream(7, "walks"));
        let lengths = [8, 16, 32];
        let table = structure_scores_all(&ts, &ens, &lengths);
        let mut rng = substream(8, "probe");
        for _ in 0..50 {
            let d = rng.gen_range(0..2);
            let m = lengths[rng.gen_range(0..lengths.len())];
            let start = rng.gen_range(0..=120 - m);
            let direct = ens.score(&ts.dim(d)[start..start + m], d, start).unwrap();
            let tabled = table.get(d, m, start).unwrap();
            assert_relative_eq!(direct, tabled, max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn non_negative_everywhere() {
        let ts = series_from((0..200).map(|i| (i as f64 * 0.13).sin()).collect());
        let ens = WalkEnsemble::build(&ts, 10, &mut substream(9, "walks"));
        let table = structure_scores_all(&ts, &ens, &[8, 16, 32]);
        for dim in &table.scores {
            for row in dim {
                assert!(row.iter().all(|&s| s >= 0.0));
            }
        }
    }

    #[test]
    fn walk_median_below_sine_burst_median() {
        // Random-walk input should look like noise (small scores) while a
        // sine input of equal overall variance should not, trial by trial.
        use rand::Rng;
        let n = 512;
        let m = 16;
        let mut wins = 0;
        for trial in 0..20u64 {
            let mut rng = substream(100 + trial, "trial");
            let mut level = 0.0;
            let walk: Vec<f64> = (0..n)
                .map(|_| {
                    level += rng.sample::<f64, _>(StandardNormal);
                    level
                })
                .collect();
            let wvar = {
                let mu = walk.iter().sum::<f64>() / n as f64;
                walk.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64
            };
            let amp = (2.0 * wvar).sqrt();
            let sine: Vec<f64> = (0..n).map(|i| amp * (i as f64 * 0.25).sin()).collect();

            let ts_walk = series_from(walk);
            let ts_sine = series_from(sine);
            let ens_w = WalkEnsemble::build(&ts_walk, 30, &mut substream(200 + trial, "walks"));
            let ens_s = WalkEnsemble::build(&ts_sine, 30, &mut substream(200 + trial, "walks"));
            let tw = structure_scores_all(&ts_walk, &ens_w, &[m]);
            let ts_ = structure_scores_all(&ts_sine, &ens_s, &[m]);
            let median = |mut v: Vec<f64>| {
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v[v.len() / 2]
            };
            if median(tw.scores[0][0].clone()) < median(ts_.scores[0][0].clone()) {
                wins += 1;
            }
        }
        assert!(
            wins >= 18,
            "walk median beat sine median in only {wins}/20 trials"
        );
    }
}
