//! The sparse binary shape-feature matrix and its blurred counterpart.
//!
//! Each row marks where the series locally resembles one sampled shape;
//! blurring spreads each mark over an interval so that uniform scaling
//! and mild time warping still line features up across instances.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ValidatedConfig;
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::structure::{power_of_two_lengths, ScoreTable};

/// One sampled shape: a short subsequence used as a feature template.
#[derive(Debug, Clone)]
pub struct Shape {
    pub dim: usize,
    pub length: usize,
    /// Start index the shape was lifted from.
    pub origin: usize,
    pub values: Vec<f64>,
    /// Population variance of `values`; always > 0 for sampled shapes.
    pub variance: f64,
}

/// J binary rows over the N time steps, one per retained shape.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub rows: Vec<Vec<bool>>,
    pub shapes: Vec<Shape>,
    pub n: usize,
}

impl FeatureMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Fraction of zero entries over the whole matrix.
    pub fn sparsity(&self) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        let nnz: usize = self
            .rows
            .iter()
            .map(|r| r.iter().filter(|&&b| b).count())
            .sum();
        1.0 - nnz as f64 / (self.rows.len() * self.n) as f64
    }
}

/// Real-valued counterpart of [`FeatureMatrix`] after Hamming blurring
/// and local-peak normalization; entries lie in [0, 1].
#[derive(Debug, Clone)]
pub struct BlurredMatrix {
    pub rows: Vec<Vec<f64>>,
    /// Grand mean over all J x N entries.
    pub mean_value: f64,
    pub n: usize,
}

/// Row-construction bookkeeping for diagnostics.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct FeatmatStats {
    pub candidate_shapes: usize,
    pub retained_rows: usize,
    /// Rows whose shape matched nothing beyond its own footprint.
    pub dropped_never_matched: usize,
    /// Rows that were more than half nonzeros.
    pub dropped_dense: usize,
    pub skipped_zero_variance: usize,
}

/// Samples `ceil(log2(N))` shapes per (dimension, length) pair, without
/// replacement, with probability proportional to structure score.
///
/// Zero-variance subsequences are never sampled (their rows would be
/// degenerate); a (dimension, length) whose scores carry no mass falls
/// back to uniform sampling over the remaining positions.
pub fn sample_shapes<R: Rng>(
    ts: &TimeSeries,
    cfg: &ValidatedConfig,
    table: &ScoreTable,
    rng: &mut R,
) -> Vec<Shape> {
    let n = ts.len();
    let per_pair = (n as f64).log2().ceil() as usize;
    let lengths = power_of_two_lengths(cfg.m_max);
    let mut shapes = Vec::new();

    for (d, dim) in ts.dims().enumerate() {
        // Prefix sums for O(1) per-position variance.
        let mut sum1 = vec![0.0; n + 1];
        let mut sum2 = vec![0.0; n + 1];
        for i in 0..n {
            sum1[i + 1] = sum1[i] + dim[i];
            sum2[i + 1] = sum2[i] + dim[i] * dim[i];
        }
        let variance_at = |start: usize, m: usize| -> f64 {
            let s1 = sum1[start + m] - sum1[start];
            let s2 = sum2[start + m] - sum2[start];
            ((s2 - s1 * s1 / m as f64) / m as f64).max(0.0)
        };

        for &m in &lengths {
            if m > n {
                continue;
            }
            let starts = n - m + 1;
            let mut weights: Vec<f64> = (0..starts)
                .map(|s| {
                    if variance_at(s, m) > 0.0 {
                        table.get(d, m, s).unwrap_or(0.0).max(0.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            let mut total: f64 = weights.iter().sum();
            if total <= 0.0 {
                // Degenerate scores: uniform over positions that still
                // have variance.
                for (s, w) in weights.iter_mut().enumerate() {
                    *w = if variance_at(s, m) > 0.0 { 1.0 } else { 0.0 };
                }
                total = weights.iter().sum();
            }
            if total <= 0.0 {
                continue;
            }

            let mut remaining = total;
            for _ in 0..per_pair {
                if remaining <= 0.0 {
                    break;
                }
                let mut target = rng.gen::<f64>() * remaining;
                let mut picked = None;
                for (s, &w) in weights.iter().enumerate() {
                    if w <= 0.0 {
                        continue;
                    }
                    target -= w;
                    if target < 0.0 {
                        picked = Some(s);
                        break;
                    }
                }
                // Guard against accumulated rounding at the tail.
                let Some(s) = picked.or_else(|| weights.iter().rposition(|&w| w > 0.0)) else {
                    break;
                };
                remaining -= weights[s];
                weights[s] = 0.0;
                shapes.push(Shape {
                    dim: d,
                    length: m,
                    origin: s,
                    values: dim[s..s + m].to_vec(),
                    variance: variance_at(s, m),
                });
            }
        }
    }
    shapes
}

/// Mean-normalized squared distance between a shape and an equal-length
/// subsequence, divided by the shape length and the shape variance.
///
/// Identical inputs give 0; an all-zero subsequence against any shape
/// gives exactly 1, which is why match thresholds must sit below 1.
pub fn shape_distance(shape_values: &[f64], shape_variance: f64, sub: &[f64]) -> f64 {
    debug_assert_eq!(shape_values.len(), sub.len());
    debug_assert!(shape_variance > 0.0);
    let m = shape_values.len() as f64;
    let mu_s = shape_values.iter().sum::<f64>() / m;
    let mu_x = sub.iter().sum::<f64>() / m;
    let mut acc = 0.0;
    for (s, x) in shape_values.iter().zip(sub) {
        let d = (s - mu_s) - (x - mu_x);
        acc += d * d;
    }
    acc / (m * shape_variance)
}

/// Builds the binary feature matrix: row j has a 1 at position t iff the
/// shape's distance to the subsequence centered at t is strictly below
/// the threshold.
///
/// The subsequence for center t spans `t - floor(M/2) ..`, and centers
/// whose window would overrun the series get no comparison. Rows whose
/// only matches lie inside the shape's own footprint (within M of its
/// origin center, where shifted copies of the shape trivially match), or
/// that are more than half nonzeros, are dropped. Zero rows surviving
/// means the search cannot proceed and is reported as an error.
pub fn build_feature_matrix(
    ts: &TimeSeries,
    shapes: &[Shape],
    cfg: &ValidatedConfig,
) -> Result<(FeatureMatrix, FeatmatStats)> {
    let n = ts.len();
    if shapes.is_empty() {
        return Err(Error::no_repeating_structure(
            "no candidate shapes could be sampled; the series is constant or the \
             maximum instance length leaves no shape lengths of 8 or more",
        ));
    }
    let mut stats = FeatmatStats {
        candidate_shapes: shapes.len(),
        ..FeatmatStats::default()
    };

    // Per-dimension prefix sums for window means.
    let prefix: Vec<Vec<f64>> = ts
        .dims()
        .map(|dim| {
            let mut p = vec![0.0; n + 1];
            for i in 0..n {
                p[i + 1] = p[i] + dim[i];
            }
            p
        })
        .collect();

    let built: Vec<Option<Vec<bool>>> = shapes
        .par_iter()
        .map(|shape| {
            if shape.variance <= 0.0 {
                return None;
            }
            Some(build_row(
                ts.dim(shape.dim),
                &prefix[shape.dim],
                shape,
                cfg.distance_threshold,
            ))
        })
        .collect();

    let mut rows = Vec::new();
    let mut kept_shapes = Vec::new();
    for (shape, row) in shapes.iter().zip(built) {
        let Some(row) = row else {
            stats.skipped_zero_variance += 1;
            continue;
        };
        let nnz = row.iter().filter(|&&b| b).count();
        let center = shape.origin + shape.length / 2;
        let matched_elsewhere = row
            .iter()
            .enumerate()
            .any(|(t, &on)| on && t.abs_diff(center) >= shape.length);
        if nnz < 2 || !matched_elsewhere {
            stats.dropped_never_matched += 1;
        } else if 2 * nnz > n {
            stats.dropped_dense += 1;
        } else {
            rows.push(row);
            kept_shapes.push(shape.clone());
        }
    }
    stats.retained_rows = rows.len();

    if rows.is_empty() {
        return Err(Error::no_repeating_structure(format!(
            "all {} candidate shapes were dropped ({} never matched, {} too dense, {} zero variance); \
             nothing in the series repeats at distance threshold {}",
            stats.candidate_shapes,
            stats.dropped_never_matched,
            stats.dropped_dense,
            stats.skipped_zero_variance,
            cfg.distance_threshold
        )));
    }

    Ok((
        FeatureMatrix {
            rows,
            shapes: kept_shapes,
            n,
        },
        stats,
    ))
}

fn build_row(dim: &[f64], prefix: &[f64], shape: &Shape, threshold: f64) -> Vec<bool> {
    let n = dim.len();
    let m = shape.length;
    let mf = m as f64;
    let centered: Vec<f64> = {
        let mu = shape.values.iter().sum::<f64>() / mf;
        shape.values.iter().map(|v| v - mu).collect()
    };
    // distance < threshold  <=>  sum((s - mu_s) - (x - mu_x))^2 < limit
    let limit = threshold * mf * shape.variance;

    let half = m / 2;
    let mut row = vec![false; n];
    for (t, out) in row.iter_mut().enumerate().skip(half) {
        let start = t - half;
        if start + m > n {
            break;
        }
        let mu_x = (prefix[start + m] - prefix[start]) / mf;
        let window = &dim[start..start + m];
        let mut acc = 0.0;
        // Terms are squares, so partial sums only grow; abandon as soon
        // as the limit is reached.
        for (s, x) in centered.iter().zip(window) {
            let d = s - (x - mu_x);
            acc += d * d;
            if acc >= limit {
                break;
            }
        }
        *out = acc < limit;
    }
    row
}

/// Symmetric Hamming window of the given length, peak-normalized form.
pub fn hamming_window(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len)
        .map(|k| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * k as f64 / (len - 1) as f64).cos())
        .collect()
}

/// Blurs each row with a Hamming window of length `m_min` (zero-padded at
/// the edges), then divides each entry by the largest value within
/// `floor(m_min / 2)` time steps of it in its row, so local peaks equal 1.
pub fn blur(fm: &FeatureMatrix, m_min: usize) -> BlurredMatrix {
    let n = fm.n;
    let window = hamming_window(m_min);
    let offset = m_min / 2;
    let radius = m_min / 2;

    let rows: Vec<Vec<f64>> = fm
        .rows
        .par_iter()
        .map(|row| {
            let mut conv = vec![0.0; n];
            for (t, &on) in row.iter().enumerate() {
                if !on {
                    continue;
                }
                for (k, &w) in window.iter().enumerate() {
                    let pos = t as isize + k as isize - offset as isize;
                    if pos >= 0 && (pos as usize) < n {
                        conv[pos as usize] += w;
                    }
                }
            }
            let local_max = sliding_local_max(&conv, radius);
            conv.iter()
                .zip(&local_max)
                .map(|(&v, &mx)| if mx > 0.0 { v / mx } else { 0.0 })
                .collect()
        })
        .collect();

    let total: f64 = rows.iter().map(|r| r.iter().sum::<f64>()).sum();
    let cells = (rows.len() * n) as f64;
    BlurredMatrix {
        rows,
        mean_value: if cells > 0.0 { total / cells } else { 0.0 },
        n,
    }
}

/// Maximum over a centered window of the given radius, per position.
fn sliding_local_max(xs: &[f64], radius: usize) -> Vec<f64> {
    let n = xs.len();
    let mut out = vec![0.0; n];
    // Monotonic deque of indices whose values decrease.
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut hi = 0;
    for (t, slot) in out.iter_mut().enumerate() {
        let end = (t + radius).min(n - 1);
        while hi <= end {
            while let Some(&back) = deque.back() {
                if xs[back] <= xs[hi] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(hi);
            hi += 1;
        }
        let lo = t.saturating_sub(radius);
        while let Some(&front) = deque.front() {
            if front < lo {
                deque.pop_front();
            } else {
                break;
            }
        }
        *slot = xs[*deque.front().expect("window is never empty")];
    }
    out
}
