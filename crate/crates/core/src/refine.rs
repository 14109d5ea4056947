//! Refines winning windows into exact instance regions by trimming the
//! columns that are no more similar across windows than chance.

use crate::search::{NoiseModel, ScoredSubset};
use crate::series::Region;

/// The learned feature weights reshaped to window shape, plus per-column
/// scores with the chance level already subtracted.
#[derive(Debug, Clone)]
pub struct WeightImage {
    /// Row-major `J x m_max` weights of the winning subset.
    pub v: Vec<f64>,
    /// Column sums minus the chance level `J * E^(|I| - 1)`.
    pub column_scores: Vec<f64>,
}

impl WeightImage {
    pub fn new(subset: &ScoredSubset, noise: &NoiseModel, num_rows: usize, m_max: usize) -> Self {
        debug_assert_eq!(subset.weights.len(), num_rows * m_max);
        let chance = num_rows as f64 * noise.mean_value.powi(subset.windows.len() as i32 - 1);
        let column_scores = (0..m_max)
            .map(|col| {
                let mut sum = 0.0;
                for j in 0..num_rows {
                    sum += subset.weights[j * m_max + col];
                }
                sum - chance
            })
            .collect();
        WeightImage {
            v: subset.weights.clone(),
            column_scores,
        }
    }
}

/// Contiguous interval with the maximum sum, as inclusive offsets.
///
/// Ties break to the shortest interval, then to the leftmost. An
/// all-negative input returns the single best element, so the result is
/// never empty.
pub fn max_subarray(xs: &[f64]) -> (usize, usize) {
    assert!(!xs.is_empty(), "max_subarray needs a nonempty vector");
    let mut best_sum = f64::NEG_INFINITY;
    let mut best = (0usize, 0usize);
    let mut cur_sum = 0.0;
    let mut cur_start = 0usize;
    for (i, &x) in xs.iter().enumerate() {
        // Dropping a non-positive prefix never hurts the sum and always
        // shortens the interval.
        if i == 0 || cur_sum <= 0.0 {
            cur_start = i;
            cur_sum = x;
        } else {
            cur_sum += x;
        }
        let len = i - cur_start;
        let best_len = best.1 - best.0;
        if cur_sum > best_sum
            || (cur_sum == best_sum && (len < best_len || (len == best_len && cur_start < best.0)))
        {
            best_sum = cur_sum;
            best = (cur_start, i);
        }
    }
    best
}

/// Trims every winning window by one shared offset pair, computed from
/// the weight image, and returns the resulting regions.
///
/// The offsets are not guaranteed optimal; lengths falling outside the
/// configured bounds are still reported, with a warning.
pub fn recover_regions(
    subset: &ScoredSubset,
    noise: &NoiseModel,
    num_rows: usize,
    m_max: usize,
    n: usize,
    length_bounds: (usize, usize),
) -> (Vec<Region>, (usize, usize), Vec<String>) {
    let image = WeightImage::new(subset, noise, num_rows, m_max);
    let (start_off, end_off) = max_subarray(&image.column_scores);

    let mut regions: Vec<Region> = subset
        .windows
        .iter()
        .map(|&w| Region::new(w + start_off, (w + end_off).min(n - 1)))
        .collect();
    regions.sort();

    let mut warnings = Vec::new();
    let len = end_off - start_off + 1;
    let (m_min, m_max_bound) = length_bounds;
    if len < m_min || len > m_max_bound {
        warnings.push(format!(
            "recovered instance length {len} falls outside the configured bounds \
             [{m_min}, {m_max_bound}]; offsets are reported as-is"
        ));
    }
    (regions, (start_off, end_off), warnings)
}
