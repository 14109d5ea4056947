//! Seed windows: start indices likely to overlap an event instance, from
//! which candidate generation proceeds.

use crate::config::ValidatedConfig;
use crate::error::{Error, Result};
use crate::structure::ScoreTable;

/// Ordered, deduplicated window start indices, all within `[0, N - m_max]`.
#[derive(Debug, Clone)]
pub struct SeedSet {
    pub indices: Vec<usize>,
}

/// Start-index score: the sum over dimensions of the structure scores of
/// all power-of-two-length subsequences in `[8, m_min]` beginning there.
pub fn start_index_scores(table: &ScoreTable, m_min: usize, num_starts: usize) -> Vec<f64> {
    let mut scores = vec![0.0; num_starts];
    for (li, &m) in table.lengths.iter().enumerate() {
        if m > m_min {
            continue;
        }
        for dim in &table.scores {
            let row = &dim[li];
            for (start, score) in scores.iter_mut().enumerate() {
                if let Some(&s) = row.get(start) {
                    *score += s;
                }
            }
        }
    }
    scores
}

/// Picks the two best-scoring anchors at least `m_min` apart (greedy,
/// ties to the smaller index), then surrounds each with
/// `seeds_per_side` extra seeds on either side, spaced
/// `floor(m_max / seeds_per_side)` apart, clipped and deduplicated.
pub fn generate_seeds(table: &ScoreTable, cfg: &ValidatedConfig) -> Result<SeedSet> {
    if cfg.n <= cfg.m_max {
        return Err(Error::config(format!(
            "no valid window: series length {} leaves no room for sliding windows of length {}",
            cfg.n, cfg.m_max
        )));
    }
    let last_start = cfg.n - cfg.m_max;
    let scores = start_index_scores(table, cfg.m_min, last_start + 1);

    let argmax = |allowed: &dyn Fn(usize) -> bool| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (t, &s) in scores.iter().enumerate() {
            if !allowed(t) {
                continue;
            }
            match best {
                Some((_, bs)) if s <= bs => {}
                _ => best = Some((t, s)),
            }
        }
        best.map(|(t, _)| t)
    };

    let first = argmax(&|_| true).expect("score vector is nonempty");
    let mut anchors = vec![first];
    if let Some(second) = argmax(&|t| t.abs_diff(first) >= cfg.m_min) {
        anchors.push(second);
    }

    let spacing = (cfg.m_max / cfg.seeds_per_side).max(1);
    let mut indices = Vec::new();
    for &a in &anchors {
        indices.push(a);
        for k in 1..=cfg.seeds_per_side {
            indices.push(a.saturating_sub(k * spacing));
            indices.push((a + k * spacing).min(last_start));
        }
    }
    indices.sort_unstable();
    indices.dedup();
    Ok(SeedSet { indices })
}

/// Builds a seed set from user-supplied indices, bypassing generation;
/// the hook for a single known instance start.
pub fn manual_seed_set(starts: &[usize], n: usize, m_max: usize) -> Result<SeedSet> {
    if n <= m_max {
        return Err(Error::config(format!(
            "no valid window: series length {n} leaves no room for sliding windows of length {m_max}"
        )));
    }
    if starts.is_empty() {
        return Err(Error::config("manual seed list is empty"));
    }
    let last_start = n - m_max;
    let mut indices: Vec<usize> = starts.iter().map(|&s| s.min(last_start)).collect();
    indices.sort_unstable();
    indices.dedup();
    Ok(SeedSet { indices })
}
