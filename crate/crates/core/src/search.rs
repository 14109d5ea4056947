//! The optimizer: candidates by blurred dot product against each seed,
//! then greedy subset scoring under a log-odds event-vs-noise model.
//!
//! Windows are the `J x m_max` slices of the (blurred) feature matrix at
//! each sliding position, treated as flat feature vectors of length
//! `J * m_max`. A subset of windows is scored by how much better an
//! event model explains its feature counts than either the noise model
//! or a rival event exemplified by the best excluded candidate.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::config::ValidatedConfig;
use crate::error::{Error, Result};
use crate::featmat::BlurredMatrix;
use crate::seeding::SeedSet;

/// Per-feature-row probabilities under the noise model.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    /// Empirical firing probability of each feature row over the whole
    /// series (blurred row means), floored away from zero so log odds
    /// stay finite.
    pub theta0: Vec<f64>,
    /// Grand mean of the blurred matrix.
    pub mean_value: f64,
}

impl NoiseModel {
    pub fn from_blurred(blurred: &BlurredMatrix) -> Self {
        let n = blurred.n as f64;
        let floor = 1.0 / (2.0 * n);
        let theta0 = blurred
            .rows
            .iter()
            .map(|row| (row.iter().sum::<f64>() / n).max(floor))
            .collect();
        NoiseModel {
            theta0,
            mean_value: blurred.mean_value,
        }
    }
}

/// Candidate windows for one seed, sorted by descending dot product.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    /// Window starts, best dot product first.
    pub by_rank: Vec<usize>,
    /// Dot product of the seed's blurred window with every window.
    pub trace: Vec<f64>,
    /// The trace had no local maxima, so the seed alone was kept.
    pub constant_trace: bool,
}

/// A scored set of windows plus the model learned from it.
#[derive(Debug, Clone)]
pub struct ScoredSubset {
    /// Window starts in rank order.
    pub windows: Vec<usize>,
    pub score: f64,
    /// Event-model probability per flat feature (row-major `J x m_max`).
    pub theta1: Vec<f64>,
    /// Log-odds weights; zero exactly for features outside the selection.
    pub weights: Vec<f64>,
    /// Flat indices of the selected features.
    pub selected: Vec<usize>,
}

/// Outcome of the search over all seeds.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: ScoredSubset,
    /// Seed window the winning subset came from.
    pub seed: usize,
    /// Best score per seed, in seed order; None when a seed produced no
    /// scoreable subset.
    pub per_seed_best: Vec<(usize, Option<f64>)>,
    /// Dot-product trace of the winning seed.
    pub winning_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Strict local maxima of a trace; the leftmost index of a plateau counts
/// as the maximum. A constant trace has none.
pub fn local_maxima(trace: &[f64]) -> Vec<usize> {
    let n = trace.len();
    let mut maxima = Vec::new();
    let mut run_start = 0;
    for i in 1..=n {
        if i < n && trace[i] == trace[run_start] {
            continue;
        }
        // Run of equal values is [run_start, i).
        let whole_trace = run_start == 0 && i == n;
        let left_lower = run_start == 0 || trace[run_start - 1] < trace[run_start];
        let right_lower = i == n || trace[i] < trace[run_start];
        if !whole_trace && left_lower && right_lower {
            maxima.push(run_start);
        }
        run_start = i;
    }
    maxima
}

/// Keeps only the best maximum in any interval of width `m_min`:
/// processed in descending trace order, a maximum survives iff every
/// already-kept one is at least `m_min` away. Result is in rank order.
pub fn enforce_min_spacing(mut maxima: Vec<usize>, trace: &[f64], m_min: usize) -> Vec<usize> {
    maxima.sort_by(|&a, &b| {
        trace[b]
            .partial_cmp(&trace[a])
            .expect("trace values are finite")
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for idx in maxima {
        if kept.iter().all(|&k| k.abs_diff(idx) >= m_min) {
            kept.push(idx);
        }
    }
    kept
}

/// Shared machinery for computing seed traces: row spectra are built once
/// and reused by every seed, so each trace costs one slice FFT per active
/// row plus a single inverse transform, independent of the window width.
struct TraceEngine<'a> {
    blurred: &'a BlurredMatrix,
    m_max: usize,
    num_windows: usize,
    padded_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// FFT of each blurred row; None for all-zero rows.
    row_spectra: Vec<Option<Vec<Complex<f64>>>>,
}

impl<'a> TraceEngine<'a> {
    fn new(blurred: &'a BlurredMatrix, m_max: usize) -> Self {
        let n = blurred.n;
        let padded_len = (n + m_max).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(padded_len);
        let inverse = planner.plan_fft_inverse(padded_len);
        let row_spectra = blurred
            .rows
            .iter()
            .map(|row| {
                if row.iter().all(|&v| v == 0.0) {
                    return None;
                }
                let mut buf = vec![Complex::new(0.0, 0.0); padded_len];
                for (b, &v) in buf.iter_mut().zip(row) {
                    b.re = v;
                }
                forward.process(&mut buf);
                Some(buf)
            })
            .collect();
        TraceEngine {
            blurred,
            m_max,
            num_windows: n - m_max + 1,
            padded_len,
            forward,
            inverse,
            row_spectra,
        }
    }

    /// Dot product of the seed's blurred window with every window:
    /// cross-correlations accumulated in the frequency domain, one
    /// inverse transform for the sum over rows.
    fn trace(&self, seed: usize) -> Vec<f64> {
        let m = self.m_max;
        let mut acc = vec![Complex::new(0.0, 0.0); self.padded_len];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.padded_len];
        let mut any = false;
        for (row, spectrum) in self.blurred.rows.iter().zip(&self.row_spectra) {
            let Some(spectrum) = spectrum else { continue };
            let slice = &row[seed..seed + m];
            if slice.iter().all(|&v| v == 0.0) {
                continue;
            }
            any = true;
            for s in scratch.iter_mut() {
                *s = Complex::new(0.0, 0.0);
            }
            for (u, &v) in slice.iter().enumerate() {
                scratch[m - 1 - u].re = v;
            }
            self.forward.process(&mut scratch);
            for (a, (s, r)) in acc.iter_mut().zip(scratch.iter().zip(spectrum)) {
                *a += s * r;
            }
        }
        if !any {
            return vec![0.0; self.num_windows];
        }
        self.inverse.process(&mut acc);
        let scale = 1.0 / self.padded_len as f64;
        let mut trace: Vec<f64> = (0..self.num_windows)
            .map(|i| acc[i + m - 1].re * scale)
            .collect();
        // Transform noise turns exact zeros into ~1e-13 ripple; flush it
        // so zero stretches stay flat.
        let peak = trace.iter().fold(0.0f64, |p, &v| p.max(v.abs()));
        let floor = peak * 1e-12;
        for v in trace.iter_mut() {
            if v.abs() <= floor {
                *v = 0.0;
            }
        }
        trace
    }
}

fn candidates_from_trace(seed: usize, trace: Vec<f64>, m_min: usize) -> CandidateSet {
    let maxima = local_maxima(&trace);
    if maxima.is_empty() {
        return CandidateSet {
            by_rank: vec![seed],
            trace,
            constant_trace: true,
        };
    }
    let by_rank = enforce_min_spacing(maxima, &trace, m_min);
    CandidateSet {
        by_rank,
        trace,
        constant_trace: false,
    }
}

/// Generates the candidate set for one seed window.
pub fn candidate_windows(
    seed: usize,
    blurred: &BlurredMatrix,
    m_min: usize,
    m_max: usize,
) -> CandidateSet {
    let engine = TraceEngine::new(blurred, m_max);
    debug_assert!(seed < engine.num_windows, "seed {seed} out of window range");
    candidates_from_trace(seed, engine.trace(seed), m_min)
}

/// Running blurred feature mass over a growing window subset.
///
/// Feature counts are read from the blurred windows, the same data the
/// event probabilities come from; exact binary counts punish the very
/// scaling and warping the blur exists to absorb.
struct ScoreAccum<'a> {
    blurred: &'a BlurredMatrix,
    m_max: usize,
    blurred_counts: Vec<f64>,
    k: usize,
}

impl<'a> ScoreAccum<'a> {
    fn new(blurred: &'a BlurredMatrix, m_max: usize) -> Self {
        let len = blurred.rows.len() * m_max;
        ScoreAccum {
            blurred,
            m_max,
            blurred_counts: vec![0.0; len],
            k: 0,
        }
    }

    fn push(&mut self, window: usize) {
        let m = self.m_max;
        for (j, brow) in self.blurred.rows.iter().enumerate() {
            let base = j * m;
            for (u, &v) in brow[window..window + m].iter().enumerate() {
                self.blurred_counts[base + u] += v;
            }
        }
        self.k += 1;
    }

    /// Score of the current subset against the best excluded candidate
    /// (`None` stands for the all-zero pseudo-window).
    fn evaluate(&self, next: Option<usize>, noise: &NoiseModel) -> f64 {
        let kf = self.k as f64;
        let m = self.m_max;
        let mut odds_event = 0.0;
        let mut weight_sum = 0.0;
        let mut odds_next_unit = 0.0;
        let mut any_selected = false;

        for (j, brow) in self.blurred.rows.iter().enumerate() {
            let ln_theta0 = noise.theta0[j].ln();
            let base = j * m;
            for u in 0..m {
                let theta1 = self.blurred_counts[base + u] / kf;
                if theta1 <= 0.5 {
                    continue;
                }
                let delta = theta1.ln() - ln_theta0;
                if delta <= 0.0 {
                    continue;
                }
                any_selected = true;
                odds_event += delta * self.blurred_counts[base + u];
                weight_sum += delta;
                if let Some(nx) = next {
                    odds_next_unit += delta * brow[nx + u];
                }
            }
        }

        if !any_selected {
            return f64::NEG_INFINITY;
        }
        let odds_noise = weight_sum * noise.mean_value * kf;
        let odds_next = odds_next_unit * kf;
        odds_event - odds_noise.max(odds_next)
    }

    /// Like [`evaluate`], but also captures the learned model.
    fn materialize(
        &self,
        next: Option<usize>,
        noise: &NoiseModel,
        windows: Vec<usize>,
    ) -> ScoredSubset {
        let kf = self.k as f64;
        let m = self.m_max;
        let len = self.blurred_counts.len();
        let mut theta1 = vec![0.0; len];
        let mut weights = vec![0.0; len];
        let mut selected = Vec::new();
        let mut odds_event = 0.0;
        let mut weight_sum = 0.0;
        let mut odds_next_unit = 0.0;

        for (j, brow) in self.blurred.rows.iter().enumerate() {
            let ln_theta0 = noise.theta0[j].ln();
            let base = j * m;
            for u in 0..m {
                let f = base + u;
                let t1 = self.blurred_counts[f] / kf;
                theta1[f] = t1;
                if t1 <= 0.5 {
                    continue;
                }
                let delta = t1.ln() - ln_theta0;
                if delta <= 0.0 {
                    continue;
                }
                weights[f] = delta;
                selected.push(f);
                odds_event += delta * self.blurred_counts[f];
                weight_sum += delta;
                if let Some(nx) = next {
                    odds_next_unit += delta * brow[nx + u];
                }
            }
        }

        let score = if selected.is_empty() {
            f64::NEG_INFINITY
        } else {
            let odds_noise = weight_sum * noise.mean_value * kf;
            odds_event - odds_noise.max(odds_next_unit * kf)
        };
        ScoredSubset {
            windows,
            score,
            theta1,
            weights,
            selected,
        }
    }
}

/// Scores one window subset against the best excluded candidate.
///
/// `next = None` stands for the all-zero pseudo-window used once every
/// candidate is in the subset, which zeroes the rival term and lets the
/// noise term dominate.
pub fn compute_score(
    subset: &[usize],
    next: Option<usize>,
    blurred: &BlurredMatrix,
    noise: &NoiseModel,
    m_max: usize,
) -> ScoredSubset {
    assert!(
        subset.len() >= 2,
        "subsets of fewer than 2 windows are not scoreable"
    );
    let mut accum = ScoreAccum::new(blurred, m_max);
    for &w in subset {
        accum.push(w);
    }
    accum.materialize(next, noise, subset.to_vec())
}

/// Generates candidate sets for every seed. Seeds are independent, so
/// this runs in parallel; output order follows seed order.
pub fn candidate_sets(
    seeds: &SeedSet,
    blurred: &BlurredMatrix,
    cfg: &ValidatedConfig,
) -> Vec<CandidateSet> {
    let engine = TraceEngine::new(blurred, cfg.m_max);
    seeds
        .indices
        .par_iter()
        .map(|&s| candidates_from_trace(s, engine.trace(s), cfg.m_min))
        .collect()
}

/// Greedy search over ranked candidate prefixes for every seed; returns
/// the globally best-scoring subset. Ties go to the earlier seed and the
/// smaller prefix.
pub fn score_candidates(
    seeds: &SeedSet,
    cand_sets: &[CandidateSet],
    blurred: &BlurredMatrix,
    noise: &NoiseModel,
    cfg: &ValidatedConfig,
) -> Result<SearchOutcome> {
    let per_seed: Vec<(f64, usize)> = cand_sets
        .par_iter()
        .map(|cands| {
            let ranked = &cands.by_rank;
            if ranked.len() < 2 {
                return (f64::NEG_INFINITY, 0);
            }
            let mut accum = ScoreAccum::new(blurred, cfg.m_max);
            accum.push(ranked[0]);
            let mut best = (f64::NEG_INFINITY, 0usize);
            for k in 2..=ranked.len() {
                accum.push(ranked[k - 1]);
                let next = ranked.get(k).copied();
                let score = accum.evaluate(next, noise);
                if score > best.0 {
                    best = (score, k);
                }
            }
            best
        })
        .collect();

    let mut winner: Option<(usize, f64, usize)> = None;
    for (si, &(score, k)) in per_seed.iter().enumerate() {
        if score == f64::NEG_INFINITY {
            continue;
        }
        match winner {
            Some((_, best_score, _)) if score <= best_score => {}
            _ => winner = Some((si, score, k)),
        }
    }
    let Some((si, best_score, best_k)) = winner else {
        return Err(Error::no_event_found(
            "every candidate subset had an empty feature set; no window set is better \
             explained by an event model than by noise",
        ));
    };

    let cands = &cand_sets[si];
    let subset = &cands.by_rank[..best_k];
    let next = cands.by_rank.get(best_k).copied();
    let best = compute_score(subset, next, blurred, noise, cfg.m_max);
    debug_assert!(
        (best.score - best_score).abs() <= 1e-9 * best_score.abs().max(1.0),
        "materialized score {} drifted from streamed score {best_score}",
        best.score
    );

    let mut warnings = Vec::new();
    for (cands, &seed) in cand_sets.iter().zip(&seeds.indices) {
        if cands.constant_trace {
            warnings.push(format!(
                "seed {seed}: dot-product trace is constant, kept the seed alone"
            ));
        }
    }

    Ok(SearchOutcome {
        best,
        seed: seeds.indices[si],
        per_seed_best: seeds
            .indices
            .iter()
            .zip(&per_seed)
            .map(|(&s, &(score, _))| (s, (score > f64::NEG_INFINITY).then_some(score)))
            .collect(),
        winning_trace: cand_sets[si].trace.clone(),
        warnings,
    })
}

/// Full search: candidates for every seed, then greedy subset scoring.
pub fn find_instances(
    seeds: &SeedSet,
    blurred: &BlurredMatrix,
    noise: &NoiseModel,
    cfg: &ValidatedConfig,
) -> Result<SearchOutcome> {
    let cand_sets = candidate_sets(seeds, blurred, cfg);
    score_candidates(seeds, &cand_sets, blurred, noise, cfg)
}
