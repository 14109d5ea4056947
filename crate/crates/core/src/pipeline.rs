//! End-to-end extraction: binds feature construction, seeding, search,
//! and bound recovery into one call, with per-stage timings and always-on
//! structural invariant checks.

use std::time::Instant;

use serde::Serialize;

use crate::config::{validate_config, ExtractConfig, ValidatedConfig};
use crate::error::Result;
use crate::featmat::{
    blur, build_feature_matrix, sample_shapes, BlurredMatrix, FeatmatStats, FeatureMatrix,
};
use crate::refine::recover_regions;
use crate::rng::substream;
use crate::search::{candidate_sets, score_candidates, NoiseModel, ScoredSubset};
use crate::seeding::{generate_seeds, manual_seed_set, SeedSet};
use crate::series::{Region, TimeSeries};
use crate::structure::{power_of_two_lengths, structure_scores_all, WalkEnsemble};

/// Wall-clock milliseconds per pipeline stage.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StageTimings {
    /// Walk ensemble, structure scores, shape sampling, matrix build, blur.
    pub feature_matrix_ms: f64,
    /// Seed generation and per-seed dot-product traces.
    pub candidate_generation_ms: f64,
    /// Subset scoring and bound recovery.
    pub inference_ms: f64,
    pub total_ms: f64,
}

/// Everything one extraction run produces.
#[derive(Debug, Clone)]
pub struct ExtractResult {
    /// Recovered instance regions, sorted by start.
    pub regions: Vec<Region>,
    /// Shared (start, end) offsets applied within each winning window.
    pub offsets: (usize, usize),
    /// The learned model over the winning windows.
    pub subset: ScoredSubset,
    /// Seed window the winner came from.
    pub seed: usize,
    /// Best score per seed (None where nothing was scoreable).
    pub per_seed_best: Vec<(usize, Option<f64>)>,
    /// Dot-product trace of the winning seed.
    pub trace: Vec<f64>,
    pub num_feature_rows: usize,
    pub featmat_stats: FeatmatStats,
    pub warnings: Vec<String>,
    pub timings: StageTimings,
    pub config: ValidatedConfig,
    /// Populated only when requested; large.
    pub matrices: Option<(FeatureMatrix, BlurredMatrix)>,
}

/// Runs the full pipeline with generated seeds.
pub fn extract(ts: &TimeSeries, cfg: &ExtractConfig) -> Result<ExtractResult> {
    extract_full(ts, cfg, None, false)
}

/// Runs the full pipeline. `manual_seeds` bypasses seed generation (the
/// single-known-instance hook); `keep_matrices` retains the feature and
/// blurred matrices in the result for inspection dumps.
pub fn extract_full(
    ts: &TimeSeries,
    cfg: &ExtractConfig,
    manual_seeds: Option<&[usize]>,
    keep_matrices: bool,
) -> Result<ExtractResult> {
    let started = Instant::now();
    let vcfg = validate_config(ts, cfg)?;
    let mut warnings = Vec::new();

    // Stage 1: transform the series into the blurred feature matrix.
    let stage = Instant::now();
    let mut walk_rng = substream(vcfg.rng_seed, "walks");
    let ensemble = WalkEnsemble::build(ts, vcfg.num_walks, &mut walk_rng);
    let lengths = power_of_two_lengths(vcfg.m_max);
    let table = structure_scores_all(ts, &ensemble, &lengths);
    let mut shape_rng = substream(vcfg.rng_seed, "shapes");
    let shapes = sample_shapes(ts, &vcfg, &table, &mut shape_rng);
    let (fm, featmat_stats) = build_feature_matrix(ts, &shapes, &vcfg)?;
    check_retention(&fm);
    let blurred = blur(&fm, vcfg.m_min);
    check_blur_range(&blurred);
    let noise = NoiseModel::from_blurred(&blurred);
    let feature_matrix_ms = ms_since(stage);

    // Stage 2: seeds and candidate windows.
    let stage = Instant::now();
    let seeds: SeedSet = match manual_seeds {
        Some(starts) => manual_seed_set(starts, vcfg.n, vcfg.m_max)?,
        None => generate_seeds(&table, &vcfg)?,
    };
    let cands = candidate_sets(&seeds, &blurred, &vcfg);
    for set in &cands {
        check_spacing(&set.by_rank, vcfg.m_min);
    }
    let candidate_generation_ms = ms_since(stage);

    // Stage 3: subset scoring and bound recovery.
    let stage = Instant::now();
    let outcome = score_candidates(&seeds, &cands, &blurred, &noise, &vcfg)?;
    warnings.extend(outcome.warnings.iter().cloned());
    let (regions, offsets, refine_warnings) = recover_regions(
        &outcome.best,
        &noise,
        fm.num_rows(),
        vcfg.m_max,
        vcfg.n,
        (vcfg.m_min, vcfg.m_max),
    );
    warnings.extend(refine_warnings);
    check_regions_inside_windows(&regions, &outcome.best.windows, vcfg.m_max);
    let inference_ms = ms_since(stage);

    Ok(ExtractResult {
        regions,
        offsets,
        num_feature_rows: fm.num_rows(),
        featmat_stats,
        seed: outcome.seed,
        per_seed_best: outcome.per_seed_best,
        trace: outcome.winning_trace,
        subset: outcome.best,
        warnings,
        timings: StageTimings {
            feature_matrix_ms,
            candidate_generation_ms,
            inference_ms,
            total_ms: ms_since(started),
        },
        config: vcfg,
        matrices: keep_matrices.then_some((fm, blurred)),
    })
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn check_retention(fm: &FeatureMatrix) {
    for (j, row) in fm.rows.iter().enumerate() {
        let nnz = row.iter().filter(|&&b| b).count();
        assert!(nnz >= 2, "retained row {j} has {nnz} nonzeros");
        assert!(
            2 * nnz <= fm.n,
            "retained row {j} is more than half nonzeros"
        );
    }
}

fn check_blur_range(blurred: &BlurredMatrix) {
    for (j, row) in blurred.rows.iter().enumerate() {
        assert!(
            row.iter().all(|&v| (0.0..=1.0).contains(&v)),
            "blurred row {j} left the unit interval"
        );
    }
}

fn check_spacing(ranked: &[usize], m_min: usize) {
    let mut sorted = ranked.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        assert!(
            pair[1] - pair[0] >= m_min,
            "candidates {} and {} are closer than m_min = {m_min}",
            pair[0],
            pair[1]
        );
    }
}

fn check_regions_inside_windows(regions: &[Region], windows: &[usize], m_max: usize) {
    let mut windows = windows.to_vec();
    windows.sort_unstable();
    let mut regions = regions.to_vec();
    regions.sort();
    for (region, &window) in regions.iter().zip(&windows) {
        assert!(
            region.start >= window && region.end < window + m_max,
            "region {region:?} escapes its source window [{window}, {})",
            window + m_max
        );
    }
}
