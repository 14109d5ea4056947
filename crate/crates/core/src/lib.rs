//! Weakly-supervised event instance mining for multivariate time series.
//!
//! Given a series weakly labeled as containing several instances of one
//! unknown event, plus loose bounds on the instance length, this crate
//! recovers the start/end region of every instance. The pipeline:
//!
//! 1. Transform the series into a sparse binary matrix of shape-feature
//!    occurrences, then blur it in time for scaling/warping tolerance
//!    ([`featmat`]).
//! 2. Generate seed windows where the signal looks least like a random
//!    walk ([`structure`], [`seeding`]), then collect candidate windows
//!    that resemble each seed ([`search`]).
//! 3. Greedily score candidate subsets under a log-odds event-vs-noise
//!    model and trim the winning windows to exact instance bounds
//!    ([`search`], [`refine`]).
//!
//! [`eval`] ships the interval-matching metrics (IOU, precision/recall/F1)
//! and [`synth`] generates labeled planted-pattern benchmarks for
//! validating accuracy and scaling.

pub mod config;
pub mod error;
pub mod eval;
pub mod featmat;
pub mod pipeline;
pub mod refine;
pub mod rng;
pub mod search;
pub mod seeding;
pub mod series;
pub mod structure;
pub mod synth;

pub use config::{validate_config, BoundsSpec, ExtractConfig, LengthBounds, ValidatedConfig};
pub use error::{Error, Result};
pub use eval::{f1_sweep, iou, match_count, prf1, prf1_count_only, MatchReport};
pub use featmat::{blur, build_feature_matrix, sample_shapes, BlurredMatrix, FeatureMatrix};
pub use pipeline::{extract, extract_full, ExtractResult, StageTimings};
pub use refine::{max_subarray, recover_regions};
pub use search::{candidate_windows, compute_score, find_instances, NoiseModel, ScoredSubset};
pub use seeding::{generate_seeds, SeedSet};
pub use series::{Region, TimeSeries};
pub use structure::{power_of_two_lengths, structure_scores_all, ScoreTable, WalkEnsemble};
pub use synth::{generate, resample_template, template, PatternKind, SynthSpec};
