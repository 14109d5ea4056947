//! Command-line front end: extraction, evaluation, synthesis, and
//! benchmarking as reproducible runs.

mod bench;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use evmine::{
    extract_full, f1_sweep, prf1_count_only, BoundsSpec, Error, ExtractConfig, LengthBounds,
    PatternKind, SynthSpec,
};

use crate::io::{
    read_regions_csv, read_series_csv, sha256_hex, write_json, write_regions_csv, write_series_csv,
    ConfigEcho, Diagnostics, EvalReport, OffsetPair, RegionsOutput, ResultSummary, RunManifest,
    SeedScore, WeightSummary,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_NO_EVENT: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Extract,
    Eval,
    Synth,
    Bench,
}

#[derive(Debug, Parser)]
#[command(
    name = "evmine",
    version,
    about = "Mines every instance of an unknown repeating event from a weakly labeled time series"
)]
struct Args {
    /// What to run.
    #[arg(long, value_enum, env = "EVMINE_MODE", default_value = "extract")]
    mode: Mode,

    /// Input series CSV (rows = time steps, columns = dimensions,
    /// optional header), for extract.
    #[arg(long, env = "EVMINE_INPUT")]
    input: Option<PathBuf>,

    /// Output path: regions.json for extract, report.json for eval,
    /// CSV table for bench.
    #[arg(long, short = 'o', env = "EVMINE_OUTPUT")]
    output: Option<PathBuf>,

    /// Absolute minimum instance length in samples.
    #[arg(long, env = "EVMINE_MMIN")]
    mmin: Option<usize>,

    /// Absolute maximum instance length in samples.
    #[arg(long, env = "EVMINE_MMAX")]
    mmax: Option<usize>,

    /// Minimum instance length as a fraction of the series length.
    #[arg(long, env = "EVMINE_MIN_FRAC")]
    min_frac: Option<f64>,

    /// Maximum instance length as a fraction of the series length.
    #[arg(long, env = "EVMINE_MAX_FRAC")]
    max_frac: Option<f64>,

    /// Master RNG seed; every stage draws from named substreams of it.
    #[arg(long, env = "EVMINE_SEED", default_value_t = 0)]
    seed: u64,

    /// Shape-match distance threshold in (0, 1).
    #[arg(long, env = "EVMINE_DISTANCE_THRESHOLD", default_value_t = 0.25)]
    distance_threshold: f64,

    #[arg(long, env = "EVMINE_NUM_WALKS", default_value_t = 100)]
    num_walks: usize,

    #[arg(long, env = "EVMINE_SEEDS_PER_SIDE", default_value_t = 10)]
    seeds_per_side: usize,

    /// Comma-separated window start indices; bypasses seed generation.
    #[arg(long, env = "EVMINE_MANUAL_SEEDS", value_delimiter = ',')]
    manual_seeds: Option<Vec<usize>>,

    /// Dump the feature matrix and its blurred counterpart as dense CSVs
    /// next to the output.
    #[arg(long)]
    dump_featmat: bool,

    /// Write per-seed scores and the winning dot-product trace here.
    #[arg(long)]
    diagnostics: Option<PathBuf>,

    /// Write the run manifest (config echo, input digest, timings) here;
    /// defaults to `<output stem>_manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,

    /// Extraction output to evaluate (JSON with a `regions` array).
    #[arg(long)]
    regions: Option<PathBuf>,

    /// Ground-truth CSV with header `start,end`.
    #[arg(long)]
    truth: Option<PathBuf>,

    /// Comma-separated IOU thresholds for eval.
    #[arg(long, env = "EVMINE_TAU", value_delimiter = ',')]
    tau: Option<Vec<f64>>,

    /// Count-only scoring: the first k returned regions count as correct.
    #[arg(long)]
    count_only: bool,

    /// Output prefix for synth (writes `<prefix>.csv`, `<prefix>_truth.csv`,
    /// `<prefix>_manifest.json`).
    #[arg(long)]
    out_prefix: Option<PathBuf>,

    #[arg(long, default_value_t = 1000)]
    n: usize,

    #[arg(long, default_value_t = 1)]
    d: usize,

    #[arg(long, default_value_t = 5)]
    instances: usize,

    #[arg(long, value_enum, default_value = "sine-burst")]
    pattern: Pattern,

    #[arg(long, default_value_t = 60)]
    base_length: usize,

    #[arg(long, default_value_t = 0.2)]
    jitter: f64,

    #[arg(long, default_value_t = 3.0)]
    snr: f64,

    /// Comma-separated dimensions the pattern is written into.
    #[arg(long, value_delimiter = ',')]
    relevant_dims: Option<Vec<usize>>,

    /// Splice the pattern over the walk instead of adding to it.
    #[arg(long)]
    splice: bool,

    /// Single-column CSV of exemplar values to plant instead of a
    /// built-in pattern (rescaled in time to each instance length).
    #[arg(long)]
    template_csv: Option<PathBuf>,

    /// Number of series to synthesize.
    #[arg(long, default_value_t = 1)]
    count: usize,

    /// Bench: run the series-length scaling sweep.
    #[arg(long)]
    scaling: bool,

    /// Bench: run the window-width sweep at fixed N.
    #[arg(long)]
    width_sweep: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pattern {
    SineBurst,
    Triangle,
    Square,
    StepRamp,
}

impl From<Pattern> for PatternKind {
    fn from(p: Pattern) -> Self {
        match p {
            Pattern::SineBurst => PatternKind::SineBurst,
            Pattern::Triangle => PatternKind::Triangle,
            Pattern::Square => PatternKind::Square,
            Pattern::StepRamp => PatternKind::StepRamp,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = match args.mode {
        Mode::Extract => cmd_extract(&args),
        Mode::Eval => cmd_eval(&args),
        Mode::Synth => cmd_synth(&args),
        Mode::Bench => bench::cmd_bench(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

pub(crate) struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn config(message: impl Into<String>) -> Self {
        Failure::new(EXIT_CONFIG, message)
    }

    fn parse(message: impl Into<String>) -> Self {
        Failure::new(EXIT_PARSE, message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::Synthesis(_) => EXIT_CONFIG,
            Error::Input(_) => EXIT_PARSE,
            Error::NoRepeatingStructure(_) | Error::NoEventFound(_) => EXIT_NO_EVENT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::new(1, format!("{e:#}"))
    }
}

fn bounds_from(args: &Args) -> Result<BoundsSpec, Failure> {
    match (args.mmin, args.mmax, args.min_frac, args.max_frac) {
        (Some(m_min), Some(m_max), None, None) => {
            Ok(BoundsSpec::Absolute(LengthBounds { m_min, m_max }))
        }
        (None, None, Some(min_frac), Some(max_frac)) => {
            Ok(BoundsSpec::Fractional { min_frac, max_frac })
        }
        (None, None, None, None) => Ok(BoundsSpec::default()),
        _ => Err(Failure::config(
            "bounds must be given as both --mmin and --mmax, or both --min-frac and --max-frac",
        )),
    }
}

pub(crate) fn extract_config(args: &Args) -> Result<ExtractConfig, Failure> {
    Ok(ExtractConfig {
        bounds: bounds_from(args)?,
        rng_seed: args.seed,
        distance_threshold: args.distance_threshold,
        num_walks: args.num_walks,
        seeds_per_side: args.seeds_per_side,
    })
}

fn cmd_extract(args: &Args) -> Result<(), Failure> {
    let input = args
        .input
        .as_ref()
        .ok_or_else(|| Failure::config("extract needs --input <series.csv>"))?;
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("regions.json"));
    let cfg = extract_config(args)?;

    let raw = std::fs::read(input)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", input.display())))?;
    let digest = sha256_hex(&raw);
    let ts = read_series_csv(input).map_err(|e| Failure::parse(format!("{e:#}")))?;

    let result = extract_full(&ts, &cfg, args.manual_seeds.as_deref(), args.dump_featmat)?;

    let weight_summary = WeightSummary {
        selected_features: result.subset.selected.len(),
        total_weight: result.subset.weights.iter().sum(),
        max_weight: result.subset.weights.iter().cloned().fold(0.0, f64::max),
    };
    let regions_out = RegionsOutput {
        regions: result.regions.clone(),
        offsets: OffsetPair {
            start: result.offsets.0,
            end: result.offsets.1,
        },
        windows: result.subset.windows.clone(),
        score: result.subset.score,
        seed_window: result.seed,
        rng_seed: cfg.rng_seed,
        config: ConfigEcho::from(&result.config),
        num_feature_rows: result.num_feature_rows,
        weight_summary,
        warnings: result.warnings.clone(),
    };
    write_json(&output, &regions_out)?;

    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| sibling(&output, "_manifest.json"));
    let manifest = RunManifest {
        command: "extract".into(),
        input_digest: digest,
        rng_seed: cfg.rng_seed,
        config: ConfigEcho::from(&result.config),
        stages_ms: result.timings,
        result: ResultSummary {
            num_regions: result.regions.len(),
            score: result.subset.score,
            region_length: result.regions.first().map_or(0, |r| r.len()),
        },
    };
    write_json(&manifest_path, &manifest)?;

    if let Some(diag_path) = &args.diagnostics {
        let diagnostics = Diagnostics {
            per_seed_best: result
                .per_seed_best
                .iter()
                .map(|&(seed, score)| SeedScore { seed, score })
                .collect(),
            winning_trace: result.trace.clone(),
        };
        write_json(diag_path, &diagnostics)?;
    }

    if args.dump_featmat {
        let (fm, blurred) = result.matrices.as_ref().expect("matrices were requested");
        let featmat_rows = fm
            .rows
            .iter()
            .map(|row| row.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect());
        dump_matrix_csv(&sibling(&output, "_featmat.csv"), fm, featmat_rows)?;
        dump_matrix_csv(
            &sibling(&output, "_blurred.csv"),
            fm,
            blurred.rows.iter().cloned(),
        )?;
    }

    println!(
        "found {} regions (length {}) with score {:.3}; wrote {}",
        result.regions.len(),
        result.regions.first().map_or(0, |r| r.len()),
        result.subset.score,
        output.display()
    );
    Ok(())
}

fn dump_matrix_csv(
    path: &Path,
    fm: &evmine::FeatureMatrix,
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<(), Failure> {
    let value_cols: Vec<String> = (0..fm.n).map(|t| format!("t{t}")).collect();
    let mut text = format!("dim,length,origin,{}\n", value_cols.join(","));
    for (shape, row) in fm.shapes.iter().zip(rows) {
        text.push_str(&format!("{},{},{}", shape.dim, shape.length, shape.origin));
        for v in row {
            text.push(',');
            text.push_str(&v.to_string());
        }
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Failure::new(1, e.to_string()))
}

fn sibling(output: &Path, suffix: &str) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    output.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_eval(args: &Args) -> Result<(), Failure> {
    let regions_path = args
        .regions
        .as_ref()
        .ok_or_else(|| Failure::config("eval needs --regions <regions.json>"))?;
    let truth_path = args
        .truth
        .as_ref()
        .ok_or_else(|| Failure::config("eval needs --truth <truth.csv>"))?;

    #[derive(serde::Deserialize)]
    struct RegionsOnly {
        regions: Vec<evmine::Region>,
    }
    let raw = std::fs::read_to_string(regions_path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", regions_path.display())))?;
    let predicted: Vec<evmine::Region> = serde_json::from_str::<RegionsOnly>(&raw)
        .map_err(|e| Failure::parse(format!("{}: {e}", regions_path.display())))?
        .regions;
    let truth = read_regions_csv(truth_path).map_err(|e| Failure::parse(format!("{e:#}")))?;

    let taus: Vec<f64> = match &args.tau {
        Some(list) => list.clone(),
        None => (1..=19).map(|i| i as f64 * 0.05).collect(),
    };
    if taus.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Failure::config("IOU thresholds must lie in [0, 1]"));
    }

    let reports = if args.count_only {
        vec![prf1_count_only(predicted.len(), truth.len())]
    } else {
        f1_sweep(&predicted, &truth, &taus)
    };
    for r in &reports {
        println!(
            "tau {:.2}: matches {} precision {:.4} recall {:.4} f1 {:.4}",
            r.tau, r.match_count, r.precision, r.recall, r.f1
        );
    }
    let report = EvalReport {
        num_predicted: predicted.len(),
        num_truth: truth.len(),
        count_only: args.count_only,
        reports,
    };
    let out = args
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("report.json"));
    write_json(&out, &report)?;
    Ok(())
}

pub(crate) fn synth_spec(args: &Args, seed: u64) -> Result<SynthSpec, Failure> {
    Ok(SynthSpec {
        n: args.n,
        d: args.d,
        num_instances: args.instances,
        pattern: args.pattern.into(),
        base_length: args.base_length,
        length_jitter: args.jitter,
        amplitude_snr: args.snr,
        relevant_dims: args.relevant_dims.clone().unwrap_or_else(|| vec![0]),
        rng_seed: seed,
        splice: args.splice,
        custom_template: args
            .template_csv
            .as_ref()
            .map(read_template_csv)
            .transpose()?,
    })
}

fn cmd_synth(args: &Args) -> Result<(), Failure> {
    let prefix = args
        .out_prefix
        .as_ref()
        .ok_or_else(|| Failure::config("synth needs --out-prefix <path>"))?;
    for i in 0..args.count {
        let spec = synth_spec(args, args.seed.wrapping_add(i as u64))?;
        let (ts, truth) = evmine::generate(&spec)?;
        let (series_path, truth_path, manifest_path) = if args.count == 1 {
            (
                with_suffix(prefix, ".csv"),
                with_suffix(prefix, "_truth.csv"),
                with_suffix(prefix, "_manifest.json"),
            )
        } else {
            (
                with_suffix(prefix, &format!("_{i:03}.csv")),
                with_suffix(prefix, &format!("_{i:03}_truth.csv")),
                with_suffix(prefix, &format!("_{i:03}_manifest.json")),
            )
        };
        write_series_csv(&series_path, &ts)?;
        write_regions_csv(&truth_path, &truth)?;
        write_json(&manifest_path, &spec)?;
        println!(
            "wrote {} ({} instances) and {}",
            series_path.display(),
            truth.len(),
            truth_path.display()
        );
    }
    Ok(())
}

fn read_template_csv(path: &PathBuf) -> Result<Vec<f64>, Failure> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (line_no, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (line_no == 0 && line.parse::<f64>().is_err()) {
            continue; // optional header
        }
        values.push(
            line.parse::<f64>()
                .map_err(|_| Failure::parse(format!("malformed template row {}", line_no + 1)))?,
        );
    }
    Ok(values)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let name = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "synth".into());
    prefix.with_file_name(format!("{name}{suffix}"))
}
