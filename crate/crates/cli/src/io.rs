//! File formats: series CSV, ground-truth CSV, and the JSON outputs.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use evmine::{MatchReport, Region, StageTimings, TimeSeries, ValidatedConfig};
use serde::{Deserialize, Serialize};

/// Reads a series CSV: rows are time steps, columns are dimensions, with
/// an optional header row of dimension names.
pub fn read_series_csv(path: &Path) -> anyhow::Result<TimeSeries> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("cannot read series file {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut names: Option<Vec<String>> = None;
    for (line_no, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                if let Some(first) = rows.first() {
                    if values.len() != first.len() {
                        bail!(
                            "malformed CSV row {}: expected {} fields, got {}",
                            line_no + 1,
                            first.len(),
                            values.len()
                        );
                    }
                }
                rows.push(values);
            }
            Err(_) if rows.is_empty() && names.is_none() => {
                names = Some(fields.iter().map(|s| s.to_string()).collect());
            }
            Err(_) => {
                bail!("malformed CSV row {}: non-numeric field", line_no + 1);
            }
        }
    }
    if rows.is_empty() {
        bail!("series file {} holds no data rows", path.display());
    }
    let d = rows[0].len();
    let mut dims = vec![Vec::with_capacity(rows.len()); d];
    for row in &rows {
        for (dim, &v) in dims.iter_mut().zip(row) {
            dim.push(v);
        }
    }
    TimeSeries::new(dims, names).map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn write_series_csv(path: &Path, ts: &TimeSeries) -> anyhow::Result<()> {
    let mut out = String::new();
    let header: Vec<String> = match ts.dim_names() {
        Some(names) => names.to_vec(),
        None => (0..ts.num_dims()).map(|d| format!("dim{d}")).collect(),
    };
    out.push_str(&header.join(","));
    out.push('\n');
    for t in 0..ts.len() {
        let row: Vec<String> = (0..ts.num_dims())
            .map(|d| ts.dim(d)[t].to_string())
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Ground-truth file format: CSV with header `start,end`, inclusive
/// integer indices.
pub fn read_regions_csv(path: &Path) -> anyhow::Result<Vec<Region>> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("cannot read regions file {}", path.display()))?;
    let mut lines = raw.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(header) if header.trim().to_lowercase().replace(' ', "") == "start,end" => {}
        _ => bail!(
            "regions file {} must start with a `start,end` header",
            path.display()
        ),
    }
    let mut regions = Vec::new();
    for (line_no, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            bail!("malformed region row {}: expected start,end", line_no + 2);
        }
        let start: usize = fields[0]
            .parse()
            .with_context(|| format!("malformed region row {}", line_no + 2))?;
        let end: usize = fields[1]
            .parse()
            .with_context(|| format!("malformed region row {}", line_no + 2))?;
        if start > end {
            bail!(
                "malformed region row {}: start {start} > end {end}",
                line_no + 2
            );
        }
        regions.push(Region::new(start, end));
    }
    Ok(regions)
}

pub fn write_regions_csv(path: &Path, regions: &[Region]) -> anyhow::Result<()> {
    let mut out = String::from("start,end\n");
    for r in regions {
        out.push_str(&format!("{},{}\n", r.start, r.end));
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// The deterministic extraction output. Reruns with identical input,
/// config, and seed produce byte-identical files.
#[derive(Debug, Serialize, Deserialize)]
pub struct RegionsOutput {
    pub regions: Vec<Region>,
    pub offsets: OffsetPair,
    pub windows: Vec<usize>,
    pub score: f64,
    pub seed_window: usize,
    pub rng_seed: u64,
    pub config: ConfigEcho,
    pub num_feature_rows: usize,
    pub weight_summary: WeightSummary,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OffsetPair {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub m_min: usize,
    pub m_max: usize,
    pub distance_threshold: f64,
    pub num_walks: usize,
    pub seeds_per_side: usize,
    pub n: usize,
    pub d: usize,
}

impl From<&ValidatedConfig> for ConfigEcho {
    fn from(cfg: &ValidatedConfig) -> Self {
        ConfigEcho {
            m_min: cfg.m_min,
            m_max: cfg.m_max,
            distance_threshold: cfg.distance_threshold,
            num_walks: cfg.num_walks,
            seeds_per_side: cfg.seeds_per_side,
            n: cfg.n,
            d: cfg.d,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WeightSummary {
    pub selected_features: usize,
    pub total_weight: f64,
    pub max_weight: f64,
}

/// Run metadata that may vary between reruns (timings), kept apart from
/// the deterministic regions output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input_digest: String,
    pub rng_seed: u64,
    pub config: ConfigEcho,
    pub stages_ms: StageTimings,
    pub result: ResultSummary,
}

#[derive(Debug, Serialize)]
pub struct ResultSummary {
    pub num_regions: usize,
    pub score: f64,
    pub region_length: usize,
}

/// Per-seed diagnostics behind the verbosity flag.
#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub per_seed_best: Vec<SeedScore>,
    pub winning_trace: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SeedScore {
    pub seed: usize,
    pub score: Option<f64>,
}

/// Evaluation report: one entry per threshold.
#[derive(Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub num_predicted: usize,
    pub num_truth: usize,
    pub count_only: bool,
    pub reports: Vec<MatchReport>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("sha256:{:x}", hasher.finalize())
}
