//! Scaling benchmarks: wall time across series lengths and across the
//! window-width sweep, on both random-walk and planted-pattern inputs.

use std::fmt::Write as _;
use std::time::Instant;

use evmine::{
    extract, BoundsSpec, ExtractConfig, LengthBounds, PatternKind, SynthSpec, TimeSeries,
};
use rand::Rng;

use crate::{Args, Failure};

struct BenchRow {
    sweep: &'static str,
    kind: &'static str,
    n: usize,
    m_min: usize,
    m_max: usize,
    millis: f64,
    outcome: &'static str,
}

pub(crate) fn cmd_bench(args: &Args) -> Result<(), Failure> {
    let run_scaling = args.scaling || !args.width_sweep;
    let run_width = args.width_sweep || !args.scaling;
    let mut rows = Vec::new();

    if run_scaling {
        for n in [2000usize, 4000, 8000, 16000] {
            for kind in ["walk", "planted"] {
                rows.push(run_once(
                    "scaling",
                    kind,
                    n,
                    LengthBounds {
                        m_min: 100,
                        m_max: 150,
                    },
                    args.seed,
                ));
            }
        }
    }
    if run_width {
        for m_max in [150usize, 200, 250, 300] {
            for kind in ["walk", "planted"] {
                rows.push(run_once(
                    "width",
                    kind,
                    5000,
                    LengthBounds {
                        m_min: m_max - 50,
                        m_max,
                    },
                    args.seed,
                ));
            }
        }
    }

    let mut table = String::from("sweep,kind,n,m_min,m_max,millis,outcome\n");
    for row in &rows {
        writeln!(
            table,
            "{},{},{},{},{},{:.1},{}",
            row.sweep, row.kind, row.n, row.m_min, row.m_max, row.millis, row.outcome
        )
        .expect("writing to a string cannot fail");
    }
    print!("{table}");
    if let Some(out) = &args.output {
        std::fs::write(out, &table).map_err(|e| Failure::new(1, e.to_string()))?;
        eprintln!("wrote {}", out.display());
    }
    Ok(())
}

fn run_once(
    sweep: &'static str,
    kind: &'static str,
    n: usize,
    bounds: LengthBounds,
    seed: u64,
) -> BenchRow {
    let ts = match kind {
        "walk" => walk_series(n, seed),
        _ => planted_series(n, bounds, seed),
    };
    let cfg = ExtractConfig {
        bounds: BoundsSpec::Absolute(bounds),
        rng_seed: seed,
        ..ExtractConfig::default()
    };
    let started = Instant::now();
    let outcome = match extract(&ts, &cfg) {
        Ok(_) => "regions",
        Err(evmine::Error::NoRepeatingStructure(_)) => "no-structure",
        Err(evmine::Error::NoEventFound(_)) => "no-event",
        Err(_) => "error",
    };
    BenchRow {
        sweep,
        kind,
        n,
        m_min: bounds.m_min,
        m_max: bounds.m_max,
        millis: started.elapsed().as_secs_f64() * 1e3,
        outcome,
    }
}

fn walk_series(n: usize, seed: u64) -> TimeSeries {
    let mut rng = evmine::rng::substream(seed.wrapping_add(n as u64), "bench-walk");
    let mut level = 0.0;
    let values: Vec<f64> = (0..n)
        .map(|_| {
            level += rng.sample::<f64, _>(rand_distr::StandardNormal);
            level
        })
        .collect();
    TimeSeries::new(vec![values], None).expect("walk series is valid")
}

fn planted_series(n: usize, bounds: LengthBounds, seed: u64) -> TimeSeries {
    // Instance lengths sit mid-band so the fixed bounds stay honest.
    let base = (bounds.m_min + bounds.m_max) / 2;
    let spec = SynthSpec {
        n,
        d: 1,
        num_instances: 5,
        pattern: PatternKind::SineBurst,
        base_length: base,
        length_jitter: 0.1,
        amplitude_snr: 4.0,
        relevant_dims: vec![0],
        rng_seed: seed.wrapping_add(n as u64),
        splice: false,
        custom_template: None,
    };
    let (ts, _) = evmine::generate(&spec).expect("bench layout fits");
    ts
}
