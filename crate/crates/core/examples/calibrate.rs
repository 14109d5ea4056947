//! Measures end-to-end accuracy on the planted-pattern benchmark:
//! 50 series per seed, 5 sine-burst instances each, one relevant
//! dimension of three.
//!
//! Run with: cargo run --release --example calibrate

use evmine::{extract, generate, prf1, BoundsSpec, ExtractConfig, PatternKind, SynthSpec};
use std::time::Instant;

fn main() {
    let started = Instant::now();
    for master_seed in [0u64, 1, 2] {
        let mut f1_050 = Vec::new();
        let mut f1_025 = Vec::new();
        let mut failures = 0usize;
        for series_idx in 0..50u64 {
            let spec = SynthSpec {
                n: 1000,
                d: 3,
                num_instances: 5,
                pattern: PatternKind::SineBurst,
                base_length: 60,
                length_jitter: 0.2,
                amplitude_snr: 3.0,
                relevant_dims: vec![0],
                rng_seed: master_seed * 1000 + series_idx,
                splice: false,
                custom_template: None,
            };
            let (ts, truth) = generate(&spec).unwrap();
            let cfg = ExtractConfig {
                bounds: BoundsSpec::Fractional {
                    min_frac: 0.05,
                    max_frac: 0.10,
                },
                rng_seed: master_seed,
                ..ExtractConfig::default()
            };
            match extract(&ts, &cfg) {
                Ok(result) => {
                    f1_050.push(prf1(&result.regions, &truth, 0.50).f1);
                    f1_025.push(prf1(&result.regions, &truth, 0.25).f1);
                }
                Err(e) => {
                    failures += 1;
                    f1_050.push(0.0);
                    f1_025.push(0.0);
                    eprintln!("seed {master_seed} series {series_idx}: {e}");
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "seed {master_seed}: mean F1@0.50 = {:.3}, mean F1@0.25 = {:.3}, failures = {failures}",
            mean(&f1_050),
            mean(&f1_025)
        );
    }
    println!("total wall time: {:.1} s", started.elapsed().as_secs_f64());
}
