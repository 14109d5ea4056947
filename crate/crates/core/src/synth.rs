//! Labeled synthetic benchmarks: template patterns planted in Gaussian
//! random walks, with exact ground-truth regions.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::series::{Region, TimeSeries};

/// Pattern template family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    /// Hann-enveloped sine, three cycles; zero at both ends.
    SineBurst,
    /// Symmetric triangle pulse.
    Triangle,
    /// One square-wave cycle.
    Square,
    /// Step up, hold, then ramp back down.
    StepRamp,
}

impl PatternKind {
    fn eval(self, u: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            PatternKind::SineBurst => {
                let envelope = 0.5 - 0.5 * (2.0 * PI * u).cos();
                (2.0 * PI * 3.0 * u).sin() * envelope
            }
            PatternKind::Triangle => 1.0 - (2.0 * u - 1.0).abs(),
            PatternKind::Square => {
                if u < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            PatternKind::StepRamp => {
                if u < 0.5 {
                    1.0
                } else {
                    2.0 * (1.0 - u)
                }
            }
        }
    }
}

/// What to generate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    pub num_instances: usize,
    pub pattern: PatternKind,
    pub base_length: usize,
    /// Instance lengths are uniform in `base_length * [1 - jitter, 1 + jitter]`.
    pub length_jitter: f64,
    /// Pattern strength relative to the walk's wander within one instance
    /// span: the planted pattern's standard deviation is `amplitude_snr`
    /// times the expected within-window deviation of a walk with the
    /// background step sigma.
    pub amplitude_snr: f64,
    /// Dimensions the pattern is written into; the rest stay pure walks.
    pub relevant_dims: Vec<usize>,
    pub rng_seed: u64,
    /// Replace the walk inside each instance instead of adding to it.
    /// Splicing leaves level discontinuities at instance edges, which is
    /// the easier case for detectors.
    pub splice: bool,
    /// Exemplar values to plant instead of a built-in pattern; rescaled
    /// in time to each instance length. Lets externally supplied
    /// exemplars (e.g. archive pulls exported as CSV) drive the
    /// benchmark.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_template: Option<Vec<f64>>,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("series length must be at least 2"));
        }
        if self.d == 0 {
            return Err(Error::config("at least one dimension is required"));
        }
        if self.num_instances < 2 {
            return Err(Error::config("at least 2 instances are required"));
        }
        if self.base_length < 8 {
            return Err(Error::config(
                "base instance length must be at least 8 samples",
            ));
        }
        if !(0.0..0.5).contains(&self.length_jitter) {
            return Err(Error::config(format!(
                "length jitter must lie in [0, 0.5); got {}",
                self.length_jitter
            )));
        }
        if !self.amplitude_snr.is_finite() || self.amplitude_snr <= 0.0 {
            return Err(Error::config(format!(
                "amplitude SNR must be positive; got {}",
                self.amplitude_snr
            )));
        }
        if self.relevant_dims.is_empty() {
            return Err(Error::config("at least one relevant dimension is required"));
        }
        if let Some(&bad) = self.relevant_dims.iter().find(|&&d| d >= self.d) {
            return Err(Error::config(format!(
                "relevant dimension {bad} out of range for {} dimensions",
                self.d
            )));
        }
        let occupancy =
            self.num_instances as f64 * self.base_length as f64 * (1.0 + self.length_jitter);
        if occupancy >= self.n as f64 / 2.0 {
            return Err(Error::config(format!(
                "instances would occupy {occupancy:.0} of {} samples; keep them under half \
                 the series so noise stays in the majority",
                self.n
            )));
        }
        if let Some(values) = &self.custom_template {
            if values.len() < 2 {
                return Err(Error::config("a custom template needs at least 2 samples"));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::config("custom template holds non-finite values"));
            }
            let mu = values.iter().sum::<f64>() / values.len() as f64;
            if values.iter().all(|v| (v - mu).abs() < 1e-12) {
                return Err(Error::config("custom template is constant"));
            }
        }
        Ok(())
    }
}

/// Pattern template at the given length: evaluated on [0, 1], centered,
/// and scaled to unit population deviation.
pub fn template(kind: PatternKind, len: usize) -> Vec<f64> {
    debug_assert!(len >= 2);
    let values = (0..len)
        .map(|k| kind.eval(k as f64 / (len - 1) as f64))
        .collect();
    normalize_template(values)
}

/// Exemplar values rescaled in time (uniform scaling, linear
/// interpolation) to the given length, then normalized like the built-in
/// templates.
pub fn resample_template(values: &[f64], len: usize) -> Vec<f64> {
    debug_assert!(values.len() >= 2 && len >= 2);
    let scale = (values.len() - 1) as f64 / (len - 1) as f64;
    let resampled = (0..len)
        .map(|k| {
            let x = k as f64 * scale;
            let lo = x.floor() as usize;
            let hi = (lo + 1).min(values.len() - 1);
            let frac = x - lo as f64;
            values[lo] * (1.0 - frac) + values[hi] * frac
        })
        .collect();
    normalize_template(resampled)
}

fn normalize_template(mut values: Vec<f64>) -> Vec<f64> {
    let len = values.len();
    let mu = values.iter().sum::<f64>() / len as f64;
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / len as f64;
    let sd = var.sqrt();
    debug_assert!(sd > 0.0, "degenerate template at length {len}");
    for v in &mut values {
        *v = (*v - mu) / sd;
    }
    values
}

/// Generates one labeled series: independent Gaussian walk background per
/// dimension, with patterns planted at uniformly random non-overlapping
/// positions separated by at least the maximum instance length.
pub fn generate(spec: &SynthSpec) -> Result<(TimeSeries, Vec<Region>)> {
    spec.validate()?;
    let step_sigma = 1.0;

    // Backgrounds come from their own substream so irrelevant dimensions
    // can be regenerated and verified independently of the plan.
    let mut bg_rng = substream(spec.rng_seed, "synth-background");
    let mut values: Vec<Vec<f64>> = (0..spec.d)
        .map(|_| {
            let mut level = 0.0;
            (0..spec.n)
                .map(|_| {
                    level += step_sigma * bg_rng.sample::<f64, _>(StandardNormal);
                    level
                })
                .collect()
        })
        .collect();

    let mut plan_rng = substream(spec.rng_seed, "synth-plan");
    let lo = ((spec.base_length as f64) * (1.0 - spec.length_jitter)).floor() as usize;
    let hi = ((spec.base_length as f64) * (1.0 + spec.length_jitter)).floor() as usize;
    let lengths: Vec<usize> = (0..spec.num_instances)
        .map(|_| plan_rng.gen_range(lo..=hi))
        .collect();

    let gap = ((spec.base_length as f64) * (1.0 + spec.length_jitter)).ceil() as usize;
    let occupied: usize = lengths.iter().sum::<usize>() + gap * (spec.num_instances - 1);
    let Some(free) = spec.n.checked_sub(occupied) else {
        return Err(Error::synthesis(format!(
            "cannot place {} instances of up to {hi} samples with {gap}-sample gaps \
             in {} samples; increase the series length",
            spec.num_instances, spec.n
        )));
    };

    // Uniform non-overlapping placement: sorted draws plus running offsets.
    let mut draws: Vec<usize> = (0..spec.num_instances)
        .map(|_| plan_rng.gen_range(0..=free))
        .collect();
    draws.sort_unstable();
    let mut regions = Vec::with_capacity(spec.num_instances);
    let mut offset = 0;
    for (draw, &len) in draws.iter().zip(&lengths) {
        let start = draw + offset;
        regions.push(Region::new(start, start + len - 1));
        offset += len + gap;
    }

    // Expected within-window wander of a walk over one base length; the
    // planted pattern's deviation is amplitude_snr times this.
    let walk_window_sd = step_sigma * (spec.base_length as f64 / 6.0).sqrt();
    let amplitude = spec.amplitude_snr * walk_window_sd;

    for region in &regions {
        let tpl = match &spec.custom_template {
            Some(values) => resample_template(values, region.len()),
            None => template(spec.pattern, region.len()),
        };
        for &dim in &spec.relevant_dims {
            let anchor = values[dim][region.start];
            for (k, &v) in tpl.iter().enumerate() {
                let t = region.start + k;
                if spec.splice {
                    values[dim][t] = anchor + amplitude * v;
                } else {
                    values[dim][t] += amplitude * v;
                }
            }
        }
    }

    let ts = TimeSeries::new(values, None)?;
    Ok((ts, regions))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SynthSpec {
        SynthSpec {
            n: 1000,
            d: 3,
            num_instances: 5,
            pattern: PatternKind::SineBurst,
            base_length: 60,
            length_jitter: 0.2,
            amplitude_snr: 3.0,
            relevant_dims: vec![0],
            rng_seed: 7,
            splice: false,
            custom_template: None,
        }
    }

    #[test]
    fn ground_truth_counts_and_layout() {
        let mut total = 0;
        for series_idx in 0..50 {
            let mut s = spec();
            s.rng_seed = series_idx;
            let (ts, regions) = generate(&s).unwrap();
            assert_eq!(ts.len(), 1000);
            assert_eq!(regions.len(), 5);
            total += regions.len();
            let gap = ((60.0f64) * 1.2).ceil() as usize;
            for pair in regions.windows(2) {
                assert!(pair[1].start > pair[0].end);
                assert!(pair[1].start - pair[0].end > gap);
            }
            assert!(regions.iter().all(|r| r.end < 1000));
        }
        assert_eq!(total, 250);
    }

    #[test]
    fn zero_jitter_means_equal_lengths() {
        let mut s = spec();
        s.length_jitter = 0.0;
        let (_, regions) = generate(&s).unwrap();
        assert!(regions.iter().all(|r| r.len() == 60));
    }

    #[test]
    fn irrelevant_dimensions_are_untouched_walks() {
        let s = spec();
        let (ts, _) = generate(&s).unwrap();
        // Regenerate the backgrounds from the recorded substream; the
        // irrelevant dimensions must be bit-identical.
        let mut bg_rng = substream(s.rng_seed, "synth-background");
        for d in 0..s.d {
            let mut level = 0.0;
            let walk: Vec<f64> = (0..s.n)
                .map(|_| {
                    level += bg_rng.sample::<f64, _>(StandardNormal);
                    level
                })
                .collect();
            if s.relevant_dims.contains(&d) {
                assert!(walk.iter().zip(ts.dim(d)).any(|(a, b)| a != b));
            } else {
                assert!(walk.iter().zip(ts.dim(d)).all(|(a, b)| a == b));
            }
        }
    }

    #[test]
    fn determinism_under_seed() {
        let s = spec();
        let (a, ra) = generate(&s).unwrap();
        let (b, rb) = generate(&s).unwrap();
        assert_eq!(ra, rb);
        for d in 0..s.d {
            assert!(a
                .dim(d)
                .iter()
                .zip(b.dim(d))
                .all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn planted_subsequences_correlate_with_the_template() {
        let mut s = spec();
        s.amplitude_snr = 6.0;
        for seed in 0..5 {
            s.rng_seed = 1000 + seed;
            let (ts, regions) = generate(&s).unwrap();
            for region in &regions {
                let sub = &ts.dim(0)[region.start..=region.end];
                let tpl = template(s.pattern, region.len());
                let m = sub.len() as f64;
                let mu_s = sub.iter().sum::<f64>() / m;
                let mut cov = 0.0;
                let mut var_s = 0.0;
                for (x, t) in sub.iter().zip(&tpl) {
                    cov += (x - mu_s) * t;
                    var_s += (x - mu_s) * (x - mu_s);
                }
                // Template already has unit deviation and zero mean.
                let corr = cov / (var_s.sqrt() * m.sqrt());
                assert!(
                    corr > 0.9,
                    "seed {seed}: correlation {corr} at region {region:?}"
                );
            }
        }
    }

    #[test]
    fn splice_mode_flattens_the_interior() {
        let mut s = spec();
        s.splice = true;
        s.length_jitter = 0.0;
        let (ts, regions) = generate(&s).unwrap();
        let r = regions[0];
        let tpl = template(s.pattern, r.len());
        let amp = s.amplitude_snr * (s.base_length as f64 / 6.0).sqrt();
        let anchor = ts.dim(0)[r.start] - amp * tpl[0];
        for (k, &v) in tpl.iter().enumerate() {
            let got = ts.dim(0)[r.start + k];
            assert!((got - (anchor + amp * v)).abs() < 1e-9);
        }
    }

    #[test]
    fn impossible_layouts_ask_for_a_longer_series() {
        let mut s = spec();
        s.n = 400;
        // occupancy check trips first for blatant overflow; squeeze past
        // it with a layout that only fails placement arithmetic.
        s.num_instances = 2;
        s.base_length = 99;
        s.length_jitter = 0.0;
        let err = generate(&SynthSpec {
            n: 250,
            ..s.clone()
        })
        .unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("increase") || msg.contains("under half"),
            "message: {msg}"
        );
    }

    #[test]
    fn custom_templates_plant_like_builtins() {
        // A triangle exemplar at a foreign length should reproduce the
        // built-in triangle after uniform rescaling.
        let exemplar: Vec<f64> = template(PatternKind::Triangle, 37);
        let resampled = resample_template(&exemplar, 60);
        let builtin = template(PatternKind::Triangle, 60);
        for (a, b) in resampled.iter().zip(&builtin) {
            assert!((a - b).abs() < 0.05, "{a} vs {b}");
        }

        let mut s = spec();
        s.custom_template = Some(exemplar);
        s.amplitude_snr = 6.0;
        let (ts, regions) = generate(&s).unwrap();
        assert_eq!(regions.len(), 5);
        assert_eq!(ts.len(), s.n);

        let mut bad = spec();
        bad.custom_template = Some(vec![1.0; 30]);
        assert!(generate(&bad).is_err());
    }

    #[test]
    fn templates_are_normalized() {
        for kind in [
            PatternKind::SineBurst,
            PatternKind::Triangle,
            PatternKind::Square,
            PatternKind::StepRamp,
        ] {
            for len in [8, 13, 60, 101] {
                let t = template(kind, len);
                let mu = t.iter().sum::<f64>() / len as f64;
                let var = t.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / len as f64;
                assert!(mu.abs() < 1e-9);
                assert!((var - 1.0).abs() < 1e-9);
            }
        }
    }
}
