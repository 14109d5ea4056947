use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Smallest shape length worth matching; shorter subsequences do not
/// define a meaningful shape.
pub const MIN_SHAPE_LEN: usize = 8;

/// Absolute instance-length bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LengthBounds {
    pub m_min: usize,
    pub m_max: usize,
}

/// Length bounds, either absolute samples or fractions of the series length.
///
/// Fractions resolve as `floor(N * fraction)` with a floor of
/// [`MIN_SHAPE_LEN`] on the lower bound so that shape lengths exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundsSpec {
    Absolute(LengthBounds),
    Fractional { min_frac: f64, max_frac: f64 },
}

impl Default for BoundsSpec {
    fn default() -> Self {
        BoundsSpec::Fractional {
            min_frac: 1.0 / 20.0,
            max_frac: 1.0 / 10.0,
        }
    }
}

/// Tunables for one extraction run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractConfig {
    pub bounds: BoundsSpec,
    pub rng_seed: u64,
    /// Shape-match distance threshold; matches require a mean-normalized
    /// distance strictly below this. An all-zero subsequence sits at
    /// distance 1, so the threshold must stay below 1.
    pub distance_threshold: f64,
    pub num_walks: usize,
    pub seeds_per_side: usize,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            bounds: BoundsSpec::default(),
            rng_seed: 0,
            distance_threshold: 0.25,
            num_walks: 100,
            seeds_per_side: 10,
        }
    }
}

/// Configuration resolved and checked against a concrete series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidatedConfig {
    pub m_min: usize,
    pub m_max: usize,
    pub rng_seed: u64,
    pub distance_threshold: f64,
    pub num_walks: usize,
    pub seeds_per_side: usize,
    pub n: usize,
    pub d: usize,
}

/// Resolves fractional bounds against the series length and checks every
/// configuration invariant, naming the violated constraint on failure.
pub fn validate_config(ts: &TimeSeries, cfg: &ExtractConfig) -> Result<ValidatedConfig> {
    let n = ts.len();
    let fractional = matches!(cfg.bounds, BoundsSpec::Fractional { .. });
    let (m_min, m_max) = match cfg.bounds {
        BoundsSpec::Absolute(LengthBounds { m_min, m_max }) => (m_min, m_max),
        BoundsSpec::Fractional { min_frac, max_frac } => {
            if !(min_frac.is_finite() && max_frac.is_finite()) || min_frac <= 0.0 || max_frac <= 0.0
            {
                return Err(Error::config(format!(
                    "fractional bounds must be positive finite fractions; got ({min_frac}, {max_frac})"
                )));
            }
            let lo = ((n as f64) * min_frac).floor() as usize;
            let hi = ((n as f64) * max_frac).floor() as usize;
            (lo.max(MIN_SHAPE_LEN), hi)
        }
    };

    if m_min == 0 {
        return Err(Error::config("minimum instance length must be positive"));
    }
    if m_min > m_max {
        return Err(Error::config(format!(
            "minimum instance length {m_min} exceeds maximum {m_max}"
        )));
    }
    // Bounds must disambiguate adjacent instance pairs from one long
    // instance: m_min > m_max / 2, strictly for explicit bounds. Pairs
    // resolved from fractions may land exactly on the boundary (the 1/20
    // and 1/10 convention always does) and are accepted there.
    if 2 * m_min < m_max || (!fractional && 2 * m_min == m_max) {
        return Err(Error::config(format!(
            "bounds must satisfy m_min > m_max / 2; got m_min = {m_min}, m_max = {m_max}"
        )));
    }
    if m_max > n {
        return Err(Error::config(format!(
            "maximum instance length {m_max} exceeds the series length {n}"
        )));
    }
    if !cfg.distance_threshold.is_finite()
        || cfg.distance_threshold <= 0.0
        || cfg.distance_threshold >= 1.0
    {
        return Err(Error::config(format!(
            "distance threshold must lie strictly between 0 and 1; got {}",
            cfg.distance_threshold
        )));
    }
    if cfg.num_walks == 0 {
        return Err(Error::config("the walk ensemble needs at least one walk"));
    }
    if cfg.seeds_per_side == 0 {
        return Err(Error::config("seeds per side must be positive"));
    }

    Ok(ValidatedConfig {
        m_min,
        m_max,
        rng_seed: cfg.rng_seed,
        distance_threshold: cfg.distance_threshold,
        num_walks: cfg.num_walks,
        seeds_per_side: cfg.seeds_per_side,
        n,
        d: ts.num_dims(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(n: usize) -> TimeSeries {
        TimeSeries::new(vec![(0..n).map(|i| i as f64).collect()], None).unwrap()
    }

    fn with_bounds(bounds: BoundsSpec) -> ExtractConfig {
        ExtractConfig {
            bounds,
            ..ExtractConfig::default()
        }
    }

    #[test]
    fn default_fractions_resolve_against_series_length() {
        let cfg = validate_config(&series(1000), &ExtractConfig::default()).unwrap();
        assert_eq!((cfg.m_min, cfg.m_max), (50, 100));
    }

    #[test]
    fn fractional_pairs_below_the_boundary_are_rejected() {
        let cfg = with_bounds(BoundsSpec::Fractional {
            min_frac: 0.01,
            max_frac: 0.5,
        });
        let err = validate_config(&series(1000), &cfg).unwrap_err();
        assert!(err.to_string().contains("m_min > m_max / 2"));
    }

    #[test]
    fn fractional_lower_bound_floors_at_shape_length() {
        let cfg = validate_config(&series(100), &ExtractConfig::default()).unwrap();
        assert_eq!((cfg.m_min, cfg.m_max), (8, 10));
    }

    #[test]
    fn boundary_of_half_rule_is_rejected() {
        // 2 * 50 > 100 is false, so (50, 100) must be rejected.
        let cfg = with_bounds(BoundsSpec::Absolute(LengthBounds {
            m_min: 50,
            m_max: 100,
        }));
        let err = validate_config(&series(1000), &cfg).unwrap_err();
        assert!(err.to_string().contains("m_min > m_max / 2"));

        let cfg = with_bounds(BoundsSpec::Absolute(LengthBounds {
            m_min: 51,
            m_max: 100,
        }));
        assert!(validate_config(&series(1000), &cfg).is_ok());
    }

    #[test]
    fn m_max_may_not_exceed_series_length() {
        let cfg = with_bounds(BoundsSpec::Absolute(LengthBounds {
            m_min: 100,
            m_max: 100,
        }));
        let err = validate_config(&series(50), &cfg).unwrap_err();
        assert!(err.to_string().contains("exceeds the series length"));
    }

    #[test]
    fn threshold_must_stay_below_one() {
        let mut cfg = ExtractConfig {
            distance_threshold: 1.0,
            ..ExtractConfig::default()
        };
        assert!(validate_config(&series(1000), &cfg).is_err());
        cfg.distance_threshold = 0.0;
        assert!(validate_config(&series(1000), &cfg).is_err());
    }
}
