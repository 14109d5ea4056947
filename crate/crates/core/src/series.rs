use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A D-dimensional real-valued sequence, stored dimension-major.
///
/// Invariants enforced at construction: at least one dimension, every
/// dimension has the same length N >= 2, and all values are finite.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    values: Vec<Vec<f64>>,
    dim_names: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(values: Vec<Vec<f64>>, dim_names: Option<Vec<String>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("a time series needs at least one dimension"));
        }
        let n = values[0].len();
        if n < 2 {
            return Err(Error::input(format!(
                "a time series needs at least 2 time steps; got {n}"
            )));
        }
        for (d, dim) in values.iter().enumerate() {
            if dim.len() != n {
                return Err(Error::input(format!(
                    "ragged input: dimension 0 has {n} samples but dimension {d} has {}",
                    dim.len()
                )));
            }
            if let Some(t) = dim.iter().position(|v| !v.is_finite()) {
                return Err(Error::input(format!(
                    "non-finite value {} at dimension {d}, time step {t}; \
                     clean or drop missing samples before ingestion",
                    dim[t]
                )));
            }
        }
        if let Some(names) = &dim_names {
            if names.len() != values.len() {
                return Err(Error::input(format!(
                    "{} dimension names for {} dimensions",
                    names.len(),
                    values.len()
                )));
            }
        }
        Ok(TimeSeries { values, dim_names })
    }

    /// Number of time steps N.
    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of dimensions D.
    pub fn num_dims(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self, d: usize) -> &[f64] {
        &self.values[d]
    }

    pub fn dims(&self) -> impl Iterator<Item = &[f64]> {
        self.values.iter().map(|v| v.as_slice())
    }

    pub fn dim_names(&self) -> Option<&[String]> {
        self.dim_names.as_deref()
    }
}

/// A pair of inclusive time indices; the unit of both output and ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Region {
    pub start: usize,
    pub end: usize,
}

impl Region {
    /// `start <= end` is a structural invariant, not a data error.
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "region start {start} > end {end}");
        Region { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t <= self.end
    }
}
