use serde::{Deserialize, Serialize};

use super::dataset::{TypedDataset, VariableKind, VariableSchema};
use crate::error::{Error, Result};

/// Default lower bound for continuous bandwidths; keeps the `1/λ` factor finite.
pub const DEFAULT_CONTINUOUS_EPSILON: f64 = 1e-12;

/// Closed interval `[lo, hi]`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.hi.is_infinite() {
            write!(f, "[{}, inf)", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// How admissible bandwidth ranges are derived from a schema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    /// Smallest admissible continuous bandwidth.
    pub epsilon: f64,
    /// Cap unordered bandwidths at `(g - 1) / g` instead of 1.
    pub aitken_cap: bool,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            epsilon: DEFAULT_CONTINUOUS_EPSILON,
            aitken_cap: false,
        }
    }
}

impl BoundsConfig {
    pub fn interval_for(&self, var: &VariableSchema) -> Interval {
        match var.kind {
            VariableKind::Continuous => Interval {
                lo: self.epsilon,
                hi: f64::INFINITY,
            },
            VariableKind::Unordered => {
                let hi = match (self.aitken_cap, var.levels) {
                    (true, Some(g)) => (g as f64 - 1.0) / g as f64,
                    _ => 1.0,
                };
                Interval { lo: 0.0, hi }
            }
            VariableKind::Ordered => Interval { lo: 0.0, hi: 1.0 },
        }
    }

    pub fn intervals(&self, schema: &[VariableSchema]) -> Vec<Interval> {
        schema.iter().map(|v| self.interval_for(v)).collect()
    }
}

/// Per-variable bandwidths aligned with a dataset's (kind-ordered) columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthVector {
    values: Vec<f64>,
    bounds: Vec<Interval>,
    names: Vec<String>,
}

impl BandwidthVector {
    /// Validated bandwidths for `ds` using the given bound rules.
    pub fn new(values: Vec<f64>, ds: &TypedDataset, config: &BoundsConfig) -> Result<Self> {
        Self::for_schema(values, ds.schema(), config)
    }

    pub fn for_schema(
        values: Vec<f64>,
        schema: &[VariableSchema],
        config: &BoundsConfig,
    ) -> Result<Self> {
        let bw = BandwidthVector {
            values,
            bounds: config.intervals(schema),
            names: schema.iter().map(|v| v.name.clone()).collect(),
        };
        bw.check()?;
        Ok(bw)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy with new values and the same bounds, validated.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        let bw = BandwidthVector {
            values,
            bounds: self.bounds.clone(),
            names: self.names.clone(),
        };
        bw.check()?;
        Ok(bw)
    }

    fn check(&self) -> Result<()> {
        if self.values.len() != self.bounds.len() {
            return Err(Error::Dimension(format!(
                "{} bandwidths for {} variables",
                self.values.len(),
                self.bounds.len()
            )));
        }
        for ((&value, interval), name) in self.values.iter().zip(&self.bounds).zip(&self.names) {
            if !interval.contains(value) {
                return Err(Error::BandwidthOutOfRange {
                    name: name.clone(),
                    value,
                    interval: interval.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Checks `bw` against the layout of `ds`, returning it unchanged when every
/// entry lies inside its admissible interval.
pub fn validate_bandwidths(bw: &BandwidthVector, ds: &TypedDataset) -> Result<BandwidthVector> {
    if bw.len() != ds.p() {
        return Err(Error::Dimension(format!(
            "{} bandwidths for a dataset with {} variables",
            bw.len(),
            ds.p()
        )));
    }
    for (var, interval) in ds.schema().iter().zip(bw.bounds()) {
        let expected_lo = if var.kind == VariableKind::Continuous {
            interval.lo > 0.0
        } else {
            interval.lo == 0.0
        };
        if !expected_lo || (var.kind.is_categorical() && interval.hi > 1.0) {
            return Err(Error::Schema(format!(
                "bandwidth bounds {interval} do not fit {} variable `{}`",
                var.kind, var.name
            )));
        }
    }
    bw.check()?;
    Ok(bw.clone())
}
