//! Classical mixed-type distances: Gower, Huang, Podani and Wishart.
//!
//! Categorical variables (unordered and ordered alike) enter every metric
//! through the mismatch indicator. Continuous variables with zero range or
//! zero standard deviation are skipped by Podani and Wishart and count as a
//! perfect match for Gower.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{DissimilarityMatrix, Row, TypedDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Gower,
    Huang,
    Podani,
    Wishart,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::Gower,
        BaselineKind::Huang,
        BaselineKind::Podani,
        BaselineKind::Wishart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Gower => "gower",
            BaselineKind::Huang => "huang",
            BaselineKind::Podani => "podani",
            BaselineKind::Wishart => "wishart",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown baseline metric `{s}`")))
    }
}

fn mismatches(xi: Row<'_>, xj: Row<'_>) -> usize {
    let u = xi
        .unordered
        .iter()
        .zip(xj.unordered)
        .filter(|(a, b)| a != b)
        .count();
    let o = xi
        .ordered
        .iter()
        .zip(xj.ordered)
        .filter(|(a, b)| a != b)
        .count();
    u + o
}

/// `1 - mean similarity`, with `1 - |Δ|/range` for continuous variables and
/// the match indicator for categorical ones. `ranges` holds `max - min` per
/// continuous variable over the whole dataset.
pub fn gower_distance(xi: Row<'_>, xj: Row<'_>, ranges: &[f64]) -> f64 {
    let p = xi.continuous.len() + xi.unordered.len() + xi.ordered.len();
    if p == 0 {
        return 0.0;
    }
    let mut dissim = 0.0;
    for ((&a, &b), &r) in xi.continuous.iter().zip(xj.continuous).zip(ranges) {
        if r > 0.0 {
            dissim += ((a - b).abs() / r).min(1.0);
        }
    }
    dissim += mismatches(xi, xj) as f64;
    (dissim / p as f64).clamp(0.0, 1.0)
}

/// Squared Euclidean distance on the continuous block plus `γ` per
/// categorical mismatch.
pub fn huang_distance(xi: Row<'_>, xj: Row<'_>, gamma: f64) -> f64 {
    let sq: f64 = xi
        .continuous
        .iter()
        .zip(xj.continuous)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    sq + gamma * mismatches(xi, xj) as f64
}

fn scaled_euclidean(xi: Row<'_>, xj: Row<'_>, divisors: &[f64]) -> f64 {
    let mut total = 0.0;
    for ((&a, &b), &s) in xi.continuous.iter().zip(xj.continuous).zip(divisors) {
        if s > 0.0 {
            let z = (a - b) / s;
            total += z * z;
        }
    }
    (total + mismatches(xi, xj) as f64).sqrt()
}

/// Euclidean distance of range-scaled continuous differences and categorical
/// mismatch indicators.
pub fn podani_distance(xi: Row<'_>, xj: Row<'_>, ranges: &[f64]) -> f64 {
    scaled_euclidean(xi, xj, ranges)
}

/// As [`podani_distance`] with standard deviations in place of ranges.
pub fn wishart_distance(xi: Row<'_>, xj: Row<'_>, sds: &[f64]) -> f64 {
    scaled_euclidean(xi, xj, sds)
}

/// Mean sample variance of the continuous variables, Huang's default weight.
pub fn huang_gamma(ds: &TypedDataset) -> Result<f64> {
    if ds.p_c() == 0 {
        return Err(Error::InvalidArgument(
            "Huang's weight is the mean continuous variance; supply it explicitly when there are no continuous variables"
                .into(),
        ));
    }
    let sds = ds.continuous_sd();
    Ok(sds.iter().map(|s| s * s).sum::<f64>() / sds.len() as f64)
}

/// Distance matrix for a baseline metric. Dataset-wide statistics are
/// computed once; `gamma` overrides the Huang weight.
pub fn baseline_matrix(
    ds: &TypedDataset,
    kind: BaselineKind,
    gamma: Option<f64>,
) -> Result<DissimilarityMatrix> {
    let stats: Vec<f64> = match kind {
        BaselineKind::Gower | BaselineKind::Podani => ds.continuous_range(),
        BaselineKind::Wishart => ds.continuous_sd(),
        BaselineKind::Huang => {
            let g = match gamma {
                Some(g) if g >= 0.0 && g.is_finite() => g,
                Some(g) => {
                    return Err(Error::InvalidArgument(format!(
                        "Huang weight {g} must be nonnegative"
                    )))
                }
                None => huang_gamma(ds)?,
            };
            vec![g]
        }
    };
    let f = |a: Row<'_>, b: Row<'_>| match kind {
        BaselineKind::Gower => gower_distance(a, b, &stats),
        BaselineKind::Huang => huang_distance(a, b, stats[0]),
        BaselineKind::Podani => podani_distance(a, b, &stats),
        BaselineKind::Wishart => wishart_distance(a, b, &stats),
    };
    let n = ds.n();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| f(ds.row(i), ds.row(j))).collect())
        .collect();
    DissimilarityMatrix::from_upper_rows(n, upper)
}
