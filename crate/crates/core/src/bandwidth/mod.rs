//! Bandwidth selection by maximizing the leave-one-out log similarity.
//!
//! The search runs Nelder–Mead from a rule-of-thumb start plus a number of
//! Latin-hypercube starts. Continuous bandwidths are searched on a log
//! scale, categorical ones on their natural `[lo, hi]` scale; trial points
//! are projected onto the box.

mod nelder_mead;
mod objective;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSelection;
use crate::types::{BandwidthVector, BoundsConfig, Interval, TypedDataset, VariableKind};

pub use nelder_mead::{minimize, NelderMeadOptions, NelderMeadResult};
pub use objective::{mscv_objective, mscv_terms, SENTINEL};

pub(crate) use objective::Evaluator;

/// Latin-hypercube starts are drawn in blocks of this many points, each block
/// from its own stream, so the starts used with `m` restarts are a prefix of
/// those used with `m + 1`.
const LHS_BLOCK: usize = 10;

/// Largest continuous search bandwidth, relative to the variable's scale.
const CONTINUOUS_UPPER_FACTOR: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    /// Latin-hypercube starts in addition to the rule-of-thumb start.
    pub restarts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per start; `None` means `500 p`.
    pub max_evals: Option<usize>,
    /// Simplex size (transformed coordinates) at which a start stops.
    pub tolerance: f64,
    pub bounds: BoundsConfig,
    /// Evaluate on a seeded subsample of this many rows when `n` is larger.
    pub subsample: Option<usize>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            restarts: 10,
            seed: 0,
            max_evals: None,
            tolerance: 1e-6,
            bounds: BoundsConfig::default(),
            subsample: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start: Vec<f64>,
    pub bandwidths: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub bandwidths: BandwidthVector,
    pub objective: f64,
    pub evaluations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// Rows used for the objective when a subsample was taken.
    pub subsample: Option<usize>,
    pub starts: Vec<StartRecord>,
}

/// Maps between bandwidths and the optimizer's coordinates.
struct Transform {
    log: Vec<bool>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    bounds: Vec<Interval>,
}

impl Transform {
    fn new(ds: &TypedDataset, bounds: &[Interval]) -> Self {
        let sds = ds.continuous_sd();
        let mut log = Vec::new();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for (k, (var, iv)) in ds.schema().iter().zip(bounds).enumerate() {
            if var.kind == VariableKind::Continuous {
                let scale = positive_scale(sds[k]);
                log.push(true);
                lo.push(iv.lo.ln());
                hi.push((CONTINUOUS_UPPER_FACTOR * scale).min(iv.hi).max(iv.lo).ln());
            } else {
                log.push(false);
                lo.push(iv.lo);
                hi.push(iv.hi);
            }
        }
        Transform {
            log,
            lo,
            hi,
            bounds: bounds.to_vec(),
        }
    }

    fn to_lambda(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .enumerate()
            .map(|(k, &v)| {
                let iv = self.bounds[k];
                if v <= self.lo[k] {
                    // exp(ln(lo)) need not round-trip
                    iv.lo
                } else if self.log[k] {
                    v.exp().clamp(iv.lo, iv.hi)
                } else {
                    v.min(iv.hi)
                }
            })
            .collect()
    }

    fn to_coord(&self, lambda: &[f64]) -> Vec<f64> {
        lambda
            .iter()
            .zip(&self.log)
            .zip(self.lo.iter().zip(&self.hi))
            .map(|((&x, &log), (&l, &h))| if log { x.ln() } else { x }.clamp(l, h))
            .collect()
    }

    fn steps(&self) -> Vec<f64> {
        self.log
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&log, (&l, &h))| {
                if log {
                    0.5f64.min(h - l)
                } else {
                    0.1 * (h - l)
                }
            })
            .collect()
    }
}

fn positive_scale(sd: f64) -> f64 {
    if sd > 0.0 && sd.is_finite() {
        sd
    } else {
        1.0
    }
}

/// Rule-of-thumb start: `1.06 σ n^(-1/5)` for continuous variables and the
/// midpoint of the admissible range for categorical ones.
pub fn rule_of_thumb(ds: &TypedDataset, bounds: &[Interval]) -> Vec<f64> {
    let sds = ds.continuous_sd();
    let n = ds.n() as f64;
    ds.schema()
        .iter()
        .zip(bounds)
        .enumerate()
        .map(|(k, (var, iv))| {
            if var.kind == VariableKind::Continuous {
                (1.06 * positive_scale(sds[k]) * n.powf(-0.2)).max(iv.lo)
            } else {
                0.5 * (iv.lo + iv.hi)
            }
        })
        .collect()
}

/// `count` Latin-hypercube starting points. Continuous coordinates are
/// log-uniform over `[0.01 σ, 10 σ]`, categorical ones uniform over their range.
pub fn lhs_starts(
    ds: &TypedDataset,
    bounds: &[Interval],
    count: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let sds = ds.continuous_sd();
    let p = ds.p();
    let mut out = Vec::with_capacity(count);
    let mut block = 0u64;
    while out.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block + 1);
        let mut points = vec![vec![0.0; p]; LHS_BLOCK];
        for (k, (var, iv)) in ds.schema().iter().zip(bounds).enumerate() {
            let mut strata: Vec<usize> = (0..LHS_BLOCK).collect();
            strata.shuffle(&mut rng);
            for (point, &s) in points.iter_mut().zip(&strata) {
                let u = (s as f64 + rng.random::<f64>()) / LHS_BLOCK as f64;
                point[k] = if var.kind == VariableKind::Continuous {
                    let scale = positive_scale(sds[k]);
                    let (a, b) = ((0.01 * scale).ln(), (10.0 * scale).ln());
                    (a + u * (b - a)).exp().clamp(iv.lo, iv.hi)
                } else {
                    iv.lo + u * (iv.hi - iv.lo)
                };
            }
        }
        out.extend(points);
        block += 1;
    }
    out.truncate(count);
    out
}

/// Selects bandwidths maximizing [`mscv_objective`]. Deterministic for fixed
/// options: starts run in parallel but the winner is the highest objective,
/// ties going to the earliest start.
pub fn select_bandwidths(
    ds: &TypedDataset,
    kernels: KernelSelection,
    opts: &OptimizerOptions,
) -> Result<CvResult> {
    if ds.n() < 2 {
        return Err(Error::InvalidArgument(
            "bandwidth selection needs at least two rows".into(),
        ));
    }
    if opts.tolerance.is_nan() || opts.tolerance < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance {} must be nonnegative",
            opts.tolerance
        )));
    }
    let bounds = opts.bounds.intervals(ds.schema());
    let template =
        BandwidthVector::for_schema(rule_of_thumb(ds, &bounds), ds.schema(), &opts.bounds)?;

    let sample;
    let (data, subsample) = match opts.subsample {
        Some(m) if m < 2 => {
            return Err(Error::InvalidArgument(
                "subsample must be at least 2 rows".into(),
            ))
        }
        Some(m) if ds.n() > m => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(0);
            let mut idx = rand::seq::index::sample(&mut rng, ds.n(), m).into_vec();
            idx.sort_unstable();
            sample = ds.select_rows(&idx);
            (&sample, Some(m))
        }
        _ => (ds, None),
    };

    let p = ds.p();
    let evaluator = Evaluator::new(data, kernels);
    let transform = Transform::new(data, &bounds);
    let mut starts = vec![rule_of_thumb(data, &bounds)];
    starts.extend(lhs_starts(data, &bounds, opts.restarts, opts.seed));
    let nm = NelderMeadOptions {
        tolerance: opts.tolerance,
        max_evals: opts.max_evals.unwrap_or(500 * p.max(1)),
    };
    let steps = transform.steps();

    let records: Vec<StartRecord> = starts
        .par_iter()
        .map(|start| {
            let x0 = transform.to_coord(start);
            let r = minimize(
                |t| -evaluator.objective(&transform.to_lambda(t)),
                &x0,
                &steps,
                &transform.lo,
                &transform.hi,
                &nm,
            );
            let lambda = transform.to_lambda(&r.x);
            StartRecord {
                start: start.clone(),
                objective: evaluator.objective(&lambda),
                bandwidths: lambda,
                evaluations: r.evals + 1,
                converged: r.converged,
            }
        })
        .collect();

    let mut best = 0;
    for (i, r) in records.iter().enumerate() {
        if r.objective > records[best].objective {
            best = i;
        }
    }
    if records[best].objective <= SENTINEL {
        return Err(Error::Numerical(
            "every start stayed where some leave-one-out similarity is zero; \
             try larger starting bandwidths or a wider categorical range"
                .into(),
        ));
    }
    let winner = &records[best];
    Ok(CvResult {
        bandwidths: template.with_values(winner.bandwidths.clone())?,
        objective: winner.objective,
        evaluations: records.iter().map(|r| r.evaluations).sum(),
        restarts: records.len(),
        converged: winner.converged,
        subsample,
        starts: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Column, VariableSchema};

    #[test]
    fn duplicated_pair_goes_to_lower_bound() {
        let ds = TypedDataset::from_columns(
            vec![VariableSchema::continuous("x")],
            vec![Column::Continuous(vec![1.0, 1.0])],
        )
        .unwrap();
        let r = select_bandwidths(&ds, KernelSelection::GAUSSIAN, &OptimizerOptions::default())
            .unwrap();
        assert!(r.converged);
        assert_eq!(
            r.bandwidths.values()[0],
            crate::types::DEFAULT_CONTINUOUS_EPSILON
        );
        let again = mscv_objective(&ds, &r.bandwidths, KernelSelection::GAUSSIAN).unwrap();
        assert_eq!(again, r.objective);
    }

    #[test]
    fn lhs_prefix_property() {
        let ds = TypedDataset::from_columns(
            vec![
                VariableSchema::continuous("x"),
                VariableSchema::unordered("u", 3),
            ],
            vec![
                Column::Continuous(vec![0.0, 1.0, 5.0, 2.0]),
                Column::Categorical(vec![0, 1, 2, 1]),
            ],
        )
        .unwrap();
        let bounds = BoundsConfig::default().intervals(ds.schema());
        let a = lhs_starts(&ds, &bounds, 13, 7);
        let b = lhs_starts(&ds, &bounds, 25, 7);
        assert_eq!(a[..], b[..13]);
        // each block of ten covers all strata of the categorical coordinate
        let mut strata: Vec<usize> = b[..10].iter().map(|p| (p[1] * 10.0) as usize).collect();
        strata.sort_unstable();
        assert_eq!(strata, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn distinct_categorical_rows_smooth_to_cap() {
        let ds = TypedDataset::from_columns(
            vec![VariableSchema::unordered("u", 3)],
            vec![Column::Categorical(vec![0, 1, 2])],
        )
        .unwrap();
        let r = select_bandwidths(&ds, KernelSelection::GAUSSIAN, &OptimizerOptions::default())
            .unwrap();
        assert!((r.bandwidths.values()[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sentinel_plateau_is_an_error() {
        // the far point has no Epanechnikov neighbour near the single start
        let ds = TypedDataset::from_columns(
            vec![VariableSchema::continuous("x")],
            vec![Column::Continuous(vec![0.0, 1.0, 1000.0])],
        )
        .unwrap();
        let opts = OptimizerOptions {
            restarts: 0,
            ..Default::default()
        };
        let err = select_bandwidths(&ds, KernelSelection::EPANECHNIKOV, &opts).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }
}
