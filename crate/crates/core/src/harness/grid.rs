use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_cluster, Algorithm};
use crate::bandwidth::{select_bandwidths, CvResult, Evaluator, OptimizerOptions};
use crate::clustering::ClusterLabels;
use crate::error::{Error, Result};
use crate::evaluation::evaluate;
use crate::kernels::KernelSelection;
use crate::similarity::{build_matrix, SimilarityConfig};
use crate::types::{BandwidthVector, BoundsConfig, TypedDataset, VariableKind};

/// Grids larger than this need an explicit override.
pub const MAX_GRID_WITHOUT_OVERRIDE: u128 = 1_000_000;

/// Equally spaced bandwidth values `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
            return Err(Error::InvalidArgument(format!(
                "grid axis {lo}:{hi}:{step} needs lo <= hi and a positive step"
            )));
        }
        Ok(GridAxis { lo, hi, step })
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        // snap to 1e-12 so 0.1 + 2 * 0.05 prints as 0.2
        let v = ((self.lo + i as f64 * self.step) * 1e12).round() / 1e12;
        v.min(self.hi)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }
}

impl FromStr for GridAxis {
    type Err = Error;

    /// `lo:hi:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidArgument(format!("grid axis '{s}' is not lo:hi:step"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        GridAxis::new(nums[0], nums[1], nums[2])
    }
}

impl fmt::Display for GridAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

/// Number of grid points, the product of the axis lengths.
pub fn grid_size(axes: &[GridAxis]) -> u128 {
    axes.iter().map(|a| a.len() as u128).product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub lambda: Vec<f64>,
    pub ca: f64,
    pub ari: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub axes: Vec<GridAxis>,
    pub rows: Vec<GridRow>,
    /// Clustering quality at the cross-validated bandwidths.
    pub mscv: Option<GridRow>,
    pub cv: Option<CvResult>,
}

fn check_axes(ds: &TypedDataset, axes: &[GridAxis], allow_large: bool) -> Result<u128> {
    if axes.len() != ds.p() {
        return Err(Error::Dimension(format!(
            "{} grid axes for {} variables",
            axes.len(),
            ds.p()
        )));
    }
    let size = grid_size(axes);
    if size > MAX_GRID_WITHOUT_OVERRIDE && !allow_large {
        return Err(Error::InvalidArgument(format!(
            "grid has {size} points, more than {MAX_GRID_WITHOUT_OVERRIDE}; pass --allow-large to run it"
        )));
    }
    Ok(size)
}

/// Bandwidths of grid point `index`, last axis varying fastest. Continuous
/// values below `epsilon` (the grid's 0) are raised to `epsilon`.
fn point(
    ds: &TypedDataset,
    axes: &[GridAxis],
    bounds: &BoundsConfig,
    mut index: usize,
) -> Vec<f64> {
    let mut lambda = vec![0.0; axes.len()];
    for (k, axis) in axes.iter().enumerate().rev() {
        let len = axis.len();
        let mut v = axis.value(index % len);
        index /= len;
        if ds.schema()[k].kind == VariableKind::Continuous {
            v = v.max(bounds.epsilon);
        }
        lambda[k] = v;
    }
    lambda
}

fn score(
    ds: &TypedDataset,
    truth: &ClusterLabels,
    kernels: KernelSelection,
    bw: BandwidthVector,
    algo: Algorithm,
    k: usize,
    seed: u64,
) -> Result<GridRow> {
    let lambda = bw.values().to_vec();
    let cfg = SimilarityConfig::new(ds, kernels, bw)?;
    let dm = build_matrix(ds, &cfg)?;
    let labels = run_cluster(&dm, algo, k, seed)?;
    let r = evaluate(truth.as_slice(), labels.as_slice())?;
    Ok(GridRow {
        lambda,
        ca: r.ca,
        ari: r.ari,
    })
}

/// Clusters `ds` at every bandwidth combination of the grid and, when
/// `mscv` is given, at the cross-validated bandwidths too.
#[allow(clippy::too_many_arguments)]
pub fn run_gridsearch(
    ds: &TypedDataset,
    truth: &ClusterLabels,
    kernels: KernelSelection,
    axes: &[GridAxis],
    algo: Algorithm,
    k: usize,
    seed: u64,
    bounds: &BoundsConfig,
    mscv: Option<&OptimizerOptions>,
    allow_large: bool,
) -> Result<GridReport> {
    let size = check_axes(ds, axes, allow_large)?;
    if truth.len() != ds.n() {
        return Err(Error::Dimension(format!(
            "{} labels for {} rows",
            truth.len(),
            ds.n()
        )));
    }
    let rows = (0..size as usize)
        .into_par_iter()
        .map(|i| {
            let bw = BandwidthVector::new(point(ds, axes, bounds, i), ds, bounds)?;
            score(ds, truth, kernels, bw, algo, k, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mscv_row, cv) = match mscv {
        Some(opts) => {
            let cv = select_bandwidths(ds, kernels, opts)?;
            let row = score(ds, truth, kernels, cv.bandwidths.clone(), algo, k, seed)?;
            (Some(row), Some(cv))
        }
        None => (None, None),
    };
    Ok(GridReport {
        axes: axes.to_vec(),
        rows,
        mscv: mscv_row,
        cv,
    })
}

/// Cross-validation objective at every grid point, in grid order.
pub fn objective_grid(
    ds: &TypedDataset,
    kernels: KernelSelection,
    axes: &[GridAxis],
    bounds: &BoundsConfig,
    allow_large: bool,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let size = check_axes(ds, axes, allow_large)?;
    let eval = Evaluator::new(ds, kernels);
    (0..size as usize)
        .into_par_iter()
        .map(|i| {
            let bw = BandwidthVector::new(point(ds, axes, bounds, i), ds, bounds)?;
            let lambda = bw.values().to_vec();
            let f = eval.objective(&lambda);
            Ok((lambda, f))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::gen_gridsearch_categorical;

    #[test]
    fn axis_lengths() {
        let a: GridAxis = "0:10:0.05".parse().unwrap();
        assert_eq!(a.len(), 201);
        assert_eq!(a.value(200), 10.0);
        assert_eq!(a.value(3), 0.15);
        let b: GridAxis = "0:0.75:0.05".parse().unwrap();
        assert_eq!(b.len(), 16);
        assert_eq!(grid_size(&[b, b, b]), 4096);
        let c: GridAxis = "0:1:0.05".parse().unwrap();
        assert_eq!(grid_size(&[a, b, c]), 67_536);
        assert!("0:1".parse::<GridAxis>().is_err());
        assert!("1:0:0.1".parse::<GridAxis>().is_err());
        assert!("0:1:0".parse::<GridAxis>().is_err());
    }

    #[test]
    fn odometer_order() {
        let (ds, _) = gen_gridsearch_categorical(0).unwrap();
        let axes = [GridAxis::new(0.0, 0.1, 0.1).unwrap(); 3];
        let b = BoundsConfig::default();
        assert_eq!(point(&ds, &axes, &b, 0), vec![0.0, 0.0, 0.0]);
        assert_eq!(point(&ds, &axes, &b, 1), vec![0.0, 0.0, 0.1]);
        assert_eq!(point(&ds, &axes, &b, 2), vec![0.0, 0.1, 0.0]);
        assert_eq!(point(&ds, &axes, &b, 7), vec![0.1, 0.1, 0.1]);
    }

    #[test]
    fn large_grids_need_override() {
        let (ds, truth) = gen_gridsearch_categorical(0).unwrap();
        let axes = [GridAxis::new(0.0, 1.0, 0.001).unwrap(); 3];
        let err = run_gridsearch(
            &ds,
            &truth,
            KernelSelection::GAUSSIAN,
            &axes,
            Algorithm::KMeansDist,
            3,
            0,
            &BoundsConfig::default(),
            None,
            false,
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
