//! Reproducible study drivers shared by the CLI and the acceptance suite:
//! distance construction from a metric choice, clustering, per-algorithm
//! reports, bandwidth grid searches and Monte Carlo replications.

mod grid;
mod montecarlo;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use grid::{
    grid_size, objective_grid, run_gridsearch, GridAxis, GridReport, GridRow,
    MAX_GRID_WITHOUT_OVERRIDE,
};
pub use montecarlo::{
    derive_seed, run_montecarlo, summarize, McConfig, McSource, RepResult, Summary,
};

use crate::bandwidth::{select_bandwidths, CvResult, OptimizerOptions};
use crate::baselines::{baseline_matrix, BaselineKind};
use crate::clustering::{cut, hac, kmeans_dist, ClusterLabels, Linkage};
use crate::error::{Error, Result};
use crate::evaluation::evaluate;
use crate::kernels::KernelSelection;
use crate::similarity::{build_matrix, SimilarityConfig};
use crate::types::{BandwidthVector, BoundsConfig, DissimilarityMatrix, TypedDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Kdsum(KernelSelection),
    Baseline(BaselineKind),
}

impl Metric {
    pub fn name(&self) -> String {
        match self {
            Metric::Kdsum(k) => format!("kdsum/{}", k.continuous.name()),
            Metric::Baseline(b) => b.name().to_string(),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    /// `kdsum`, `kdsum/gaussian`, `kdsum/epanechnikov` or a baseline name.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.split_once('/') {
            Some(("kdsum", kernel)) => Ok(Metric::Kdsum(KernelSelection {
                continuous: kernel.parse()?,
            })),
            None if lower == "kdsum" => Ok(Metric::Kdsum(KernelSelection::GAUSSIAN)),
            _ => lower.parse().map(Metric::Baseline).map_err(|_| {
                Error::InvalidArgument(format!(
                    "unknown metric '{s}'; expected kdsum[/gaussian|/epanechnikov], gower, huang, podani or wishart"
                ))
            }),
        }
    }
}

/// Where KDSUM bandwidths come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BandwidthSource {
    Mscv(OptimizerOptions),
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceOutcome {
    pub matrix: DissimilarityMatrix,
    pub bandwidths: Option<BandwidthVector>,
    pub cv: Option<CvResult>,
}

/// Builds the dissimilarity matrix of `ds` under `metric`. The bandwidth
/// source is only consulted for KDSUM.
pub fn compute_distance(
    ds: &TypedDataset,
    metric: Metric,
    source: &BandwidthSource,
    bounds: &BoundsConfig,
) -> Result<DistanceOutcome> {
    match metric {
        Metric::Baseline(kind) => Ok(DistanceOutcome {
            matrix: baseline_matrix(ds, kind, None)?,
            bandwidths: None,
            cv: None,
        }),
        Metric::Kdsum(kernels) => {
            let (bw, cv) = match source {
                BandwidthSource::Mscv(opts) => {
                    let cv = select_bandwidths(ds, kernels, opts)?;
                    (cv.bandwidths.clone(), Some(cv))
                }
                BandwidthSource::Fixed(values) => {
                    (BandwidthVector::new(values.clone(), ds, bounds)?, None)
                }
            };
            let cfg = SimilarityConfig::new(ds, kernels, bw.clone())?;
            Ok(DistanceOutcome {
                matrix: build_matrix(ds, &cfg)?,
                bandwidths: Some(bw),
                cv,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    Hac(Linkage),
    KMeansDist,
}

impl Algorithm {
    pub fn name(&self) -> String {
        match self {
            Algorithm::Hac(l) => format!("hac/{}", l.name()),
            Algorithm::KMeansDist => "kmeans".to_string(),
        }
    }

    /// Every linkage plus the distance k-means.
    pub fn all() -> Vec<Algorithm> {
        Linkage::ALL
            .iter()
            .map(|&l| Algorithm::Hac(l))
            .chain([Algorithm::KMeansDist])
            .collect()
    }

    pub fn all_hac() -> Vec<Algorithm> {
        Linkage::ALL.iter().map(|&l| Algorithm::Hac(l)).collect()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    /// `hac/<linkage>`, a bare linkage name, or `kmeans`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if matches!(lower.as_str(), "kmeans" | "kmeans_dist" | "k-means") {
            return Ok(Algorithm::KMeansDist);
        }
        let linkage = lower.strip_prefix("hac/").unwrap_or(&lower);
        linkage.parse().map(Algorithm::Hac)
    }
}

/// Parses a comma-separated algorithm list; `all` and `hac` expand.
pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.to_ascii_lowercase().as_str() {
            "all" => out.extend(Algorithm::all()),
            "hac" => out.extend(Algorithm::all_hac()),
            _ => out.push(item.parse()?),
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(
            "no clustering algorithm given".into(),
        ));
    }
    Ok(out)
}

pub fn run_cluster(
    dm: &DissimilarityMatrix,
    algo: Algorithm,
    k: usize,
    seed: u64,
) -> Result<ClusterLabels> {
    match algo {
        Algorithm::Hac(linkage) => cut(&hac(dm, linkage)?, k),
        Algorithm::KMeansDist => kmeans_dist(dm, k, seed, 100),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmReport {
    pub algorithm: String,
    pub ca: f64,
    pub ari: f64,
    pub labels: ClusterLabels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub n: usize,
    pub k: usize,
    pub metric: String,
    pub bandwidths: Option<Vec<f64>>,
    pub reports: Vec<AlgorithmReport>,
    /// Index into `reports` of the highest CA (ties: higher ARI, then first).
    pub best: usize,
}

impl PipelineReport {
    pub fn best_report(&self) -> &AlgorithmReport {
        &self.reports[self.best]
    }
}

pub(crate) fn best_index(scores: impl IntoIterator<Item = (f64, f64)>) -> usize {
    let mut best = 0;
    let mut top = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (i, (ca, ari)) in scores.into_iter().enumerate() {
        if ca > top.0 || (ca == top.0 && ari > top.1) {
            best = i;
            top = (ca, ari);
        }
    }
    best
}

/// Clusters `dm` with each algorithm and scores it against `truth`.
pub fn evaluate_algorithms(
    dm: &DissimilarityMatrix,
    truth: &ClusterLabels,
    algos: &[Algorithm],
    k: usize,
    seed: u64,
) -> Result<Vec<AlgorithmReport>> {
    if truth.len() != dm.n() {
        return Err(Error::Dimension(format!(
            "{} labels for {} rows",
            truth.len(),
            dm.n()
        )));
    }
    algos
        .iter()
        .map(|&algo| {
            let labels = run_cluster(dm, algo, k, seed)?;
            let r = evaluate(truth.as_slice(), labels.as_slice())?;
            Ok(AlgorithmReport {
                algorithm: algo.name(),
                ca: r.ca,
                ari: r.ari,
                labels,
            })
        })
        .collect()
}

/// Distance, clustering with every algorithm in `algos`, and evaluation.
#[allow(clippy::too_many_arguments)]
pub fn run_pipeline(
    ds: &TypedDataset,
    truth: &ClusterLabels,
    metric: Metric,
    source: &BandwidthSource,
    bounds: &BoundsConfig,
    algos: &[Algorithm],
    k: usize,
    seed: u64,
) -> Result<PipelineReport> {
    if algos.is_empty() {
        return Err(Error::InvalidArgument(
            "no clustering algorithm given".into(),
        ));
    }
    let dist = compute_distance(ds, metric, source, bounds)?;
    let reports = evaluate_algorithms(&dist.matrix, truth, algos, k, seed)?;
    Ok(PipelineReport {
        n: ds.n(),
        k,
        metric: metric.name(),
        bandwidths: dist.bandwidths.map(|b| b.values().to_vec()),
        best: best_index(reports.iter().map(|r| (r.ca, r.ari))),
        reports,
    })
}
