use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compute_distance, run_cluster, Algorithm, BandwidthSource, Metric};
use crate::bandwidth::OptimizerOptions;
use crate::datagen::{gen_mixed, gen_sample_size, gen_sim, Generated, MixedGenSpec, SimSpec};
use crate::error::{Error, Result};
use crate::evaluation::evaluate;
use crate::types::BoundsConfig;

/// What each replicate generates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum McSource {
    /// A simulation; a size sets every cluster to that many rows.
    Sim(u8),
    /// Five unit-variance normal clusters; the size is rows per cluster.
    SampleSize,
    /// Two-cluster mixed data; the size replaces `n`.
    Mixed(MixedGenSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub source: McSource,
    pub reps: usize,
    /// Sizes to sweep; empty means the generator's default.
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub metric: Metric,
    pub algorithms: Vec<Algorithm>,
    /// Number of clusters to cut; defaults to the ground-truth count.
    pub k: Option<usize>,
    /// Options for cross-validated bandwidths; the seed is replaced per replicate.
    pub optimizer: OptimizerOptions,
    pub bounds: BoundsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub size: Option<usize>,
    pub rep: usize,
    pub seed: u64,
    pub algorithm: String,
    pub ca: f64,
    pub ari: f64,
    /// Wall clock of bandwidth selection, distance and clustering.
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub size: Option<usize>,
    pub algorithm: String,
    pub reps: usize,
    pub mean_ca: f64,
    pub median_ca: f64,
    pub q25_ca: f64,
    pub q75_ca: f64,
    pub mean_ari: f64,
    pub median_ari: f64,
    pub q25_ari: f64,
    pub q75_ari: f64,
    pub mean_runtime: f64,
}

/// The `counter`-th seed of the stream started by `master` (SplitMix64).
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    let mut z = master.wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn generate(source: &McSource, size: Option<usize>, seed: u64) -> Result<Generated> {
    match source {
        McSource::Sim(sim) => {
            let mut spec = SimSpec::new(*sim, seed);
            if let Some(m) = size {
                spec.sizes = Some(vec![m; crate::datagen::sim_clusters(*sim)?]);
            }
            gen_sim(&spec)
        }
        McSource::SampleSize => gen_sample_size(
            size.ok_or_else(|| {
                Error::InvalidArgument("the sample-size study needs --sizes".into())
            })?,
            seed,
        ),
        McSource::Mixed(template) => {
            let mut spec = template.clone();
            spec.seed = seed;
            if let Some(n) = size {
                spec.n = n;
            }
            gen_mixed(&spec)
        }
    }
}

fn run_rep(
    cfg: &McConfig,
    size: Option<usize>,
    rep: usize,
    counter: u64,
) -> Result<Vec<RepResult>> {
    let data_seed = derive_seed(cfg.seed, 3 * counter);
    let (ds, truth) = generate(&cfg.source, size, data_seed)?;
    let k = cfg.k.unwrap_or_else(|| truth.k());
    let opts = OptimizerOptions {
        seed: derive_seed(cfg.seed, 3 * counter + 1),
        ..cfg.optimizer.clone()
    };
    let cluster_seed = derive_seed(cfg.seed, 3 * counter + 2);

    let start = Instant::now();
    let dist = compute_distance(&ds, cfg.metric, &BandwidthSource::Mscv(opts), &cfg.bounds)?;
    let distance_secs = start.elapsed().as_secs_f64();

    let mut out = Vec::with_capacity(cfg.algorithms.len());
    for &algo in &cfg.algorithms {
        let start = Instant::now();
        let labels = run_cluster(&dist.matrix, algo, k, cluster_seed)?;
        let cluster_secs = start.elapsed().as_secs_f64();
        let r = evaluate(truth.as_slice(), labels.as_slice())?;
        out.push(RepResult {
            size,
            rep,
            seed: data_seed,
            algorithm: algo.name(),
            ca: r.ca,
            ari: r.ari,
            runtime_seconds: distance_secs + cluster_secs,
        });
    }
    Ok(out)
}

/// Runs every (size, replicate) pair in parallel. Replicate seeds depend only
/// on the master seed and the pair's position, so results do not depend on
/// the thread count. Rows come back ordered by size, replicate, algorithm.
pub fn run_montecarlo(cfg: &McConfig) -> Result<Vec<RepResult>> {
    if cfg.reps == 0 {
        return Err(Error::InvalidArgument("reps must be positive".into()));
    }
    if cfg.algorithms.is_empty() {
        return Err(Error::InvalidArgument(
            "no clustering algorithm given".into(),
        ));
    }
    let sizes: Vec<Option<usize>> = if cfg.sizes.is_empty() {
        vec![None]
    } else {
        cfg.sizes.iter().map(|&s| Some(s)).collect()
    };
    let jobs: Vec<(Option<usize>, usize, u64)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(si, &size)| {
            (0..cfg.reps).map(move |rep| (size, rep, (si * cfg.reps + rep) as u64))
        })
        .collect();
    let nested = jobs
        .par_iter()
        .map(|&(size, rep, counter)| run_rep(cfg, size, rep, counter))
        .collect::<Result<Vec<_>>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Per (size, algorithm) summaries in order of first appearance.
pub fn summarize(results: &[RepResult]) -> Vec<Summary> {
    let mut groups: Vec<(Option<usize>, String, Vec<&RepResult>)> = Vec::new();
    for r in results {
        match groups
            .iter_mut()
            .find(|(s, a, _)| *s == r.size && *a == r.algorithm)
        {
            Some(g) => g.2.push(r),
            None => groups.push((r.size, r.algorithm.clone(), vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(size, algorithm, rows)| {
            let sorted = |f: fn(&RepResult) -> f64| {
                let mut v: Vec<f64> = rows.iter().map(|r| f(r)).collect();
                v.sort_by(f64::total_cmp);
                v
            };
            let ca = sorted(|r| r.ca);
            let ari = sorted(|r| r.ari);
            let rt = sorted(|r| r.runtime_seconds);
            Summary {
                size,
                algorithm,
                reps: rows.len(),
                mean_ca: mean(&ca),
                median_ca: quantile(&ca, 0.5),
                q25_ca: quantile(&ca, 0.25),
                q75_ca: quantile(&ca, 0.75),
                mean_ari: mean(&ari),
                median_ari: quantile(&ari, 0.5),
                q25_ari: quantile(&ari, 0.25),
                q75_ari: quantile(&ari, 0.75),
                mean_runtime: mean(&rt),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::Linkage;
    use crate::kernels::KernelSelection;

    fn config(source: McSource, sizes: Vec<usize>) -> McConfig {
        McConfig {
            source,
            reps: 3,
            sizes,
            seed: 42,
            metric: Metric::Kdsum(KernelSelection::GAUSSIAN),
            algorithms: vec![Algorithm::Hac(Linkage::Average)],
            k: None,
            optimizer: OptimizerOptions {
                restarts: 1,
                ..Default::default()
            },
            bounds: BoundsConfig::default(),
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let seeds: Vec<u64> = (0..100).map(|c| derive_seed(7, c)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_eq!(derive_seed(7, 3), seeds[3]);
        assert_ne!(derive_seed(8, 3), seeds[3]);
    }

    #[test]
    fn sample_size_runs_are_deterministic() {
        let cfg = config(McSource::SampleSize, vec![10, 25]);
        let a = run_montecarlo(&cfg).unwrap();
        assert_eq!(a.len(), 6);
        assert!(a.iter().all(|r| r.runtime_seconds > 0.0));
        let b = run_montecarlo(&cfg).unwrap();
        let strip = |v: &[RepResult]| {
            v.iter()
                .map(|r| (r.size, r.rep, r.seed, r.ca, r.ari))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
        let s = summarize(&a);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].size, Some(10));
        assert_eq!(s[0].reps, 3);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&[5.0], 0.25), 5.0);
    }

    #[test]
    fn sample_size_requires_sizes() {
        assert!(run_montecarlo(&config(McSource::SampleSize, vec![])).is_err());
    }
}
