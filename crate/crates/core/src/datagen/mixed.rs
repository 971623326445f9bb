use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{split_sizes, Generated};
use crate::clustering::ClusterLabels;
use crate::error::{Error, Result};
use crate::types::{Column, TypedDataset, VariableSchema};

/// Two-cluster mixed data with controlled overlap between the clusters'
/// per-variable distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedGenSpec {
    pub n: usize,
    /// Share of rows in the first cluster.
    pub first_fraction: f64,
    pub continuous: usize,
    pub unordered_levels: Vec<u32>,
    pub ordered_levels: Vec<u32>,
    /// Overlapping area of the two normal densities of each continuous variable.
    pub continuous_overlap: f64,
    /// `Σ_j min(p1_j, p2_j)` for each categorical variable.
    pub categorical_overlap: f64,
    pub seed: u64,
}

impl MixedGenSpec {
    /// Equal clusters, one overlap level for every variable.
    pub fn balanced(
        n: usize,
        continuous: usize,
        unordered: Vec<u32>,
        ordered: Vec<u32>,
        overlap: f64,
        seed: u64,
    ) -> Self {
        MixedGenSpec {
            n,
            first_fraction: 0.5,
            continuous,
            unordered_levels: unordered,
            ordered_levels: ordered,
            continuous_overlap: overlap,
            categorical_overlap: overlap,
            seed,
        }
    }
}

/// Overlapping area of N(0, 1) and N(Δ, 1): `2 Φ(-Δ/2)`.
pub fn normal_overlap(delta: f64) -> f64 {
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    2.0 * std.cdf(-delta.abs() / 2.0)
}

/// Mean separation of two unit-variance normals whose densities overlap
/// by `overlap`, found by bisection to within 1e-12.
pub fn separation_for_overlap(overlap: f64) -> Result<f64> {
    if !(overlap > 0.0 && overlap < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "overlap {overlap} must lie strictly between 0 and 1"
        )));
    }
    let (mut lo, mut hi) = (0.0, 80.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if normal_overlap(mid) > overlap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Level probabilities of the two clusters for a `g`-level variable. Each
/// cluster keeps `1 - overlap` of its mass uniformly on its own block of
/// levels (lower half for the first, upper half for the second) and spreads
/// `overlap` uniformly over all levels, so `Σ min(p1, p2) = overlap`.
pub fn categorical_masses(levels: u32, overlap: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "a categorical variable with {levels} level(s) cannot separate two clusters"
        )));
    }
    if !(overlap > 0.0 && overlap < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "overlap {overlap} must lie strictly between 0 and 1"
        )));
    }
    let g = levels as usize;
    let split = g / 2;
    let shared = overlap / g as f64;
    let mut p1 = vec![shared; g];
    let mut p2 = vec![shared; g];
    for p in p1.iter_mut().take(split) {
        *p += (1.0 - overlap) / split as f64;
    }
    for p in p2.iter_mut().skip(split) {
        *p += (1.0 - overlap) / (g - split) as f64;
    }
    Ok((p1, p2))
}

pub fn gen_mixed(spec: &MixedGenSpec) -> Result<Generated> {
    if spec.n < 2 {
        return Err(Error::InvalidArgument("need at least two rows".into()));
    }
    if !(spec.first_fraction > 0.0 && spec.first_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "cluster fraction {} must lie strictly between 0 and 1",
            spec.first_fraction
        )));
    }
    if spec.continuous + spec.unordered_levels.len() + spec.ordered_levels.len() == 0 {
        return Err(Error::InvalidArgument("no variables requested".into()));
    }
    let delta = if spec.continuous > 0 {
        separation_for_overlap(spec.continuous_overlap)?
    } else {
        0.0
    };
    let first = ((spec.n as f64 * spec.first_fraction).round() as usize).clamp(1, spec.n - 1);
    let sizes = [first, spec.n - first];
    let labels = split_sizes(&sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut schema = Vec::new();
    let mut columns = Vec::new();
    for k in 0..spec.continuous {
        let values = labels
            .iter()
            .map(|&c| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z + if c == 0 { 0.0 } else { delta }
            })
            .collect();
        schema.push(VariableSchema::continuous(format!("X{}", k + 1)));
        columns.push(Column::Continuous(values));
    }
    let categorical = spec
        .unordered_levels
        .iter()
        .map(|&g| (g, false))
        .chain(spec.ordered_levels.iter().map(|&g| (g, true)));
    for (g, ordered) in categorical {
        let (p1, p2) = categorical_masses(g, spec.categorical_overlap)?;
        let d1 = WeightedIndex::new(&p1).map_err(|e| Error::Numerical(e.to_string()))?;
        let d2 = WeightedIndex::new(&p2).map_err(|e| Error::Numerical(e.to_string()))?;
        let codes = labels
            .iter()
            .map(|&c| if c == 0 { d1.sample(&mut rng) } else { d2.sample(&mut rng) } as u32)
            .collect();
        let name = format!("X{}", schema.len() + 1);
        schema.push(if ordered {
            VariableSchema::ordered(name, g)
        } else {
            VariableSchema::unordered(name, g)
        });
        columns.push(Column::Categorical(codes));
    }
    let ds = TypedDataset::from_columns(schema, columns)?;
    Ok((ds, ClusterLabels::new(labels)))
}

/// The mixed bandwidth-grid dataset: 200 rows split 40:60, one continuous
/// variable with 5% overlap, one unordered and one ordered 4-level variable
/// with 35% overlap.
pub fn gen_gridsearch_mixed(seed: u64) -> Result<Generated> {
    gen_mixed(&MixedGenSpec {
        n: 200,
        first_fraction: 0.4,
        continuous: 1,
        unordered_levels: vec![4],
        ordered_levels: vec![4],
        continuous_overlap: 0.05,
        categorical_overlap: 0.35,
        seed,
    })
}
