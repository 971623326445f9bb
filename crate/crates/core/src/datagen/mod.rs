//! Seeded data generators for the simulation studies.
//!
//! All generators use ChaCha8 streams seeded from a `u64`, so output is
//! identical across platforms.

mod mixed;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

pub use mixed::{
    categorical_masses, gen_gridsearch_mixed, gen_mixed, normal_overlap, separation_for_overlap,
    MixedGenSpec,
};

use crate::clustering::ClusterLabels;
use crate::error::{Error, Result};
use crate::types::{Column, TypedDataset, VariableSchema};

/// A dataset with its ground-truth labels.
pub type Generated = (TypedDataset, ClusterLabels);

/// Seed of the fixed two-moons point cloud that Sims 1 and 6 jitter.
const MOONS_BASE_SEED: u64 = 0x6d6f_6f6e;
pub const MOON_RADIUS: f64 = 5.0;
pub const MOON_NOISE: f64 = 0.25;
/// Half-width of the per-replicate uniform shift applied to each coordinate.
pub const MOON_JITTER: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSpec {
    /// Simulation number, 1 to 6.
    pub sim: u8,
    pub seed: u64,
    /// Per-cluster sizes replacing the defaults.
    pub sizes: Option<Vec<usize>>,
}

impl SimSpec {
    pub fn new(sim: u8, seed: u64) -> Self {
        SimSpec {
            sim,
            seed,
            sizes: None,
        }
    }
}

/// Default cluster sizes of each simulation.
pub fn default_sizes(sim: u8) -> Result<Vec<usize>> {
    Ok(match sim {
        1 | 6 => vec![97, 276],
        2 => vec![2000, 50],
        3 | 4 => vec![100, 100],
        5 => vec![67, 67, 66],
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown simulation {sim}; expected 1 to 6"
            )))
        }
    })
}

/// Number of ground-truth clusters of a simulation.
pub fn sim_clusters(sim: u8) -> Result<usize> {
    Ok(default_sizes(sim)?.len())
}

pub(crate) fn split_sizes(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &m)| std::iter::repeat_n(c, m))
        .collect()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn xy_dataset(points: &[[f64; 2]]) -> Result<TypedDataset> {
    TypedDataset::from_columns(
        vec![
            VariableSchema::continuous("X1"),
            VariableSchema::continuous("X2"),
        ],
        vec![
            Column::Continuous(points.iter().map(|p| p[0]).collect()),
            Column::Continuous(points.iter().map(|p| p[1]).collect()),
        ],
    )
}

/// Two interleaving half-moons: the first cluster on the upper arc, the
/// second on the lower arc shifted right and down. The cloud itself comes
/// from a fixed seed; `seed` only drives the uniform per-coordinate shift.
fn moons(sizes: &[usize], seed: u64) -> Vec<[f64; 2]> {
    let mut base_rng = ChaCha8Rng::seed_from_u64(MOONS_BASE_SEED);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sizes.iter().sum());
    for (c, &m) in sizes.iter().enumerate() {
        for _ in 0..m {
            let t = PI * base_rng.random::<f64>();
            let (x, y) = if c == 0 {
                (MOON_RADIUS * t.cos(), MOON_RADIUS * t.sin())
            } else {
                (MOON_RADIUS * (1.0 - t.cos()), MOON_RADIUS * (0.5 - t.sin()))
            };
            let x = x + MOON_NOISE * normal(&mut base_rng);
            let y = y + MOON_NOISE * normal(&mut base_rng);
            let jx = rng.random_range(-MOON_JITTER..=MOON_JITTER);
            let jy = rng.random_range(-MOON_JITTER..=MOON_JITTER);
            out.push([x + jx, y + jy]);
        }
    }
    out
}

fn sim2(sizes: &[usize], rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let params = [((0.0, 0.0), 0.5), ((4.0, 0.0), 3.0)];
    let mut out = Vec::new();
    for (c, &m) in sizes.iter().enumerate() {
        let ((cx, cy), sd) = params[c];
        for _ in 0..m {
            out.push([cx + sd * normal(rng), cy + sd * normal(rng)]);
        }
    }
    out
}

fn sim3(sizes: &[usize], rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for _ in 0..sizes[0] {
        out.push([0.5 * normal(rng), 0.5 * normal(rng)]);
    }
    for _ in 0..sizes[1] {
        let theta = 2.0 * PI * rng.random::<f64>();
        let r = 5.0 + 0.3 * normal(rng);
        out.push([r * theta.cos(), r * theta.sin()]);
    }
    out
}

/// Two Archimedean spirals of three turns reaching radius 10, the second
/// rotated by half a turn. Positions are uniform along the arc.
fn sim4(sizes: &[usize], rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let turns = 3.0;
    let mut out = Vec::new();
    for (c, &m) in sizes.iter().enumerate() {
        let offset = PI * c as f64;
        for _ in 0..m {
            let s = rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * turns * s + 0.05 * normal(rng);
            let r = 10.0 * s;
            out.push([r * (theta + offset).cos(), r * (theta + offset).sin()]);
        }
    }
    out
}

fn sim5(sizes: &[usize], rng: &mut ChaCha8Rng) -> Result<TypedDataset> {
    let labels = split_sizes(sizes);
    let mut schema = Vec::new();
    let mut columns = Vec::new();
    for k in 0..2 {
        schema.push(VariableSchema::unordered(format!("X{}", k + 1), 2));
        columns.push(Column::Categorical(
            labels.iter().map(|_| rng.random_range(0..2)).collect(),
        ));
    }
    for k in 2..5 {
        schema.push(VariableSchema::unordered(format!("X{}", k + 1), 30));
        columns.push(Column::Categorical(
            labels
                .iter()
                .map(|&c| 10 * c as u32 + rng.random_range(0..10))
                .collect(),
        ));
    }
    TypedDataset::from_columns(schema, columns)
}

fn sim6(sizes: &[usize], seed: u64) -> Result<TypedDataset> {
    let points = moons(sizes, seed);
    let labels = split_sizes(sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let noise: Vec<u32> = labels.iter().map(|_| rng.random_range(0..2)).collect();
    let mut informative = || -> Vec<u32> {
        labels
            .iter()
            .map(|&c| {
                let (lo, hi): (f64, f64) = if c == 0 { (0.0, 2.0) } else { (3.0, 4.0) };
                rng.random_range(lo..hi).round() as u32
            })
            .collect()
    };
    let x4 = informative();
    let x5 = informative();
    TypedDataset::from_columns(
        vec![
            VariableSchema::continuous("X1"),
            VariableSchema::continuous("X2"),
            VariableSchema::unordered("X3", 2),
            VariableSchema::unordered("X4", 5),
            VariableSchema::unordered("X5", 5),
        ],
        vec![
            Column::Continuous(points.iter().map(|p| p[0]).collect()),
            Column::Continuous(points.iter().map(|p| p[1]).collect()),
            Column::Categorical(noise),
            Column::Categorical(x4),
            Column::Categorical(x5),
        ],
    )
}

/// Generates one replicate of simulation `spec.sim`.
pub fn gen_sim(spec: &SimSpec) -> Result<Generated> {
    let defaults = default_sizes(spec.sim)?;
    let sizes = match &spec.sizes {
        Some(s) if s.len() != defaults.len() => {
            return Err(Error::InvalidArgument(format!(
                "simulation {} has {} clusters, got {} sizes",
                spec.sim,
                defaults.len(),
                s.len()
            )))
        }
        Some(s) if s.contains(&0) => {
            return Err(Error::InvalidArgument(
                "cluster sizes must be positive".into(),
            ))
        }
        Some(s) => s.clone(),
        None => defaults,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ds = match spec.sim {
        1 => xy_dataset(&moons(&sizes, spec.seed))?,
        2 => xy_dataset(&sim2(&sizes, &mut rng))?,
        3 => xy_dataset(&sim3(&sizes, &mut rng))?,
        4 => xy_dataset(&sim4(&sizes, &mut rng))?,
        5 => sim5(&sizes, &mut rng)?,
        6 => sim6(&sizes, spec.seed)?,
        _ => unreachable!("checked by default_sizes"),
    };
    Ok((ds, ClusterLabels::new(split_sizes(&sizes))))
}

/// Five bivariate normal clusters with unit covariance, centres uniform on
/// `[0, 12]²` and sizes uniform on `50..=200`.
pub fn gen_gridsearch_continuous(seed: u64) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<[f64; 2]> = (0..5)
        .map(|_| [rng.random_range(0.0..=12.0), rng.random_range(0.0..=12.0)])
        .collect();
    let sizes: Vec<usize> = (0..5).map(|_| rng.random_range(50..=200)).collect();
    let mut points = Vec::new();
    for (c, &m) in centers.iter().zip(&sizes) {
        for _ in 0..m {
            points.push([c[0] + normal(&mut rng), c[1] + normal(&mut rng)]);
        }
    }
    Ok((
        xy_dataset(&points)?,
        ClusterLabels::new(split_sizes(&sizes)),
    ))
}

/// Cluster centres of the gridsearch generator for `seed`.
pub fn gridsearch_continuous_centers(seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..5)
        .map(|_| [rng.random_range(0.0..=12.0), rng.random_range(0.0..=12.0)])
        .collect()
}

/// Unordered data with a binary noise variable `X1` and two informative
/// variables drawn uniformly from `{1..5}`, `{5..10}` and `{10..15}` for
/// clusters 1 to 3, 75 rows per cluster. `clusters = 2` keeps the first two.
pub fn gen_gridsearch_categorical_with(seed: u64, clusters: usize) -> Result<Generated> {
    let blocks = [(1u32, 5u32), (5, 10), (10, 15)];
    if !(2..=3).contains(&clusters) {
        return Err(Error::InvalidArgument(format!(
            "categorical grid data has 2 or 3 clusters, got {clusters}"
        )));
    }
    let sizes = vec![75; clusters];
    let labels = split_sizes(&sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<u32> = labels.iter().map(|_| rng.random_range(0..2)).collect();
    let mut informative = || -> Vec<u32> {
        labels
            .iter()
            .map(|&c| rng.random_range(blocks[c].0..=blocks[c].1))
            .collect()
    };
    let x2 = informative();
    let x3 = informative();
    let ds = TypedDataset::from_columns(
        vec![
            VariableSchema::unordered("X1", 2),
            VariableSchema::unordered("X2", 16),
            VariableSchema::unordered("X3", 16),
        ],
        vec![
            Column::Categorical(noise),
            Column::Categorical(x2),
            Column::Categorical(x3),
        ],
    )?;
    Ok((ds, ClusterLabels::new(labels)))
}

pub fn gen_gridsearch_categorical(seed: u64) -> Result<Generated> {
    gen_gridsearch_categorical_with(seed, 3)
}

/// Fixed centres of the sample-size study.
pub const SAMPLE_SIZE_CENTERS: [[f64; 2]; 5] =
    [[1.0, 1.0], [9.0, 1.0], [5.0, 5.0], [1.0, 9.0], [9.0, 9.0]];

/// Five unit-variance bivariate normal clusters of `per_cluster` rows each
/// around [`SAMPLE_SIZE_CENTERS`].
pub fn gen_sample_size(per_cluster: usize, seed: u64) -> Result<Generated> {
    if per_cluster == 0 {
        return Err(Error::InvalidArgument(
            "cluster size must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut points = Vec::new();
    for c in SAMPLE_SIZE_CENTERS {
        for _ in 0..per_cluster {
            points.push([c[0] + unit.sample(&mut rng), c[1] + unit.sample(&mut rng)]);
        }
    }
    Ok((
        xy_dataset(&points)?,
        ClusterLabels::new(split_sizes(&[per_cluster; 5])),
    ))
}
