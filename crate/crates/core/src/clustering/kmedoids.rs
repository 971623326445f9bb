use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ClusterLabels;
use crate::error::{Error, Result};
use crate::types::DissimilarityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansDistOptions {
    pub replicates: usize,
    pub max_iter: usize,
}

impl Default for KMeansDistOptions {
    fn default() -> Self {
        KMeansDistOptions {
            replicates: 10,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    /// Cluster index per point, in medoid order.
    pub assignment: Vec<usize>,
    pub medoids: Vec<usize>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Total distance to assigned medoids after each assignment step.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansDistResult {
    pub labels: ClusterLabels,
    pub best: usize,
    pub replicates: Vec<Replicate>,
}

/// Nearest medoid, ties to the lowest cluster index.
fn assign(dm: &DissimilarityMatrix, medoids: &[usize], assignment: &mut [usize]) {
    assignment.par_iter_mut().enumerate().for_each(|(i, slot)| {
        let row = dm.row(i);
        let mut best = 0;
        for (c, &m) in medoids.iter().enumerate().skip(1) {
            if row[m] < row[medoids[best]] {
                best = c;
            }
        }
        *slot = best;
    });
}

fn total_cost(dm: &DissimilarityMatrix, medoids: &[usize], assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| dm.get(i, medoids[c]))
        .sum()
}

/// Gives every empty cluster a member: its medoid moves to the point
/// farthest from its current medoid (ties to the lowest index).
fn fill_empty(dm: &DissimilarityMatrix, medoids: &mut [usize], assignment: &mut [usize]) {
    let k = medoids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &c in assignment.iter() {
            counts[c] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, &c) in assignment.iter().enumerate() {
            let is_other_medoid = medoids.contains(&i) && medoids[empty] != i;
            if counts[c] < 2 || i == medoids[c] || is_other_medoid {
                continue;
            }
            let d = dm.get(i, medoids[c]);
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        let Some(i) = far else {
            return;
        };
        medoids[empty] = i;
        assignment[i] = empty;
    }
}

fn run_replicate(
    dm: &DissimilarityMatrix,
    k: usize,
    seed: u64,
    replicate: usize,
    max_iter: usize,
) -> Replicate {
    let n = dm.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    let mut medoids = rand::seq::index::sample(&mut rng, n, k).into_vec();
    let mut assignment = vec![0usize; n];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        assign(dm, &medoids, &mut assignment);
        fill_empty(dm, &mut medoids, &mut assignment);
        history.push(total_cost(dm, &medoids, &assignment));

        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &c) in assignment.iter().enumerate() {
            members[c].push(i);
        }
        let updated: Vec<usize> = members
            .par_iter()
            .zip(&medoids)
            .map(|(group, &current)| {
                let cost_of = |m: usize| group.iter().map(|&j| dm.get(m, j)).sum::<f64>();
                let mut best = current;
                let mut best_cost = cost_of(current);
                for &m in group {
                    let c = cost_of(m);
                    if c < best_cost {
                        best = m;
                        best_cost = c;
                    }
                }
                best
            })
            .collect();
        if updated == medoids {
            converged = true;
            break;
        }
        medoids = updated;
    }
    if !converged {
        assign(dm, &medoids, &mut assignment);
        fill_empty(dm, &mut medoids, &mut assignment);
        history.push(total_cost(dm, &medoids, &assignment));
    }
    Replicate {
        cost: *history.last().unwrap_or(&0.0),
        assignment,
        medoids,
        iterations,
        converged,
        history,
    }
}

/// k-means for a distance matrix: Lloyd iterations with medoids as centres,
/// repeated from seeded random medoids; the replicate with the lowest total
/// distance wins (ties to the earliest).
pub fn kmeans_dist_detailed(
    dm: &DissimilarityMatrix,
    k: usize,
    seed: u64,
    opts: &KMeansDistOptions,
) -> Result<KMeansDistResult> {
    let n = dm.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot partition {n} points into {k} clusters"
        )));
    }
    if opts.replicates == 0 || opts.max_iter == 0 {
        return Err(Error::InvalidArgument(
            "replicates and max_iter must be positive".into(),
        ));
    }
    let replicates: Vec<Replicate> = (0..opts.replicates)
        .into_par_iter()
        .map(|r| run_replicate(dm, k, seed, r, opts.max_iter))
        .collect();
    let mut best = 0;
    for (r, rep) in replicates.iter().enumerate() {
        if rep.cost < replicates[best].cost {
            best = r;
        }
    }
    Ok(KMeansDistResult {
        labels: ClusterLabels::canonical(&replicates[best].assignment),
        best,
        replicates,
    })
}

/// [`kmeans_dist_detailed`] with the default number of replicates.
pub fn kmeans_dist(
    dm: &DissimilarityMatrix,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterLabels> {
    let opts = KMeansDistOptions {
        max_iter,
        ..Default::default()
    };
    Ok(kmeans_dist_detailed(dm, k, seed, &opts)?.labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> DissimilarityMatrix {
        DissimilarityMatrix::from_fn(points.len(), |i, j| (points[i] - points[j]).abs()).unwrap()
    }

    #[test]
    fn k_one_and_k_n() {
        let dm = line(&[0.0, 1.0, 2.0, 7.0]);
        assert_eq!(
            kmeans_dist(&dm, 1, 3, 100).unwrap().as_slice(),
            &[0, 0, 0, 0]
        );
        let r = kmeans_dist_detailed(&dm, 4, 3, &KMeansDistOptions::default()).unwrap();
        assert_eq!(r.labels.as_slice(), &[0, 1, 2, 3]);
        assert_eq!(r.replicates[r.best].cost, 0.0);
        assert!(kmeans_dist(&dm, 5, 3, 100).is_err());
    }

    #[test]
    fn duplicates_with_k_equal_n() {
        let dm = line(&[1.0, 1.0, 1.0]);
        let r = kmeans_dist_detailed(&dm, 3, 0, &KMeansDistOptions::default()).unwrap();
        assert_eq!(r.labels.k(), 3);
    }

    #[test]
    fn separated_groups() {
        let dm = line(&[0.0, 0.1, 0.2, 10.0, 10.1, 10.3]);
        for seed in 0..20 {
            assert_eq!(
                kmeans_dist(&dm, 2, seed, 100).unwrap().as_slice(),
                &[0, 0, 0, 1, 1, 1]
            );
        }
    }
}
