//! Clustering from a dissimilarity matrix: agglomerative hierarchical
//! clustering and k-means with medoids as centres.

mod hac;
mod kmedoids;

use serde::{Deserialize, Serialize};

pub use hac::{cut, hac, Dendrogram, Linkage, Merge};
pub use kmedoids::{
    kmeans_dist, kmeans_dist_detailed, KMeansDistOptions, KMeansDistResult, Replicate,
};

/// Cluster id per point. Ids produced by this crate are `0..k` numbered by
/// first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterLabels(Vec<usize>);

impl ClusterLabels {
    pub fn new(labels: Vec<usize>) -> Self {
        ClusterLabels(labels)
    }

    /// Relabels arbitrary group keys to `0..k` in order of first appearance.
    pub fn canonical<T: PartialEq>(keys: &[T]) -> Self {
        let mut seen: Vec<&T> = Vec::new();
        let labels = keys
            .iter()
            .map(|key| match seen.iter().position(|s| *s == key) {
                Some(pos) => pos,
                None => {
                    seen.push(key);
                    seen.len() - 1
                }
            })
            .collect();
        ClusterLabels(labels)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct ids.
    pub fn k(&self) -> usize {
        let mut ids = self.0.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

impl From<Vec<usize>> for ClusterLabels {
    fn from(v: Vec<usize>) -> Self {
        ClusterLabels(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_numbering() {
        let l = ClusterLabels::canonical(&[7, 7, 3, 9, 3]);
        assert_eq!(l.as_slice(), &[0, 0, 1, 2, 1]);
        assert_eq!(l.k(), 3);
    }
}
