//! Contingency tables, the Adjusted Rand Index and clustering accuracy under
//! the best one-to-one matching of clusters to classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts of true class (rows) against predicted cluster (columns). Classes
/// and clusters are indexed by the sorted order of their labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

fn index_labels(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut distinct = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let idx = labels
        .iter()
        .map(|l| distinct.binary_search(l).unwrap())
        .collect();
    (idx, distinct.len())
}

pub fn contingency(true_labels: &[usize], pred_labels: &[usize]) -> Result<ContingencyTable> {
    if true_labels.len() != pred_labels.len() {
        return Err(Error::Dimension(format!(
            "{} true labels against {} predicted labels",
            true_labels.len(),
            pred_labels.len()
        )));
    }
    let (ti, r) = index_labels(true_labels);
    let (pi, c) = index_labels(pred_labels);
    let mut counts = vec![vec![0u64; c]; r];
    for (&a, &b) in ti.iter().zip(&pi) {
        counts[a][b] += 1;
    }
    let row_sums = counts.iter().map(|row| row.iter().sum()).collect();
    let col_sums = (0..c)
        .map(|j| counts.iter().map(|row| row[j]).sum())
        .collect();
    Ok(ContingencyTable {
        counts,
        row_sums,
        col_sums,
        n: true_labels.len() as u64,
    })
}

fn choose2(m: u64) -> i128 {
    let m = m as i128;
    m * (m - 1) / 2
}

impl ContingencyTable {
    /// True when both labelings describe the same partition.
    pub fn same_partition(&self) -> bool {
        let rows_ok = self
            .counts
            .iter()
            .all(|row| row.iter().filter(|&&v| v > 0).count() == 1);
        let cols_ok = (0..self.col_sums.len())
            .all(|j| self.counts.iter().filter(|row| row[j] > 0).count() == 1);
        rows_ok && cols_ok
    }

    /// The ARI as an exact fraction `(numerator, denominator)`, or `None`
    /// when the denominator vanishes.
    pub fn ari_fraction(&self) -> Option<(i128, i128)> {
        let index: i128 = self.counts.iter().flatten().map(|&v| choose2(v)).sum();
        let a: i128 = self.row_sums.iter().map(|&v| choose2(v)).sum();
        let b: i128 = self.col_sums.iter().map(|&v| choose2(v)).sum();
        let pairs = choose2(self.n);
        // ARI = (index - ab/pairs) / ((a + b)/2 - ab/pairs), cleared of fractions
        let num = 2 * (index * pairs - a * b);
        let den = (a + b) * pairs - 2 * a * b;
        if den == 0 {
            None
        } else {
            Some((num, den))
        }
    }
}

/// Adjusted Rand Index. When both partitions are trivial the index is
/// undefined; it is reported as 1 for identical partitions and 0 otherwise.
pub fn ari(ct: &ContingencyTable) -> Result<f64> {
    if ct.n < 2 {
        return Err(Error::InvalidArgument(
            "ARI needs at least two points".into(),
        ));
    }
    Ok(match ct.ari_fraction() {
        Some((num, den)) => num as f64 / den as f64,
        None if ct.same_partition() => 1.0,
        None => 0.0,
    })
}

/// Maximum-weight assignment of rows to columns of a nonnegative integer
/// matrix (Hungarian algorithm on the padded square cost matrix). Returns,
/// for each row, its matched column or `None` when it is matched to padding.
pub fn max_weight_assignment(weights: &[Vec<u64>]) -> Vec<Option<usize>> {
    let r = weights.len();
    let c = weights.first().map_or(0, Vec::len);
    let size = r.max(c);
    if size == 0 {
        return Vec::new();
    }
    let top = weights.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost = |i: usize, j: usize| -> i64 {
        if i < r && j < c {
            top - weights[i][j] as i64
        } else {
            top
        }
    };
    // potentials and matching, 1-based with a virtual column 0
    let mut u = vec![0i64; size + 1];
    let mut v = vec![0i64; size + 1];
    let mut way = vec![0usize; size + 1];
    let mut matched_row = vec![0usize; size + 1];
    for i in 1..=size {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=size {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; r];
    for (j, &i) in matched_row.iter().enumerate().take(size + 1).skip(1) {
        if i >= 1 && i <= r && j <= c {
            out[i - 1] = Some(j - 1);
        }
    }
    out
}

/// Fraction of points whose cluster maps to their class under the
/// assignment of clusters to classes that maximizes the number of matches.
/// Clusters left without a class count as wrong.
pub fn clustering_accuracy(true_labels: &[usize], pred_labels: &[usize]) -> Result<f64> {
    let ct = contingency(true_labels, pred_labels)?;
    if ct.n == 0 {
        return Err(Error::InvalidArgument(
            "accuracy of an empty labeling".into(),
        ));
    }
    Ok(matched_count(&ct) as f64 / ct.n as f64)
}

fn matched_count(ct: &ContingencyTable) -> u64 {
    max_weight_assignment(&ct.counts)
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|j| ct.counts[i][j]))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub n: usize,
    pub k_true: usize,
    pub k_pred: usize,
    pub ca: f64,
    pub ari: f64,
    pub contingency: ContingencyTable,
}

pub fn evaluate(true_labels: &[usize], pred_labels: &[usize]) -> Result<ClusteringReport> {
    let ct = contingency(true_labels, pred_labels)?;
    let ari = ari(&ct)?;
    let ca = matched_count(&ct) as f64 / ct.n as f64;
    Ok(ClusteringReport {
        n: ct.n as usize,
        k_true: ct.row_sums.len(),
        k_pred: ct.col_sums.len(),
        ca,
        ari,
        contingency: ct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables() {
        let ct = contingency(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap();
        assert_eq!(ct.counts, vec![vec![2, 0], vec![0, 2]]);
        let ct = contingency(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap();
        assert_eq!(ct.counts, vec![vec![0, 2], vec![2, 0]]);
        let ct = contingency(&[0, 1, 1, 2], &[5, 5, 5, 5]).unwrap();
        assert_eq!(ct.counts, vec![vec![1], vec![2], vec![1]]);
        assert!(contingency(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn ari_values() {
        let ct = contingency(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap();
        assert_eq!(ari(&ct).unwrap(), 1.0);
        let ct = contingency(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
        // 2(0·6 - 2·2) / ((2+2)·6 - 2·2·2) = -8/16
        assert_eq!(ct.ari_fraction(), Some((-8, 16)));
        assert_eq!(ari(&ct).unwrap(), -0.5);
    }

    #[test]
    fn degenerate_ari() {
        let ct = contingency(&[0, 0, 0], &[4, 4, 4]).unwrap();
        assert_eq!(ari(&ct).unwrap(), 1.0);
        let ct = contingency(&[0, 1, 2], &[0, 1, 2]).unwrap();
        assert_eq!(ari(&ct).unwrap(), 1.0);
        let ct = contingency(&[0, 0, 0], &[0, 1, 2]).unwrap();
        assert_eq!(ari(&ct).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_values() {
        assert_eq!(
            clustering_accuracy(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(),
            1.0
        );
        let ca = clustering_accuracy(&[0, 0, 0, 1, 1, 1], &[0, 0, 1, 1, 2, 2]).unwrap();
        assert!((ca - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(
            clustering_accuracy(&[0, 0, 0, 1], &[0, 0, 0, 0]).unwrap(),
            0.75
        );
    }

    #[test]
    fn hungarian_beats_greedy() {
        // greedy would take 5 first and end with 5 + 1
        let w = vec![vec![5, 4], vec![4, 1]];
        assert_eq!(max_weight_assignment(&w), vec![Some(1), Some(0)]);
    }
}
