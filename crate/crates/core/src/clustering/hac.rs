use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ClusterLabels;
use crate::error::{Error, Result};
use crate::types::DissimilarityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    Single,
    Complete,
    Average,
    /// Ward's minimum variance criterion, updated on squared distances
    /// (the "Ward.D2" convention); heights are on the distance scale.
    Ward,
    /// WPGMC, on squared distances.
    Median,
    /// UPGMC, on squared distances.
    Centroid,
}

impl Linkage {
    pub const ALL: [Linkage; 6] = [
        Linkage::Single,
        Linkage::Complete,
        Linkage::Average,
        Linkage::Ward,
        Linkage::Median,
        Linkage::Centroid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Ward => "ward",
            Linkage::Median => "median",
            Linkage::Centroid => "centroid",
        }
    }

    /// Whether the linkage works on squared input distances.
    pub fn squared(self) -> bool {
        matches!(self, Linkage::Ward | Linkage::Median | Linkage::Centroid)
    }

    /// Whether merge heights are guaranteed nondecreasing.
    pub fn monotone(self) -> bool {
        !matches!(self, Linkage::Median | Linkage::Centroid)
    }

    /// Lance–Williams update: linkage value between cluster `k` and the
    /// union of `i` and `j`, given the values `dki`, `dkj`, `dij` and sizes.
    #[inline]
    pub fn update(self, dki: f64, dkj: f64, dij: f64, ni: f64, nj: f64, nk: f64) -> f64 {
        match self {
            Linkage::Single => dki.min(dkj),
            Linkage::Complete => dki.max(dkj),
            Linkage::Average => (ni * dki + nj * dkj) / (ni + nj),
            Linkage::Ward => ((ni + nk) * dki + (nj + nk) * dkj - nk * dij) / (ni + nj + nk),
            Linkage::Median => 0.5 * dki + 0.5 * dkj - 0.25 * dij,
            Linkage::Centroid => {
                let s = ni + nj;
                (ni * dki + nj * dkj) / s - ni * nj * dij / (s * s)
            }
        }
    }

    /// Merge height reported for an internal linkage value.
    #[inline]
    pub fn height(self, value: f64) -> f64 {
        if self.squared() {
            value.max(0.0).sqrt()
        } else {
            value
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "ward.d2" | "ward_d2" => return Ok(Linkage::Ward),
            "upgma" => return Ok(Linkage::Average),
            _ => {}
        }
        Linkage::ALL
            .into_iter()
            .find(|l| l.name() == lower)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown linkage `{s}`")))
    }
}

/// One agglomeration step. Leaves are nodes `0..n`; the merge at position
/// `t` creates node `n + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Smaller child node id.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub id: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n: usize,
    pub linkage: Linkage,
    pub merges: Vec<Merge>,
}

/// Agglomerative clustering with Lance–Williams updates.
///
/// At every step the pair with the smallest linkage value is merged; among
/// equal values the pair with the lexicographically smallest `(i, j)` node
/// ids (`i < j`) wins.
pub fn hac(dm: &DissimilarityMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = dm.n();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "clustering needs at least 2 points, got {n}"
        )));
    }
    if let Some(pos) = dm.as_slice().iter().position(|v| v.is_nan()) {
        return Err(Error::InvalidMatrix(format!(
            "NaN at ({}, {})",
            pos / n,
            pos % n
        )));
    }
    // working values by slot; slot s holds node `node[s]`
    let mut d: Vec<f64> = dm.as_slice().to_vec();
    if linkage.squared() {
        for v in &mut d {
            *v *= *v;
        }
    }
    let mut node: Vec<usize> = (0..n).collect();
    let mut size: Vec<f64> = vec![1.0; n];
    let mut active: Vec<bool> = vec![true; n];
    let mut active_list: Vec<usize> = (0..n).collect();

    // nearest active slot of each slot, ties to the smaller node id
    let nearest = |s: usize, d: &[f64], node: &[usize], list: &[usize]| -> usize {
        let mut best = usize::MAX;
        for &t in list {
            if t == s {
                continue;
            }
            if best == usize::MAX {
                best = t;
                continue;
            }
            let (v, w) = (d[s * n + t], d[s * n + best]);
            if v < w || (v == w && node[t] < node[best]) {
                best = t;
            }
        }
        best
    };
    let mut nn: Vec<usize> = (0..n)
        .map(|s| nearest(s, &d, &node, &active_list))
        .collect();

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        // global minimum over cached neighbours
        let mut a = usize::MAX;
        let mut key = (f64::INFINITY, usize::MAX, usize::MAX);
        for &s in &active_list {
            let t = nn[s];
            let v = d[s * n + t];
            let (lo, hi) = if node[s] < node[t] {
                (node[s], node[t])
            } else {
                (node[t], node[s])
            };
            if a == usize::MAX || v < key.0 || (v == key.0 && (lo, hi) < (key.1, key.2)) {
                a = s;
                key = (v, lo, hi);
            }
        }
        let b = nn[a];
        let (ni, nj) = (size[a], size[b]);
        let dij = d[a * n + b];

        // new cluster goes into slot `a`, slot `b` is retired
        active[b] = false;
        active_list.retain(|&s| s != b);
        for &k in &active_list {
            if k == a {
                continue;
            }
            let v = linkage.update(d[k * n + a], d[k * n + b], dij, ni, nj, size[k]);
            d[k * n + a] = v;
            d[a * n + k] = v;
        }
        let new_id = n + step;
        merges.push(Merge {
            left: key.1,
            right: key.2,
            height: linkage.height(dij),
            id: new_id,
            size: (ni + nj) as usize,
        });
        node[a] = new_id;
        size[a] = ni + nj;

        if active_list.len() < 2 {
            break;
        }
        for idx in 0..active_list.len() {
            let k = active_list[idx];
            if k == a {
                continue;
            }
            if nn[k] == a || nn[k] == b {
                nn[k] = nearest(k, &d, &node, &active_list);
            } else {
                let (v, w) = (d[k * n + a], d[k * n + nn[k]]);
                if v < w || (v == w && node[a] < node[nn[k]]) {
                    nn[k] = a;
                }
            }
        }
        nn[a] = nearest(a, &d, &node, &active_list);
    }
    Ok(Dendrogram { n, linkage, merges })
}

/// Cuts a dendrogram into `k` groups by removing the `k - 1` highest merges
/// (among equal heights, later merges first). Groups are the connected
/// components of the remaining merges, numbered by their first member.
pub fn cut(dg: &Dendrogram, k: usize) -> Result<ClusterLabels> {
    let n = dg.n;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot cut {n} points into {k} groups"
        )));
    }
    let mut order: Vec<usize> = (0..dg.merges.len()).collect();
    order.sort_by(|&x, &y| {
        dg.merges[y]
            .height
            .total_cmp(&dg.merges[x].height)
            .then(y.cmp(&x))
    });
    let mut removed = vec![false; dg.merges.len()];
    for &m in order.iter().take(k - 1) {
        removed[m] = true;
    }

    let mut parent: Vec<usize> = (0..n + dg.merges.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (m, merge) in dg.merges.iter().enumerate() {
        if removed[m] {
            continue;
        }
        for child in [merge.left, merge.right] {
            let (r1, r2) = (find(&mut parent, child), find(&mut parent, merge.id));
            if r1 != r2 {
                parent[r1] = r2;
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Ok(ClusterLabels::canonical(&roots))
}
