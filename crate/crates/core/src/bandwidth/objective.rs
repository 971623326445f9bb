use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{ContinuousKernel, KernelSelection};
use crate::types::{validate_bandwidths, BandwidthVector, TypedDataset};

/// Objective value reported when some leave-one-out similarity is not
/// positive, in place of `-inf`.
pub const SENTINEL: f64 = -1e300;

/// Rows per block in the pairwise pass. Each block writes its own buffer and
/// buffers are summed in block order, so results do not depend on threading.
const TILE: usize = 64;

/// Precomputed state for evaluating the leave-one-out objective at many
/// bandwidth vectors on one dataset.
pub(crate) struct Evaluator<'a> {
    ds: &'a TypedDataset,
    kernel: ContinuousKernel,
    /// Per unordered variable: how many rows share row i's level (row i included).
    unordered_matches: Vec<Vec<u32>>,
    /// Per ordered variable: level of each row and level counts.
    ordered_levels: Vec<Vec<u32>>,
    ordered_counts: Vec<Vec<u32>>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(ds: &'a TypedDataset, kernels: KernelSelection) -> Self {
        let levels_of = |offset: usize| ds.schema()[offset].levels.unwrap_or(2) as usize;
        let mut unordered_matches = Vec::with_capacity(ds.p_u());
        for k in 0..ds.p_u() {
            let codes: Vec<u32> = ds.unordered_column(k).collect();
            let mut counts = vec![0u32; levels_of(ds.p_c() + k)];
            for &c in &codes {
                counts[c as usize] += 1;
            }
            unordered_matches.push(codes.iter().map(|&c| counts[c as usize]).collect());
        }
        let mut ordered_levels = Vec::with_capacity(ds.p_o());
        let mut ordered_counts = Vec::with_capacity(ds.p_o());
        for k in 0..ds.p_o() {
            let codes: Vec<u32> = ds.ordered_column(k).collect();
            let mut counts = vec![0u32; levels_of(ds.p_c() + ds.p_u() + k)];
            for &c in &codes {
                counts[c as usize] += 1;
            }
            ordered_levels.push(codes);
            ordered_counts.push(counts);
        }
        Evaluator {
            ds,
            kernel: kernels.continuous,
            unordered_matches,
            ordered_levels,
            ordered_counts,
        }
    }

    /// Leave-one-out similarity sums `Σ_{j≠i} ψ(x_i, x_j)` for every row.
    pub(crate) fn loo_sums(&self, lambdas: &[f64]) -> Vec<f64> {
        let ds = self.ds;
        let n = ds.n();
        let (lc, rest) = lambdas.split_at(ds.p_c());
        let (lu, lo) = rest.split_at(ds.p_u());
        let mut sums = if lc.is_empty() {
            vec![0.0; n]
        } else {
            self.continuous_sums(lc)
        };

        for (k, &l) in lu.iter().enumerate() {
            for (s, &m) in sums.iter_mut().zip(&self.unordered_matches[k]) {
                let m = m as f64;
                *s += (m - 1.0) + (n as f64 - m) * l;
            }
        }
        for (k, &l) in lo.iter().enumerate() {
            let counts = &self.ordered_counts[k];
            let g = counts.len();
            // per level: similarity summed over all other rows
            let per_level: Vec<f64> = (0..g)
                .map(|v| {
                    let mut t = (counts[v] as f64 - 1.0) * (1.0 - l);
                    if l > 0.0 {
                        for (w, &c) in counts.iter().enumerate() {
                            if w != v && c > 0 {
                                t += c as f64 * 0.5 * (1.0 - l) * l.powi(v.abs_diff(w) as i32);
                            }
                        }
                    }
                    t
                })
                .collect();
            for (s, &v) in sums.iter_mut().zip(&self.ordered_levels[k]) {
                *s += per_level[v as usize];
            }
        }
        sums
    }

    fn continuous_sums(&self, lc: &[f64]) -> Vec<f64> {
        let ds = self.ds;
        let n = ds.n();
        let p_c = lc.len();
        let kernel = self.kernel;
        let c0: f64 = lc.iter().map(|l| kernel.peak() / l).product();
        let scale: Vec<f64> = lc
            .iter()
            .map(|&l| match kernel {
                ContinuousKernel::Gaussian => 1.0 / (2.0 * l * l),
                ContinuousKernel::Epanechnikov => 1.0 / l,
            })
            .collect();
        // row-major copy of the continuous block for cache-friendly access
        let rows: Vec<f64> = (0..n).flat_map(|i| ds.row(i).continuous.to_vec()).collect();

        let tiles: Vec<Vec<f64>> = (0..n.div_ceil(TILE))
            .into_par_iter()
            .map(|t| {
                let mut buf = vec![0.0; n];
                for i in t * TILE..((t + 1) * TILE).min(n) {
                    let a = &rows[i * p_c..(i + 1) * p_c];
                    let mut acc = 0.0;
                    for j in i + 1..n {
                        let b = &rows[j * p_c..(j + 1) * p_c];
                        let v = match kernel {
                            ContinuousKernel::Gaussian => {
                                let mut s = 0.0;
                                for k in 0..p_c {
                                    let d = a[k] - b[k];
                                    s += d * d * scale[k];
                                }
                                if s > 745.0 {
                                    0.0
                                } else {
                                    (-s).exp()
                                }
                            }
                            ContinuousKernel::Epanechnikov => {
                                let mut prod = 1.0;
                                for k in 0..p_c {
                                    let u = (a[k] - b[k]) * scale[k];
                                    if u.abs() > 1.0 {
                                        prod = 0.0;
                                        break;
                                    }
                                    prod *= 1.0 - u * u;
                                }
                                prod
                            }
                        };
                        acc += v;
                        buf[j] += v;
                    }
                    buf[i] += acc;
                }
                buf
            })
            .collect();
        let mut sums = vec![0.0; n];
        for buf in &tiles {
            for (s, b) in sums.iter_mut().zip(buf) {
                *s += b;
            }
        }
        for s in &mut sums {
            *s *= c0;
        }
        sums
    }

    /// Per-row terms `ln(mean_{j≠i} ψ)`, `-inf` where the mean is not positive.
    pub(crate) fn terms(&self, lambdas: &[f64]) -> Vec<f64> {
        let denom = (self.ds.n() - 1) as f64;
        self.loo_sums(lambdas)
            .into_iter()
            .map(|s| {
                let mean = s / denom;
                if mean > 0.0 && mean.is_finite() {
                    mean.ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect()
    }

    pub(crate) fn objective(&self, lambdas: &[f64]) -> f64 {
        let mut total = 0.0;
        for t in self.terms(lambdas) {
            if t == f64::NEG_INFINITY {
                return SENTINEL;
            }
            total += t;
        }
        total
    }
}

/// Leave-one-out log-similarity cross-validation score (to be maximized):
/// `Σ_i ln( (1/(n-1)) Σ_{j≠i} ψ(x_i, x_j) )`. Returns [`SENTINEL`] when any
/// leave-one-out mean is zero.
pub fn mscv_objective(
    ds: &TypedDataset,
    bw: &BandwidthVector,
    kernels: KernelSelection,
) -> Result<f64> {
    let bw = check(ds, bw)?;
    Ok(Evaluator::new(ds, kernels).objective(bw.values()))
}

/// The individual per-row terms of [`mscv_objective`]; a row whose
/// leave-one-out similarity is zero yields `-inf`.
pub fn mscv_terms(
    ds: &TypedDataset,
    bw: &BandwidthVector,
    kernels: KernelSelection,
) -> Result<Vec<f64>> {
    let bw = check(ds, bw)?;
    Ok(Evaluator::new(ds, kernels).terms(bw.values()))
}

fn check(ds: &TypedDataset, bw: &BandwidthVector) -> Result<BandwidthVector> {
    if ds.n() < 2 {
        return Err(Error::InvalidArgument(
            "cross-validation needs at least two rows".into(),
        ));
    }
    validate_bandwidths(bw, ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{psi, SimilarityConfig};
    use crate::types::{BoundsConfig, Column, VariableSchema};

    fn mixed() -> TypedDataset {
        TypedDataset::from_columns(
            vec![
                VariableSchema::continuous("a"),
                VariableSchema::continuous("b"),
                VariableSchema::unordered("u", 3),
                VariableSchema::ordered("o", 5),
            ],
            vec![
                Column::Continuous((0..150).map(|i| (i as f64 * 0.37).sin() * 3.0).collect()),
                Column::Continuous((0..150).map(|i| (i as f64 * 1.3).cos()).collect()),
                Column::Categorical((0..150).map(|i| (i * 7 % 3) as u32).collect()),
                Column::Categorical((0..150).map(|i| (i * 11 % 5) as u32).collect()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn loo_sums_match_pairwise_psi() {
        let ds = mixed();
        for kernels in [KernelSelection::GAUSSIAN, KernelSelection::EPANECHNIKOV] {
            let bw = BandwidthVector::new(vec![0.8, 1.5, 0.3, 0.6], &ds, &BoundsConfig::default())
                .unwrap();
            let cfg = SimilarityConfig::new(&ds, kernels, bw.clone()).unwrap();
            let sums = Evaluator::new(&ds, kernels).loo_sums(bw.values());
            for i in [0, 1, 63, 64, 149] {
                let direct: f64 = (0..ds.n())
                    .filter(|&j| j != i)
                    .map(|j| psi(ds.row(i), ds.row(j), &cfg).unwrap())
                    .sum();
                assert!(
                    (sums[i] - direct).abs() < 1e-10 * direct.abs().max(1.0),
                    "{i}: {} {direct}",
                    sums[i]
                );
            }
        }
    }

    #[test]
    fn duplicate_pair() {
        let ds = TypedDataset::from_columns(
            vec![VariableSchema::continuous("x")],
            vec![Column::Continuous(vec![2.0, 2.0])],
        )
        .unwrap();
        let bw = BandwidthVector::new(vec![1.0], &ds, &BoundsConfig::default()).unwrap();
        let v = mscv_objective(&ds, &bw, KernelSelection::GAUSSIAN).unwrap();
        let expected = 2.0 * (1.0 / (2.0 * std::f64::consts::PI).sqrt()).ln();
        assert!((v - expected).abs() < 1e-14);
        assert!((v + 1.8379).abs() < 1e-4);
    }

    #[test]
    fn isolated_row_gives_sentinel() {
        let ds = TypedDataset::from_columns(
            vec![VariableSchema::unordered("u", 2)],
            vec![Column::Categorical(vec![0, 0, 1])],
        )
        .unwrap();
        let bw = BandwidthVector::new(vec![0.0], &ds, &BoundsConfig::default()).unwrap();
        let terms = mscv_terms(&ds, &bw, KernelSelection::GAUSSIAN).unwrap();
        assert_eq!(terms[0], (0.5f64).ln());
        assert_eq!(terms[1], (0.5f64).ln());
        assert_eq!(terms[2], f64::NEG_INFINITY);
        assert_eq!(
            mscv_objective(&ds, &bw, KernelSelection::GAUSSIAN).unwrap(),
            SENTINEL
        );
    }

    #[test]
    fn row_permutation_invariance() {
        let ds = mixed();
        let bw =
            BandwidthVector::new(vec![0.5, 0.9, 0.2, 0.4], &ds, &BoundsConfig::default()).unwrap();
        let order: Vec<usize> = (0..ds.n()).rev().collect();
        let a = mscv_objective(&ds, &bw, KernelSelection::GAUSSIAN).unwrap();
        let b = mscv_objective(&ds.select_rows(&order), &bw, KernelSelection::GAUSSIAN).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs());
    }
}
