//! Pairwise similarity ψ, the KDSUM distance and the matrix builder.
//!
//! ψ(x, y) is the continuous product kernel plus the sums of the unordered
//! and ordered kernels. Every row has the same self-similarity, so the
//! distance `ψ(x,x) + ψ(y,y) - 2ψ(x,y)` equals `2(ψ(x,x) - ψ(x,y))`, and it
//! is evaluated block by block as
//!
//! ```text
//! 2 [ C0 (1 - ∏ k_k / k(0)) + Σ_u (1 - λ) 1{x≠y} + Σ_o (1 - λ)(1 - λ^|x-y| / 2) 1{x≠y} ]
//! ```
//!
//! with `C0 = ∏ k(0) / λ_k`. This avoids subtracting two nearly equal
//! similarities when bandwidths are large.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{self, ContinuousKernel, KernelSelection};
use crate::types::{validate_bandwidths, BandwidthVector, DissimilarityMatrix, Row, TypedDataset};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityConfig {
    pub kernels: KernelSelection,
    pub bandwidths: BandwidthVector,
}

impl SimilarityConfig {
    /// Validates `bandwidths` against `ds` before accepting them.
    pub fn new(
        ds: &TypedDataset,
        kernels: KernelSelection,
        bandwidths: BandwidthVector,
    ) -> Result<Self> {
        let bandwidths = validate_bandwidths(&bandwidths, ds)?;
        Ok(SimilarityConfig {
            kernels,
            bandwidths,
        })
    }

    /// One-line description of kernels and bandwidths for output headers.
    pub fn describe(&self) -> String {
        let pairs: Vec<String> = self
            .bandwidths
            .names()
            .iter()
            .zip(self.bandwidths.values())
            .map(|(n, v)| format!("{n}={v:e}"))
            .collect();
        format!(
            "{} bandwidths: {}",
            self.kernels.describe(),
            pairs.join(" ")
        )
    }
}

/// ψ(xi, xj) evaluated term by term. With no continuous variables the
/// continuous block contributes 0.
pub fn psi(xi: Row<'_>, xj: Row<'_>, cfg: &SimilarityConfig) -> Result<f64> {
    kernels::check_row_shapes(xi, xj, &cfg.bandwidths)?;
    let lambdas = cfg.bandwidths.values();
    let (lc, rest) = lambdas.split_at(xi.continuous.len());
    let (lu, lo) = rest.split_at(xi.unordered.len());

    let mut total = 0.0;
    if !lc.is_empty() {
        let mut product = 1.0;
        for ((&a, &b), &l) in xi.continuous.iter().zip(xj.continuous).zip(lc) {
            product *= cfg.kernels.continuous.eval(a, b, l)? / l;
        }
        total += product;
    }
    for ((&a, &b), &l) in xi.unordered.iter().zip(xj.unordered).zip(lu) {
        total += cfg.kernels.unordered().eval(a, b, l)?;
    }
    for ((&a, &b), &l) in xi.ordered.iter().zip(xj.ordered).zip(lo) {
        total += cfg.kernels.ordered().eval(a, b, l)?;
    }
    Ok(total)
}

/// KDSUM distance between two rows.
pub fn kdsum_distance(xi: Row<'_>, xj: Row<'_>, cfg: &SimilarityConfig) -> Result<f64> {
    kernels::check_row_shapes(xi, xj, &cfg.bandwidths)?;
    Ok(Prepared::new(cfg, xi.continuous.len(), xi.unordered.len()).distance(xi, xj))
}

/// Full KDSUM matrix. Rows are processed in parallel; each pair is computed
/// once and mirrored, and the diagonal is computed and checked to be zero.
pub fn build_matrix(ds: &TypedDataset, cfg: &SimilarityConfig) -> Result<DissimilarityMatrix> {
    let cfg = SimilarityConfig::new(ds, cfg.kernels, cfg.bandwidths.clone())?;
    let prep = Prepared::new(&cfg, ds.p_c(), ds.p_u());
    let n = ds.n();
    for i in 0..n {
        let d = prep.distance(ds.row(i), ds.row(i));
        if d != 0.0 {
            return Err(Error::Numerical(format!("self-distance of row {i} is {d}")));
        }
    }
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = ds.row(i);
            (i + 1..n).map(|j| prep.distance(a, ds.row(j))).collect()
        })
        .collect();
    DissimilarityMatrix::from_upper_rows(n, upper)
}

/// Bandwidth-derived constants for repeated distance evaluation.
struct Prepared {
    kernel: ContinuousKernel,
    /// `C0 = ∏ k(0)/λ`, or 0 without continuous variables.
    c0: f64,
    /// Gaussian: `1/(2λ²)`; Epanechnikov: `1/λ`.
    scale: Vec<f64>,
    /// `1 - λ` for unordered variables.
    unordered_gap: Vec<f64>,
    ordered: Vec<f64>,
}

impl Prepared {
    fn new(cfg: &SimilarityConfig, p_c: usize, p_u: usize) -> Self {
        let values = cfg.bandwidths.values();
        let (lc, rest) = values.split_at(p_c);
        let (lu, lo) = rest.split_at(p_u);
        let kernel = cfg.kernels.continuous;
        let c0 = if lc.is_empty() {
            0.0
        } else {
            lc.iter().map(|l| kernel.peak() / l).product()
        };
        let scale = lc
            .iter()
            .map(|&l| match kernel {
                ContinuousKernel::Gaussian => 1.0 / (2.0 * l * l),
                ContinuousKernel::Epanechnikov => 1.0 / l,
            })
            .collect();
        Prepared {
            kernel,
            c0,
            scale,
            unordered_gap: lu.iter().map(|l| 1.0 - l).collect(),
            ordered: lo.to_vec(),
        }
    }

    /// `1 - ∏ k_k / k(0)` for the continuous block.
    #[inline]
    fn continuous_deficit(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kernel {
            ContinuousKernel::Gaussian => {
                let mut s = 0.0;
                for ((&x, &y), &w) in a.iter().zip(b).zip(&self.scale) {
                    let delta = x - y;
                    s += delta * delta * w;
                }
                -(-s).exp_m1()
            }
            ContinuousKernel::Epanechnikov => {
                // 1 - ∏(1 - u²) accumulated as q + a - q a
                let mut q: f64 = 0.0;
                for ((&x, &y), &w) in a.iter().zip(b).zip(&self.scale) {
                    let u = (x - y) * w;
                    let t = if u.abs() <= 1.0 { u * u } else { 1.0 };
                    q = q + t - q * t;
                }
                q
            }
        }
    }

    #[inline]
    fn distance(&self, a: Row<'_>, b: Row<'_>) -> f64 {
        let mut half = 0.0;
        if self.c0 > 0.0 {
            half += self.c0 * self.continuous_deficit(a.continuous, b.continuous);
        }
        for ((&x, &y), &gap) in a.unordered.iter().zip(b.unordered).zip(&self.unordered_gap) {
            if x != y {
                half += gap;
            }
        }
        for ((&x, &y), &l) in a.ordered.iter().zip(b.ordered).zip(&self.ordered) {
            if x != y {
                let tail = if l == 0.0 {
                    0.0
                } else {
                    0.5 * l.powi(x.abs_diff(y) as i32)
                };
                half += (1.0 - l) * (1.0 - tail);
            }
        }
        2.0 * half
    }
}
