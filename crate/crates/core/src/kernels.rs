//! Univariate kernels for continuous, unordered and ordered variables and
//! the mixed product kernel built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BandwidthVector, Row};

/// `1 / sqrt(2π)`, the Gaussian kernel at zero.
pub const GAUSSIAN_PEAK: f64 = 0.398_942_280_401_432_7;
/// Epanechnikov kernel at zero.
pub const EPANECHNIKOV_PEAK: f64 = 0.75;

/// Exponents below this evaluate to exactly zero instead of a subnormal.
const EXP_FLOOR: f64 = -745.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousKernel {
    #[default]
    Gaussian,
    Epanechnikov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalKernel {
    AitkenUnordered,
    WangVanRyzinOrdered,
}

impl ContinuousKernel {
    pub fn name(self) -> &'static str {
        match self {
            ContinuousKernel::Gaussian => "gaussian",
            ContinuousKernel::Epanechnikov => "epanechnikov",
        }
    }

    /// Kernel value at zero difference.
    pub fn peak(self) -> f64 {
        match self {
            ContinuousKernel::Gaussian => GAUSSIAN_PEAK,
            ContinuousKernel::Epanechnikov => EPANECHNIKOV_PEAK,
        }
    }

    pub fn eval(self, xi: f64, xj: f64, lambda: f64) -> Result<f64> {
        check_continuous(lambda)?;
        Ok(match self {
            ContinuousKernel::Gaussian => gaussian(xi - xj, lambda),
            ContinuousKernel::Epanechnikov => epanechnikov(xi - xj, lambda),
        })
    }
}

impl fmt::Display for ContinuousKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ContinuousKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(ContinuousKernel::Gaussian),
            "epanechnikov" => Ok(ContinuousKernel::Epanechnikov),
            other => Err(Error::InvalidArgument(format!(
                "unknown continuous kernel `{other}`"
            ))),
        }
    }
}

impl CategoricalKernel {
    pub fn name(self) -> &'static str {
        match self {
            CategoricalKernel::AitkenUnordered => "aitken",
            CategoricalKernel::WangVanRyzinOrdered => "wang-van-ryzin",
        }
    }

    pub fn eval(self, xi: u32, xj: u32, lambda: f64) -> Result<f64> {
        check_unit(lambda)?;
        Ok(match self {
            CategoricalKernel::AitkenUnordered => aitken(xi, xj, lambda),
            CategoricalKernel::WangVanRyzinOrdered => wang_van_ryzin(xi, xj, lambda),
        })
    }
}

/// Which kernel each kind of variable uses. Unordered variables always use
/// the Aitken kernel and ordered ones Wang and van Ryzin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KernelSelection {
    pub continuous: ContinuousKernel,
}

impl KernelSelection {
    pub const GAUSSIAN: KernelSelection = KernelSelection {
        continuous: ContinuousKernel::Gaussian,
    };
    pub const EPANECHNIKOV: KernelSelection = KernelSelection {
        continuous: ContinuousKernel::Epanechnikov,
    };

    pub fn unordered(&self) -> CategoricalKernel {
        CategoricalKernel::AitkenUnordered
    }

    pub fn ordered(&self) -> CategoricalKernel {
        CategoricalKernel::WangVanRyzinOrdered
    }

    pub fn describe(&self) -> String {
        format!(
            "continuous={} unordered={} ordered={}",
            self.continuous,
            self.unordered().name(),
            self.ordered().name()
        )
    }
}

fn check_continuous(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::KernelDomain(format!(
            "continuous bandwidth must be positive and finite, got {lambda}"
        )))
    }
}

fn check_unit(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::KernelDomain(format!(
            "categorical bandwidth must lie in [0, 1], got {lambda}"
        )))
    }
}

/// Gaussian kernel of the difference `delta`; no domain check.
#[inline]
pub fn gaussian(delta: f64, lambda: f64) -> f64 {
    let exponent = -(delta * delta) / (2.0 * lambda * lambda);
    if exponent < EXP_FLOOR {
        0.0
    } else {
        GAUSSIAN_PEAK * exponent.exp()
    }
}

/// Epanechnikov kernel of the difference `delta`; no domain check.
#[inline]
pub fn epanechnikov(delta: f64, lambda: f64) -> f64 {
    if delta.abs() <= lambda {
        let u = delta / lambda;
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

#[inline]
pub fn aitken(xi: u32, xj: u32, lambda: f64) -> f64 {
    if xi == xj {
        1.0
    } else {
        lambda
    }
}

#[inline]
pub fn wang_van_ryzin(xi: u32, xj: u32, lambda: f64) -> f64 {
    if xi == xj {
        1.0 - lambda
    } else if lambda == 0.0 {
        0.0
    } else {
        0.5 * (1.0 - lambda) * lambda.powi(xi.abs_diff(xj) as i32)
    }
}

pub fn eval_gaussian(xi: f64, xj: f64, lambda: f64) -> Result<f64> {
    ContinuousKernel::Gaussian.eval(xi, xj, lambda)
}

pub fn eval_epanechnikov(xi: f64, xj: f64, lambda: f64) -> Result<f64> {
    ContinuousKernel::Epanechnikov.eval(xi, xj, lambda)
}

pub fn eval_aitken(xi: u32, xj: u32, lambda: f64) -> Result<f64> {
    CategoricalKernel::AitkenUnordered.eval(xi, xj, lambda)
}

pub fn eval_wvr(xi: u32, xj: u32, lambda: f64) -> Result<f64> {
    CategoricalKernel::WangVanRyzinOrdered.eval(xi, xj, lambda)
}

/// Mixed product kernel: `∏ (1/λ) k(x_ik - x_jk)` over continuous variables
/// times the Aitken and Wang–van Ryzin factors of the categorical ones.
pub fn eval_joint(
    xi: Row<'_>,
    xj: Row<'_>,
    bw: &BandwidthVector,
    kernels: &KernelSelection,
) -> Result<f64> {
    check_row_shapes(xi, xj, bw)?;
    let lambdas = bw.values();
    let (lc, rest) = lambdas.split_at(xi.continuous.len());
    let (lu, lo) = rest.split_at(xi.unordered.len());
    let mut product = 1.0;
    for ((&a, &b), &l) in xi.continuous.iter().zip(xj.continuous).zip(lc) {
        product *= kernels.continuous.eval(a, b, l)? / l;
    }
    for ((&a, &b), &l) in xi.unordered.iter().zip(xj.unordered).zip(lu) {
        product *= kernels.unordered().eval(a, b, l)?;
    }
    for ((&a, &b), &l) in xi.ordered.iter().zip(xj.ordered).zip(lo) {
        product *= kernels.ordered().eval(a, b, l)?;
    }
    Ok(product)
}

pub(crate) fn check_row_shapes(xi: Row<'_>, xj: Row<'_>, bw: &BandwidthVector) -> Result<()> {
    let shape = |r: Row<'_>| (r.continuous.len(), r.unordered.len(), r.ordered.len());
    let (a, b) = (shape(xi), shape(xj));
    if a != b || a.0 + a.1 + a.2 != bw.len() {
        return Err(Error::Dimension(format!(
            "rows with layouts {a:?} and {b:?} against {} bandwidths",
            bw.len()
        )));
    }
    Ok(())
}
