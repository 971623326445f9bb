use crate::error::{Error, Result};

/// Symmetric, nonnegative `n x n` matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Builds a matrix by evaluating `f(i, j)` once for every `i < j` and
    /// mirroring. The diagonal is set to zero.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self::from_square(n, data)
    }

    /// Assembles a matrix from the strictly upper rows: `upper[i]` holds
    /// `d(i, j)` for `j = i + 1 .. n`.
    pub fn from_upper_rows(n: usize, upper: Vec<Vec<f64>>) -> Result<Self> {
        if upper.len() != n {
            return Err(Error::Dimension(format!(
                "{} upper rows for n = {n}",
                upper.len()
            )));
        }
        let mut data = vec![0.0; n * n];
        for (i, row) in upper.iter().enumerate() {
            if row.len() != n - i - 1 {
                return Err(Error::Dimension(format!(
                    "upper row {i} has length {}",
                    row.len()
                )));
            }
            for (off, &d) in row.iter().enumerate() {
                let j = i + 1 + off;
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self::from_square(n, data)
    }

    /// Takes ownership of a row-major square matrix after checking it is
    /// finite, symmetric, nonnegative and zero on the diagonal.
    pub fn from_square(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(format!(
                "{} entries for n = {n}",
                data.len()
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry ({i}, {i}) is {}",
                    data[i * n + i]
                )));
            }
            for j in i + 1..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i}, {j}) is not finite"
                    )));
                }
                if a != b {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i}, {j}) = {a} but ({j}, {i}) = {b}"
                    )));
                }
                if a < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i}, {j}) = {a} is negative"
                    )));
                }
            }
        }
        Ok(DissimilarityMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Matrix of the given points in the given order.
    pub fn permuted(&self, order: &[usize]) -> DissimilarityMatrix {
        let n = order.len();
        let mut data = vec![0.0; n * n];
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                data[a * n + b] = self.get(i, j);
            }
        }
        DissimilarityMatrix { n, data }
    }

    /// Largest violation of `d(i, k) <= d(i, j) + d(j, k)` over all triples,
    /// together with the triple that attains it. `None` when no triple
    /// violates the inequality by more than `tol`.
    pub fn worst_triangle_violation(&self, tol: f64) -> Option<(f64, [usize; 3])> {
        let n = self.n;
        let mut worst: Option<(f64, [usize; 3])> = None;
        for i in 0..n {
            for k in i + 1..n {
                let dik = self.get(i, k);
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let excess = dik - (self.get(i, j) + self.get(j, k));
                    if excess > tol && worst.is_none_or(|(w, _)| excess > w) {
                        worst = Some((excess, [i, j, k]));
                    }
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_fn_mirrors() {
        let m = DissimilarityMatrix::from_fn(3, |i, j| (i + j) as f64).unwrap();
        assert_eq!(m.get(2, 1), 3.0);
        assert_eq!(m.get(1, 2), 3.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn rejects_asymmetry_and_negative() {
        assert!(DissimilarityMatrix::from_square(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DissimilarityMatrix::from_square(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(DissimilarityMatrix::from_square(2, vec![1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(DissimilarityMatrix::from_square(2, vec![0.0, f64::NAN, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn single_point() {
        let m = DissimilarityMatrix::from_fn(1, |_, _| unreachable!()).unwrap();
        assert_eq!(m.as_slice(), &[0.0]);
    }

    #[test]
    fn triangle_check_finds_violation() {
        // d(0,2) = 5 > d(0,1) + d(1,2) = 2
        let m =
            DissimilarityMatrix::from_square(3, vec![0., 1., 5., 1., 0., 1., 5., 1., 0.]).unwrap();
        let (excess, triple) = m.worst_triangle_violation(1e-9).unwrap();
        assert_eq!(excess, 3.0);
        assert_eq!(triple, [0, 1, 2]);
        let ok =
            DissimilarityMatrix::from_square(3, vec![0., 1., 2., 1., 0., 1., 2., 1., 0.]).unwrap();
        assert!(ok.worst_triangle_violation(1e-9).is_none());
    }
}
