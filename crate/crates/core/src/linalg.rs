//! Minimal dense symmetric linear algebra: Cholesky factorization with a
//! condition-number guard. Dimensions here are small (statistic
//! dimensions, regression designs), so the cubic cost is irrelevant.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Condition-number threshold above which a solve is refused.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone)]
pub struct SymMatrix<S> {
    pub dim: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> SymMatrix<S> {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![S::zero(); dim * dim],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.data[i * self.dim + j]
    }

    /// Lower-triangular Cholesky factor, or an error when the matrix is
    /// not numerically positive definite.
    fn cholesky(&self) -> Result<Vec<S>> {
        let n = self.dim;
        let mut l = vec![S::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.at(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= S::zero() {
                        return Err(Error::Singular("matrix is not positive definite".into()));
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(l)
    }

    /// Solve `A x = b` via Cholesky, refusing when the 1-norm condition
    /// number estimate exceeds [`CONDITION_LIMIT`].
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let inv = self.inverse()?;
        let n = self.dim;
        let mut x = vec![S::zero(); n];
        for i in 0..n {
            for j in 0..n {
                x[i] += inv[i * n + j] * b[j];
            }
        }
        Ok(x)
    }

    /// Full inverse with the condition guard applied.
    pub fn inverse(&self) -> Result<Vec<S>> {
        let n = self.dim;
        let l = self.cholesky()?;
        // Invert column by column: solve A e_i.
        let mut inv = vec![S::zero(); n * n];
        let mut col = vec![S::zero(); n];
        for ci in 0..n {
            for (i, c) in col.iter_mut().enumerate() {
                *c = if i == ci { S::one() } else { S::zero() };
            }
            // Forward substitution L y = e_ci.
            for i in 0..n {
                let mut sum = col[i];
                for k in 0..i {
                    sum -= l[i * n + k] * col[k];
                }
                col[i] = sum / l[i * n + i];
            }
            // Back substitution L' x = y.
            for i in (0..n).rev() {
                let mut sum = col[i];
                for k in i + 1..n {
                    sum -= l[k * n + i] * col[k];
                }
                col[i] = sum / l[i * n + i];
            }
            for i in 0..n {
                inv[i * n + ci] = col[i];
            }
        }

        let cond = one_norm(&self.data, n) * one_norm(&inv, n);
        if cond.as_f64() > CONDITION_LIMIT {
            return Err(Error::Singular(format!(
                "condition number estimate {:.3e} exceeds the {CONDITION_LIMIT:.0e} guard",
                cond.as_f64()
            )));
        }
        Ok(inv)
    }

    /// Quadratic form `v' A^{-1} v` with the condition guard.
    pub fn inv_quadratic(&self, v: &[S]) -> Result<S> {
        let x = self.solve(v)?;
        Ok(v.iter()
            .zip(&x)
            .fold(S::zero(), |acc, (&vi, &xi)| acc + vi * xi))
    }
}

fn one_norm<S: Scalar>(data: &[S], n: usize) -> S {
    let mut best = S::zero();
    for j in 0..n {
        let mut colsum = S::zero();
        for i in 0..n {
            colsum += data[i * n + j].abs();
        }
        if colsum > best {
            best = colsum;
        }
    }
    best
}

/// Ordinary least squares via the normal equations.
///
/// `rows` holds one design row per observation. Rank deficiency or an
/// ill-conditioned cross-product matrix surfaces as [`Error::Singular`].
pub fn ols<S: Scalar>(rows: &[Vec<S>], y: &[S]) -> Result<Vec<S>> {
    let n = rows.len();
    if n == 0 || n != y.len() {
        return Err(Error::structure(
            "OLS needs matching, non-empty rows and outcomes",
        ));
    }
    let p = rows[0].len();
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::structure("OLS design rows have mixed widths"));
    }
    if n < p {
        return Err(Error::Singular("fewer observations than regressors".into()));
    }
    let mut xtx = SymMatrix::zeros(p);
    let mut xty = vec![S::zero(); p];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..p {
            xty[i] += row[i] * yi;
            for j in 0..p {
                *xtx.at_mut(i, j) = xtx.at(i, j) + row[i] * row[j];
            }
        }
    }
    xtx.solve(&xty)
}
