//! Modified Hotelling statistic for vector-valued two-sample tests.

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::scalar::Scalar;

/// Modified Hotelling T-squared:
/// `S = T' Sigma^{-1} T` with `T = sqrt(N) (xbar - ybar)` and
/// `Sigma = (1/p) Sigma_x + (1/(1-p)) Sigma_y`, `p = m/N`.
///
/// The pooled covariance uses the population (1/n) normalization so the
/// d = 1 case reduces exactly to the squared studentized mean difference.
pub fn hotelling_studentized<S: Scalar>(x: &[Vec<S>], y: &[Vec<S>]) -> Result<S> {
    let (m, n) = (x.len(), y.len());
    if m == 0 || n == 0 {
        return Err(Error::structure("Hotelling needs non-empty samples"));
    }
    let d = x[0].len();
    if d == 0 || x.iter().chain(y.iter()).any(|row| row.len() != d) {
        return Err(Error::structure(
            "vector observations have mixed dimensions",
        ));
    }
    if m <= d || n <= d {
        return Err(Error::structure(
            "Hotelling needs more observations than dimensions in each sample",
        ));
    }
    let big_n = S::from_count(m + n);
    let mean_x = mean_vec(x, d);
    let mean_y = mean_vec(y, d);
    let t: Vec<S> = mean_x
        .iter()
        .zip(&mean_y)
        .map(|(&a, &b)| big_n.sqrt() * (a - b))
        .collect();

    // Sigma = (N/m) Sigma_x + (N/n) Sigma_y.
    let mut sigma = SymMatrix::zeros(d);
    accumulate_cov(&mut sigma, x, &mean_x, big_n / S::from_count(m));
    accumulate_cov(&mut sigma, y, &mean_y, big_n / S::from_count(n));

    sigma.inv_quadratic(&t)
}

fn mean_vec<S: Scalar>(rows: &[Vec<S>], d: usize) -> Vec<S> {
    let mut out = vec![S::zero(); d];
    for row in rows {
        for (o, &v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    let len = S::from_count(rows.len());
    for o in &mut out {
        *o /= len;
    }
    out
}

/// Add `weight * (1/len) sum (row - mean)(row - mean)'` into `sigma`.
fn accumulate_cov<S: Scalar>(sigma: &mut SymMatrix<S>, rows: &[Vec<S>], mean: &[S], weight: S) {
    let d = mean.len();
    let scale = weight / S::from_count(rows.len());
    for row in rows {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in 0..d {
                let dj = row[j] - mean[j];
                *sigma.at_mut(i, j) = sigma.at(i, j) + scale * di * dj;
            }
        }
    }
}
