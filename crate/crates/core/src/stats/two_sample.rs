//! Two-sample and k-sample statistics, unstudentized and studentized.
//!
//! Scale estimates use the population (1/n) normalization throughout, so
//! the k-sample statistic at k = 2 reduces exactly to the squared
//! studentized difference in means.

use crate::error::{Error, Result};
use crate::scalar::{mean, pop_variance, Scalar};
use crate::stats::midranks;

/// `sqrt(m) * (mean(x) - mean(y))`.
///
/// The leading constant only normalizes the scale; it cancels in any
/// randomization comparison.
pub fn mean_diff<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::structure("mean difference needs non-empty samples"));
    }
    let root_m = S::from_count(x.len()).sqrt();
    Ok(root_m * (mean(x) - mean(y)))
}

/// Studentized difference in means:
/// `sqrt(N) (mean(x) - mean(y)) / sqrt((N/m) var(x) + (N/n) var(y))`.
pub fn studentized_mean_diff<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    let (m, n) = (x.len(), y.len());
    if m < 2 || n < 2 {
        return Err(Error::structure(
            "studentization needs at least 2 points per sample",
        ));
    }
    let big_n = S::from_count(m + n);
    let scale2 =
        big_n / S::from_count(m) * pop_variance(x) + big_n / S::from_count(n) * pop_variance(y);
    if scale2 <= S::zero() {
        return Err(Error::degenerate("both samples are constant"));
    }
    Ok(big_n.sqrt() * (mean(x) - mean(y)) / scale2.sqrt())
}

/// Two-sample Wilcoxon statistic `W = (1/mn) sum I(x_i <= y_j)`, with
/// ties contributing half mass so that `W(x, y) + W(y, x) = 1` exactly.
pub fn wilcoxon<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    let (m, n) = (x.len(), y.len());
    if m == 0 || n == 0 {
        return Err(Error::structure("Wilcoxon needs non-empty samples"));
    }
    let combined: Vec<S> = x.iter().chain(y.iter()).copied().collect();
    let ranks = midranks(&combined);
    // Mann-Whitney identity: sum of y midranks minus n(n+1)/2 counts
    // pairs with x_i < y_j plus half the ties.
    let rank_sum_y = ranks[m..].iter().fold(S::zero(), |acc, &r| acc + r);
    let u = rank_sum_y - S::from_count(n * (n + 1)) / S::from_f64_c(2.0);
    Ok(u / S::from_count(m * n))
}

/// Rank-studentized Wilcoxon statistic
/// `(W - 1/2) / sqrt((N/m) xi_x + (N/n) xi_y)`.
///
/// `xi_x` is the sample variance (1/(m-1)) of the per-observation
/// fractions of the other sample lying below each `x_i`, computed from
/// combined-sample midranks; symmetrically for `xi_y`.
pub fn studentized_wilcoxon<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    let (m, n) = (x.len(), y.len());
    if m < 2 || n < 2 {
        return Err(Error::structure(
            "studentization needs at least 2 points per sample",
        ));
    }
    let w = wilcoxon(x, y)?;
    let combined: Vec<S> = x.iter().chain(y.iter()).copied().collect();
    let ranks = midranks(&combined);
    let ranks_x_own = midranks(x);
    let ranks_y_own = midranks(y);

    // Fraction of the other sample at or below each observation
    // (ties counted half): (combined midrank - own midrank) / other size.
    let hx: Vec<S> = (0..m)
        .map(|i| (ranks[i] - ranks_x_own[i]) / S::from_count(n))
        .collect();
    let hy: Vec<S> = (0..n)
        .map(|j| (ranks[m + j] - ranks_y_own[j]) / S::from_count(m))
        .collect();

    let xi_x = sample_variance(&hx);
    let xi_y = sample_variance(&hy);
    let big_n = S::from_count(m + n);
    let scale2 = big_n / S::from_count(m) * xi_x + big_n / S::from_count(n) * xi_y;
    if scale2 <= S::zero() {
        return Err(Error::degenerate("rank variance is zero (all values tied)"));
    }
    Ok((w - S::from_f64_c(0.5)) / scale2.sqrt())
}

/// Studentized k-sample statistic: weighted dispersion of the group means
/// around their precision-weighted grand mean.
pub fn k_sample_stat<S: Scalar>(groups: &[&[S]]) -> Result<S> {
    if groups.len() < 2 {
        return Err(Error::structure("k-sample statistic needs k >= 2 groups"));
    }
    let mut weights = Vec::with_capacity(groups.len());
    let mut means = Vec::with_capacity(groups.len());
    for (i, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(Error::structure(format!(
                "group {i} has {} observations, need at least 2",
                g.len()
            )));
        }
        let var = pop_variance(g);
        if var <= S::zero() {
            return Err(Error::degenerate(format!("group {i} is constant")));
        }
        weights.push(S::from_count(g.len()) / var);
        means.push(mean(g));
    }
    let wsum = weights.iter().fold(S::zero(), |acc, &w| acc + w);
    let grand = weights
        .iter()
        .zip(&means)
        .fold(S::zero(), |acc, (&w, &m)| acc + w * m)
        / wsum;
    Ok(weights.iter().zip(&means).fold(S::zero(), |acc, (&w, &m)| {
        let d = m - grand;
        acc + w * d * d
    }))
}

/// Sample variance with the 1/(n-1) normalization.
fn sample_variance<S: Scalar>(xs: &[S]) -> S {
    let m = mean(xs);
    let ss = xs.iter().fold(S::zero(), |acc, &x| {
        let d = x - m;
        acc + d * d
    });
    ss / S::from_count(xs.len() - 1)
}
