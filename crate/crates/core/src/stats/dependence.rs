//! Correlation, autocorrelation, and trend statistics.

use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};

/// Bivariate central moment `mu_{r,s} = (1/n) sum (x - xbar)^r (y - ybar)^s`.
fn central_moment<S: Scalar>(x: &[S], y: &[S], r: i32, s: i32) -> S {
    let (mx, my) = (mean(x), mean(y));
    let sum = x.iter().zip(y).fold(S::zero(), |acc, (&xi, &yi)| {
        acc + (xi - mx).powi(r) * (yi - my).powi(s)
    });
    sum / S::from_count(x.len())
}

fn check_pairs<S: Scalar>(x: &[S], y: &[S]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::structure(
            "correlation needs equal-length coordinates",
        ));
    }
    if x.len() < 3 {
        return Err(Error::structure("correlation needs n >= 3"));
    }
    Ok(())
}

/// `sqrt(n)` times the sample correlation.
pub fn correlation<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    check_pairs(x, y)?;
    let mu20 = central_moment(x, y, 2, 0);
    let mu02 = central_moment(x, y, 0, 2);
    if mu20 <= S::zero() || mu02 <= S::zero() {
        return Err(Error::degenerate("a marginal is constant"));
    }
    let rho = central_moment(x, y, 1, 1) / (mu20 * mu02).sqrt();
    Ok(S::from_count(x.len()).sqrt() * rho)
}

/// Correlation studentized by `V = sqrt(mu_{2,2} / (mu_{2,0} mu_{0,2}))`,
/// making the statistic pivotal under uncorrelatedness without
/// independence.
pub fn studentized_correlation<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    check_pairs(x, y)?;
    let mu20 = central_moment(x, y, 2, 0);
    let mu02 = central_moment(x, y, 0, 2);
    if mu20 <= S::zero() || mu02 <= S::zero() {
        return Err(Error::degenerate("a marginal is constant"));
    }
    let mu11 = central_moment(x, y, 1, 1);
    let mu22 = central_moment(x, y, 2, 2);
    let rho = mu11 / (mu20 * mu02).sqrt();
    if mu22 <= S::zero() {
        if rho == S::zero() {
            return Ok(S::zero());
        }
        return Err(Error::degenerate(
            "fourth-moment scale is zero with nonzero correlation",
        ));
    }
    let v = (mu22 / (mu20 * mu02)).sqrt();
    Ok(S::from_count(x.len()).sqrt() * rho / v)
}

/// `sqrt(n)` times the lag-k sample autocorrelation
/// `rho(k) = (1/n) sum (x_i - xbar)(x_{i+k} - xbar) / sigma^2`.
pub fn autocorr<S: Scalar>(x: &[S], lag: usize) -> Result<S> {
    let n = x.len();
    if lag == 0 || lag >= n {
        return Err(Error::parameter("autocorrelation needs 1 <= lag < n"));
    }
    let m = mean(x);
    let var = x.iter().fold(S::zero(), |acc, &v| {
        let d = v - m;
        acc + d * d
    }) / S::from_count(n);
    if var <= S::zero() {
        return Err(Error::degenerate("series is constant"));
    }
    let cov = (0..n - lag).fold(S::zero(), |acc, i| acc + (x[i] - m) * (x[i + lag] - m))
        / S::from_count(n);
    Ok(S::from_count(n).sqrt() * cov / var)
}

/// Autocorrelation studentized by a plug-in long-run variance built from
/// truncated empirical second-moment series. The truncation lag defaults
/// to `floor(n^(1/3))`.
pub fn studentized_autocorr<S: Scalar>(
    x: &[S],
    lag: usize,
    truncation: Option<usize>,
) -> Result<S> {
    let n = x.len();
    let root_n_rho = autocorr(x, lag)?;
    let rho = root_n_rho / S::from_count(n).sqrt();

    let m = mean(x);
    let e: Vec<S> = x.iter().map(|&v| v - m).collect();
    let sigma2 = e.iter().fold(S::zero(), |acc, &d| acc + d * d) / S::from_count(n);

    // Products of centered observations: squares and lagged products.
    let a: Vec<S> = e.iter().map(|&d| d * d).collect();
    let b: Vec<S> = (0..n - lag).map(|i| e[i] * e[i + lag]).collect();
    let trunc = truncation.unwrap_or_else(|| (n as f64).powf(1.0 / 3.0).floor() as usize);
    let trunc = trunc.min(b.len().saturating_sub(1));

    let kappa2 =
        a_cov(&a, &a, 0) + two::<S>() * (1..=trunc).fold(S::zero(), |s, j| s + a_cov(&a, &a, j));
    let tau2 =
        a_cov(&b, &b, 0) + two::<S>() * (1..=trunc).fold(S::zero(), |s, j| s + a_cov(&b, &b, j));
    let nu = a_cov(&a, &b, 0)
        + (1..=trunc).fold(S::zero(), |s, j| s + a_cov(&a, &b, j) + a_cov(&b, &a, j));

    let gamma2 = (tau2 - two::<S>() * rho * nu + rho * rho * kappa2) / (sigma2 * sigma2);
    if gamma2 <= S::zero() {
        // The truncated plug-in can go negative on strongly structured
        // arrangements; the statistic is undefined there and the engine's
        // exclusion policy applies.
        return Err(Error::undefined(
            "plug-in long-run variance is not positive",
        ));
    }
    Ok(root_n_rho / gamma2.sqrt())
}

fn two<S: Scalar>() -> S {
    S::from_f64_c(2.0)
}

/// Empirical cross-covariance of two product series at a non-negative lag:
/// `(1/len) sum (u_i - ubar)(v_{i+j} - vbar)` over the overlap.
fn a_cov<S: Scalar>(u: &[S], v: &[S], j: usize) -> S {
    let len = u.len().min(v.len());
    if j >= len {
        return S::zero();
    }
    let mu = mean(&u[..len]);
    let mv = mean(&v[..len]);
    let overlap = len - j;
    (0..overlap).fold(S::zero(), |acc, i| acc + (u[i] - mu) * (v[i + j] - mv)) / S::from_count(len)
}

/// Mann-Kendall trend statistic
/// `U = (3 / n^{3/2}) sum_{i<j} (I(x_j > x_i) - I(x_j < x_i))`.
pub fn mann_kendall<S: Scalar>(x: &[S]) -> Result<S> {
    let n = x.len();
    if n < 2 {
        return Err(Error::structure("trend statistic needs n >= 2"));
    }
    let mut net = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            if x[j] > x[i] {
                net += 1;
            } else if x[j] < x[i] {
                net -= 1;
            }
        }
    }
    let scale = S::from_f64_c(3.0) / S::from_count(n).powf(S::from_f64_c(1.5));
    Ok(scale * S::from_f64_c(net as f64))
}
