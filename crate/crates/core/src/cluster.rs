//! Approximate randomization tests for parameters estimated cluster by
//! cluster, with a fixed, small number of clusters.
//!
//! The per-cluster estimates, centered at the hypothesized value and
//! scaled by `sqrt(n)`, are asymptotically jointly normal with
//! independent components, so sign changes of whole clusters act as an
//! approximate symmetry group.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::engine::{run_with_mode, EngineConfig, RandomizationResult, RunMode, Statistic};
use crate::error::{Error, Result};
use crate::groups::GroupKind;
use crate::linalg::{ols, SymMatrix};
use crate::sample::Sample;
use crate::scalar::Scalar;

/// Per-cluster centered, scaled estimates `S_j = sqrt(n) (theta_j - theta0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterScores<S> {
    scores: Vec<Vec<S>>,
    dim: usize,
}

impl<S: Scalar> ClusterScores<S> {
    pub fn new(scores: Vec<Vec<S>>) -> Result<Self> {
        if scores.len() < 2 {
            return Err(Error::structure("need at least 2 clusters"));
        }
        let dim = scores[0].len();
        if dim == 0 || scores.iter().any(|s| s.len() != dim) {
            return Err(Error::structure("cluster scores have mixed dimensions"));
        }
        if scores.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::structure("cluster scores must be finite"));
        }
        Ok(ClusterScores { scores, dim })
    }

    pub fn from_scalars(scores: Vec<S>) -> Result<Self> {
        Self::new(scores.into_iter().map(|s| vec![s]).collect())
    }

    pub fn cluster_count(&self) -> usize {
        self.scores.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.scores
    }
}

/// One data cluster for cluster-by-cluster estimation.
#[derive(Debug, Clone)]
pub struct ClusterData<S> {
    /// Design rows, one per observation.
    pub design: Vec<Vec<S>>,
    /// Outcomes aligned with the design rows.
    pub outcomes: Vec<S>,
}

/// Per-cluster OLS scores for one coefficient:
/// `sqrt(n) (beta_j[coef] - theta0)` with `n` the total observation count.
///
/// A rank-deficient cluster design is an error naming the cluster; when a
/// regressor is constant within a cluster, pool one or more clusters
/// together and retry.
pub fn cluster_scores_ols<S: Scalar>(
    clusters: &[ClusterData<S>],
    coef: usize,
    theta0: S,
) -> Result<ClusterScores<S>> {
    if clusters.len() < 2 {
        return Err(Error::structure("need at least 2 clusters"));
    }
    let n_total: usize = clusters.iter().map(|c| c.outcomes.len()).sum();
    let scale = S::from_count(n_total).sqrt();
    let mut scores = Vec::with_capacity(clusters.len());
    for (j, c) in clusters.iter().enumerate() {
        if c.design.first().is_none_or(|r| coef >= r.len()) {
            return Err(Error::parameter(format!(
                "coefficient index {coef} out of range for cluster {j}"
            )));
        }
        let beta = ols(&c.design, &c.outcomes).map_err(|e| {
            Error::Singular(format!(
                "cluster {j} design is rank deficient ({e}); \
                 pool one or more clusters together and retry"
            ))
        })?;
        scores.push(vec![scale * (beta[coef] - theta0)]);
    }
    ClusterScores::new(scores)
}

/// Statistic choice for the cluster sign-change test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClusterStat {
    /// `q * mean' Sigma^{-1} mean` with `Sigma = (1/q) sum S_j S_j'`.
    Wald,
    /// `|mean| / sqrt((1/(q-1)) sum (S_j - mean)^2)`; scalar scores only.
    TStat,
}

/// Degenerate spreads map to an ordered convention instead of an error:
/// zero spread with a nonzero mean ranks above everything (+inf), and an
/// all-zero configuration ranks as 0.
impl<S: Scalar> Statistic<S> for ClusterStat {
    fn evaluate(&self, sample: &Sample<S>) -> Result<S> {
        let rows = match sample {
            Sample::Clusters(rows) => rows,
            _ => {
                return Err(Error::structure(
                    "cluster statistic requires cluster scores",
                ))
            }
        };
        let q = rows.len();
        let d = rows[0].len();
        let qf = S::from_count(q);
        let mut mean = vec![S::zero(); d];
        for row in rows {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= qf;
        }
        match self {
            ClusterStat::Wald => {
                let mut sigma = SymMatrix::zeros(d);
                for row in rows {
                    for i in 0..d {
                        for j in 0..d {
                            *sigma.at_mut(i, j) = sigma.at(i, j) + row[i] * row[j] / qf;
                        }
                    }
                }
                match sigma.inv_quadratic(&mean) {
                    Ok(v) => Ok(qf * v),
                    Err(Error::Singular(_)) => Ok(degenerate_value(&mean)),
                    Err(e) => Err(e),
                }
            }
            ClusterStat::TStat => {
                if d != 1 {
                    return Err(Error::structure(
                        "t-statistic requires scalar cluster scores",
                    ));
                }
                let m = mean[0];
                let ss = rows.iter().fold(S::zero(), |acc, row| {
                    let dev = row[0] - m;
                    acc + dev * dev
                });
                let spread2 = ss / S::from_count(q - 1);
                if spread2 <= S::zero() {
                    return Ok(degenerate_value(&mean));
                }
                Ok(m.abs() / spread2.sqrt())
            }
        }
    }
}

fn degenerate_value<S: Scalar>(mean: &[S]) -> S {
    if mean.iter().all(|&m| m == S::zero()) {
        S::zero()
    } else {
        S::infinity()
    }
}

/// Cluster sign-change test report.
#[derive(Debug, Clone, Serialize)]
pub struct ArtReport<S> {
    pub result: RandomizationResult<S>,
    pub statistic: ClusterStat,
    pub warnings: Vec<String>,
}

/// Approximate randomization test over per-cluster sign changes.
pub fn art_test<S: Scalar>(
    scores: &ClusterScores<S>,
    stat: ClusterStat,
    alpha: S,
    mode: RunMode,
) -> Result<ArtReport<S>> {
    art_test_cfg(&EngineConfig::default(), scores, stat, alpha, mode)
}

pub fn art_test_cfg<S: Scalar>(
    cfg: &EngineConfig,
    scores: &ClusterScores<S>,
    stat: ClusterStat,
    alpha: S,
    mode: RunMode,
) -> Result<ArtReport<S>> {
    if stat == ClusterStat::TStat && scores.dim() != 1 {
        return Err(Error::structure(
            "t-statistic requires scalar cluster scores",
        ));
    }
    let kind = GroupKind::ClusterSignChange {
        q: scores.cluster_count(),
    };
    let sample = Sample::Clusters(scores.rows().to_vec());
    let result = run_with_mode(cfg, &sample, &stat, &kind, alpha, mode)?;
    let mut warnings = Vec::new();
    if result.values.iter().any(|v| v.is_infinite()) {
        warnings.push(
            "degenerate spread encountered: zero within-flip variance with a nonzero mean \
             ranks as +inf"
                .to_string(),
        );
    }
    Ok(ArtReport {
        result,
        statistic: stat,
        warnings,
    })
}

/// Decision of the comparison t-test that refers the cluster t-statistic
/// to the Student quantile with `q - 1` degrees of freedom.
#[derive(Debug, Clone, Serialize)]
pub struct TTestDecision<S> {
    pub reject: bool,
    pub t_stat: S,
    pub critical: S,
    pub warnings: Vec<String>,
}

/// Two-sided comparison test: reject when `sqrt(q) |mean| / sd` exceeds
/// the `1 - alpha/2` Student quantile with `q - 1` degrees of freedom.
///
/// The guarantee holds for alpha <= 0.083 with any q >= 2, and for
/// alpha <= 0.10 with 2 <= q <= 14; a warning is attached outside these
/// ranges. Under unequal cluster variances the test can be far more
/// conservative than the sign-change test.
pub fn im_ttest<S: Scalar>(scores: &ClusterScores<S>, alpha: S) -> Result<TTestDecision<S>> {
    if scores.dim() != 1 {
        return Err(Error::structure(
            "comparison t-test requires scalar cluster scores",
        ));
    }
    if !(alpha > S::zero() && alpha < S::one()) {
        return Err(Error::parameter("alpha must lie strictly between 0 and 1"));
    }
    let q = scores.cluster_count();
    let vals: Vec<S> = scores.rows().iter().map(|r| r[0]).collect();
    let qf = S::from_count(q);
    let mean = vals.iter().fold(S::zero(), |a, &v| a + v) / qf;
    let ss = vals.iter().fold(S::zero(), |a, &v| {
        let d = v - mean;
        a + d * d
    });
    let sd2 = ss / S::from_count(q - 1);
    if sd2 <= S::zero() {
        return Err(Error::degenerate("cluster scores have zero spread"));
    }
    let t_stat = qf.sqrt() * mean.abs() / sd2.sqrt();

    let a = alpha.as_f64();
    let mut warnings = Vec::new();
    if !(a <= 0.083 || (a <= 0.10 && q <= 14)) {
        warnings.push(format!(
            "level alpha = {a} with q = {q} is outside the validity ranges \
             (alpha <= 0.083 with q >= 2, or alpha <= 0.10 with 2 <= q <= 14)"
        ));
    }
    let dist = StudentsT::new(0.0, 1.0, (q - 1) as f64)
        .map_err(|e| Error::parameter(format!("t-distribution setup failed: {e}")))?;
    let critical = S::from_f64_c(dist.inverse_cdf(1.0 - a / 2.0));
    Ok(TTestDecision {
        reject: t_stat > critical,
        t_stat,
        critical,
        warnings,
    })
}

/// Contiguous equal-length blocking of a series into `q` clusters;
/// remainder observations go to the last block.
pub fn contiguous_blocks(n: usize, q: usize) -> Result<Vec<usize>> {
    if q < 2 || q > n {
        return Err(Error::parameter(format!(
            "need 2 <= q <= n, got q = {q}, n = {n}"
        )));
    }
    let base = n / q;
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        labels.push((i / base).min(q - 1));
    }
    Ok(labels)
}

/// Confidence interval for a scalar parameter by grid inversion: the
/// hypothesized values whose sign-change test does not reject.
///
/// `theta_hats` are the per-cluster estimates; scores at each grid value
/// are `sqrt(n_total) (theta_j - theta0)`.
pub fn invert_confidence_interval<S: Scalar>(
    theta_hats: &[S],
    n_total: usize,
    stat: ClusterStat,
    alpha: S,
    grid: &[S],
    mode: RunMode,
) -> Result<Vec<(S, S)>> {
    if grid.is_empty() {
        return Err(Error::parameter("empty inversion grid"));
    }
    let scale = S::from_count(n_total).sqrt();
    let mut accepted = Vec::with_capacity(grid.len());
    for &theta0 in grid {
        let scores = ClusterScores::from_scalars(
            theta_hats.iter().map(|&t| scale * (t - theta0)).collect(),
        )?;
        let report = art_test(&scores, stat, alpha, mode)?;
        accepted.push(report.result.p_hat > alpha);
    }
    let mut intervals = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &ok) in accepted.iter().enumerate() {
        match (ok, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                intervals.push((grid[s], grid[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        intervals.push((grid[s], grid[grid.len() - 1]));
    }
    Ok(intervals)
}
