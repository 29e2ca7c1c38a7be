//! The test-statistic catalogue.
//!
//! Every statistic maps a [`Sample`] to a real number (or a defined
//! error) and can serve as the `T` in the randomization engine.
//! Studentized variants divide by a consistent scale estimate so their
//! null limits are pivotal.

pub mod dependence;
pub mod multivariate;
pub mod streaks;
pub mod two_sample;

use serde::Serialize;

use crate::engine::Statistic;
use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::scalar::Scalar;

/// Selects one statistic from the catalogue, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StatisticSpec {
    /// Absolute sample mean (one-sample sign tests).
    AbsMean,
    /// `sqrt(m) * (mean(x) - mean(y))`.
    MeanDiff,
    /// Difference in means studentized by the pooled scale estimate.
    StudentizedMeanDiff,
    /// Two-sample Wilcoxon/Mann-Whitney statistic on [0, 1].
    Wilcoxon,
    /// Rank-studentized Wilcoxon statistic.
    StudentizedWilcoxon,
    /// Studentized k-sample dispersion around the weighted grand mean.
    KSample,
    /// Modified Hotelling T-squared for vector outcomes.
    HotellingStudentized,
    /// `sqrt(n)` times the sample correlation.
    Correlation,
    /// Correlation studentized by the fourth-moment scale.
    StudentizedCorrelation,
    /// `sqrt(n)` times the lag-k sample autocorrelation.
    Autocorr { lag: usize },
    /// Autocorrelation with a plug-in long-run studentizer.
    /// `truncation` defaults to `floor(n^(1/3))`.
    StudentizedAutocorr {
        lag: usize,
        truncation: Option<usize>,
    },
    /// Mann-Kendall trend statistic.
    MannKendall,
    /// Success rate immediately after streaks of `streak` successes.
    HotHand { streak: usize },
    /// Difference in success rates after success vs failure streaks.
    HotHandDiff { streak: usize },
    /// Absolute value of another statistic (two-sided testing).
    Abs(Box<StatisticSpec>),
}

impl StatisticSpec {
    pub fn two_sided(self) -> StatisticSpec {
        StatisticSpec::Abs(Box::new(self))
    }

    pub fn evaluate<S: Scalar>(&self, sample: &Sample<S>) -> Result<S> {
        match self {
            StatisticSpec::AbsMean => {
                let v = sample.as_values()?;
                if v.is_empty() {
                    return Err(Error::structure("empty sample"));
                }
                Ok(crate::scalar::mean(v).abs())
            }
            StatisticSpec::MeanDiff => with_two_groups(sample, two_sample::mean_diff),
            StatisticSpec::StudentizedMeanDiff => {
                with_two_groups(sample, two_sample::studentized_mean_diff)
            }
            StatisticSpec::Wilcoxon => with_two_groups(sample, two_sample::wilcoxon),
            StatisticSpec::StudentizedWilcoxon => {
                with_two_groups(sample, two_sample::studentized_wilcoxon)
            }
            StatisticSpec::KSample => {
                let groups = sample.as_groups()?;
                two_sample::k_sample_stat(&groups)
            }
            StatisticSpec::HotellingStudentized => match sample {
                Sample::VectorGroup { rows, sizes } if sizes.len() == 2 => {
                    let (x, y) = rows.split_at(sizes[0]);
                    multivariate::hotelling_studentized(x, y)
                }
                _ => Err(Error::structure(
                    "Hotelling statistic requires a vector two-sample layout",
                )),
            },
            StatisticSpec::Correlation => {
                let (x, y) = sample.as_paired()?;
                dependence::correlation(x, y)
            }
            StatisticSpec::StudentizedCorrelation => {
                let (x, y) = sample.as_paired()?;
                dependence::studentized_correlation(x, y)
            }
            StatisticSpec::Autocorr { lag } => dependence::autocorr(sample.as_values()?, *lag),
            StatisticSpec::StudentizedAutocorr { lag, truncation } => {
                dependence::studentized_autocorr(sample.as_values()?, *lag, *truncation)
            }
            StatisticSpec::MannKendall => dependence::mann_kendall(sample.as_values()?),
            StatisticSpec::HotHand { streak } => streaks::hot_hand_make(sample.as_bits()?, *streak),
            StatisticSpec::HotHandDiff { streak } => {
                streaks::hot_hand_diff(sample.as_bits()?, *streak)
            }
            StatisticSpec::Abs(inner) => Ok(inner.evaluate(sample)?.abs()),
        }
    }
}

impl<S: Scalar> Statistic<S> for StatisticSpec {
    fn evaluate(&self, sample: &Sample<S>) -> Result<S> {
        StatisticSpec::evaluate(self, sample)
    }
}

/// Evaluate a two-sample kernel on either a two-sample layout (borrowed
/// slices, no copy) or an experiment sample split by treatment label
/// (treated first).
fn with_two_groups<S: Scalar, R>(
    sample: &Sample<S>,
    f: impl FnOnce(&[S], &[S]) -> Result<R>,
) -> Result<R> {
    match sample {
        Sample::Experiment(e) => {
            let (t, c) = e.split_by_treatment();
            if t.is_empty() || c.is_empty() {
                return Err(Error::undefined("a treatment arm is empty"));
            }
            f(&t, &c)
        }
        _ => {
            let (x, y) = sample.as_two_groups()?;
            f(x, y)
        }
    }
}

/// Midranks (1-based average ranks) of the values, ties averaged.
pub(crate) fn midranks<S: Scalar>(values: &[S]) -> Vec<S> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("NaN in ranks"));
    let mut ranks = vec![S::zero(); values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Average of 1-based ranks i+1 ..= j.
        let avg = S::from_count(i + 1 + j) / S::from_f64_c(2.0);
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}
