//! Sample layouts the transformation groups act on.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Observed data in one of the layouts the test catalogue understands.
///
/// Group actions target one coordinate of the layout: sign changes flip
/// scalar values (or whole cluster rows), permutations reorder values,
/// the `y` side of paired data, vector rows, bits, or treatment labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Sample<S> {
    /// Scalar observations: a one-sample data set or a time series.
    Values(Vec<S>),
    /// Concatenated multi-group layout; `sizes[i]` consecutive values form group `i`.
    MultiGroup { values: Vec<S>, sizes: Vec<usize> },
    /// Paired coordinates; permutations reorder `y` while `x` stays put.
    Paired { x: Vec<S>, y: Vec<S> },
    /// Vector-valued observations in a concatenated multi-group layout.
    VectorGroup {
        rows: Vec<Vec<S>>,
        sizes: Vec<usize>,
    },
    /// Binary series (`true` = success).
    Bits(Vec<bool>),
    /// Randomized-experiment records; group actions reorder treatment labels.
    Experiment(ExperimentSample<S>),
    /// Per-cluster score vectors; sign actions flip whole rows.
    Clusters(Vec<Vec<S>>),
}

impl<S: Scalar> Sample<S> {
    pub fn one_sample(values: Vec<S>) -> Self {
        Sample::Values(values)
    }

    pub fn two_sample(x: Vec<S>, y: Vec<S>) -> Self {
        let sizes = vec![x.len(), y.len()];
        let mut values = x;
        values.extend(y);
        Sample::MultiGroup { values, sizes }
    }

    pub fn k_sample(groups: Vec<Vec<S>>) -> Self {
        let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
        let values = groups.into_iter().flatten().collect();
        Sample::MultiGroup { values, sizes }
    }

    pub fn paired(x: Vec<S>, y: Vec<S>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::structure(format!(
                "paired sample needs equal lengths, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        Ok(Sample::Paired { x, y })
    }

    pub fn vector_two_sample(x: Vec<Vec<S>>, y: Vec<Vec<S>>) -> Result<Self> {
        let dim = x.first().or_else(|| y.first()).map_or(0, Vec::len);
        if x.iter().chain(y.iter()).any(|row| row.len() != dim) {
            return Err(Error::structure(
                "vector observations have mixed dimensions",
            ));
        }
        let sizes = vec![x.len(), y.len()];
        let mut rows = x;
        rows.extend(y);
        Ok(Sample::VectorGroup { rows, sizes })
    }

    /// Number of observations the group action sees.
    pub fn action_len(&self) -> usize {
        match self {
            Sample::Values(v) => v.len(),
            Sample::MultiGroup { values, .. } => values.len(),
            Sample::Paired { y, .. } => y.len(),
            Sample::VectorGroup { rows, .. } => rows.len(),
            Sample::Bits(b) => b.len(),
            Sample::Experiment(e) => e.treatments.len(),
            Sample::Clusters(rows) => rows.len(),
        }
    }

    /// The two groups of a two-group layout.
    pub(crate) fn as_two_groups(&self) -> Result<(&[S], &[S])> {
        match self {
            Sample::MultiGroup { values, sizes } if sizes.len() == 2 => {
                Ok(values.split_at(sizes[0]))
            }
            _ => Err(Error::structure("statistic requires a two-sample layout")),
        }
    }

    pub(crate) fn as_groups(&self) -> Result<Vec<&[S]>> {
        match self {
            Sample::MultiGroup { values, sizes } => {
                if sizes.iter().sum::<usize>() != values.len() {
                    return Err(Error::structure(
                        "group sizes do not sum to the value count",
                    ));
                }
                let mut out = Vec::with_capacity(sizes.len());
                let mut start = 0;
                for &len in sizes {
                    out.push(&values[start..start + len]);
                    start += len;
                }
                Ok(out)
            }
            _ => Err(Error::structure("statistic requires a multi-group layout")),
        }
    }

    pub(crate) fn as_values(&self) -> Result<&[S]> {
        match self {
            Sample::Values(v) => Ok(v),
            _ => Err(Error::structure("statistic requires scalar series data")),
        }
    }

    pub(crate) fn as_paired(&self) -> Result<(&[S], &[S])> {
        match self {
            Sample::Paired { x, y } => Ok((x, y)),
            _ => Err(Error::structure("statistic requires paired data")),
        }
    }

    pub(crate) fn as_bits(&self) -> Result<&[bool]> {
        match self {
            Sample::Bits(b) => Ok(b),
            _ => Err(Error::structure("statistic requires a binary series")),
        }
    }
}

/// One record per experimental unit: outcome, treatment label, covariates,
/// and optional stratum or pair labels aligned by index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSample<S> {
    pub outcomes: Vec<S>,
    pub treatments: Vec<bool>,
    pub covariates: Vec<Vec<S>>,
    pub strata: Option<Vec<usize>>,
    pub pairs: Option<Vec<usize>>,
}

impl<S: Scalar> ExperimentSample<S> {
    pub fn new(outcomes: Vec<S>, treatments: Vec<bool>, covariates: Vec<Vec<S>>) -> Result<Self> {
        if outcomes.len() != treatments.len() {
            return Err(Error::structure("outcomes and treatments differ in length"));
        }
        if !covariates.is_empty() && covariates.len() != outcomes.len() {
            return Err(Error::structure(
                "covariates differ in length from outcomes",
            ));
        }
        Ok(Self {
            outcomes,
            treatments,
            covariates,
            strata: None,
            pairs: None,
        })
    }

    pub fn with_strata(mut self, strata: Vec<usize>) -> Result<Self> {
        if strata.len() != self.outcomes.len() {
            return Err(Error::structure(
                "strata labels differ in length from outcomes",
            ));
        }
        self.strata = Some(strata);
        Ok(self)
    }

    pub fn with_pairs(mut self, pairs: Vec<usize>) -> Result<Self> {
        if pairs.len() != self.outcomes.len() {
            return Err(Error::structure(
                "pair labels differ in length from outcomes",
            ));
        }
        self.pairs = Some(pairs);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Outcomes split by treatment label, treated first.
    pub(crate) fn split_by_treatment(&self) -> (Vec<S>, Vec<S>) {
        let mut treated = Vec::new();
        let mut control = Vec::new();
        for (&y, &d) in self.outcomes.iter().zip(&self.treatments) {
            if d {
                treated.push(y);
            } else {
                control.push(y);
            }
        }
        (treated, control)
    }
}
