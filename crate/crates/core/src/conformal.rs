//! Prediction sets for exchangeable data by permutation-test inversion.
//!
//! Three constructions: the order-statistic bound for a bare exchangeable
//! sequence, full conformal prediction over a response grid with a
//! symmetric predictor refit at every candidate, and split conformal with
//! a predictor fit on a held-out training sample.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Plug-in predictor contract.
///
/// `fit_predict` fits on `points` and returns predictions at `at`. Full
/// conformal requires the fit to be symmetric in its training points
/// (the candidate pair is included among them); split conformal imposes
/// no symmetry since the fit never sees the calibration data.
pub trait Predictor<S: Scalar>: Sync {
    fn fit_predict(&self, points: &[(S, S)], at: &[S]) -> Result<Vec<S>>;
}

/// Predicts the training-response mean everywhere.
#[derive(Debug, Clone, Copy)]
pub struct MeanPredictor;

impl<S: Scalar> Predictor<S> for MeanPredictor {
    fn fit_predict(&self, points: &[(S, S)], at: &[S]) -> Result<Vec<S>> {
        if points.is_empty() {
            return Err(Error::structure("cannot fit on an empty sample"));
        }
        let m = points.iter().fold(S::zero(), |a, &(_, y)| a + y) / S::from_count(points.len());
        Ok(vec![m; at.len()])
    }
}

/// Predicts the training-response median everywhere.
#[derive(Debug, Clone, Copy)]
pub struct MedianPredictor;

impl<S: Scalar> Predictor<S> for MedianPredictor {
    fn fit_predict(&self, points: &[(S, S)], at: &[S]) -> Result<Vec<S>> {
        if points.is_empty() {
            return Err(Error::structure("cannot fit on an empty sample"));
        }
        let mut ys: Vec<S> = points.iter().map(|&(_, y)| y).collect();
        ys.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN response"));
        let mid = ys.len() / 2;
        let med = if ys.len() % 2 == 1 {
            ys[mid]
        } else {
            (ys[mid - 1] + ys[mid]) / S::from_f64_c(2.0)
        };
        Ok(vec![med; at.len()])
    }
}

/// Simple least-squares line; falls back to the mean when the regressor
/// is constant.
#[derive(Debug, Clone, Copy)]
pub struct LinearPredictor;

impl<S: Scalar> Predictor<S> for LinearPredictor {
    fn fit_predict(&self, points: &[(S, S)], at: &[S]) -> Result<Vec<S>> {
        if points.is_empty() {
            return Err(Error::structure("cannot fit on an empty sample"));
        }
        let n = S::from_count(points.len());
        let mx = points.iter().fold(S::zero(), |a, &(x, _)| a + x) / n;
        let my = points.iter().fold(S::zero(), |a, &(_, y)| a + y) / n;
        let sxx = points.iter().fold(S::zero(), |a, &(x, _)| {
            let d = x - mx;
            a + d * d
        });
        let sxy = points
            .iter()
            .fold(S::zero(), |a, &(x, y)| a + (x - mx) * (y - my));
        let slope = if sxx > S::zero() {
            sxy / sxx
        } else {
            S::zero()
        };
        Ok(at.iter().map(|&x| my + slope * (x - mx)).collect())
    }
}

/// A fixed prediction function that ignores the training points.
pub struct PretrainedPredictor<F>(pub F);

impl<S: Scalar, F: Fn(S) -> S + Sync> Predictor<S> for PretrainedPredictor<F> {
    fn fit_predict(&self, _points: &[(S, S)], at: &[S]) -> Result<Vec<S>> {
        Ok(at.iter().map(|&x| (self.0)(x)).collect())
    }
}

/// Diagnostics attached to a prediction interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum IntervalDiagnostics {
    /// Order-statistic bound: which order statistic of how many points.
    OrderStatistic { k: usize, n: usize },
    /// Split conformal: calibration quantile index.
    Split { k: usize, n_calibration: usize },
}

/// A prediction interval with its nominal level. Unbounded sides are
/// represented by infinities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionInterval<S> {
    pub lower: S,
    pub upper: S,
    /// Nominal miscoverage level alpha; coverage is at least `1 - alpha`.
    pub alpha: S,
    pub diagnostics: IntervalDiagnostics,
    /// Conformity scores the bound was read from, sorted ascending.
    pub scores: Vec<S>,
    pub warnings: Vec<String>,
}

impl<S: Scalar> PredictionInterval<S> {
    pub fn contains(&self, y: S) -> bool {
        self.lower <= y && y <= self.upper
    }
}

fn check_alpha<S: Scalar>(alpha: S) -> Result<()> {
    if !(alpha > S::zero() && alpha < S::one()) {
        return Err(Error::parameter("alpha must lie strictly between 0 and 1"));
    }
    Ok(())
}

/// Conformal rank: `ceil((n + 1)(1 - alpha))`.
fn conformal_rank<S: Scalar>(n: usize, alpha: S) -> usize {
    let v = S::from_count(n + 1) * (S::one() - alpha);
    v.ceil().as_f64() as usize
}

/// One-sided upper prediction bound for the next draw of an exchangeable
/// scalar sequence: the k-th smallest observed value with
/// `k = ceil((n + 1)(1 - alpha))`, or plus infinity when `k = n + 1`.
pub fn upper_bound_exchangeable<S: Scalar>(x: &[S], alpha: S) -> Result<PredictionInterval<S>> {
    check_alpha(alpha)?;
    let n = x.len();
    if n == 0 {
        return Err(Error::structure("need at least one observation"));
    }
    let k = conformal_rank(n, alpha);
    let mut sorted = x.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN observation"));
    let mut warnings = Vec::new();
    let upper = if k <= n {
        sorted[k - 1]
    } else {
        warnings.push(format!(
            "no finite bound at this level: k = {k} exceeds n = {n}"
        ));
        S::infinity()
    };
    Ok(PredictionInterval {
        lower: S::neg_infinity(),
        upper,
        alpha,
        diagnostics: IntervalDiagnostics::OrderStatistic { k, n },
        scores: sorted,
        warnings,
    })
}

/// Response grid for full conformal prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid<S> {
    pub lo: S,
    pub hi: S,
    pub points: usize,
}

impl<S: Scalar> Grid<S> {
    pub fn new(lo: S, hi: S, points: usize) -> Result<Self> {
        if points < 2 || lo >= hi {
            return Err(Error::parameter("grid needs lo < hi and at least 2 points"));
        }
        Ok(Grid { lo, hi, points })
    }

    /// Default grid: 513 equispaced points over the observed response
    /// range widened by 50% on each side.
    pub fn default_for(ys: &[S]) -> Result<Self> {
        if ys.is_empty() {
            return Err(Error::parameter("cannot build a grid from no responses"));
        }
        let mut lo = ys[0];
        let mut hi = ys[0];
        for &y in ys {
            if y < lo {
                lo = y;
            }
            if y > hi {
                hi = y;
            }
        }
        let span = hi - lo;
        let pad = if span > S::zero() {
            span / S::from_f64_c(2.0)
        } else {
            S::one()
        };
        Grid::new(lo - pad, hi + pad, 513)
    }

    pub fn spacing(&self) -> S {
        (self.hi - self.lo) / S::from_count(self.points - 1)
    }

    pub fn value(&self, i: usize) -> S {
        self.lo + self.spacing() * S::from_count(i)
    }
}

/// Full conformal prediction set as a union of grid intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRegion<S> {
    /// Maximal runs of included grid points, as closed intervals.
    pub intervals: Vec<(S, S)>,
    pub alpha: S,
    pub grid: Grid<S>,
    /// Grid spacing, the resolution of the reported set.
    pub spacing: S,
    pub included_points: usize,
    pub warnings: Vec<String>,
}

impl<S: Scalar> PredictionRegion<S> {
    pub fn contains(&self, y: S) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= y && y <= hi)
    }
}

/// Full conformal prediction: for every candidate response `y` on the
/// grid, refit the predictor on the n + 1 points including `(x_query, y)`
/// and keep `y` when its absolute residual is at most the k-th smallest
/// of the n calibration residuals.
pub fn full_conformal<S: Scalar, P: Predictor<S> + ?Sized>(
    data: &[(S, S)],
    x_query: S,
    alpha: S,
    grid: &Grid<S>,
    predictor: &P,
) -> Result<PredictionRegion<S>> {
    check_alpha(alpha)?;
    let n = data.len();
    if n == 0 {
        return Err(Error::structure("need at least one calibration pair"));
    }
    let k = conformal_rank(n, alpha);
    let mut warnings = Vec::new();
    if k > n {
        warnings.push(format!(
            "k = {k} exceeds n = {n}; every candidate is included at this level"
        ));
    }

    let eval_xs: Vec<S> = data.iter().map(|&(x, _)| x).chain([x_query]).collect();
    let flags: Vec<Result<bool>> = (0..grid.points)
        .into_par_iter()
        .map(|i| {
            if k > n {
                return Ok(true);
            }
            let y = grid.value(i);
            let mut points = Vec::with_capacity(n + 1);
            points.extend_from_slice(data);
            points.push((x_query, y));
            let preds = predictor.fit_predict(&points, &eval_xs).map_err(|e| {
                Error::Structure(format!(
                    "predictor failed at grid value {}: {e}",
                    y.as_f64()
                ))
            })?;
            let mut scores: Vec<S> = data
                .iter()
                .zip(&preds)
                .map(|(&(_, yi), &fi)| (yi - fi).abs())
                .collect();
            let t_candidate = (y - preds[n]).abs();
            scores.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN score"));
            Ok(t_candidate <= scores[k - 1])
        })
        .collect();

    let mut included = vec![false; grid.points];
    for (i, f) in flags.into_iter().enumerate() {
        included[i] = f?;
    }

    let mut intervals = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &inc) in included.iter().enumerate() {
        match (inc, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                intervals.push((grid.value(s), grid.value(i - 1)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        intervals.push((grid.value(s), grid.value(grid.points - 1)));
    }
    let included_points = included.iter().filter(|&&b| b).count();

    Ok(PredictionRegion {
        intervals,
        alpha,
        grid: grid.clone(),
        spacing: grid.spacing(),
        included_points,
        warnings,
    })
}

/// Split conformal: fit on the training split, read the
/// `ceil((n_c + 1)(1 - alpha))`-th smallest absolute calibration residual
/// as the half-width around the prediction at `x_query`.
pub fn split_conformal<S: Scalar, P: Predictor<S> + ?Sized>(
    train: &[(S, S)],
    calibration: &[(S, S)],
    x_query: S,
    alpha: S,
    predictor: &P,
) -> Result<PredictionInterval<S>> {
    check_alpha(alpha)?;
    if calibration.is_empty() {
        return Err(Error::structure("calibration split is empty"));
    }
    let n_c = calibration.len();
    let eval_xs: Vec<S> = calibration
        .iter()
        .map(|&(x, _)| x)
        .chain([x_query])
        .collect();
    let preds = predictor.fit_predict(train, &eval_xs)?;
    let mut scores: Vec<S> = calibration
        .iter()
        .zip(&preds)
        .map(|(&(_, y), &f)| (y - f).abs())
        .collect();
    scores.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN score"));

    let k = conformal_rank(n_c, alpha);
    let center = preds[n_c];
    let mut warnings = Vec::new();
    let (lower, upper) = if k <= n_c {
        let q = scores[k - 1];
        (center - q, center + q)
    } else {
        warnings.push(format!(
            "no finite width at this level: k = {k} exceeds n_c = {n_c}"
        ));
        (S::neg_infinity(), S::infinity())
    };
    Ok(PredictionInterval {
        lower,
        upper,
        alpha,
        diagnostics: IntervalDiagnostics::Split {
            k,
            n_calibration: n_c,
        },
        scores,
        warnings,
    })
}

/// Two-sided prediction interval for a bare exchangeable sequence from
/// absolute deviations about a symmetric location fit (median or mean).
///
/// This is full conformal on the grid with a location-only predictor; the
/// observations play both the x and y roles.
pub fn symmetric_interval_exchangeable<S: Scalar>(
    x: &[S],
    alpha: S,
    use_median: bool,
    grid: Option<Grid<S>>,
) -> Result<PredictionRegion<S>> {
    let data: Vec<(S, S)> = x.iter().map(|&v| (S::zero(), v)).collect();
    let grid = match grid {
        Some(g) => g,
        None => Grid::default_for(x)?,
    };
    if use_median {
        full_conformal(&data, S::zero(), alpha, &grid, &MedianPredictor)
    } else {
        full_conformal(&data, S::zero(), alpha, &grid, &MeanPredictor)
    }
}

/// How conformity is scored for a prediction task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScoreKind {
    /// `|y - f(x)|` for a fitted predictor.
    AbsResidual,
    /// The raw value itself (one-sided bound).
    RawValue,
    /// `|y - median|` of the pooled responses.
    AbsDeviationFromMedian,
    /// `|y - mean|` of the pooled responses.
    AbsDeviationFromMean,
}

/// Either a single interval or a grid-resolution union of intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PredictionSet<S> {
    Interval(PredictionInterval<S>),
    Region(PredictionRegion<S>),
}

/// A fully specified prediction task: data, query point, level, score
/// kind, and evaluation mode.
pub struct ConformalTask<'a, S: Scalar> {
    pub data: Vec<(S, S)>,
    pub x_query: S,
    pub alpha: S,
    pub score: ScoreKind,
    pub mode: ConformalMode<'a, S>,
}

/// Full mode refits over a response grid; split mode uses a held-out
/// training sample for the predictor.
pub enum ConformalMode<'a, S: Scalar> {
    Full {
        grid: Option<Grid<S>>,
        predictor: &'a dyn Predictor<S>,
    },
    Split {
        train: Vec<(S, S)>,
        predictor: &'a dyn Predictor<S>,
    },
}

impl<S: Scalar> ConformalTask<'_, S> {
    pub fn run(&self) -> Result<PredictionSet<S>> {
        match (&self.mode, self.score) {
            (ConformalMode::Split { train, predictor }, ScoreKind::AbsResidual) => {
                Ok(PredictionSet::Interval(split_conformal(
                    train,
                    &self.data,
                    self.x_query,
                    self.alpha,
                    *predictor,
                )?))
            }
            (ConformalMode::Full { grid, predictor }, ScoreKind::AbsResidual) => {
                let grid = match grid {
                    Some(g) => g.clone(),
                    None => {
                        let ys: Vec<S> = self.data.iter().map(|&(_, y)| y).collect();
                        Grid::default_for(&ys)?
                    }
                };
                Ok(PredictionSet::Region(full_conformal(
                    &self.data,
                    self.x_query,
                    self.alpha,
                    &grid,
                    *predictor,
                )?))
            }
            (_, ScoreKind::RawValue) => {
                let ys: Vec<S> = self.data.iter().map(|&(_, y)| y).collect();
                Ok(PredictionSet::Interval(upper_bound_exchangeable(
                    &ys, self.alpha,
                )?))
            }
            (ConformalMode::Full { grid, .. }, ScoreKind::AbsDeviationFromMedian) => {
                let ys: Vec<S> = self.data.iter().map(|&(_, y)| y).collect();
                Ok(PredictionSet::Region(symmetric_interval_exchangeable(
                    &ys,
                    self.alpha,
                    true,
                    grid.clone(),
                )?))
            }
            (ConformalMode::Full { grid, .. }, ScoreKind::AbsDeviationFromMean) => {
                let ys: Vec<S> = self.data.iter().map(|&(_, y)| y).collect();
                Ok(PredictionSet::Region(symmetric_interval_exchangeable(
                    &ys,
                    self.alpha,
                    false,
                    grid.clone(),
                )?))
            }
            (ConformalMode::Split { .. }, _) => Err(Error::parameter(
                "split mode scores predictor residuals; use the absolute-residual score",
            )),
        }
    }
}
