//! The general randomization-test construction.
//!
//! Given a statistic `T` and a finite group `G` acting on the observed
//! sample, the engine recomputes `T` over every transformed sample (or a
//! uniformly sampled subset with the identity prepended), orders the
//! values, and derives the tie-aware randomized test together with the
//! conservative p-value and the randomization critical value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{apply_into, GroupElement, GroupKind};
use crate::sample::Sample;
use crate::scalar::Scalar;

/// A real-valued test statistic; larger values count against the null.
pub trait Statistic<S: Scalar>: Sync {
    fn evaluate(&self, sample: &Sample<S>) -> Result<S>;
}

/// Adapter turning a closure into a [`Statistic`].
pub struct FnStatistic<F>(pub F);

impl<S: Scalar, F> Statistic<S> for FnStatistic<F>
where
    F: Fn(&Sample<S>) -> Result<S> + Sync,
{
    fn evaluate(&self, sample: &Sample<S>) -> Result<S> {
        (self.0)(sample)
    }
}

/// What to do when the statistic is undefined on a transformed sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum UndefinedPolicy {
    /// Exclude the element from the randomization distribution and report
    /// the count; derived quantities use the reduced element count.
    #[default]
    Drop,
    /// Abort the whole run.
    Abort,
}

/// Engine knobs. The defaults match the documented conventions.
#[derive(Debug, Clone, Serialize)]
pub struct EngineConfig {
    /// Maximum group size accepted for exact enumeration.
    pub cap: usize,
    /// Policy for undefined recomputed statistics.
    pub undefined_policy: UndefinedPolicy,
    /// Evaluate transformed statistics on a thread pool. Results are
    /// identical with or without parallelism.
    pub parallel: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            cap: 1_000_000,
            undefined_policy: UndefinedPolicy::Drop,
            parallel: true,
        }
    }
}

/// Default number of sampled elements in Monte Carlo mode (identity included).
pub const DEFAULT_MONTE_CARLO_B: usize = 10_000;

/// How the randomization distribution was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Full enumeration over `m` elements (after any exclusions).
    Exact { m: usize },
    /// Identity plus `b - 1` uniform draws, generated from `seed`.
    MonteCarlo { b: usize, seed: u64 },
}

/// The randomization distribution and every quantity derived from it.
#[derive(Debug, Clone, Serialize)]
pub struct RandomizationResult<S> {
    /// Observed statistic `T(X)`.
    pub t_obs: S,
    /// Recomputed statistics `T(gX)`, sorted ascending.
    pub values: Vec<S>,
    pub mode: Mode,
    pub alpha: S,
    /// 1-indexed order statistic defining the critical value: `k = M - floor(M alpha)`.
    pub k: usize,
    /// Count of values strictly above the k-th order statistic.
    pub m_plus: usize,
    /// Count of values equal to the k-th order statistic.
    pub m_zero: usize,
    /// Tie-splitting probability `(M alpha - M+) / M0`.
    pub a: S,
    /// Randomized test function at the observed sample: 1, `a`, or 0.
    pub phi: S,
    /// Conservative p-value: fraction of values at or above `t_obs`.
    pub p_hat: S,
    /// Critical value `inf { t : R_hat(t) >= 1 - alpha }`.
    pub r_hat: S,
    /// Elements excluded under [`UndefinedPolicy::Drop`].
    pub dropped: usize,
}

/// Outcome of applying the test function to the observed sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decision<S> {
    pub reject: bool,
    pub phi: S,
}

impl<S: Scalar> RandomizationResult<S> {
    /// Assemble a result from raw recomputed values.
    ///
    /// `values` must contain the observed statistic at least once (the
    /// identity element's value). NaNs abort; infinities are ranked.
    pub fn from_values(
        t_obs: S,
        mut values: Vec<S>,
        alpha: S,
        mode: Mode,
        dropped: usize,
    ) -> Result<Self> {
        if !(alpha > S::zero() && alpha < S::one()) {
            return Err(Error::parameter("alpha must lie strictly between 0 and 1"));
        }
        if values.is_empty() {
            return Err(Error::structure("randomization distribution is empty"));
        }
        if t_obs.is_nan() || values.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite(
                "a recomputed statistic is NaN and cannot be ranked".into(),
            ));
        }
        values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN ruled out"));

        let m = values.len();
        let m_scalar = S::from_count(m);
        let m_alpha = m_scalar * alpha;
        let k = m - m_alpha.floor().as_f64() as usize;
        let t_k = values[k - 1];

        let m_plus = values.iter().filter(|&&v| v > t_k).count();
        let m_zero = values.iter().filter(|&&v| v == t_k).count();
        let a = (m_alpha - S::from_count(m_plus)) / S::from_count(m_zero);

        let phi = if t_obs > t_k {
            S::one()
        } else if t_obs == t_k {
            a
        } else {
            S::zero()
        };

        let ge = values.iter().filter(|&&v| v >= t_obs).count();
        let p_hat = S::from_count(ge) / m_scalar;

        // inf { t : R_hat(t) >= 1 - alpha }, scanning cumulative counts.
        let threshold = m_scalar * (S::one() - alpha);
        let mut r_hat = values[m - 1];
        let mut i = 0;
        while i < m {
            let v = values[i];
            let mut j = i + 1;
            while j < m && values[j] == v {
                j += 1;
            }
            if S::from_count(j) >= threshold {
                r_hat = v;
                break;
            }
            i = j;
        }

        Ok(RandomizationResult {
            t_obs,
            values,
            mode,
            alpha,
            k,
            m_plus,
            m_zero,
            a,
            phi,
            p_hat,
            r_hat,
            dropped,
        })
    }

    /// Effective number of values in the distribution.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Requested evaluation mode for operations that accept either.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RunMode {
    Exact,
    MonteCarlo { b: usize, seed: u64 },
}

/// Dispatch to [`run_exact_cfg`] or [`run_mc_cfg`] according to `mode`.
pub fn run_with_mode<S: Scalar, T: Statistic<S> + ?Sized>(
    cfg: &EngineConfig,
    x: &Sample<S>,
    stat: &T,
    kind: &GroupKind,
    alpha: S,
    mode: RunMode,
) -> Result<RandomizationResult<S>> {
    match mode {
        RunMode::Exact => run_exact_cfg(cfg, x, stat, kind, alpha),
        RunMode::MonteCarlo { b, seed } => run_mc_cfg(cfg, x, stat, kind, alpha, b, seed),
    }
}

/// Exact randomization test: enumerate the whole group.
pub fn run_exact<S: Scalar, T: Statistic<S> + ?Sized>(
    x: &Sample<S>,
    stat: &T,
    kind: &GroupKind,
    alpha: S,
) -> Result<RandomizationResult<S>> {
    run_exact_cfg(&EngineConfig::default(), x, stat, kind, alpha)
}

/// Exact randomization test with explicit engine configuration.
pub fn run_exact_cfg<S: Scalar, T: Statistic<S> + ?Sized>(
    cfg: &EngineConfig,
    x: &Sample<S>,
    stat: &T,
    kind: &GroupKind,
    alpha: S,
) -> Result<RandomizationResult<S>> {
    check_action_len(kind, x)?;
    let t_obs = stat.evaluate(x)?;
    let elements: Vec<GroupElement> = kind.enumerate(cfg.cap)?.collect();
    let (values, dropped) = evaluate_elements(cfg, x, stat, &elements)?;
    RandomizationResult::from_values(
        t_obs,
        values,
        alpha,
        Mode::Exact {
            m: elements.len() - dropped,
        },
        dropped,
    )
}

/// Monte Carlo randomization test: identity plus `b - 1` uniform draws.
pub fn run_mc<S: Scalar, T: Statistic<S> + ?Sized>(
    x: &Sample<S>,
    stat: &T,
    kind: &GroupKind,
    alpha: S,
    b: usize,
    seed: u64,
) -> Result<RandomizationResult<S>> {
    run_mc_cfg(&EngineConfig::default(), x, stat, kind, alpha, b, seed)
}

/// Monte Carlo randomization test with explicit engine configuration.
pub fn run_mc_cfg<S: Scalar, T: Statistic<S> + ?Sized>(
    cfg: &EngineConfig,
    x: &Sample<S>,
    stat: &T,
    kind: &GroupKind,
    alpha: S,
    b: usize,
    seed: u64,
) -> Result<RandomizationResult<S>> {
    if b < 2 {
        return Err(Error::parameter("Monte Carlo mode needs b >= 2"));
    }
    check_action_len(kind, x)?;
    let t_obs = stat.evaluate(x)?;

    // The element list is materialized sequentially under the seed, so
    // results do not depend on thread count.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elements = Vec::with_capacity(b);
    elements.push(kind.identity());
    for _ in 1..b {
        elements.push(kind.sample_uniform(&mut rng)?);
    }
    let (values, dropped) = evaluate_elements(cfg, x, stat, &elements)?;
    RandomizationResult::from_values(
        t_obs,
        values,
        alpha,
        Mode::MonteCarlo {
            b: b - dropped,
            seed,
        },
        dropped,
    )
}

/// Apply the randomized or non-randomized test function.
///
/// Non-randomized: reject iff `t_obs` strictly exceeds the k-th order
/// statistic. Randomized: reject with probability `phi`.
pub fn decide<S: Scalar, R: Rng + ?Sized>(
    res: &RandomizationResult<S>,
    randomized: bool,
    rng: Option<&mut R>,
) -> Result<Decision<S>> {
    if !randomized {
        let reject = res.phi == S::one();
        return Ok(Decision {
            reject,
            phi: res.phi,
        });
    }
    let rng = rng.ok_or_else(|| Error::parameter("randomized decision needs an rng"))?;
    let reject = if res.phi == S::one() {
        true
    } else if res.phi == S::zero() {
        false
    } else {
        S::from_f64_c(rng.random::<f64>()) < res.phi
    };
    Ok(Decision {
        reject,
        phi: res.phi,
    })
}

fn check_action_len<S: Scalar>(kind: &GroupKind, x: &Sample<S>) -> Result<()> {
    kind.validate()?;
    if kind.action_len() != x.action_len() {
        return Err(Error::structure(format!(
            "group acts on {} indices but the sample has {}",
            kind.action_len(),
            x.action_len()
        )));
    }
    Ok(())
}

fn evaluate_elements<S: Scalar, T: Statistic<S> + ?Sized>(
    cfg: &EngineConfig,
    x: &Sample<S>,
    stat: &T,
    elements: &[GroupElement],
) -> Result<(Vec<S>, usize)> {
    let raw: Vec<Result<S>> = if cfg.parallel {
        elements
            .par_iter()
            .map_init(
                || x.clone(),
                |scratch, g| {
                    apply_into(g, x, scratch)?;
                    stat.evaluate(scratch)
                },
            )
            .collect()
    } else {
        let mut scratch = x.clone();
        elements
            .iter()
            .map(|g| {
                apply_into(g, x, &mut scratch)?;
                stat.evaluate(&scratch)
            })
            .collect()
    };

    let mut values = Vec::with_capacity(raw.len());
    let mut dropped = 0usize;
    for r in raw {
        match r {
            Ok(v) => values.push(v),
            Err(Error::UndefinedStatistic(msg)) => match cfg.undefined_policy {
                UndefinedPolicy::Drop => dropped += 1,
                UndefinedPolicy::Abort => return Err(Error::UndefinedStatistic(msg)),
            },
            Err(e) => return Err(e),
        }
    }
    if values.is_empty() {
        return Err(Error::undefined(
            "statistic undefined on every group element",
        ));
    }
    Ok((values, dropped))
}
