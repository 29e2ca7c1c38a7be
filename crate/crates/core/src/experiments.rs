//! Treatment assignment and randomization tests for experiments.
//!
//! Strong nulls (equality of potential-outcome distributions) admit exact
//! tests through the group matched to the assignment scheme. The weak
//! null of a zero average treatment effect in matched-pair designs uses a
//! studentized pair statistic whose randomization distribution is the
//! within-pair sign-flip law.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::engine::{run_with_mode, EngineConfig, RandomizationResult, RunMode, Statistic};
use crate::error::{Error, Result};
use crate::groups::GroupKind;
use crate::sample::{ExperimentSample, Sample};
use crate::scalar::Scalar;
use crate::stats::StatisticSpec;

/// How treatment status is assigned given covariates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AssignmentScheme<S> {
    /// Independent Bernoulli(q) draws per unit.
    SimpleRandom { q: S },
    /// Uniform over all assignments with exactly `m` treated units.
    Complete { m: usize },
    /// Complete randomization within each stratum with
    /// `m(s) = round(q * n(s))` treated units.
    StratifiedBlock { strata: Vec<usize>, q: S },
    /// Exactly one treated unit per pair, chosen by a fair coin.
    MatchedPairs { pairs: Vec<usize> },
}

impl<S: Scalar> AssignmentScheme<S> {
    /// The transformation group matched to the scheme.
    pub fn group_kind(&self, n: usize) -> GroupKind {
        match self {
            AssignmentScheme::SimpleRandom { .. } | AssignmentScheme::Complete { .. } => {
                GroupKind::FullPermutation { n }
            }
            AssignmentScheme::StratifiedBlock { strata, .. } => GroupKind::StratifiedPermutation {
                strata: strata.clone(),
            },
            AssignmentScheme::MatchedPairs { pairs } => GroupKind::PairSwap {
                pairs: pairs.clone(),
            },
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            AssignmentScheme::SimpleRandom { q } => {
                if !(*q > S::zero() && *q < S::one()) {
                    return Err(Error::parameter("q must lie strictly between 0 and 1"));
                }
            }
            AssignmentScheme::Complete { m } => {
                if *m == 0 || *m >= n {
                    return Err(Error::parameter(format!(
                        "complete randomization needs 0 < m < n, got m = {m}, n = {n}"
                    )));
                }
            }
            AssignmentScheme::StratifiedBlock { strata, q } => {
                if strata.len() != n {
                    return Err(Error::structure(
                        "strata labels differ in length from units",
                    ));
                }
                if !(*q > S::zero() && *q < S::one()) {
                    return Err(Error::parameter("q must lie strictly between 0 and 1"));
                }
                for (label, size) in stratum_sizes(strata) {
                    let m = treated_per_stratum(*q, size);
                    if m == 0 || m >= size {
                        return Err(Error::parameter(format!(
                            "stratum {label} of size {size} gets {m} treated units; infeasible"
                        )));
                    }
                }
            }
            AssignmentScheme::MatchedPairs { pairs } => {
                if pairs.len() != n {
                    return Err(Error::structure("pair labels differ in length from units"));
                }
                GroupKind::PairSwap {
                    pairs: pairs.clone(),
                }
                .validate()?;
            }
        }
        Ok(())
    }
}

fn stratum_sizes(strata: &[usize]) -> BTreeMap<usize, usize> {
    let mut map = BTreeMap::new();
    for &s in strata {
        *map.entry(s).or_insert(0usize) += 1;
    }
    map
}

fn treated_per_stratum<S: Scalar>(q: S, size: usize) -> usize {
    (q.as_f64() * size as f64).round() as usize
}

/// Draw a treatment vector from the scheme's distribution.
pub fn assign<S: Scalar, R: Rng + ?Sized>(
    scheme: &AssignmentScheme<S>,
    n: usize,
    rng: &mut R,
) -> Result<Vec<bool>> {
    scheme.validate(n)?;
    let mut d = vec![false; n];
    match scheme {
        AssignmentScheme::SimpleRandom { q } => {
            let q = q.as_f64();
            for di in d.iter_mut() {
                *di = rng.random::<f64>() < q;
            }
        }
        AssignmentScheme::Complete { m } => {
            for di in d.iter_mut().take(*m) {
                *di = true;
            }
            d.shuffle(rng);
        }
        AssignmentScheme::StratifiedBlock { strata, q } => {
            let mut positions: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, &s) in strata.iter().enumerate() {
                positions.entry(s).or_default().push(i);
            }
            for members in positions.values() {
                let m = treated_per_stratum(*q, members.len());
                let mut local = vec![false; members.len()];
                for b in local.iter_mut().take(m) {
                    *b = true;
                }
                local.shuffle(rng);
                for (&i, &b) in members.iter().zip(&local) {
                    d[i] = b;
                }
            }
        }
        AssignmentScheme::MatchedPairs { pairs } => {
            let mut positions: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, &p) in pairs.iter().enumerate() {
                positions.entry(p).or_default().push(i);
            }
            for members in positions.values() {
                let first_treated = rng.random::<bool>();
                d[members[0]] = first_treated;
                d[members[1]] = !first_treated;
            }
        }
    }
    Ok(d)
}

/// A pairing of units by covariate proximity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairAssignment<S> {
    /// Pair label per unit; labels are ordered by covariate so that
    /// adjacent labels are close.
    pub labels: Vec<usize>,
    /// Achieved mean within-pair covariate distance `(1/n) sum |Z - Z'|`.
    pub discrepancy: S,
}

/// Pair units on scalar covariates by sorting and pairing neighbors.
pub fn pair_by_covariates<S: Scalar>(z: &[S]) -> Result<PairAssignment<S>> {
    let rows: Vec<Vec<S>> = z.iter().map(|&v| vec![v]).collect();
    pair_by_covariate_vectors(&rows)
}

/// Pair units on vector covariates by greedy nearest-neighbor matching.
/// Scalar covariates reduce to sort-and-pair-adjacent.
pub fn pair_by_covariate_vectors<S: Scalar>(z: &[Vec<S>]) -> Result<PairAssignment<S>> {
    let n = z.len();
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::structure(
            "pairing needs a positive even number of units",
        ));
    }
    let dim = z[0].len();
    if dim == 0 || z.iter().any(|r| r.len() != dim) {
        return Err(Error::structure("covariate rows have mixed dimensions"));
    }

    let pairs: Vec<(usize, usize)> = if dim == 1 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| z[i][0].partial_cmp(&z[j][0]).expect("NaN covariate"));
        order.chunks(2).map(|c| (c[0], c[1])).collect()
    } else {
        let mut unpaired: Vec<usize> = (0..n).collect();
        let mut pairs = Vec::with_capacity(n / 2);
        while !unpaired.is_empty() {
            let i = unpaired[0];
            let mut best = 1usize;
            let mut best_dist = S::infinity();
            for (slot, &j) in unpaired.iter().enumerate().skip(1) {
                let dist = euclid(&z[i], &z[j]);
                if dist < best_dist {
                    best_dist = dist;
                    best = slot;
                }
            }
            let j = unpaired.remove(best);
            unpaired.remove(0);
            pairs.push((i, j));
        }
        pairs
    };

    // Label pairs in covariate order (first coordinate of the pair mean)
    // so adjacent labels are adjacent in covariate space.
    let mut keyed: Vec<(S, (usize, usize))> = pairs
        .into_iter()
        .map(|(i, j)| ((z[i][0] + z[j][0]) / S::from_f64_c(2.0), (i, j)))
        .collect();
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN covariate"));

    let mut labels = vec![0usize; n];
    let mut total = S::zero();
    for (label, (_, (i, j))) in keyed.iter().enumerate() {
        labels[*i] = label;
        labels[*j] = label;
        total += euclid(&z[*i], &z[*j]);
    }
    Ok(PairAssignment {
        labels,
        discrepancy: total / S::from_count(n),
    })
}

fn euclid<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (&x, &y)| {
            let d = x - y;
            acc + d * d
        })
        .sqrt()
}

/// Exact randomization test of the strong null (equality of the
/// conditional potential-outcome distributions) under the scheme's group.
pub fn strong_null_test<S: Scalar>(
    x: &ExperimentSample<S>,
    scheme: &AssignmentScheme<S>,
    stat: &StatisticSpec,
    alpha: S,
    mode: RunMode,
) -> Result<RandomizationResult<S>> {
    strong_null_test_cfg(&EngineConfig::default(), x, scheme, stat, alpha, mode)
}

pub fn strong_null_test_cfg<S: Scalar>(
    cfg: &EngineConfig,
    x: &ExperimentSample<S>,
    scheme: &AssignmentScheme<S>,
    stat: &StatisticSpec,
    alpha: S,
    mode: RunMode,
) -> Result<RandomizationResult<S>> {
    validate_conforms(x, scheme)?;
    let kind = scheme.group_kind(x.len());
    let sample = Sample::Experiment(x.clone());
    run_with_mode(cfg, &sample, stat, &kind, alpha, mode)
}

/// Strong-null test that redraws whole assignment vectors from the scheme
/// instead of transforming the observed one. Valid for any scheme whose
/// assignment distribution can be sampled, by exchangeability of the
/// recomputed statistics.
pub fn strong_null_test_resampled<S: Scalar>(
    x: &ExperimentSample<S>,
    scheme: &AssignmentScheme<S>,
    stat: &StatisticSpec,
    alpha: S,
    b: usize,
    seed: u64,
) -> Result<RandomizationResult<S>> {
    use rand::SeedableRng;

    if b < 2 {
        return Err(Error::parameter("resampled mode needs b >= 2"));
    }
    validate_conforms(x, scheme)?;
    let sample = Sample::Experiment(x.clone());
    let t_obs = Statistic::evaluate(stat, &sample)?;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(b);
    values.push(t_obs);
    let mut redrawn = x.clone();
    let mut dropped = 0usize;
    for _ in 1..b {
        redrawn.treatments = assign(scheme, x.len(), &mut rng)?;
        match Statistic::evaluate(stat, &Sample::Experiment(redrawn.clone())) {
            Ok(v) => values.push(v),
            Err(Error::UndefinedStatistic(_)) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    RandomizationResult::from_values(
        t_obs,
        values,
        alpha,
        crate::engine::Mode::MonteCarlo {
            b: b - dropped,
            seed,
        },
        dropped,
    )
}

fn validate_conforms<S: Scalar>(
    x: &ExperimentSample<S>,
    scheme: &AssignmentScheme<S>,
) -> Result<()> {
    let n = x.len();
    if n == 0 {
        return Err(Error::structure("experiment sample is empty"));
    }
    scheme.validate(n)?;
    match scheme {
        AssignmentScheme::SimpleRandom { .. } => {}
        AssignmentScheme::Complete { m } => {
            let treated = x.treatments.iter().filter(|&&d| d).count();
            if treated != *m {
                return Err(Error::structure(format!(
                    "sample has {treated} treated units, scheme expects {m}"
                )));
            }
        }
        AssignmentScheme::StratifiedBlock { strata, q } => {
            if let Some(sample_strata) = &x.strata {
                if sample_strata != strata {
                    return Err(Error::structure("sample strata differ from the scheme's"));
                }
            }
            let mut counts: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
            for (&s, &d) in strata.iter().zip(&x.treatments) {
                let e = counts.entry(s).or_insert((0, 0));
                e.0 += 1;
                if d {
                    e.1 += 1;
                }
            }
            for (label, (size, treated)) in counts {
                let expect = treated_per_stratum(*q, size);
                if treated != expect {
                    return Err(Error::structure(format!(
                        "stratum {label} has {treated} treated units, scheme expects {expect}"
                    )));
                }
            }
        }
        AssignmentScheme::MatchedPairs { pairs } => {
            if let Some(sample_pairs) = &x.pairs {
                if sample_pairs != pairs {
                    return Err(Error::structure("sample pairs differ from the scheme's"));
                }
            }
            check_one_treated_per_pair(pairs, &x.treatments)?;
        }
    }
    Ok(())
}

fn check_one_treated_per_pair(pairs: &[usize], treatments: &[bool]) -> Result<()> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (&p, &d) in pairs.iter().zip(treatments) {
        let e = counts.entry(p).or_insert(0);
        if d {
            *e += 1;
        }
    }
    for (label, treated) in counts {
        if treated != 1 {
            return Err(Error::structure(format!(
                "pair {label} has {treated} treated units, expected exactly 1"
            )));
        }
    }
    Ok(())
}

/// Studentized matched-pair statistic `|T| / sqrt(V_hat)`.
///
/// `T = sqrt(n) (mean treated - mean control)`; `V_hat = tau2 - lambda/2`
/// uses within-pair treated-minus-control differences `D_j` ordered by
/// pair label (covariate order), with `tau2 = (1/k) sum D_j^2` and
/// `lambda = (2/k) sum_{j} D_{2j-1} D_{2j}` over disjoint adjacent pairs.
/// A non-positive `V_hat` is clipped to `tau2 * 1e-3`.
#[derive(Debug, Clone, Copy)]
pub struct PairStudentized;

/// Variance pieces of the studentized pair statistic on one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairVariance<S> {
    pub t_stat: S,
    pub tau2_hat: S,
    pub lambda_hat: S,
    pub v_hat: S,
    pub clipped: bool,
}

fn pair_diffs<S: Scalar>(e: &ExperimentSample<S>) -> Result<Vec<S>> {
    let pairs = e
        .pairs
        .as_ref()
        .ok_or_else(|| Error::structure("matched-pair test needs pair labels"))?;
    check_one_treated_per_pair(pairs, &e.treatments)?;
    let mut by_label: BTreeMap<usize, S> = BTreeMap::new();
    for ((&p, &d), &y) in pairs.iter().zip(&e.treatments).zip(&e.outcomes) {
        let signed = if d { y } else { -y };
        *by_label.entry(p).or_insert_with(S::zero) += signed;
    }
    Ok(by_label.into_values().collect())
}

fn pair_variance<S: Scalar>(e: &ExperimentSample<S>) -> Result<PairVariance<S>> {
    let diffs = pair_diffs(e)?;
    let k = diffs.len();
    if k < 2 {
        return Err(Error::structure("matched-pair test needs at least 2 pairs"));
    }
    let n = S::from_count(2 * k);
    let t_stat = n.sqrt() * diffs.iter().fold(S::zero(), |a, &d| a + d) / S::from_count(k);
    let tau2 = diffs.iter().fold(S::zero(), |a, &d| a + d * d) / S::from_count(k);
    let lambda = diffs
        .chunks_exact(2)
        .fold(S::zero(), |a, c| a + c[0] * c[1])
        * S::from_f64_c(2.0)
        / S::from_count(k);
    let raw = tau2 - lambda / S::from_f64_c(2.0);
    let clipped = raw <= S::zero();
    let v_hat = if clipped {
        tau2 * S::from_f64_c(1e-3)
    } else {
        raw
    };
    Ok(PairVariance {
        t_stat,
        tau2_hat: tau2,
        lambda_hat: lambda,
        v_hat,
        clipped,
    })
}

impl<S: Scalar> Statistic<S> for PairStudentized {
    fn evaluate(&self, sample: &Sample<S>) -> Result<S> {
        let e = match sample {
            Sample::Experiment(e) => e,
            _ => return Err(Error::structure("pair statistic requires experiment data")),
        };
        let pv = pair_variance(e)?;
        if pv.tau2_hat == S::zero() {
            // Every within-pair difference is zero; all flips tie.
            return Ok(S::zero());
        }
        Ok(pv.t_stat.abs() / pv.v_hat.sqrt())
    }
}

/// Result of the weak-null matched-pair test with its variance report.
#[derive(Debug, Clone, Serialize)]
pub struct WeakNullReport<S> {
    pub result: RandomizationResult<S>,
    pub variance: PairVariance<S>,
    pub theta0: S,
    pub warnings: Vec<String>,
}

/// Randomization test of the weak null `E[Y(1) - Y(0)] = theta0` in a
/// matched-pair design, via the studentized pair statistic over
/// within-pair swaps. Outcomes are pre-processed to `Y - theta0 * D`.
pub fn weak_null_test_pairs<S: Scalar>(
    x: &ExperimentSample<S>,
    theta0: S,
    alpha: S,
    mode: RunMode,
) -> Result<WeakNullReport<S>> {
    weak_null_test_pairs_cfg(&EngineConfig::default(), x, theta0, alpha, mode)
}

pub fn weak_null_test_pairs_cfg<S: Scalar>(
    cfg: &EngineConfig,
    x: &ExperimentSample<S>,
    theta0: S,
    alpha: S,
    mode: RunMode,
) -> Result<WeakNullReport<S>> {
    let pairs = x
        .pairs
        .as_ref()
        .ok_or_else(|| Error::structure("matched-pair test needs pair labels"))?
        .clone();
    let mut shifted = x.clone();
    for (y, &d) in shifted.outcomes.iter_mut().zip(&shifted.treatments) {
        if d {
            *y -= theta0;
        }
    }
    let variance = pair_variance(&shifted)?;
    let mut warnings = Vec::new();
    if variance.clipped {
        warnings.push(format!(
            "variance estimate was not positive (tau2 = {}, lambda = {}); clipped to tau2 * 1e-3",
            variance.tau2_hat, variance.lambda_hat
        ));
    }
    let kind = GroupKind::PairSwap { pairs };
    let sample = Sample::Experiment(shifted);
    let result = run_with_mode(cfg, &sample, &PairStudentized, &kind, alpha, mode)?;
    Ok(WeakNullReport {
        result,
        variance,
        theta0,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complete_counts_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scheme = AssignmentScheme::Complete { m: 2 };
        for _ in 0..50 {
            let d = assign::<f64, _>(&scheme, 4, &mut rng).unwrap();
            assert_eq!(d.iter().filter(|&&b| b).count(), 2);
        }
    }

    #[test]
    fn matched_pairs_one_treated_each() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let scheme = AssignmentScheme::MatchedPairs {
            pairs: vec![0, 0, 1, 1, 2, 2],
        };
        for _ in 0..50 {
            let d = assign::<f64, _>(&scheme, 6, &mut rng).unwrap();
            for p in 0..3 {
                let treated = (0..6).filter(|&i| i / 2 == p && d[i]).count();
                assert_eq!(treated, 1);
            }
        }
    }

    #[test]
    fn simple_random_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scheme = AssignmentScheme::SimpleRandom { q: 0.5f64 };
        let draws = 10_000;
        let mut treated = 0usize;
        for _ in 0..draws {
            treated += assign(&scheme, 10, &mut rng)
                .unwrap()
                .iter()
                .filter(|&&b| b)
                .count();
        }
        let frac = treated as f64 / (draws * 10) as f64;
        let se = (0.25f64 / (draws * 10) as f64).sqrt();
        assert!((frac - 0.5).abs() < 3.0 * se, "frac = {frac}");
    }

    #[test]
    fn stratified_counts_per_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let strata = vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 1];
        let scheme = AssignmentScheme::StratifiedBlock {
            strata: strata.clone(),
            q: 0.5f64,
        };
        for _ in 0..20 {
            let d = assign(&scheme, 10, &mut rng).unwrap();
            let t0 = (0..4).filter(|&i| d[i]).count();
            let t1 = (4..10).filter(|&i| d[i]).count();
            assert_eq!(t0, 2);
            assert_eq!(t1, 3);
        }
    }

    #[test]
    fn infeasible_counts_error() {
        assert!(matches!(
            assign::<f64, _>(
                &AssignmentScheme::Complete { m: 5 },
                4,
                &mut ChaCha8Rng::seed_from_u64(0)
            ),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn pairing_hand_example() {
        // z = (1, 10, 2, 9) pairs {1,2} and {9,10}; discrepancy (1+1)/4.
        let pa = pair_by_covariates(&[1.0f64, 10.0, 2.0, 9.0]).unwrap();
        assert_eq!(pa.labels[0], pa.labels[2]);
        assert_eq!(pa.labels[1], pa.labels[3]);
        assert_ne!(pa.labels[0], pa.labels[1]);
        assert!((pa.discrepancy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pairing_identical_covariates() {
        let pa = pair_by_covariates(&[3.0, 3.0, 3.0, 3.0]).unwrap();
        assert_eq!(pa.discrepancy, 0.0);
    }

    #[test]
    fn pairing_discrepancy_shrinks_with_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut prev = f64::INFINITY;
        for n in [40usize, 400, 4000] {
            let mut total = 0.0;
            let reps = 20;
            for _ in 0..reps {
                let z: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                total += pair_by_covariates(&z).unwrap().discrepancy;
            }
            let avg = total / reps as f64;
            assert!(avg < prev, "discrepancy should shrink: {avg} !< {prev}");
            prev = avg;
        }
    }

    #[test]
    fn pairing_rejects_odd_n() {
        assert!(pair_by_covariates(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn theta0_shift_consistency() {
        // Testing theta0 = c on data with a constant unit effect c equals
        // testing 0 on the effect-free data, decision for decision.
        let k = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let z: Vec<f64> = (0..2 * k).map(|_| rng.random::<f64>()).collect();
        let pa = pair_by_covariates(&z).unwrap();
        let scheme: AssignmentScheme<f64> = AssignmentScheme::MatchedPairs {
            pairs: pa.labels.clone(),
        };
        let d = assign(&scheme, 2 * k, &mut rng).unwrap();
        let base: Vec<f64> = (0..2 * k).map(|_| rng.random::<f64>()).collect();
        let c = 1.7;
        let with_effect: Vec<f64> = base
            .iter()
            .zip(&d)
            .map(|(&y, &di)| if di { y + c } else { y })
            .collect();

        let make = |outcomes: Vec<f64>| {
            ExperimentSample::new(outcomes, d.clone(), vec![])
                .unwrap()
                .with_pairs(pa.labels.clone())
                .unwrap()
        };
        let r_effect = weak_null_test_pairs(&make(with_effect), c, 0.05, RunMode::Exact).unwrap();
        let r_null = weak_null_test_pairs(&make(base), 0.0, 0.05, RunMode::Exact).unwrap();
        assert_eq!(r_effect.result.p_hat, r_null.result.p_hat);
        assert_eq!(r_effect.result.t_obs, r_null.result.t_obs);
    }

    #[test]
    fn strong_null_constant_outcomes() {
        let e = ExperimentSample::new(
            vec![2.0; 6],
            vec![true, false, true, false, true, false],
            vec![],
        )
        .unwrap();
        let scheme = AssignmentScheme::Complete { m: 3 };
        let res = strong_null_test(
            &e,
            &scheme,
            &StatisticSpec::MeanDiff.two_sided(),
            0.05,
            RunMode::Exact,
        )
        .unwrap();
        assert_eq!(res.p_hat, 1.0);
    }

    #[test]
    fn resampled_b2_lower_bound() {
        let e = ExperimentSample::new(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![true, true, false, false],
            vec![],
        )
        .unwrap();
        let scheme = AssignmentScheme::Complete { m: 2 };
        let res = strong_null_test_resampled(
            &e,
            &scheme,
            &StatisticSpec::MeanDiff.two_sided(),
            0.05,
            2,
            9,
        )
        .unwrap();
        assert!(res.p_hat >= 0.5);
    }

    #[test]
    fn scheme_mismatch_is_structural() {
        let e =
            ExperimentSample::new(vec![1.0, 2.0, 3.0], vec![true, true, false], vec![]).unwrap();
        let scheme = AssignmentScheme::Complete { m: 1 };
        assert!(matches!(
            strong_null_test(&e, &scheme, &StatisticSpec::MeanDiff, 0.05, RunMode::Exact),
            Err(Error::Structure(_))
        ));
    }
}
