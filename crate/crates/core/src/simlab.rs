//! Synthetic data generators and Monte Carlo drivers for calibrated
//! level studies at desk scale.
//!
//! Every generator declares whether its tested null actually holds, and
//! each study is deterministic given its seed: replications draw from
//! pre-split generator streams, so results are independent of thread
//! count and bit-identical across runs.

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::cluster::{art_test, im_ttest, ClusterScores, ClusterStat};
use crate::engine::{decide, run_mc, RunMode, Statistic};
use crate::error::{Error, Result};
use crate::experiments::{assign, pair_by_covariates, AssignmentScheme, PairStudentized};
use crate::groups::GroupKind;
use crate::sample::{ExperimentSample, Sample};
use crate::stats::streaks::hot_hand_sigma2;
use crate::stats::StatisticSpec;

/// Synthetic data-generating processes with declared ground truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Generator {
    /// Two samples of centered, skewed (shifted lognormal) draws with the
    /// given variances; sample 1 holds `round(p * n)` observations and its
    /// mean is shifted by `delta`. Equal means hold iff `delta = 0`.
    TwoSampleEarnings {
        n: usize,
        p: f64,
        var1: f64,
        var2: f64,
        delta: f64,
    },
    /// Paired data with `Y = Z * X`, `Z` Rademacher independent of
    /// `X ~ N(0,1)`: uncorrelated but strongly dependent.
    CorrelationProduct { n: usize },
    /// Matched-pair experiment with covariate `Z ~ U(-1,1)`, baseline
    /// `Y(0) = Z + noise`, and treatment effect `delta + effect_scale * Z`
    /// (mean effect `delta`, heterogeneous when `effect_scale > 0`).
    MatchedPairsHeterogeneous {
        pairs: usize,
        noise_sd: f64,
        effect_scale: f64,
        delta: f64,
    },
    /// One-sample standard normal draws shifted by `mu` (symmetric null
    /// at `mu = 0`).
    OneSampleNormal { n: usize, mu: f64 },
}

impl Generator {
    /// Does the null hypothesis the matched tests target actually hold?
    pub fn is_null(&self) -> bool {
        match self {
            Generator::TwoSampleEarnings { delta, .. } => *delta == 0.0,
            Generator::CorrelationProduct { .. } => true,
            Generator::MatchedPairsHeterogeneous { delta, .. } => *delta == 0.0,
            Generator::OneSampleNormal { mu, .. } => *mu == 0.0,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Generator::TwoSampleEarnings {
                n,
                p,
                var1,
                var2,
                delta,
            } => format!(
                "two-sample-earnings(n={n},p={p},var1={var1:.4},var2={var2:.4},delta={delta})"
            ),
            Generator::CorrelationProduct { n } => format!("correlation-product(n={n})"),
            Generator::MatchedPairsHeterogeneous {
                pairs,
                noise_sd,
                effect_scale,
                delta,
            } => {
                format!(
                    "matched-pairs(pairs={pairs},noise={noise_sd},scale={effect_scale},delta={delta})"
                )
            }
            Generator::OneSampleNormal { n, mu } => format!("one-sample-normal(n={n},mu={mu})"),
        }
    }

    /// Draw one replication: the sample and its matched group.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<(Sample<f64>, GroupKind)> {
        match self {
            Generator::TwoSampleEarnings {
                n,
                p,
                var1,
                var2,
                delta,
            } => {
                let m = ((p * *n as f64).round() as usize).clamp(1, n - 1);
                let x: Vec<f64> = (0..m)
                    .map(|_| centered_lognormal(rng, *var1) + delta)
                    .collect();
                let y: Vec<f64> = (0..n - m).map(|_| centered_lognormal(rng, *var2)).collect();
                Ok((
                    Sample::two_sample(x, y),
                    GroupKind::FullPermutation { n: *n },
                ))
            }
            Generator::CorrelationProduct { n } => {
                let mut x = Vec::with_capacity(*n);
                let mut y = Vec::with_capacity(*n);
                for _ in 0..*n {
                    let xi: f64 = StandardNormal.sample(rng);
                    let z = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    x.push(xi);
                    y.push(z * xi);
                }
                Ok((Sample::paired(x, y)?, GroupKind::FullPermutation { n: *n }))
            }
            Generator::MatchedPairsHeterogeneous {
                pairs,
                noise_sd,
                effect_scale,
                delta,
            } => {
                let n = 2 * pairs;
                let z: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                let pa = pair_by_covariates(&z)?;
                let scheme: AssignmentScheme<f64> = AssignmentScheme::MatchedPairs {
                    pairs: pa.labels.clone(),
                };
                let d = assign(&scheme, n, rng)?;
                let outcomes: Vec<f64> = (0..n)
                    .map(|i| {
                        let noise: f64 = StandardNormal.sample(rng);
                        let effect = if d[i] {
                            delta + effect_scale * z[i]
                        } else {
                            0.0
                        };
                        z[i] + effect + noise_sd * noise
                    })
                    .collect();
                let e = ExperimentSample::new(outcomes, d, z.iter().map(|&v| vec![v]).collect())?
                    .with_pairs(pa.labels.clone())?;
                Ok((
                    Sample::Experiment(e),
                    GroupKind::PairSwap { pairs: pa.labels },
                ))
            }
            Generator::OneSampleNormal { n, mu } => {
                let x: Vec<f64> = (0..*n)
                    .map(|_| {
                        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng) + mu
                    })
                    .collect();
                Ok((Sample::one_sample(x), GroupKind::SignChange { n: *n }))
            }
        }
    }
}

/// Lognormal shape parameter of the synthetic earnings populations:
/// moderate right skew, comparable to log-earnings data.
pub const EARNINGS_SHAPE: f64 = 0.4;

/// Mean-zero skewed draw with the requested variance: a centered, scaled
/// `exp(sigma0 N(0,1))` with `sigma0 = EARNINGS_SHAPE`.
fn centered_lognormal(rng: &mut ChaCha8Rng, variance: f64) -> f64 {
    let s2 = EARNINGS_SHAPE * EARNINGS_SHAPE;
    let z: f64 = StandardNormal.sample(rng);
    let raw = (EARNINGS_SHAPE * z).exp() - (s2 / 2.0).exp();
    let raw_var = (s2.exp() - 1.0) * s2.exp();
    raw * (variance / raw_var).sqrt()
}

/// One calibrated study: a generator, a replication budget, the nominal
/// level, and the seed that fixes every draw.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSpec {
    pub generator: Generator,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// One test entry evaluated on every replication.
#[derive(Clone)]
pub struct LevelTest {
    pub label: String,
    pub stat: Arc<dyn Statistic<f64> + Send + Sync>,
    /// Monte Carlo budget for the randomization distribution.
    pub b: usize,
}

impl LevelTest {
    pub fn from_spec(label: impl Into<String>, spec: StatisticSpec, b: usize) -> Self {
        LevelTest {
            label: label.into(),
            stat: Arc::new(spec),
            b,
        }
    }

    pub fn custom(
        label: impl Into<String>,
        stat: Arc<dyn Statistic<f64> + Send + Sync>,
        b: usize,
    ) -> Self {
        LevelTest {
            label: label.into(),
            stat,
            b,
        }
    }
}

/// One (scenario, test) cell of a rejection-rate table.
#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub scenario: String,
    pub test: String,
    pub reps: usize,
    pub rejections: usize,
    pub rate: f64,
    /// Binomial Monte Carlo standard error at the nominal level.
    pub mc_se: f64,
}

/// Rejection-rate table emitted by the level studies.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LevelTable {
    pub rows: Vec<LevelRow>,
}

impl LevelTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,test,reps,rejections,rate,mc_se\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.scenario, r.test, r.reps, r.rejections, r.rate, r.mc_se
            ));
        }
        out
    }

    pub fn merge(&mut self, other: LevelTable) {
        self.rows.extend(other.rows);
    }

    pub fn row(&self, scenario_contains: &str, test: &str) -> Option<&LevelRow> {
        self.rows
            .iter()
            .find(|r| r.scenario.contains(scenario_contains) && r.test == test)
    }
}

/// Rejection rates (by conservative p-value) of the given tests under a
/// null scenario. Refuses scenarios whose generator declares an
/// alternative, preventing mislabeled level studies.
pub fn run_level_study(spec: &ScenarioSpec, tests: &[LevelTest]) -> Result<LevelTable> {
    if !spec.generator.is_null() {
        return Err(Error::parameter(
            "null-flag mismatch: the generator declares an alternative; \
             a level study requires a null scenario",
        ));
    }
    if spec.reps < 100 {
        return Err(Error::parameter(
            "level studies need at least 100 replications",
        ));
    }
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
        return Err(Error::parameter("alpha must lie strictly between 0 and 1"));
    }

    let per_rep: Vec<Vec<bool>> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<bool>> {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(rep as u64 + 1);
            let (sample, kind) = spec.generator.draw(&mut rng)?;
            let mut flags = Vec::with_capacity(tests.len());
            for t in tests {
                let engine_seed = rng.next_u64();
                let res = run_mc(
                    &sample,
                    t.stat.as_ref(),
                    &kind,
                    spec.alpha,
                    t.b,
                    engine_seed,
                )?;
                flags.push(res.p_hat <= spec.alpha);
            }
            Ok(flags)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(tests.len());
    for (ti, t) in tests.iter().enumerate() {
        let rejections = per_rep.iter().filter(|flags| flags[ti]).count();
        let rate = rejections as f64 / spec.reps as f64;
        let mc_se = (spec.alpha * (1.0 - spec.alpha) / spec.reps as f64).sqrt();
        rows.push(LevelRow {
            scenario: spec.generator.name(),
            test: t.label.clone(),
            reps: spec.reps,
            rejections,
            rate,
            mc_se,
        });
    }
    Ok(LevelTable { rows })
}

/// Population variances of the synthetic earnings populations: the
/// baseline pair and the variant with the second variance cut to a third.
pub const EARNINGS_VARIANCES: (f64, f64) = (0.531, 0.392);

/// Level study contrasting the unstudentized and studentized difference
/// in means across mixing proportions, in the baseline and
/// variance-reduced settings. Sample 1 (proportion `p`) draws from the
/// smaller-variance population; at `p` far from 1/2 the unstudentized
/// test's level breaks while the studentized one holds.
pub fn figure2_study(n: usize, reps: usize, b: usize, alpha: f64, seed: u64) -> Result<LevelTable> {
    let (var_hi, var_lo_base) = EARNINGS_VARIANCES;
    let mut table = LevelTable::default();
    for (setting, var_small) in [
        ("baseline", var_lo_base),
        ("reduced-variance", var_lo_base / 3.0),
    ] {
        for (pi, p) in [0.2, 0.5, 0.8].into_iter().enumerate() {
            let spec = ScenarioSpec {
                generator: Generator::TwoSampleEarnings {
                    n,
                    p,
                    var1: var_small,
                    var2: var_hi,
                    delta: 0.0,
                },
                reps,
                alpha,
                seed: seed ^ ((pi as u64 + 1) << 8) ^ (if setting == "baseline" { 0 } else { 1 }),
            };
            let tests = vec![
                LevelTest::from_spec("mean-diff", StatisticSpec::MeanDiff.two_sided(), b),
                LevelTest::from_spec(
                    "studentized-mean-diff",
                    StatisticSpec::StudentizedMeanDiff.two_sided(),
                    b,
                ),
            ];
            let mut sub = run_level_study(&spec, &tests)?;
            for row in &mut sub.rows {
                row.scenario = format!("{setting}/p={p}/{}", row.scenario);
            }
            table.merge(sub);
        }
    }
    Ok(table)
}

/// Level study for the correlation tests under the `Y = Z X` dependence
/// construction (uncorrelated, dependent; permutation variance 1, true
/// variance 3).
pub fn correlation_study(
    n: usize,
    reps: usize,
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<LevelTable> {
    let spec = ScenarioSpec {
        generator: Generator::CorrelationProduct { n },
        reps,
        alpha,
        seed,
    };
    let tests = vec![
        LevelTest::from_spec("correlation", StatisticSpec::Correlation.two_sided(), b),
        LevelTest::from_spec(
            "studentized-correlation",
            StatisticSpec::StudentizedCorrelation.two_sided(),
            b,
        ),
    ];
    run_level_study(&spec, &tests)
}

/// Level study for the matched-pair weak-null tests with heterogeneous
/// conditional means: the unstudentized pair test is conservative, the
/// studentized one is asymptotically exact.
pub fn weak_null_study(
    pairs: usize,
    reps: usize,
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<LevelTable> {
    let spec = ScenarioSpec {
        generator: Generator::MatchedPairsHeterogeneous {
            pairs,
            noise_sd: 0.5,
            effect_scale: 2.0,
            delta: 0.0,
        },
        reps,
        alpha,
        seed,
    };
    let tests = vec![
        LevelTest::from_spec("pair-mean-diff", StatisticSpec::MeanDiff.two_sided(), b),
        LevelTest::custom("studentized-pair", Arc::new(PairStudentized), b),
    ];
    run_level_study(&spec, &tests)
}

/// Diagnostics of the streak-difference randomization distribution
/// against its limiting normal approximation.
#[derive(Debug, Clone, Serialize)]
pub struct HotHandStudy {
    pub n: usize,
    pub k: usize,
    pub q: f64,
    pub b: usize,
    pub reps: usize,
    /// Replications whose observed statistic was defined.
    pub completed: usize,
    /// Replications skipped because the observed sequence had an empty
    /// streak set.
    pub skipped: usize,
    /// Average mean of the randomization distribution (bias estimate;
    /// negative under the i.i.d. null).
    pub mean_bias: f64,
    /// Average ratio of the randomization variance to `sigma_k^2(q_hat)/n`.
    pub variance_ratio: f64,
    /// Average Kolmogorov-Smirnov distance between the randomization
    /// distribution and the bias-corrected normal approximation.
    pub ks_distance: f64,
    /// Total group elements dropped for undefined recomputed statistics.
    pub dropped_elements: usize,
}

/// Randomization-distribution diagnostics for the streak difference on
/// i.i.d. Bernoulli(q) sequences.
pub fn run_hot_hand_study(
    n: usize,
    k: usize,
    q: f64,
    b: usize,
    reps: usize,
    seed: u64,
) -> Result<HotHandStudy> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::parameter(
            "success rate must lie strictly between 0 and 1",
        ));
    }
    if k == 0 || k >= n {
        return Err(Error::parameter("streak length must satisfy 1 <= k < n"));
    }

    struct RepOut {
        mean: f64,
        ratio: f64,
        ks: f64,
        dropped: usize,
    }

    let outcomes: Vec<Option<RepOut>> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<Option<RepOut>> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64 + 1);
            let bits: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < q).collect();
            let made = bits.iter().filter(|&&x| x).count();
            if made == 0 || made == n {
                return Ok(None);
            }
            let q_hat = made as f64 / n as f64;
            let sample = Sample::Bits(bits);
            let stat = StatisticSpec::HotHandDiff { streak: k };
            let engine_seed = rng.next_u64();
            let res = match run_mc(
                &sample,
                &stat,
                &GroupKind::FullPermutation { n },
                0.05,
                b,
                engine_seed,
            ) {
                Ok(res) => res,
                Err(Error::UndefinedStatistic(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let m = res.values.len() as f64;
            let mean = res.values.iter().sum::<f64>() / m;
            let var = res.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
            let theory = hot_hand_sigma2(q_hat, k)? / n as f64;
            let normal = Normal::new(mean, theory.sqrt())
                .map_err(|e| Error::parameter(format!("normal setup failed: {e}")))?;
            let mut ks: f64 = 0.0;
            for (i, v) in res.values.iter().enumerate() {
                let cdf = normal.cdf(*v);
                ks = ks
                    .max((cdf - i as f64 / m).abs())
                    .max((cdf - (i as f64 + 1.0) / m).abs());
            }
            Ok(Some(RepOut {
                mean,
                ratio: var / theory,
                ks,
                dropped: res.dropped,
            }))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut completed = 0usize;
    let mut skipped = 0usize;
    let (mut mean_sum, mut ratio_sum, mut ks_sum, mut dropped) = (0.0, 0.0, 0.0, 0usize);
    for o in outcomes {
        match o {
            Some(r) => {
                completed += 1;
                mean_sum += r.mean;
                ratio_sum += r.ratio;
                ks_sum += r.ks;
                dropped += r.dropped;
            }
            None => skipped += 1,
        }
    }
    if completed == 0 {
        return Err(Error::undefined(
            "statistic undefined on every generated sequence",
        ));
    }
    let c = completed as f64;
    Ok(HotHandStudy {
        n,
        k,
        q,
        b,
        reps,
        completed,
        skipped,
        mean_bias: mean_sum / c,
        variance_ratio: ratio_sum / c,
        ks_distance: ks_sum / c,
        dropped_elements: dropped,
    })
}

/// Rejection rates of the cluster sign-change test (randomized decision)
/// and the comparison t-test on heteroskedastic normal cluster scores.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterStudy {
    pub q: usize,
    pub sigmas: Vec<f64>,
    pub reps: usize,
    pub alpha: f64,
    pub art_rate: f64,
    pub im_rate: f64,
    pub mc_se: f64,
}

pub fn cluster_study(sigmas: &[f64], reps: usize, alpha: f64, seed: u64) -> Result<ClusterStudy> {
    let q = sigmas.len();
    if q < 2 {
        return Err(Error::parameter("need at least 2 clusters"));
    }
    if reps < 100 {
        return Err(Error::parameter(
            "cluster study needs at least 100 replications",
        ));
    }
    let flags: Vec<(bool, bool)> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<(bool, bool)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64 + 1);
            let vals: Vec<f64> = sigmas
                .iter()
                .map(|&s| {
                    s * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                })
                .collect();
            let scores = ClusterScores::from_scalars(vals)?;
            let art = art_test(&scores, ClusterStat::TStat, alpha, RunMode::Exact)?;
            let art_reject = decide(&art.result, true, Some(&mut rng))?.reject;
            let im_reject = im_ttest(&scores, alpha)?.reject;
            Ok((art_reject, im_reject))
        })
        .collect::<Result<Vec<_>>>()?;

    let art_rate = flags.iter().filter(|f| f.0).count() as f64 / reps as f64;
    let im_rate = flags.iter().filter(|f| f.1).count() as f64 / reps as f64;
    Ok(ClusterStudy {
        q,
        sigmas: sigmas.to_vec(),
        reps,
        alpha,
        art_rate,
        im_rate,
        mc_se: (alpha * (1.0 - alpha) / reps as f64).sqrt(),
    })
}
