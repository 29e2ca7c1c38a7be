//! Monte Carlo oracle checks: sampling-distribution shapes, level and
//! power of the composed tests, and estimator consistency on synthetic
//! designs with known truth.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use randinfer::cluster::{art_test, im_ttest, ClusterScores, ClusterStat};
use randinfer::conformal::{full_conformal, Grid, MeanPredictor};
use randinfer::engine::{decide, RunMode};
use randinfer::experiments::{
    assign, pair_by_covariates, strong_null_test, strong_null_test_resampled, weak_null_test_pairs,
    AssignmentScheme,
};
use randinfer::simlab::run_hot_hand_study;
use randinfer::stats::{dependence, two_sample};
use randinfer::{ExperimentSample, StatisticSpec};

fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        let c = cdf(v);
        ks = ks
            .max((c - i as f64 / n).abs())
            .max((c - (i as f64 + 1.0) / n).abs());
    }
    ks
}

#[test]
fn k_sample_null_distribution_is_chi_squared() {
    let reps = 2000;
    let mut draws: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(21_000);
            rng.set_stream(rep as u64 + 1);
            let groups: Vec<Vec<f64>> = (0..3)
                .map(|_| {
                    (0..60)
                        .map(|_| {
                            <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                        })
                        .collect()
                })
                .collect();
            let refs: Vec<&[f64]> = groups.iter().map(Vec::as_slice).collect();
            two_sample::k_sample_stat(&refs).unwrap()
        })
        .collect();
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let chi2 = ChiSquared::new(2.0).unwrap();
    let ks = ks_distance(&draws, |v| chi2.cdf(v));
    assert!(ks < 0.05, "KS distance to chi-squared(2) is {ks}");
}

#[test]
fn studentized_correlation_null_distribution_is_normal() {
    let reps = 2000;
    let mut draws: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(22_000);
            rng.set_stream(rep as u64 + 1);
            let x: Vec<f64> = (0..300)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            let y: Vec<f64> = (0..300)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            dependence::studentized_correlation(&x, &y).unwrap()
        })
        .collect();
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let normal = Normal::new(0.0, 1.0).unwrap();
    let ks = ks_distance(&draws, |v| normal.cdf(v));
    assert!(ks < 0.05, "KS distance to standard normal is {ks}");
}

#[test]
fn streak_difference_permutation_mean_is_negative() {
    for k in 1..=3usize {
        let study = run_hot_hand_study(100, k, 0.5, 4000, 10, 23_000 + k as u64).unwrap();
        assert!(
            study.mean_bias < 0.0,
            "permutation mean {} not negative at k = {k}",
            study.mean_bias
        );
    }
}

#[test]
fn strong_null_level_under_complete_randomization() {
    let reps = 2000usize;
    let alpha = 0.05;
    let hits: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(24_000);
            rng.set_stream(rep as u64 + 1);
            let scheme = AssignmentScheme::Complete { m: 10 };
            let d = assign(&scheme, 20, &mut rng).unwrap();
            let y: Vec<f64> = (0..20)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            let e = ExperimentSample::new(y, d, vec![]).unwrap();
            let res = strong_null_test(
                &e,
                &scheme,
                &StatisticSpec::MeanDiff.two_sided(),
                alpha,
                RunMode::MonteCarlo {
                    b: 199,
                    seed: rng.next_u64(),
                },
            )
            .unwrap();
            usize::from(res.p_hat <= alpha)
        })
        .sum();
    let rate = hits as f64 / reps as f64;
    let band = 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt();
    assert!(
        (rate - alpha).abs() <= band,
        "strong-null level {rate} outside {alpha} +/- {band}"
    );
}

#[test]
fn strong_null_power_with_unit_effect() {
    let reps = 300usize;
    let hits: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(25_000);
            rng.set_stream(rep as u64 + 1);
            let scheme = AssignmentScheme::Complete { m: 10 };
            let d = assign(&scheme, 20, &mut rng).unwrap();
            let y: Vec<f64> = d
                .iter()
                .map(|&di| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    0.5 * noise + if di { 1.0 } else { 0.0 }
                })
                .collect();
            let e = ExperimentSample::new(y, d, vec![]).unwrap();
            let res = strong_null_test(
                &e,
                &scheme,
                &StatisticSpec::MeanDiff.two_sided(),
                0.05,
                RunMode::MonteCarlo {
                    b: 199,
                    seed: rng.next_u64(),
                },
            )
            .unwrap();
            usize::from(res.p_hat <= 0.05)
        })
        .sum();
    let rate = hits as f64 / reps as f64;
    assert!(rate > 0.5, "power {rate} too low for a unit effect");
}

#[test]
fn resampled_assignment_test_is_valid() {
    let reps = 2000usize;
    let alpha = 0.05;
    let hits: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(26_000);
            rng.set_stream(rep as u64 + 1);
            let scheme = AssignmentScheme::SimpleRandom { q: 0.5 };
            let d = assign(&scheme, 30, &mut rng).unwrap();
            let y: Vec<f64> = (0..30)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            let e = ExperimentSample::new(y, d, vec![]).unwrap();
            match strong_null_test_resampled(
                &e,
                &scheme,
                &StatisticSpec::MeanDiff.two_sided(),
                alpha,
                199,
                rng.next_u64(),
            ) {
                Ok(res) => usize::from(res.p_hat <= alpha),
                // All-treated or all-control draws are possible in
                // principle under simple random sampling; skip them.
                Err(_) => 0,
            }
        })
        .sum();
    let rate = hits as f64 / reps as f64;
    let bound = alpha + 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt();
    assert!(
        rate <= bound,
        "resampled validity violated: {rate} > {bound}"
    );
}

#[test]
fn pair_variance_estimator_is_consistent() {
    // Z ~ U(-1,1); Y = Z + (2 Z) D + 0.5 eps. The limit target is
    // V = Var(Y(1)|Z) + Var(Y(0)|Z) + (1/2) E[(2Z)^2] = 0.25 + 0.25 + 2/3.
    let truth = 0.25 + 0.25 + 2.0 / 3.0;
    let reps = 101usize;
    let pairs = 1000usize;
    let mut vhats: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(27_000);
            rng.set_stream(rep as u64 + 1);
            let n = 2 * pairs;
            let z: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let pa = pair_by_covariates(&z).unwrap();
            let scheme: AssignmentScheme<f64> = AssignmentScheme::MatchedPairs {
                pairs: pa.labels.clone(),
            };
            let d = assign(&scheme, n, &mut rng).unwrap();
            let y: Vec<f64> = (0..n)
                .map(|i| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    z[i] + if d[i] { 2.0 * z[i] } else { 0.0 } + 0.5 * noise
                })
                .collect();
            let e = ExperimentSample::new(y, d, vec![])
                .unwrap()
                .with_pairs(pa.labels)
                .unwrap();
            let report = weak_null_test_pairs(
                &e,
                0.0,
                0.05,
                RunMode::MonteCarlo {
                    b: 2,
                    seed: rng.next_u64(),
                },
            )
            .unwrap();
            report.variance.v_hat
        })
        .collect();
    vhats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = vhats[vhats.len() / 2];
    assert!(
        (median - truth).abs() / truth < 0.10,
        "median V-hat {median} not within 10% of {truth}"
    );
}

#[test]
fn weak_null_homogeneous_effects_estimators_agree() {
    // With homogeneous conditional effects the adjacent-pair correction
    // vanishes: tau2 and V-hat coincide up to noise.
    let mut rng = ChaCha8Rng::seed_from_u64(28_000);
    let pairs = 2000usize;
    let n = 2 * pairs;
    let z: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let pa = pair_by_covariates(&z).unwrap();
    let scheme: AssignmentScheme<f64> = AssignmentScheme::MatchedPairs {
        pairs: pa.labels.clone(),
    };
    let d = assign(&scheme, n, &mut rng).unwrap();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let noise: f64 = StandardNormal.sample(&mut rng);
            z[i] + 0.5 * noise
        })
        .collect();
    let e = ExperimentSample::new(y, d, vec![])
        .unwrap()
        .with_pairs(pa.labels)
        .unwrap();
    let report =
        weak_null_test_pairs(&e, 0.0, 0.05, RunMode::MonteCarlo { b: 2, seed: 5 }).unwrap();
    let rel = (report.variance.tau2_hat - report.variance.v_hat).abs() / report.variance.tau2_hat;
    assert!(
        rel < 0.10,
        "tau2 and V-hat differ by {rel} under homogeneous effects"
    );
}

#[test]
fn full_conformal_coverage_with_poor_predictor() {
    let reps = 2000usize;
    let alpha = 0.05;
    let hits: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(29_000);
            rng.set_stream(rep as u64 + 1);
            let draw = |rng: &mut ChaCha8Rng| {
                let x: f64 = rng.random::<f64>();
                let noise: f64 = StandardNormal.sample(rng);
                (x, 1.0 + 2.0 * x + 0.3 * noise)
            };
            let data: Vec<(f64, f64)> = (0..19).map(|_| draw(&mut rng)).collect();
            let (xq, yq) = draw(&mut rng);
            let grid = Grid::new(-2.0, 6.0, 257).unwrap();
            let region = full_conformal(&data, xq, alpha, &grid, &MeanPredictor).unwrap();
            usize::from(region.contains(yq))
        })
        .sum();
    let rate = hits as f64 / reps as f64;
    let band = 3.0 * (0.95f64 * 0.05 / reps as f64).sqrt();
    assert!(
        rate >= 0.95 - band,
        "full conformal coverage {rate} below 0.95 - {band}"
    );
}

#[test]
fn comparison_ttest_matches_art_under_homogeneity() {
    let reps = 4000usize;
    let alpha = 0.05;
    let sigmas = [1.0f64; 8];
    let rates: Vec<(bool, bool)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(30_000);
            rng.set_stream(rep as u64 + 1);
            let vals: Vec<f64> = sigmas
                .iter()
                .map(|&s| {
                    s * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                })
                .collect();
            let scores = ClusterScores::from_scalars(vals).unwrap();
            let art = art_test(&scores, ClusterStat::TStat, alpha, RunMode::Exact).unwrap();
            let art_reject = decide(&art.result, true, Some(&mut rng)).unwrap().reject;
            let im_reject = im_ttest(&scores, alpha).unwrap().reject;
            (art_reject, im_reject)
        })
        .collect();
    let art_rate = rates.iter().filter(|r| r.0).count() as f64 / reps as f64;
    let im_rate = rates.iter().filter(|r| r.1).count() as f64 / reps as f64;
    assert!(
        (art_rate - im_rate).abs() < 0.015,
        "homogeneous-variance rates diverge: art {art_rate} vs t-test {im_rate}"
    );
}

#[test]
fn strong_null_level_for_all_four_schemes() {
    let reps = 2000usize;
    let alpha = 0.05;
    let band = 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt();
    let schemes: Vec<(&str, AssignmentScheme<f64>)> = vec![
        ("simple", AssignmentScheme::SimpleRandom { q: 0.5 }),
        ("complete", AssignmentScheme::Complete { m: 10 }),
        (
            "stratified",
            AssignmentScheme::StratifiedBlock {
                strata: (0..20).map(|i| i / 10).collect(),
                q: 0.5,
            },
        ),
        (
            "pairs",
            AssignmentScheme::MatchedPairs {
                pairs: (0..20).map(|i| i / 2).collect(),
            },
        ),
    ];
    for (name, scheme) in schemes {
        let hits: usize = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = ChaCha8Rng::seed_from_u64(31_000);
                rng.set_stream(rep as u64 + 1);
                let d = assign(&scheme, 20, &mut rng).unwrap();
                let y: Vec<f64> = (0..20)
                    .map(|_| {
                        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                    })
                    .collect();
                let mut e = ExperimentSample::new(y, d, vec![]).unwrap();
                if let AssignmentScheme::StratifiedBlock { strata, .. } = &scheme {
                    e = e.with_strata(strata.clone()).unwrap();
                }
                if let AssignmentScheme::MatchedPairs { pairs } = &scheme {
                    e = e.with_pairs(pairs.clone()).unwrap();
                }
                let res = strong_null_test(
                    &e,
                    &scheme,
                    &StatisticSpec::MeanDiff.two_sided(),
                    alpha,
                    RunMode::MonteCarlo {
                        b: 199,
                        seed: rng.next_u64(),
                    },
                )
                .unwrap();
                usize::from(res.p_hat <= alpha)
            })
            .sum();
        let rate = hits as f64 / reps as f64;
        assert!(
            (rate - alpha).abs() <= band,
            "{name}: level {rate} outside {alpha} +/- {band}"
        );
    }
}

#[test]
fn cluster_art_level_at_q4() {
    let reps = 10_000usize;
    let alpha = 0.05;
    let sigmas = [0.5f64, 1.0, 2.0, 4.0];
    let rejections: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(32_000);
            rng.set_stream(rep as u64 + 1);
            let vals: Vec<f64> = sigmas
                .iter()
                .map(|&s| {
                    s * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                })
                .collect();
            let scores = ClusterScores::from_scalars(vals).unwrap();
            let art = art_test(&scores, ClusterStat::TStat, alpha, RunMode::Exact).unwrap();
            usize::from(decide(&art.result, true, Some(&mut rng)).unwrap().reject)
        })
        .sum();
    let rate = rejections as f64 / reps as f64;
    let band = 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt();
    assert!(
        (rate - alpha).abs() <= band,
        "q = 4 level {rate} outside {alpha} +/- {band}"
    );
}
