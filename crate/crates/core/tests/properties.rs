//! Generative property checks for the construction invariants.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use randinfer::engine::{Mode, RandomizationResult};
use randinfer::groups::{apply, compose, GroupKind};
use randinfer::stats::two_sample::wilcoxon;
use randinfer::Sample;

proptest! {
    /// The tie-splitting identity holds for arbitrary value multisets,
    /// including heavy ties, at any level.
    #[test]
    fn eq3_identity(
        raw in prop::collection::vec(0i8..6, 2..120),
        alpha in 0.01f64..0.99,
        pick in any::<prop::sample::Index>(),
    ) {
        let values: Vec<f64> = raw.iter().map(|&v| v as f64 / 2.0).collect();
        let t_obs = values[pick.index(values.len())];
        let m = values.len();
        let res = RandomizationResult::from_values(
            t_obs,
            values,
            alpha,
            Mode::Exact { m },
            0,
        ).unwrap();
        let m_alpha = m as f64 * alpha;
        let lhs = res.m_plus as f64 + res.a * res.m_zero as f64;
        prop_assert!((lhs - m_alpha).abs() <= 1e-12 * m_alpha.max(1.0));
        prop_assert!((0.0..=1.0).contains(&res.a));
        // The conservative p-value can never undershoot 1/M.
        prop_assert!(res.p_hat >= 1.0 / m as f64);
        prop_assert!(res.p_hat <= 1.0);
    }

    /// Sampled group elements compose: applying the composition equals
    /// applying the elements in sequence.
    #[test]
    fn composition_is_consistent(
        seed in any::<u64>(),
        n in 2usize..9,
        kind_pick in 0usize..3,
        values in prop::collection::vec(-5.0f64..5.0, 9),
    ) {
        let kind = match kind_pick {
            0 => GroupKind::SignChange { n },
            1 => GroupKind::FullPermutation { n },
            _ => GroupKind::PairSwap {
                pairs: (0..n).map(|i| i / 2).collect::<Vec<_>>(),
            },
        };
        // Pair groups need an even index count.
        let n_eff = match &kind {
            GroupKind::PairSwap { .. } if n % 2 == 1 => n - 1,
            _ => n,
        };
        let kind = match kind {
            GroupKind::SignChange { .. } => GroupKind::SignChange { n: n_eff },
            GroupKind::PairSwap { .. } => GroupKind::PairSwap {
                pairs: (0..n_eff).map(|i| i / 2).collect(),
            },
            _ => GroupKind::FullPermutation { n: n_eff },
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = kind.sample_uniform(&mut rng).unwrap();
        let h = kind.sample_uniform(&mut rng).unwrap();
        let x = Sample::Values(values[..n_eff].to_vec());
        let lhs = apply(&compose(&g, &h).unwrap(), &x).unwrap();
        let rhs = apply(&g, &apply(&h, &x).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// Identity elements act as no-ops on scalar samples.
    #[test]
    fn identity_acts_trivially(values in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let kind = GroupKind::SignChange { n: values.len() };
        let x = Sample::Values(values);
        prop_assert_eq!(apply(&kind.identity(), &x).unwrap(), x);
    }

    /// Wilcoxon antisymmetry holds exactly, ties or not, under the
    /// half-mass convention.
    #[test]
    fn wilcoxon_antisymmetry(
        x in prop::collection::vec(0i8..8, 1..30),
        y in prop::collection::vec(0i8..8, 1..30),
    ) {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let w_xy: f64 = wilcoxon(&xf, &yf).unwrap();
        let w_yx: f64 = wilcoxon(&yf, &xf).unwrap();
        prop_assert!((w_xy + w_yx - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&w_xy));
    }

    /// Sampled stratified elements never move an index across strata.
    #[test]
    fn stratified_sampling_respects_strata(
        seed in any::<u64>(),
        sizes in prop::collection::vec(1usize..5, 1..5),
    ) {
        let strata: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(s, &len)| std::iter::repeat_n(s, len))
            .collect();
        let kind = GroupKind::StratifiedPermutation { strata: strata.clone() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = kind.sample_uniform(&mut rng).unwrap();
        match &g.action {
            randinfer::groups::Action::Permutation(p) => {
                for (i, &j) in p.iter().enumerate() {
                    prop_assert_eq!(strata[i], strata[j as usize]);
                }
            }
            _ => prop_assert!(false, "expected a permutation"),
        }
    }
}
