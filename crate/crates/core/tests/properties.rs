use hvlab_core::analysis::{chsh, chsh_patterns, recheck_ch_witness};
use hvlab_core::random::{self, Shape};
use hvlab_core::{
    build_shared_noise, determinize_all, factorize_independent, is_ch_factorizable,
    is_deterministic, is_gamma_factorizable, marginalize, reconstruct, verify_lemma_iii,
    Factorization, Rational, Scenario,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn shapes() -> impl Strategy<Value = Shape> {
    prop_oneof![
        4 => Just(Shape::default()),
        1 => Just(Shape { parties: 3..=3, ..Shape::default() }),
    ]
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(256)
}

fn total_weight_is_one(s: &Scenario) -> bool {
    s.lambda.total_weight().is_one()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn generated_scenarios_are_valid(seed in any::<u64>(), shape in shapes()) {
        let mut g = rng(seed);
        for s in [
            random::deterministic(&mut g, &shape),
            random::product(&mut g, &shape),
            random::perturbed(&mut g, &shape),
            random::general(&mut g, &shape),
        ] {
            prop_assert!(s.validate().is_valid(), "{}", s.validate());
            prop_assert!(total_weight_is_one(&s));
            for c in &s.contexts {
                for m in &c.measurement_ids {
                    for p in &s.lambda.points {
                        let total: Rational = s.marginal(&c.id, m, &p.id).unwrap()
                            .into_iter().map(|(_, q)| q).sum();
                        prop_assert!(total.is_one());
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_implies_factorizable(seed in any::<u64>(), shape in shapes()) {
        let s = random::deterministic(&mut rng(seed), &shape);
        prop_assert!(is_deterministic(&s).unwrap().holds());
        prop_assert!(is_ch_factorizable(&s).unwrap().holds());
    }

    #[test]
    fn determinize_round_trips(seed in any::<u64>(), shape in shapes()) {
        let s = random::general(&mut rng(seed), &shape);
        let aug = determinize_all(&s).unwrap();
        for (entry, c) in aug.contexts.iter().zip(&s.contexts) {
            let nonzero: usize = s.lambda.points.iter().map(|p| {
                s.joint_table(&c.id, &p.id).unwrap().probs().iter().filter(|q| !q.is_zero()).count() - 1
            }).sum();
            prop_assert!(entry.noise.cell_count() <= 1 + nonzero);
        }
        for induced in aug.induced_scenarios().unwrap() {
            prop_assert!(is_deterministic(&induced).unwrap().holds());
        }
        prop_assert!(is_gamma_factorizable(&aug).unwrap());
        prop_assert_eq!(marginalize(&aug).unwrap(), s);
    }

    #[test]
    fn products_factorize(seed in any::<u64>(), shape in shapes()) {
        let s = random::product(&mut rng(seed), &shape);
        let Factorization::Factorized(fm) = factorize_independent(&s).unwrap() else {
            return Err(TestCaseError::fail("product scenario rejected"));
        };
        prop_assert!(verify_lemma_iii(&fm).unwrap());
        for c in &s.contexts {
            for p in &s.lambda.points {
                prop_assert_eq!(reconstruct(&fm, &c.id, &p.id).unwrap(), s.joint_table(&c.id, &p.id).unwrap());
            }
        }
    }

    #[test]
    fn perturbed_tables_do_not_factorize(seed in any::<u64>(), shape in shapes()) {
        let s = random::perturbed(&mut rng(seed), &shape);
        let Factorization::NotFactorizable(w) = factorize_independent(&s).unwrap() else {
            return Err(TestCaseError::fail("perturbed scenario factorized"));
        };
        let (lhs, rhs) = recheck_ch_witness(&s, &w).unwrap();
        prop_assert_eq!(&lhs, &w.lhs);
        prop_assert_eq!(&rhs, &w.rhs);
        prop_assert_ne!(lhs, rhs);
    }

    #[test]
    fn factorize_iff_ch_factorizable(seed in any::<u64>(), shape in shapes()) {
        let s = random::general(&mut rng(seed), &shape);
        let factorizable = is_ch_factorizable(&s).unwrap().holds();
        match factorize_independent(&s).unwrap() {
            Factorization::Factorized(fm) => {
                prop_assert!(factorizable);
                prop_assert!(verify_lemma_iii(&fm).unwrap());
            }
            Factorization::NotFactorizable(_) => prop_assert!(!factorizable),
        }
    }

    #[test]
    fn shared_noise_preserves_lambda_tables(seed in any::<u64>(), shape in shapes()) {
        let s = random::perturbed(&mut rng(seed), &shape);
        let shared = build_shared_noise(&s).unwrap();
        prop_assert!(shared.shared);
        let back = marginalize(&shared).unwrap();
        prop_assert!(!is_ch_factorizable(&back).unwrap().holds());
        prop_assert_eq!(back, s);
    }

    #[test]
    fn factorizable_models_respect_chsh_bound(seed in any::<u64>(), det in any::<bool>()) {
        let shape = Shape::chsh();
        let s = if det {
            random::deterministic(&mut rng(seed), &shape)
        } else {
            random::product(&mut rng(seed), &shape)
        };
        let patterns = chsh_patterns(&s);
        prop_assert_eq!(patterns.len(), 4);
        let two = Rational::from_integer(2);
        for p in &patterns {
            prop_assert!(chsh(&s, p).unwrap().abs() <= two);
        }
    }
}
