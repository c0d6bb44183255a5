use hvlab::format::{
    read_document, write_augmented, write_document, write_factorized, write_scenario, Document,
};
use hvlab_core::random::{self, Shape};
use hvlab_core::{determinize_all, factorize_independent, Factorization};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shapes() -> impl Strategy<Value = Shape> {
    prop_oneof![
        3 => Just(Shape::default()),
        1 => Just(Shape { parties: 3..=3, ..Shape::default() }),
        1 => Just(Shape::chsh()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scenarios_round_trip(seed in any::<u64>(), shape in shapes()) {
        let s = random::general(&mut ChaCha8Rng::seed_from_u64(seed), &shape);
        let text = write_scenario(&s);
        let back = read_document(&text).unwrap();
        prop_assert_eq!(&back, &Document::Scenario(s));
        prop_assert_eq!(write_document(&back), text);
    }

    #[test]
    fn augmented_round_trip(seed in any::<u64>(), shape in shapes()) {
        let s = random::general(&mut ChaCha8Rng::seed_from_u64(seed), &shape);
        let aug = determinize_all(&s).unwrap();
        let text = write_augmented(&aug);
        let back = read_document(&text).unwrap();
        prop_assert_eq!(&back, &Document::Augmented(aug));
        prop_assert_eq!(write_document(&back), text);
    }

    #[test]
    fn factorized_round_trip(seed in any::<u64>(), shape in shapes()) {
        let s = random::product(&mut ChaCha8Rng::seed_from_u64(seed), &shape);
        let Factorization::Factorized(fm) = factorize_independent(&s).unwrap() else {
            panic!("product scenarios factorize");
        };
        let text = write_factorized(&fm);
        let back = read_document(&text).unwrap();
        prop_assert_eq!(&back, &Document::Factorized(fm));
        prop_assert_eq!(write_document(&back), text);
    }
}

#[test]
fn unknown_keys_are_rejected_in_every_kind() {
    let s = hvlab_core::build_demo("product-noise").unwrap();
    let Factorization::Factorized(fm) = factorize_independent(&s).unwrap() else {
        panic!("product-noise factorizes");
    };
    for text in [
        write_scenario(&s),
        write_augmented(&determinize_all(&s).unwrap()),
        write_factorized(&fm),
    ] {
        let extra = text.replacen("{\n", "{\n  \"comment\": \"x\",\n", 1);
        let err = read_document(&extra).unwrap_err();
        assert!(err.to_string().contains("\"comment\""), "{err}");
    }
}

#[test]
fn responses_must_name_known_outcomes() {
    let s = hvlab_core::build_demo("counterexample").unwrap();
    let text = write_augmented(&determinize_all(&s).unwrap());
    let bad = text.replace("\"-1,-1\"\n", "\"-1,0\"\n");
    assert_ne!(bad, text);
    let err = read_document(&bad).unwrap_err();
    assert!(err.to_string().contains("\"-1,0\""), "{err}");
}
