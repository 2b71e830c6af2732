mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_attention_and_probability_vector_is_a_distribution(
        seed in 0u64..10_000,
        text_only in any::<bool>(),
        mask in common::masks(),
        scale in 0.1f64..20.0,
    ) {
        common::check_distributions(seed, text_only, mask, scale)?;
    }
}
