mod common;

use std::collections::BTreeMap;

use common::oracles::{as_map, partitions, purity_oracle};

use mmhate::analysis::{purity, PurityVariant};
use proptest::prelude::*;

#[test]
fn matches_enumeration_over_all_small_partitions() {
    let mut checked = 0;
    for n in 1..=6 {
        let parts = partitions(n, 3);
        for g in &parts {
            for c in &parts {
                let got = purity(&as_map(g), &as_map(c), PurityVariant::AsWritten).unwrap();
                assert!((got - purity_oracle(g, c)).abs() < 1e-12, "g={g:?} c={c:?}");
                checked += 1;
            }
        }
    }
    // 1 + 4 + 25 + 196 + 1681 + 14884 pairs
    assert_eq!(checked, 16791);
}

#[test]
fn identical_and_single_cluster_partitions() {
    for n in 1..=6 {
        for g in partitions(n, 3) {
            let m = as_map(&g);
            assert_eq!(purity(&m, &m, PurityVariant::AsWritten).unwrap(), 1.0);
            let one = as_map(&vec![0; n]);
            assert_eq!(purity(&m, &one, PurityVariant::AsWritten).unwrap(), 1.0);
        }
    }
}

#[test]
fn standard_variant_is_the_transpose() {
    for g in partitions(5, 3) {
        for c in partitions(5, 3) {
            let got = purity(&as_map(&g), &as_map(&c), PurityVariant::Standard).unwrap();
            assert!((got - purity_oracle(&c, &g)).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn invariant_under_relabelling(
        labels in proptest::collection::vec((0usize..4, 0usize..4), 1..40),
        pg in Just([2usize, 0, 3, 1]),
        pc in Just([3usize, 1, 0, 2]),
    ) {
        let g: BTreeMap<String, usize> = labels.iter().enumerate().map(|(i, (a, _))| (format!("{i}"), *a)).collect();
        let c: BTreeMap<String, usize> = labels.iter().enumerate().map(|(i, (_, b))| (format!("{i}"), *b)).collect();
        let g2: BTreeMap<String, usize> = g.iter().map(|(k, v)| (k.clone(), pg[*v])).collect();
        let c2: BTreeMap<String, String> = c.iter().map(|(k, v)| (k.clone(), format!("cluster-{}", pc[*v]))).collect();
        for variant in [PurityVariant::AsWritten, PurityVariant::Standard] {
            let a = purity(&g, &c, variant).unwrap();
            let b = purity(&g2, &c2, variant).unwrap();
            prop_assert!((a - b).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
