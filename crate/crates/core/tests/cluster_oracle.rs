mod common;

use std::time::Instant;

use common::oracles::{cluster_oracle, random_points};
use mmhate::analysis::agglomerative_cluster;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_exhaustive_merge_search() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut cases = 0;
    for n in 1..=8 {
        let reps = if n == 8 { 3 } else { 12 };
        for _ in 0..reps {
            let pts = random_points(&mut rng, n);
            // deep searches at n = 8 stop a few merges short
            let k = if n == 8 {
                rng.random_range(3..=n)
            } else {
                rng.random_range(1..=n)
            };
            assert_eq!(
                agglomerative_cluster(&pts, k).unwrap(),
                cluster_oracle(&pts, k),
                "n={n} k={k} {pts:?}"
            );
            cases += 1;
        }
    }
    assert_eq!(cases, 87);
    eprintln!(
        "cluster oracle: {cases} cases in {:.1}s",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn full_merge_to_one_cluster_at_eight_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pts = random_points(&mut rng, 8);
    for k in [1, 2] {
        assert_eq!(
            agglomerative_cluster(&pts, k).unwrap(),
            cluster_oracle(&pts, k)
        );
    }
}

#[test]
fn deterministic_for_fixed_embeddings() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let pts: Vec<(String, Vec<f64>)> = (0..40)
        .map(|i| {
            (
                format!("t{i:03}"),
                (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
        })
        .collect();
    let a = agglomerative_cluster(&pts, 5).unwrap();
    assert_eq!(a, agglomerative_cluster(&pts, 5).unwrap());
    assert_eq!(a.len(), 40);
    assert!(a.values().all(|&c| c < 5));
}
