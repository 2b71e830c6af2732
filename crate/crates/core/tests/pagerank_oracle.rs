mod common;

use common::oracles::{pagerank_oracle, random_edges};
use mmhate::hategraph::{build_graph, pagerank, select_hate_accounts, PageRankParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_dense_oracle_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut with_dangling = 0;
    for case in 0..50 {
        let edges = random_edges(&mut rng);
        let damping = if case % 5 == 0 {
            rng.random_range(0.5..0.95)
        } else {
            0.85
        };
        let g = build_graph(&edges);
        assert!(g.vertex_count() <= 30);
        if (0..g.vertex_count()).any(|v| g.out_degree(v) == 0) {
            with_dangling += 1;
        }
        let pr = pagerank(
            &g,
            PageRankParams {
                damping,
                ..Default::default()
            },
        )
        .unwrap();
        let expect = pagerank_oracle(&edges, damping);
        let sum: f64 = pr.scores.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "case {case}: sum {sum}");
        assert!(pr.iterations <= 200);
        for (id, want) in &expect {
            let got = pr.score_of(&g, id).unwrap();
            assert!(
                (got - want).abs() <= 1e-8,
                "case {case} {id}: {got} vs {want}"
            );
            assert!(got >= 0.0);
        }
    }
    assert!(
        with_dangling >= 40,
        "only {with_dangling} graphs had dangling vertices"
    );
}

#[test]
fn star_into_dangling_hub() {
    let edges = vec![
        ("b".to_string(), "a".to_string()),
        ("c".to_string(), "a".to_string()),
    ];
    let g = build_graph(&edges);
    let pr = pagerank(&g, PageRankParams::default()).unwrap();
    for (id, want) in pagerank_oracle(&edges, 0.85) {
        assert!((pr.score_of(&g, &id).unwrap() - want).abs() <= 1e-8);
    }
}

#[test]
fn selection_follows_oracle_ranking() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let edges = random_edges(&mut rng);
        let g = build_graph(&edges);
        let pr = pagerank(&g, PageRankParams::default()).unwrap();
        let expect = pagerank_oracle(&edges, 0.85);
        let mut ranked: Vec<(&String, f64)> = expect.iter().map(|(k, v)| (k, *v)).collect();
        // descending score on a 1e-12 grid, then ascending id
        ranked.sort_by(|a, b| {
            let (ka, kb) = ((a.1 * 1e12).round() as i64, (b.1 * 1e12).round() as i64);
            kb.cmp(&ka).then(a.0.cmp(b.0))
        });
        let k = rng.random_range(1..=g.vertex_count());
        let none: [&str; 0] = [];
        let picked = select_hate_accounts(&g, &pr, &none, k).unwrap();
        let want: Vec<String> = ranked.iter().take(k).map(|(id, _)| (*id).clone()).collect();
        assert_eq!(picked.accounts(), want.as_slice());
    }
}
