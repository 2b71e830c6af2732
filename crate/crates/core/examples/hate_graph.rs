//! Rank a follow graph with PageRank, expand seed accounts into a hate
//! account set, and build an author's binary follow vector.
//!
//! cargo run --example hate_graph -- [k]

use mmhate::corpus::{synth_corpus, SynthSpec, TweetKind};
use mmhate::hategraph::{build_graph, pagerank, select_hate_accounts, PageRankParams};
use mmhate::model::GraphArtifacts;

fn main() -> mmhate::Result<()> {
    let k = std::env::args()
        .nth(1)
        .map_or(60, |s| s.parse().expect("k must be an integer"));
    let corpus = synth_corpus(&SynthSpec::default())?;
    let graph = build_graph(&corpus.edges);
    let ranks = pagerank(&graph, PageRankParams::default())?;
    println!(
        "{} vertices, {} edges; converged={} after {} iterations",
        graph.vertex_count(),
        graph.edge_count(),
        ranks.converged,
        ranks.iterations
    );

    let hate = select_hate_accounts(&graph, &ranks, &corpus.seed_accounts, k)?;
    println!(
        "\n{:<4} {:<10} {:>9}  community",
        "rank", "account", "pagerank"
    );
    for (i, a) in hate.accounts().iter().enumerate() {
        let community = match corpus.account_communities.get(a) {
            Some(c) => c.to_string(),
            None if a.starts_with("user") => "author".to_string(),
            None => "mainstream".to_string(),
        };
        let seed = if corpus.seed_accounts.contains(a) {
            " (seed)"
        } else {
            ""
        };
        println!(
            "{:<4} {a:<10} {:>9.6}  {community}{seed}",
            i + 1,
            ranks.score_of(&graph, a).unwrap()
        );
    }

    let artifacts = GraphArtifacts::new(hate, &corpus.edges);
    let r = corpus
        .records
        .iter()
        .find(|r| corpus.kinds[&r.id] == TweetKind::CodeHate)
        .unwrap();
    let v = artifacts.follow_vector(&r.author_id);
    let followed: Vec<&str> = artifacts
        .hate_accounts
        .accounts()
        .iter()
        .zip(v.bits())
        .filter(|(_, b)| **b)
        .map(|(a, _)| a.as_str())
        .collect();
    println!(
        "\n{} wrote a code-word tweet and follows {} of the {k} selected accounts: {followed:?}",
        r.author_id,
        v.popcount()
    );
    Ok(())
}
