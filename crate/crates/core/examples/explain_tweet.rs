//! Train the fused model, then compare attention with occlusion importance
//! on one overt and one code-word hate tweet from the test split.
//!
//! cargo run --release --example explain_tweet -- [seed]

use mmhate::analysis::{explain, perturb_importance, spearman};
use mmhate::cli::render_explanation;
use mmhate::corpus::{split, synth_corpus, TweetKind};
use mmhate::encoders::SynthProvider;
use mmhate::model::FeatureSource;
use mmhate::pipeline::{run_graph_stage, RunConfig};
use mmhate::training::train;

fn main() -> mmhate::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed must be an integer"));
    let mut cfg = RunConfig::seeded(seed);
    cfg.synth.n_tweets = 3000;
    let corpus = synth_corpus(&cfg.synth)?;
    let graph = run_graph_stage(&corpus.edges, &corpus.seed_accounts, &cfg.graph)?;
    let provider = SynthProvider::new(cfg.model.cultural_dim, seed, corpus.communities.clone());
    let src = FeatureSource {
        graph: &graph.artifacts,
        provider: &provider,
    };
    let splits = split(&corpus.records, cfg.split_ratios(), seed)?;
    let model = train(&splits, cfg.model, &cfg.train, src)?.model;

    for kind in [TweetKind::OvertHate, TweetKind::CodeHate] {
        let Some(record) = splits
            .test
            .iter()
            .find(|r| corpus.kinds[&r.id] == kind && r.text.split_whitespace().count() >= 4)
        else {
            continue;
        };
        let input = model.prepare(record, src)?;
        let report = explain(&model, &input)?;
        let imp = perturb_importance(&model, &input)?;
        println!(
            "\n{} ({}, author {})",
            record.id,
            kind.as_str(),
            record.author_id
        );
        print!("{}", render_explanation(&report, &imp));
        match spearman(&report.alpha, &imp.tokens) {
            Some(rho) => println!("rank correlation between attention and occlusion: {rho:.3}"),
            None => println!("occlusion left every token tied"),
        }
    }
    Ok(())
}
