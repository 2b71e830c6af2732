//! Train both model variants on the default synthetic corpus, cluster the
//! hate embeddings each one produces and score the clusters against the
//! planted categories.
//!
//! cargo run --release --example cluster_purity -- [seed]

use std::collections::BTreeMap;

use mmhate::analysis::{purity_report, top_words, AttentionReport, PurityVariant};
use mmhate::corpus::{split, synth_corpus};
use mmhate::encoders::SynthProvider;
use mmhate::model::FeatureSource;
use mmhate::pipeline::{cluster_and_score, run_graph_stage, RunConfig};
use mmhate::training::{predict_inputs, train, TrainConfig};

fn main() -> mmhate::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed must be an integer"));
    let cfg = RunConfig::seeded(seed);
    let corpus = synth_corpus(&cfg.synth)?;
    let graph = run_graph_stage(&corpus.edges, &corpus.seed_accounts, &cfg.graph)?;
    let provider = SynthProvider::new(cfg.model.cultural_dim, seed, corpus.communities.clone());
    let src = FeatureSource {
        graph: &graph.artifacts,
        provider: &provider,
    };
    let splits = split(&corpus.records, cfg.split_ratios(), seed)?;

    for text_only in [false, true] {
        let name = if text_only { "text-only" } else { "text+sc" };
        let train_cfg = TrainConfig {
            text_only,
            ..cfg.train.clone()
        };
        let trained = train(&splits, cfg.model, &train_cfg, src)?;
        let inputs = trained.model.prepare_all(&splits.test, src)?;
        let preds = predict_inputs(&trained.model, &inputs)?;
        let Some((clusters, report)) =
            cluster_and_score(&inputs, &preds, &corpus.truth, &cfg.analysis)?
        else {
            println!("{name}: too few hate predictions to cluster");
            continue;
        };
        let standard = purity_report(&corpus.truth, &clusters, PurityVariant::Standard)?;
        println!(
            "\n{name}: {} hate embeddings, {} with a planted category; purity {:.3} (per-cluster variant {:.3})",
            clusters.len(),
            report.n,
            report.purity,
            standard.purity
        );

        let reports: BTreeMap<String, AttentionReport> = inputs
            .iter()
            .zip(&preds)
            .filter(|(x, _)| clusters.contains_key(&x.id))
            .map(|(x, p)| (x.id.clone(), AttentionReport::from_prediction(x, p)))
            .collect();
        let top = top_words(&reports, &clusters, 5);
        for (c, words) in &top {
            let mut cats: BTreeMap<usize, usize> = BTreeMap::new();
            for (id, _) in clusters.iter().filter(|(_, k)| *k == c) {
                if let Some(g) = corpus.truth.get(id) {
                    *cats.entry(*g).or_default() += 1;
                }
            }
            let words: Vec<&str> = words.iter().map(|(w, _)| w.as_str()).collect();
            println!(
                "  cluster {c}: categories {cats:?}; top words {}",
                words.join(" ")
            );
        }
    }
    Ok(())
}
