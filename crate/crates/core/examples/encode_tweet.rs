//! Tokenize a noisy tweet and run it through an untrained model to see the
//! shapes every encoder produces.
//!
//! cargo run --example encode_tweet -- "some tweet text"

use mmhate::corpus::{Source, TweetRecord, UnifiedLabel};
use mmhate::encoders::{encode_cultural, tokenize, StubProvider};
use mmhate::hategraph::HateAccountSet;
use mmhate::model::{FeatureSource, GraphArtifacts, HateModel, ModelConfig};

fn record(id: &str, text: &str, author: &str) -> TweetRecord {
    TweetRecord {
        id: id.into(),
        text: text.into(),
        author_id: author.into(),
        label: UnifiedLabel::None,
        source: Source::Synthetic,
    }
}

fn main() -> mmhate::Result<()> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "Ths game was sooo good, #winning @friend!!".to_string());
    let tokens = tokenize(&text)?;
    println!("words: {:?}", tokens.words);
    println!("spans: {:?}", tokens.spans);

    let hate = HateAccountSet::from_ordered(vec!["h1".into(), "h2".into(), "h3".into()])?;
    let edges = [("alice", "h1"), ("alice", "h3"), ("bob", "h2")];
    let graph = GraphArtifacts::new(hate, &edges);
    let provider = StubProvider::new(ModelConfig::default().cultural_dim, 0);
    let src = FeatureSource {
        graph: &graph,
        provider: &provider,
    };

    let corpus = [
        record("v1", "this game was good", "bob"),
        record("v2", "good game and a good friend", "bob"),
        record("v3", &text, "alice"),
    ];
    let config = ModelConfig {
        min_word_count: 1,
        ..ModelConfig::default()
    };
    let model = HateModel::for_records(config, &corpus, graph.hate_accounts.len(), false, 0)?;
    println!(
        "vocabulary: {} words, {} chars; {} parameters",
        model.vocab.word_count(),
        model.vocab.char_count(),
        model.params.scalar_count()
    );

    let input = model.prepare(&corpus[2], src)?;
    println!("follow vector: {:?}", input.follow.bits());
    let cultural = encode_cultural("alice", &provider)?;
    println!(
        "cultural vector: {} values, first {:.3?}",
        cultural.len(),
        &cultural[..4]
    );

    let p = model.predict(&input)?;
    println!("\ntoken attention (untrained):");
    for (w, a) in input.tokens.iter().zip(&p.alpha) {
        println!("  {w:<10} {a:.3}");
    }
    println!("modality weights text/cultural/social: {:.3?}", p.beta);
    println!("class probabilities none/abusive/hate: {:.3?}", p.probs);
    println!("hate embedding r_h has {} dimensions", p.r_h.len());
    Ok(())
}
