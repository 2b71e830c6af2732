//! Generate a synthetic corpus and show what was planted in it.
//!
//! cargo run --example synth_corpus -- [seed]

use std::collections::BTreeMap;

use mmhate::corpus::{parse_corpus, synth_corpus, write_corpus, SynthSpec, TweetKind};

fn main() -> mmhate::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed must be an integer"));
    let corpus = synth_corpus(&SynthSpec {
        seed,
        ..SynthSpec::default()
    })?;
    println!(
        "{} tweets, {} follow edges, {} seed accounts, {} labelled hate tweets",
        corpus.records.len(),
        corpus.edges.len(),
        corpus.seed_accounts.len(),
        corpus.truth.len()
    );

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for k in corpus.kinds.values() {
        *counts.entry(k.as_str()).or_default() += 1;
    }
    for (k, n) in &counts {
        println!("  {k:<12} {n:>5}");
    }

    println!("\none tweet of each kind:");
    for kind in [
        TweetKind::Benign,
        TweetKind::BenignCode,
        TweetKind::Abusive,
        TweetKind::OvertHate,
        TweetKind::CodeHate,
    ] {
        let r = corpus
            .records
            .iter()
            .find(|r| corpus.kinds[&r.id] == kind)
            .unwrap();
        let community = corpus.communities[&r.author_id].map_or("-".to_string(), |c| c.to_string());
        println!(
            "  {:<12} {:<7} author {} (community {community}): {}",
            kind.as_str(),
            r.label.as_str(),
            r.author_id,
            r.text
        );
    }

    for c in 0..corpus.lexicon.groups.len() {
        println!(
            "category {c} words: {}",
            corpus.lexicon.category_words(c).join(" ")
        );
    }

    let mut jsonl = Vec::new();
    write_corpus(&mut jsonl, &corpus.records).expect("writing to memory");
    let back = parse_corpus(jsonl.as_slice())?;
    assert_eq!(back, corpus.records);
    println!(
        "\nround-tripped {} records through {} bytes of JSONL",
        back.len(),
        jsonl.len()
    );
    Ok(())
}
