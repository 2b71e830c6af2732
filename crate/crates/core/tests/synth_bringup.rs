//! Sanity checks that the synthetic corpus plants the signal where intended:
//! code-word hate is invisible to word counts and visible in the follow graph.

use std::collections::{BTreeMap, BTreeSet};

use mmhate::corpus::{synth_corpus, SynthCorpus, SynthSpec, TweetKind};

fn corpus(seed: u64) -> SynthCorpus {
    synth_corpus(&SynthSpec {
        seed,
        ..SynthSpec::default()
    })
    .unwrap()
}

/// Code-word tweets as (words, author, is_hate).
fn code_word_tweets(c: &SynthCorpus) -> Vec<(Vec<String>, String, bool)> {
    c.records
        .iter()
        .filter(|r| c.kinds[&r.id].has_code_word())
        .map(|r| {
            let words = r.text.split_whitespace().map(str::to_lowercase).collect();
            (
                words,
                r.author_id.clone(),
                c.kinds[&r.id] == TweetKind::CodeHate,
            )
        })
        .collect()
}

fn balanced_accuracy(pairs: &[(bool, bool)]) -> f64 {
    let rate = |class: bool| {
        let of: Vec<_> = pairs.iter().filter(|(t, _)| *t == class).collect();
        of.iter().filter(|(t, p)| t == p).count() as f64 / of.len() as f64
    };
    (rate(true) + rate(false)) / 2.0
}

/// Multinomial naive Bayes with add-one smoothing, trained on even
/// positions and scored on odd ones.
fn bag_of_words_accuracy(tweets: &[(Vec<String>, String, bool)]) -> f64 {
    let mut counts: [BTreeMap<&str, f64>; 2] = Default::default();
    let mut totals = [0.0f64; 2];
    let mut docs = [0.0f64; 2];
    let mut vocab = BTreeSet::new();
    for (words, _, y) in tweets.iter().step_by(2) {
        let c = *y as usize;
        docs[c] += 1.0;
        for w in words {
            *counts[c].entry(w).or_default() += 1.0;
            totals[c] += 1.0;
            vocab.insert(w.as_str());
        }
    }
    let v = vocab.len() as f64;
    let pairs: Vec<(bool, bool)> = tweets
        .iter()
        .skip(1)
        .step_by(2)
        .map(|(words, _, y)| {
            let score = |c: usize| {
                (docs[c] / (docs[0] + docs[1])).ln()
                    + words
                        .iter()
                        .map(|w| {
                            ((counts[c].get(w.as_str()).unwrap_or(&0.0) + 1.0) / (totals[c] + v))
                                .ln()
                        })
                        .sum::<f64>()
            };
            (*y, score(1) > score(0))
        })
        .collect();
    balanced_accuracy(&pairs)
}

#[test]
fn code_word_subset_defeats_word_counts() {
    for seed in [0, 1] {
        let c = corpus(seed);
        let tweets = code_word_tweets(&c);
        let hate = tweets.iter().filter(|t| t.2).count();
        assert!(
            hate > 100 && tweets.len() - hate > 100,
            "seed {seed}: {hate}/{}",
            tweets.len()
        );
        let acc = bag_of_words_accuracy(&tweets);
        eprintln!("seed {seed}: bag-of-words balanced accuracy on code-word tweets {acc:.3}");
        assert!(acc < 0.6, "seed {seed}: {acc}");
    }
}

#[test]
fn code_word_subset_is_separable_by_follow_edges() {
    for seed in [0, 1] {
        let c = corpus(seed);
        let follows: BTreeSet<(&str, &str)> = c
            .edges
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let hate_accounts: Vec<&str> = c.account_communities.keys().map(String::as_str).collect();
        let pairs: Vec<(bool, bool)> = code_word_tweets(&c)
            .iter()
            .map(|(_, author, y)| {
                let follows_hate = hate_accounts
                    .iter()
                    .any(|h| follows.contains(&(author.as_str(), *h)));
                (*y, follows_hate)
            })
            .collect();
        let acc = balanced_accuracy(&pairs);
        eprintln!("seed {seed}: follow-edge balanced accuracy on code-word tweets {acc:.3}");
        assert!(acc > 0.9, "seed {seed}: {acc}");
    }
}

#[test]
fn overt_hate_is_visible_in_the_text() {
    let c = corpus(0);
    let tweets: Vec<(Vec<String>, String, bool)> = c
        .records
        .iter()
        .filter(|r| matches!(c.kinds[&r.id], TweetKind::OvertHate | TweetKind::Benign))
        .map(|r| {
            let words = r.text.split_whitespace().map(str::to_lowercase).collect();
            (
                words,
                r.author_id.clone(),
                c.kinds[&r.id] == TweetKind::OvertHate,
            )
        })
        .collect();
    assert!(bag_of_words_accuracy(&tweets) > 0.9);
}
