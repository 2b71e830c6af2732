//! Desk-scale synthetic corpora with planted ground truth.
//!
//! Every surface token is a generated pseudo-word; `Lexicon` records which
//! role each one plays. Tweets come in five kinds:
//!
//! * `Benign`: filler text, occasionally mentioning a group or topic word.
//! * `BenignCode`: a benign tweet containing a code word, written by an
//!   author outside every hate community. Labeled `none`.
//! * `Abusive`: a swear word directly followed by a positive adjective or a
//!   generic insult. Group mentions may appear elsewhere in the tweet.
//! * `OvertHate`: a swear word directly followed by a group token of the
//!   tweet's category.
//! * `CodeHate`: surface identical in shape to `BenignCode`, but written by a
//!   member of the code word's community. Only the follow graph separates it
//!   from `BenignCode`.
//!
//! Hate and abusive tweets share their vocabulary; what separates them is
//! which word the swear word is attached to, so word order matters.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{inject_misspellings, GroundTruth, Source, TweetRecord, UnifiedLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub n_tweets: usize,
    /// Size of the benign filler vocabulary.
    pub vocab_size: usize,
    /// Number of planted hate categories / communities.
    pub n_categories: usize,
    /// Number of non-author accounts in the follow graph.
    pub n_accounts: usize,
    /// Fraction of hate tweets that are hateful only through author context.
    pub code_word_fraction: f64,
    pub seed: u64,
    /// Per-word typo rate applied to every generated tweet.
    pub misspelling_rate: f64,
    /// Fraction of authors belonging to some hate community.
    pub community_fraction: f64,
    pub tweets_per_author: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_tweets: 5000,
            vocab_size: 400,
            n_categories: 5,
            n_accounts: 200,
            code_word_fraction: 0.3,
            seed: 0,
            misspelling_rate: 0.1,
            community_fraction: 0.3,
            tweets_per_author: 5,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("synth spec: {m}")));
        if self.n_categories < 2 {
            return bad("n_categories must be at least 2");
        }
        if self.n_tweets < 10 * self.n_categories {
            return bad("n_tweets too small for the number of categories");
        }
        if self.vocab_size < 10 {
            return bad("vocab_size must be at least 10");
        }
        if self.n_accounts < 2 * self.n_categories + 1 {
            return bad("n_accounts must exceed twice the number of categories");
        }
        if !(0.0..=1.0).contains(&self.code_word_fraction) {
            return bad("code_word_fraction outside [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.misspelling_rate) {
            return bad("misspelling_rate outside [0, 1]");
        }
        if !(0.0..1.0).contains(&self.community_fraction) || self.community_fraction == 0.0 {
            return bad("community_fraction must lie in (0, 1)");
        }
        if self.tweets_per_author == 0 {
            return bad("tweets_per_author must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TweetKind {
    Benign,
    BenignCode,
    Abusive,
    OvertHate,
    CodeHate,
}

impl TweetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TweetKind::Benign => "benign",
            TweetKind::BenignCode => "benign_code",
            TweetKind::Abusive => "abusive",
            TweetKind::OvertHate => "overt_hate",
            TweetKind::CodeHate => "code_hate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "benign" => TweetKind::Benign,
            "benign_code" => TweetKind::BenignCode,
            "abusive" => TweetKind::Abusive,
            "overt_hate" => TweetKind::OvertHate,
            "code_hate" => TweetKind::CodeHate,
            _ => return None,
        })
    }

    pub fn has_code_word(self) -> bool {
        matches!(self, TweetKind::BenignCode | TweetKind::CodeHate)
    }

    pub fn label(self) -> UnifiedLabel {
        match self {
            TweetKind::Benign | TweetKind::BenignCode => UnifiedLabel::None,
            TweetKind::Abusive => UnifiedLabel::Abusive,
            TweetKind::OvertHate | TweetKind::CodeHate => UnifiedLabel::Hate,
        }
    }
}

/// Role of every generated token.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lexicon {
    pub filler: Vec<String>,
    pub swears: Vec<String>,
    pub positives: Vec<String>,
    pub insults: Vec<String>,
    pub groups: Vec<Vec<String>>,
    pub topics: Vec<Vec<String>>,
    pub code_words: Vec<Vec<String>>,
}

impl Lexicon {
    /// `role<TAB>category<TAB>word` lines; category is `-` for shared roles.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("role\tcategory\tword\n");
        let mut shared = |role: &str, words: &[String]| {
            for w in words {
                out.push_str(&format!("{role}\t-\t{w}\n"));
            }
        };
        shared("filler", &self.filler);
        shared("swear", &self.swears);
        shared("positive", &self.positives);
        shared("insult", &self.insults);
        for (role, table) in [
            ("group", &self.groups),
            ("topic", &self.topics),
            ("code", &self.code_words),
        ] {
            for (c, words) in table.iter().enumerate() {
                for w in words {
                    out.push_str(&format!("{role}\t{c}\t{w}\n"));
                }
            }
        }
        out
    }

    /// Tokens tied to one category (group, topic and code words).
    pub fn category_words(&self, category: usize) -> Vec<&str> {
        self.groups[category]
            .iter()
            .chain(&self.topics[category])
            .chain(&self.code_words[category])
            .map(String::as_str)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub records: Vec<TweetRecord>,
    /// Account→account and author→account follow edges.
    pub edges: Vec<(String, String)>,
    pub seed_accounts: Vec<String>,
    pub truth: GroundTruth,
    pub kinds: BTreeMap<String, TweetKind>,
    /// Author → planted community, `None` for authors outside every community.
    pub communities: BTreeMap<String, Option<usize>>,
    /// Account → community for hate accounts; mainstream accounts are absent.
    pub account_communities: BTreeMap<String, usize>,
    pub lexicon: Lexicon,
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

fn pseudo_word(rng: &mut impl Rng, syllables: usize) -> String {
    let mut w = String::new();
    for _ in 0..syllables {
        w.push(*CONSONANTS.choose(rng).unwrap() as char);
        w.push(*VOWELS.choose(rng).unwrap() as char);
    }
    if rng.random_bool(0.5) {
        w.push(*CONSONANTS.choose(rng).unwrap() as char);
    }
    w
}

struct WordMint {
    used: BTreeSet<String>,
}

impl WordMint {
    fn mint(
        &mut self,
        rng: &mut impl Rng,
        n: usize,
        syllables: std::ops::RangeInclusive<usize>,
    ) -> Vec<String> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let s = rng.random_range(syllables.clone());
            let w = pseudo_word(rng, s);
            if self.used.insert(w.clone()) {
                out.push(w);
            }
        }
        out
    }
}

fn build_lexicon(spec: &SynthSpec, rng: &mut impl Rng) -> Lexicon {
    let mut mint = WordMint {
        used: BTreeSet::new(),
    };
    let filler = mint.mint(rng, spec.vocab_size, 1..=3);
    let swears = mint.mint(rng, 6, 2..=3);
    let positives = mint.mint(rng, 8, 2..=3);
    let insults = mint.mint(rng, 6, 2..=3);
    let mut per_cat = |n: usize| -> Vec<Vec<String>> {
        (0..spec.n_categories)
            .map(|_| mint.mint(rng, n, 2..=4))
            .collect()
    };
    let groups = per_cat(3);
    let topics = per_cat(4);
    let code_words = per_cat(2);
    Lexicon {
        filler,
        swears,
        positives,
        insults,
        groups,
        topics,
        code_words,
    }
}

/// Rank-frequency (1/r) sampler over the filler vocabulary.
struct Zipf {
    cumulative: Vec<f64>,
}

impl Zipf {
    fn new(n: usize) -> Self {
        let mut acc = 0.0;
        let cumulative = (0..n)
            .map(|r| {
                acc += 1.0 / (r as f64 + 1.0);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

struct TextGen<'a> {
    lex: &'a Lexicon,
    zipf: Zipf,
}

impl TextGen<'_> {
    fn filler(&self, rng: &mut impl Rng, lo: usize, hi: usize) -> Vec<Vec<String>> {
        let n = rng.random_range(lo..=hi);
        (0..n)
            .map(|_| vec![self.lex.filler[self.zipf.sample(rng)].clone()])
            .collect()
    }

    fn pick(rng: &mut impl Rng, words: &[String]) -> Vec<String> {
        vec![words.choose(rng).unwrap().clone()]
    }

    fn random_category(&self, rng: &mut impl Rng) -> usize {
        rng.random_range(0..self.lex.groups.len())
    }

    /// Shuffle units (single words or fixed bigrams) into a sentence. The
    /// first unit keeps its place so every tweet opens with filler.
    fn assemble(mut base: Vec<Vec<String>>, extra: Vec<Vec<String>>, rng: &mut impl Rng) -> String {
        for unit in extra {
            let pos = rng.random_range(1..=base.len());
            base.insert(pos, unit);
        }
        base.into_iter().flatten().collect::<Vec<_>>().join(" ")
    }

    fn benign(&self, rng: &mut impl Rng, code: Option<usize>) -> String {
        let base = self.filler(rng, 4, 9);
        let mut extra = Vec::new();
        if rng.random_bool(0.25) {
            let c = self.random_category(rng);
            extra.push(Self::pick(rng, &self.lex.topics[c]));
        }
        if rng.random_bool(0.15) {
            let c = self.random_category(rng);
            extra.push(Self::pick(rng, &self.lex.groups[c]));
        }
        if let Some(c) = code {
            extra.push(Self::pick(rng, &self.lex.code_words[c]));
        }
        Self::assemble(base, extra, rng)
    }

    fn abusive(&self, rng: &mut impl Rng) -> String {
        let base = self.filler(rng, 3, 7);
        let target = if rng.random_bool(0.6) {
            &self.lex.positives
        } else {
            &self.lex.insults
        };
        let mut extra = vec![vec![
            self.lex.swears.choose(rng).unwrap().clone(),
            target.choose(rng).unwrap().clone(),
        ]];
        if rng.random_bool(0.45) {
            let c = self.random_category(rng);
            extra.push(Self::pick(rng, &self.lex.groups[c]));
        }
        if rng.random_bool(0.3) {
            let c = self.random_category(rng);
            extra.push(Self::pick(rng, &self.lex.topics[c]));
        }
        Self::assemble(base, extra, rng)
    }

    fn overt_hate(&self, rng: &mut impl Rng, c: usize) -> String {
        let base = self.filler(rng, 3, 7);
        let mut extra = vec![vec![
            self.lex.swears.choose(rng).unwrap().clone(),
            self.lex.groups[c].choose(rng).unwrap().clone(),
        ]];
        if rng.random_bool(0.5) {
            extra.push(Self::pick(rng, &self.lex.topics[c]));
        }
        if rng.random_bool(0.35) {
            extra.push(Self::pick(rng, &self.lex.positives));
        }
        Self::assemble(base, extra, rng)
    }
}

fn count(n: usize, frac: f64) -> usize {
    (n as f64 * frac).round() as usize
}

/// Generate a synthetic corpus, follow graph and planted categories.
pub fn synth_corpus(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lexicon = build_lexicon(spec, &mut rng);
    let n_cat = spec.n_categories;

    // accounts: one block of hate accounts per category, then mainstream
    let per_cat = ((0.6 * spec.n_accounts as f64) as usize / n_cat).max(2);
    let n_hate_accounts = per_cat * n_cat;
    let accounts: Vec<String> = (0..spec.n_accounts)
        .map(|i| format!("acct{i:04}"))
        .collect();
    let community_accounts: Vec<&[String]> = (0..n_cat)
        .map(|c| &accounts[c * per_cat..(c + 1) * per_cat])
        .collect();
    let mainstream = &accounts[n_hate_accounts..];
    let mut account_communities = BTreeMap::new();
    for (c, block) in community_accounts.iter().enumerate() {
        for a in *block {
            account_communities.insert(a.clone(), c);
        }
    }
    let n_seeds = (per_cat / 4).max(1);
    let seed_accounts: Vec<String> = community_accounts
        .iter()
        .flat_map(|block| block[..n_seeds].iter().cloned())
        .collect();

    let mut follows: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (c, block) in community_accounts.iter().enumerate() {
        for a in *block {
            let out = follows.entry(a.clone()).or_default();
            for _ in 0..rng.random_range(3..=5) {
                let b = block.choose(&mut rng).unwrap();
                if b != a {
                    out.insert(b.clone());
                }
            }
            out.insert(mainstream.choose(&mut rng).unwrap().clone());
            // occasional cross-community link
            if rng.random_bool(0.1) {
                let other = (c + 1 + rng.random_range(0..n_cat - 1)) % n_cat;
                out.insert(community_accounts[other].choose(&mut rng).unwrap().clone());
            }
        }
    }
    for a in mainstream {
        let out = follows.entry(a.clone()).or_default();
        for _ in 0..rng.random_range(3..=5) {
            let b = mainstream.choose(&mut rng).unwrap();
            if b != a {
                out.insert(b.clone());
            }
        }
        if rng.random_bool(0.1) {
            out.insert(
                accounts[..n_hate_accounts]
                    .choose(&mut rng)
                    .unwrap()
                    .clone(),
            );
        }
    }

    // authors
    let n_authors = (spec.n_tweets / spec.tweets_per_author).max(2 * n_cat);
    let mut communities = BTreeMap::new();
    let mut members: Vec<Vec<String>> = vec![Vec::new(); n_cat];
    let mut regulars = Vec::new();
    let mut all_authors = Vec::with_capacity(n_authors);
    for i in 0..n_authors {
        let id = format!("user{i:05}");
        let community = if i < n_cat {
            Some(i)
        } else if i < 2 * n_cat {
            None
        } else if rng.random_bool(spec.community_fraction) {
            Some(rng.random_range(0..n_cat))
        } else {
            None
        };
        let out = follows.entry(id.clone()).or_default();
        match community {
            Some(c) => {
                for _ in 0..rng.random_range(2..=5) {
                    out.insert(community_accounts[c].choose(&mut rng).unwrap().clone());
                }
                for _ in 0..rng.random_range(1..=3) {
                    out.insert(mainstream.choose(&mut rng).unwrap().clone());
                }
                if rng.random_bool(0.2) {
                    let other = (c + 1 + rng.random_range(0..n_cat - 1)) % n_cat;
                    out.insert(community_accounts[other].choose(&mut rng).unwrap().clone());
                }
                members[c].push(id.clone());
            }
            None => {
                for _ in 0..rng.random_range(2..=5) {
                    out.insert(mainstream.choose(&mut rng).unwrap().clone());
                }
                if rng.random_bool(0.15) {
                    out.insert(
                        accounts[..n_hate_accounts]
                            .choose(&mut rng)
                            .unwrap()
                            .clone(),
                    );
                }
                regulars.push(id.clone());
            }
        }
        communities.insert(id.clone(), community);
        all_authors.push(id);
    }
    let edges: Vec<(String, String)> = follows
        .iter()
        .flat_map(|(a, outs)| outs.iter().map(move |b| (a.clone(), b.clone())))
        .collect();

    // tweet plan, following the aggregate class mix of the public corpora
    let n = spec.n_tweets;
    let n_hate = count(n, 0.166).max(n_cat);
    let n_abusive = count(n, 0.253);
    let n_none = n - n_hate - n_abusive;
    let n_code_hate = count(n_hate, spec.code_word_fraction);
    let n_overt = n_hate - n_code_hate;
    let n_benign_code = (2 * n_code_hate).min(n_none / 2);
    let n_benign = n_none - n_benign_code;
    let mut plan: Vec<TweetKind> = std::iter::repeat_n(TweetKind::Benign, n_benign)
        .chain(std::iter::repeat_n(TweetKind::BenignCode, n_benign_code))
        .chain(std::iter::repeat_n(TweetKind::Abusive, n_abusive))
        .chain(std::iter::repeat_n(TweetKind::OvertHate, n_overt))
        .chain(std::iter::repeat_n(TweetKind::CodeHate, n_code_hate))
        .collect();
    plan.shuffle(&mut rng);

    let gen = TextGen {
        lex: &lexicon,
        zipf: Zipf::new(lexicon.filler.len()),
    };
    let mut records = Vec::with_capacity(n);
    let mut truth = GroundTruth::new();
    let mut kinds = BTreeMap::new();
    for (i, kind) in plan.into_iter().enumerate() {
        let id = format!("t{i:06}");
        let (text, author, category) = match kind {
            TweetKind::Benign => (
                gen.benign(&mut rng, None),
                all_authors.choose(&mut rng).unwrap(),
                None,
            ),
            TweetKind::BenignCode => {
                let c = rng.random_range(0..n_cat);
                (
                    gen.benign(&mut rng, Some(c)),
                    regulars.choose(&mut rng).unwrap(),
                    None,
                )
            }
            TweetKind::Abusive => (
                gen.abusive(&mut rng),
                all_authors.choose(&mut rng).unwrap(),
                None,
            ),
            TweetKind::OvertHate => {
                let c = rng.random_range(0..n_cat);
                let author = if rng.random_bool(0.8) {
                    members[c].choose(&mut rng).unwrap()
                } else {
                    regulars.choose(&mut rng).unwrap()
                };
                (gen.overt_hate(&mut rng, c), author, Some(c))
            }
            TweetKind::CodeHate => {
                let c = rng.random_range(0..n_cat);
                (
                    gen.benign(&mut rng, Some(c)),
                    members[c].choose(&mut rng).unwrap(),
                    Some(c),
                )
            }
        };
        let noise_seed = spec
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(i as u64);
        let text = inject_misspellings(&text, spec.misspelling_rate, noise_seed)?;
        if let Some(c) = category {
            truth.insert(id.clone(), c);
        }
        kinds.insert(id.clone(), kind);
        records.push(TweetRecord {
            id,
            text,
            author_id: author.clone(),
            label: kind.label(),
            source: Source::Synthetic,
        });
    }

    Ok(SynthCorpus {
        records,
        edges,
        seed_accounts,
        truth,
        kinds,
        communities,
        account_communities,
        lexicon,
    })
}
