//! Labeled tweet corpora: the unified record schema, ingestion of the public
//! source label schemes, noise augmentation, stratified splitting and the
//! synthetic corpus generator.

mod misspell;
mod synth;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use misspell::{inject_misspellings, osa_distance};
pub use synth::{synth_corpus, Lexicon, SynthCorpus, SynthSpec, TweetKind};

/// Three-way target label. No ordering between the variants is implied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnifiedLabel {
    None,
    Abusive,
    Hate,
}

impl UnifiedLabel {
    pub const ALL: [UnifiedLabel; 3] = [
        UnifiedLabel::None,
        UnifiedLabel::Abusive,
        UnifiedLabel::Hate,
    ];

    pub fn index(self) -> usize {
        match self {
            UnifiedLabel::None => 0,
            UnifiedLabel::Abusive => 1,
            UnifiedLabel::Hate => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UnifiedLabel::None => "none",
            UnifiedLabel::Abusive => "abusive",
            UnifiedLabel::Hate => "hate",
        }
    }
}

impl fmt::Display for UnifiedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UnifiedLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(UnifiedLabel::None),
            "abusive" => Ok(UnifiedLabel::Abusive),
            "hate" => Ok(UnifiedLabel::Hate),
            _ => Err(Error::invalid(format!("unknown unified label `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Founta,
    Davidson,
    Park,
    Golbeck,
    Curated,
    Synthetic,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Founta => "founta",
            Source::Davidson => "davidson",
            Source::Park => "park",
            Source::Golbeck => "golbeck",
            Source::Curated => "curated",
            Source::Synthetic => "synthetic",
        }
    }

    /// The raw labels of this source's published scheme and their unified targets.
    pub fn label_scheme(self) -> &'static [(&'static str, UnifiedLabel)] {
        use UnifiedLabel::*;
        match self {
            Source::Founta => &[
                ("none", None),
                ("spam", None),
                ("abusive", Abusive),
                ("hateful", Hate),
            ],
            Source::Davidson => &[("neither", None), ("offensive", Abusive), ("hate", Hate)],
            Source::Park => &[("none", None), ("sexism", Hate), ("racism", Hate)],
            Source::Golbeck => &[("none", None), ("harassment", Abusive)],
            Source::Curated | Source::Synthetic => {
                &[("none", None), ("abusive", Abusive), ("hate", Hate)]
            }
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "founta" => Ok(Source::Founta),
            "davidson" => Ok(Source::Davidson),
            "park" => Ok(Source::Park),
            "golbeck" => Ok(Source::Golbeck),
            "curated" => Ok(Source::Curated),
            "synthetic" => Ok(Source::Synthetic),
            _ => Err(Error::invalid(format!("unknown source `{s}`"))),
        }
    }
}

/// Map a source-specific raw label onto the unified three-way schema.
/// Matching is case-insensitive.
pub fn unify_label(source: Source, raw_label: &str) -> Result<UnifiedLabel> {
    let needle = raw_label.trim().to_lowercase();
    let scheme = source.label_scheme();
    scheme
        .iter()
        .find(|(raw, _)| *raw == needle)
        .map(|(_, label)| *label)
        .ok_or_else(|| Error::UnknownLabel {
            source_name: source.name().to_string(),
            raw: raw_label.to_string(),
            valid: scheme
                .iter()
                .map(|(r, _)| *r)
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// What to do with founta `spam` records on ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpamPolicy {
    #[default]
    AsNone,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub author_id: String,
    pub label: UnifiedLabel,
    pub source: Source,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    author_id: String,
    label: String,
    source: String,
}

/// Parse a line-delimited JSON corpus. Labels may be given either in the
/// unified schema or in the record source's own scheme.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Vec<TweetRecord>> {
    parse_corpus_with(reader, SpamPolicy::AsNone)
}

pub fn parse_corpus_with<R: BufRead>(reader: R, spam: SpamPolicy) -> Result<Vec<TweetRecord>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let source: Source = raw
            .source
            .parse()
            .map_err(|e: Error| parse_err(e.to_string()))?;
        if spam == SpamPolicy::Drop
            && source == Source::Founta
            && raw.label.eq_ignore_ascii_case("spam")
        {
            continue;
        }
        let label = match raw.label.parse::<UnifiedLabel>() {
            Ok(l) => l,
            Err(_) => unify_label(source, &raw.label).map_err(|e| parse_err(e.to_string()))?,
        };
        if raw.text.trim().is_empty() {
            return Err(parse_err("empty text".into()));
        }
        if !seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateId(raw.id));
        }
        records.push(TweetRecord {
            id: raw.id,
            text: raw.text,
            author_id: raw.author_id,
            label,
            source,
        });
    }
    Ok(records)
}

/// One JSON object per line, in record order.
pub fn write_corpus<W: std::io::Write>(mut w: W, records: &[TweetRecord]) -> std::io::Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(std::io::Error::other)?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Tweet id → planted hate category, defined exactly for hate-labeled records.
pub type GroundTruth = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplits {
    pub train: Vec<TweetRecord>,
    pub val: Vec<TweetRecord>,
    pub test: Vec<TweetRecord>,
    pub seed: u64,
}

impl DatasetSplits {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.val.len(), self.test.len())
    }
}

/// Label-stratified train/val/test split. Within each split records keep
/// their input order.
pub fn split(records: &[TweetRecord], ratios: (f64, f64, f64), seed: u64) -> Result<DatasetSplits> {
    let (rt, rv, rs) = ratios;
    if rt <= 0.0 || rv <= 0.0 || rs <= 0.0 || ((rt + rv + rs) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "split ratios must be positive and sum to 1, got ({rt}, {rv}, {rs})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 0 = train, 1 = val, 2 = test
    let mut assignment = vec![0u8; records.len()];
    for label in UnifiedLabel::ALL {
        let mut idx: Vec<usize> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.label == label)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 3 {
            return Err(Error::StratumTooSmall(label.to_string()));
        }
        idx.shuffle(&mut rng);
        let n = idx.len() as f64;
        let n_train = (rt * n).round() as usize;
        let n_val = ((rv * n).round() as usize).min(idx.len() - n_train);
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = if pos < n_train {
                0
            } else if pos < n_train + n_val {
                1
            } else {
                2
            };
        }
    }
    let mut out = DatasetSplits {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
        seed,
    };
    for (r, a) in records.iter().zip(assignment) {
        match a {
            0 => out.train.push(r.clone()),
            1 => out.val.push(r.clone()),
            _ => out.test.push(r.clone()),
        }
    }
    Ok(out)
}
