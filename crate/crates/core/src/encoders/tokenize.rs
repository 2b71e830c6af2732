use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joins consecutive words in the character sequence.
pub const WORD_BOUNDARY: char = '\u{241F}';

/// Lowercased words plus the character sequence they were cut from.
///
/// `chars` is the words joined by a single [`WORD_BOUNDARY`]; `spans[t]`
/// holds the inclusive character positions of `words[t]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    pub words: Vec<String>,
    pub chars: Vec<char>,
    pub spans: Vec<(usize, usize)>,
}

impl TokenizedText {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Keep only the first `n` words.
    pub fn truncate(&mut self, n: usize) {
        if self.words.len() <= n || n == 0 {
            return;
        }
        self.words.truncate(n);
        self.spans.truncate(n);
        self.chars.truncate(self.spans[n - 1].1 + 1);
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '#' | '@' | '_')
}

/// Lowercase and cut on whitespace and punctuation. Letters, digits and
/// `#`, `@`, `_` form words, so hashtags and mentions survive intact.
pub fn tokenize(text: &str) -> Result<TokenizedText> {
    let lowered = text.to_lowercase();
    let words: Vec<String> = lowered
        .split(|c: char| !is_word_char(c))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect();
    if words.is_empty() {
        return Err(Error::invalid(format!(
            "text `{text}` has no words after normalization"
        )));
    }
    let mut chars = Vec::new();
    let mut spans = Vec::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            chars.push(WORD_BOUNDARY);
        }
        let start = chars.len();
        chars.extend(w.chars());
        spans.push((start, chars.len() - 1));
    }
    Ok(TokenizedText {
        words,
        chars,
        spans,
    })
}

pub const PAD: usize = 0;
pub const OOV: usize = 1;
/// Character id of [`WORD_BOUNDARY`].
pub const BOUNDARY_ID: usize = 2;

/// Word and character vocabularies. Row 0 of each table is padding and row 1
/// the shared out-of-vocabulary entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocab {
    words: Vec<String>,
    chars: Vec<char>,
    #[serde(skip)]
    word_index: HashMap<String, usize>,
    #[serde(skip)]
    char_index: HashMap<char, usize>,
}

impl Vocab {
    /// Words seen at least `min_count` times, most frequent first (ties by
    /// word); every character seen at least once.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a TokenizedText>, min_count: usize) -> Self {
        let mut wc: HashMap<&str, usize> = HashMap::new();
        let mut cc: HashMap<char, usize> = HashMap::new();
        for t in texts {
            for w in &t.words {
                *wc.entry(w.as_str()).or_default() += 1;
            }
            for &c in &t.chars {
                if c != WORD_BOUNDARY {
                    *cc.entry(c).or_default() += 1;
                }
            }
        }
        let mut words: Vec<(&str, usize)> = wc
            .into_iter()
            .filter(|(_, n)| *n >= min_count.max(1))
            .collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut chars: Vec<(char, usize)> = cc.into_iter().collect();
        chars.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut v = Vocab {
            words: ["<pad>", "<oov>"]
                .into_iter()
                .map(String::from)
                .chain(words.into_iter().map(|(w, _)| w.to_string()))
                .collect(),
            chars: ['\0', '\u{FFFD}', WORD_BOUNDARY]
                .into_iter()
                .chain(chars.into_iter().map(|(c, _)| c))
                .collect(),
            word_index: HashMap::new(),
            char_index: HashMap::new(),
        };
        v.reindex();
        v
    }

    /// Rebuild lookup maps after deserialization.
    pub fn reindex(&mut self) {
        self.word_index = self
            .words
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, w)| (w.clone(), i))
            .collect();
        self.char_index = self
            .chars
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, c)| (*c, i))
            .collect();
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn char_count(&self) -> usize {
        self.chars.len()
    }

    pub fn word_id(&self, w: &str) -> usize {
        self.word_index.get(w).copied().unwrap_or(OOV)
    }

    pub fn char_id(&self, c: char) -> usize {
        self.char_index.get(&c).copied().unwrap_or(OOV)
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}
