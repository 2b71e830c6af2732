use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy)]
enum Edit {
    Swap,
    Drop,
    Double,
}

/// Add typo noise: every whitespace-delimited word is edited with
/// probability `rate` by one adjacent swap, character drop or character
/// double. Whitespace is preserved byte for byte, so the word count never
/// changes and each edited word sits at transposition-aware edit distance 1
/// from the original.
pub fn inject_misspellings(text: &str, rate: f64, seed: u64) -> Result<String> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::invalid(format!(
            "misspelling rate {rate} outside [0, 1]"
        )));
    }
    if rate == 0.0 {
        return Ok(text.to_string());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(text.len() + 8);
    let mut word = Vec::new();
    let flush = |word: &mut Vec<char>, out: &mut String, rng: &mut ChaCha8Rng| {
        if word.is_empty() {
            return;
        }
        if rng.random::<f64>() < rate {
            misspell_word(word, rng);
        }
        out.extend(word.drain(..));
    };
    for c in text.chars() {
        if c.is_whitespace() {
            flush(&mut word, &mut out, &mut rng);
            out.push(c);
        } else {
            word.push(c);
        }
    }
    flush(&mut word, &mut out, &mut rng);
    Ok(out)
}

fn misspell_word(word: &mut Vec<char>, rng: &mut impl Rng) {
    // Swapping equal neighbours is a no-op, so only distinct pairs qualify;
    // dropping the only character would delete the word.
    let swaps: Vec<usize> = (0..word.len().saturating_sub(1))
        .filter(|&i| word[i] != word[i + 1])
        .collect();
    let mut edits = vec![Edit::Double];
    if !swaps.is_empty() {
        edits.push(Edit::Swap);
    }
    if word.len() >= 2 {
        edits.push(Edit::Drop);
    }
    match edits[rng.random_range(0..edits.len())] {
        Edit::Swap => {
            let i = swaps[rng.random_range(0..swaps.len())];
            word.swap(i, i + 1);
        }
        Edit::Drop => {
            let i = rng.random_range(0..word.len());
            word.remove(i);
        }
        Edit::Double => {
            let i = rng.random_range(0..word.len());
            word.insert(i, word[i]);
        }
    }
}

/// Optimal string alignment distance (Levenshtein plus adjacent transposition).
pub fn osa_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        d[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut v = (d[i - 1][j] + 1)
                .min(d[i][j - 1] + 1)
                .min(d[i - 1][j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                v = v.min(d[i - 2][j - 2] + 1);
            }
            d[i][j] = v;
        }
    }
    d[n][m]
}
