use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ClusterAssignment;
use crate::corpus::UnifiedLabel;
use crate::error::Result;
use crate::model::{HateModel, ModalityMask, ModelInput, Prediction};

/// Fused representation of a tweet the model predicts as hate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HateEmbedding {
    pub id: String,
    pub vector: Vec<f64>,
}

/// Keep `r_h` for every input predicted as hate.
pub fn hate_embeddings(inputs: &[ModelInput], predictions: &[Prediction]) -> Vec<HateEmbedding> {
    inputs
        .iter()
        .zip(predictions)
        .filter(|(_, p)| p.label == UnifiedLabel::Hate)
        .map(|(x, p)| HateEmbedding {
            id: x.id.clone(),
            vector: p.r_h.clone(),
        })
        .collect()
}

pub fn extract_hate_embeddings(
    model: &HateModel,
    inputs: &[ModelInput],
) -> Result<Vec<HateEmbedding>> {
    let preds = crate::training::predict_inputs(model, inputs)?;
    Ok(hate_embeddings(inputs, &preds))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionReport {
    pub id: String,
    pub tokens: Vec<String>,
    pub alpha: Vec<f64>,
    /// Text, cultural, social.
    pub beta: Vec<f64>,
    pub label: UnifiedLabel,
    pub probs: Vec<f64>,
}

impl AttentionReport {
    pub fn from_prediction(input: &ModelInput, p: &Prediction) -> Self {
        Self {
            id: input.id.clone(),
            tokens: input.tokens.clone(),
            alpha: p.alpha.clone(),
            beta: p.beta.clone(),
            label: p.label,
            probs: p.probs.clone(),
        }
    }
}

pub fn explain(model: &HateModel, input: &ModelInput) -> Result<AttentionReport> {
    Ok(AttentionReport::from_prediction(
        input,
        &model.predict(input)?,
    ))
}

/// Occlusion importances: the drop in the originally predicted class's
/// probability when a token or a modality is removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importances {
    pub id: String,
    pub label: UnifiedLabel,
    pub tokens: Vec<f64>,
    pub cultural: f64,
    pub social: f64,
}

pub fn perturb_importance(model: &HateModel, input: &ModelInput) -> Result<Importances> {
    let base = model.predict(input)?;
    let c = base.label.index();
    let drop = |p: Prediction| base.probs[c] - p.probs[c];
    let mut tokens = Vec::with_capacity(input.tokens.len());
    for t in 0..input.tokens.len() {
        tokens.push(drop(model.predict(&input.occlude_token(t))?));
    }
    let masked = |m: ModalityMask| model.predict_masked(input, m);
    Ok(Importances {
        id: input.id.clone(),
        label: base.label,
        tokens,
        cultural: drop(masked(ModalityMask {
            drop_cultural: true,
            drop_social: false,
        })?),
        social: drop(masked(ModalityMask {
            drop_cultural: false,
            drop_social: true,
        })?),
    })
}

/// Ranks from 1, averaging over ties.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Rank correlation `1 − 6 Σ d² / (n (n² − 1))` with average ranks for ties.
/// `None` when either side is constant or has fewer than two values.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "spearman over unequal lengths");
    let n = a.len();
    let constant = |x: &[f64]| x.iter().all(|v| *v == x[0]);
    if n < 2 || constant(a) || constant(b) {
        return None;
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let d2: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - y).powi(2)).sum();
    let n = n as f64;
    Some(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub mean: f64,
    pub used: usize,
    pub skipped_short: usize,
    pub skipped_degenerate: usize,
}

/// Mean per-record rank correlation between token attention and token
/// occlusion importance over records with at least `min_tokens` tokens.
pub fn agreement(
    reports: &[AttentionReport],
    importances: &[Importances],
    min_tokens: usize,
) -> Agreement {
    let mut sum = 0.0;
    let mut out = Agreement {
        mean: 0.0,
        used: 0,
        skipped_short: 0,
        skipped_degenerate: 0,
    };
    for (r, imp) in reports.iter().zip(importances) {
        if r.alpha.len() < min_tokens {
            out.skipped_short += 1;
            continue;
        }
        match spearman(&r.alpha, &imp.tokens) {
            Some(rho) => {
                sum += rho;
                out.used += 1;
            }
            None => out.skipped_degenerate += 1,
        }
    }
    if out.used > 0 {
        out.mean = sum / out.used as f64;
    }
    out
}

/// Per cluster, words ranked by summed attention mass (ties by word), top
/// `m` kept.
pub fn top_words(
    reports: &BTreeMap<String, AttentionReport>,
    assignment: &ClusterAssignment,
    m: usize,
) -> BTreeMap<usize, Vec<(String, f64)>> {
    let mut mass: BTreeMap<usize, BTreeMap<&str, f64>> = BTreeMap::new();
    for (id, &c) in assignment {
        let entry = mass.entry(c).or_default();
        if let Some(r) = reports.get(id) {
            for (w, a) in r.tokens.iter().zip(&r.alpha) {
                *entry.entry(w.as_str()).or_default() += a;
            }
        }
    }
    mass.into_iter()
        .map(|(c, words)| {
            let mut ranked: Vec<(String, f64)> =
                words.into_iter().map(|(w, a)| (w.to_string(), a)).collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ranked.truncate(m);
            (c, ranked)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(id: &str, tokens: &[&str], alpha: &[f64]) -> AttentionReport {
        AttentionReport {
            id: id.into(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            alpha: alpha.to_vec(),
            beta: vec![1.0, 0.0, 0.0],
            label: UnifiedLabel::Hate,
            probs: vec![0.0, 0.0, 1.0],
        }
    }

    #[test]
    fn spearman_extremes() {
        assert_eq!(spearman(&[0.1, 0.5, 0.4], &[1.0, 3.0, 2.0]), Some(1.0));
        assert_eq!(spearman(&[0.1, 0.5, 0.4], &[3.0, 1.0, 2.0]), Some(-1.0));
        assert_eq!(spearman(&[0.2, 0.2, 0.2], &[1.0, 3.0, 2.0]), None);
        assert_eq!(
            average_ranks(&[5.0, 1.0, 5.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }

    #[test]
    fn agreement_counts_skips() {
        let reports = [
            report("a", &["x", "y", "z"], &[0.2, 0.5, 0.3]),
            report("b", &["x", "y"], &[0.4, 0.6]),
            report("c", &["x", "y", "z"], &[0.2, 0.5, 0.3]),
        ];
        let imp = |t: &[f64]| Importances {
            id: String::new(),
            label: UnifiedLabel::Hate,
            tokens: t.to_vec(),
            cultural: 0.0,
            social: 0.0,
        };
        let imps = [
            imp(&[0.1, 0.9, 0.3]),
            imp(&[0.0, 1.0]),
            imp(&[0.0, 0.0, 0.0]),
        ];
        let a = agreement(&reports, &imps, 3);
        assert_eq!(
            (a.mean, a.used, a.skipped_short, a.skipped_degenerate),
            (1.0, 1, 1, 1)
        );
    }

    #[test]
    fn top_words_by_summed_mass() {
        let reports: BTreeMap<String, AttentionReport> = [
            report("a", &["solo"], &[1.0]),
            report("b", &["foo", "bar", "foo"], &[0.3, 0.4, 0.3]),
            report("c", &["bar", "baz"], &[0.5, 0.5]),
        ]
        .into_iter()
        .map(|r| (r.id.clone(), r))
        .collect();
        let assignment: ClusterAssignment = [("a", 0), ("b", 1), ("c", 1)]
            .map(|(k, v)| (k.to_string(), v))
            .into();
        let top = top_words(&reports, &assignment, 2);
        assert_eq!(top[&0], vec![("solo".to_string(), 1.0)]);
        assert_eq!(top[&1][0], ("bar".to_string(), 0.9));
        assert_eq!(top[&1][1].0, "foo");
        assert!((top[&1][1].1 - 0.6).abs() < 1e-15);
        assert!(top[&1].iter().all(|(w, _)| w != "solo"));
    }
}
