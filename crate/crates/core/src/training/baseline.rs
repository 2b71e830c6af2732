use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Metrics;
use crate::corpus::{DatasetSplits, TweetRecord, UnifiedLabel};
use crate::encoders::{encode_cultural, tokenize};
use crate::error::{Error, Result};
use crate::model::{argmax, FeatureSource};
use crate::nn::{seeded_rng, softmax, Adam, AdamConfig, Matrix, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearKind {
    /// Multinomial logistic regression.
    Logistic,
    /// Multiclass hinge loss; a linear stand-in for an SVM.
    Hinge,
}

impl LinearKind {
    pub fn name(self) -> &'static str {
        match self {
            LinearKind::Logistic => "logistic",
            LinearKind::Hinge => "hinge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMode {
    Text,
    TextSocialCultural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
    pub early_stop_patience: usize,
}

impl Default for LinearConfig {
    fn default() -> Self {
        Self {
            epochs: 60,
            batch_size: 32,
            learning_rate: 0.01,
            l2: 1e-4,
            seed: 0,
            early_stop_patience: 10,
        }
    }
}

type Sparse = Vec<(usize, f64)>;

/// Linear classifier over term-frequency features, optionally extended with
/// the follow vector and cultural vector.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub mode: FeatureMode,
    vocab: BTreeMap<String, usize>,
    social_dim: usize,
    cultural_dim: usize,
    weights: Matrix,
    bias: Vec<f64>,
}

impl LinearModel {
    fn n_features(&self) -> usize {
        self.vocab.len()
            + match self.mode {
                FeatureMode::Text => 0,
                FeatureMode::TextSocialCultural => self.social_dim + self.cultural_dim,
            }
    }

    fn features(&self, record: &TweetRecord, src: FeatureSource) -> Result<Sparse> {
        let words = tokenize(&record.text)?.words;
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for w in &words {
            if let Some(&i) = self.vocab.get(w) {
                *tf.entry(i).or_default() += 1.0 / words.len() as f64;
            }
        }
        let mut x: Sparse = tf.into_iter().collect();
        if self.mode == FeatureMode::TextSocialCultural {
            let base = self.vocab.len();
            let follow = src.graph.follow_vector(&record.author_id);
            x.extend(follow.active().into_iter().map(|i| (base + i, 1.0)));
            let q = encode_cultural(&record.author_id, src.provider)?;
            let base = base + self.social_dim;
            x.extend(q.into_iter().enumerate().map(|(i, v)| (base + i, v)));
        }
        Ok(x)
    }

    fn scores(&self, x: &Sparse) -> [f64; 3] {
        let mut s = [self.bias[0], self.bias[1], self.bias[2]];
        for &(i, v) in x {
            let row = self.weights.row(i);
            for c in 0..3 {
                s[c] += v * row[c];
            }
        }
        s
    }

    pub fn predict(&self, record: &TweetRecord, src: FeatureSource) -> Result<UnifiedLabel> {
        let s = self.scores(&self.features(record, src)?);
        Ok(UnifiedLabel::from_index(argmax(&s)).expect("three classes"))
    }

    pub fn evaluate(&self, records: &[TweetRecord], src: FeatureSource) -> Result<Metrics> {
        let mut pairs = Vec::with_capacity(records.len());
        for r in records {
            pairs.push((r.label, self.predict(r, src)?));
        }
        Metrics::from_pairs(pairs)
    }

    /// Per-class loss subgradient with respect to the scores.
    fn score_grad(&self, s: &[f64; 3], label: usize) -> ([f64; 3], f64) {
        match self.kind {
            LinearKind::Logistic => {
                let p = softmax(s);
                let mut g = [p[0], p[1], p[2]];
                g[label] -= 1.0;
                (g, -p[label].max(crate::nn::PROB_FLOOR).ln())
            }
            LinearKind::Hinge => {
                let rival = (0..3)
                    .filter(|&c| c != label)
                    .max_by(|&a, &b| s[a].total_cmp(&s[b]).then(b.cmp(&a)))
                    .expect("three classes");
                let margin = 1.0 + s[rival] - s[label];
                let mut g = [0.0; 3];
                if margin > 0.0 {
                    g[rival] = 1.0;
                    g[label] = -1.0;
                }
                (g, margin.max(0.0))
            }
        }
    }
}

/// Fit a linear baseline on the training split, keeping the epoch with the
/// best validation hate F1.
pub fn train_linear_baseline(
    kind: LinearKind,
    splits: &DatasetSplits,
    mode: FeatureMode,
    src: FeatureSource,
    cfg: &LinearConfig,
) -> Result<LinearModel> {
    if splits.train.is_empty() || splits.val.is_empty() {
        return Err(Error::invalid(
            "train and validation splits must be non-empty",
        ));
    }
    let mut words: Vec<String> = Vec::new();
    for r in &splits.train {
        words.extend(tokenize(&r.text)?.words);
    }
    words.sort();
    words.dedup();
    let vocab: BTreeMap<String, usize> =
        words.into_iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut model = LinearModel {
        kind,
        mode,
        vocab,
        social_dim: src.graph.hate_accounts.len(),
        cultural_dim: src.provider.dim(),
        weights: Matrix::zeros(0, 3),
        bias: vec![0.0; 3],
    };
    let n_feat = model.n_features();
    let mut store = ParamStore::new();
    let w_id = store.add("w", Matrix::zeros(n_feat, 3));
    let b_id = store.add("b", Matrix::zeros(1, 3));
    let mut adam = Adam::new(
        AdamConfig {
            learning_rate: cfg.learning_rate,
            ..Default::default()
        },
        &store,
    );
    model.weights = store.get(w_id).clone();
    let xs: Vec<Sparse> = splits
        .train
        .iter()
        .map(|r| model.features(r, src))
        .collect::<Result<_>>()?;
    let labels: Vec<usize> = splits.train.iter().map(|r| r.label.index()).collect();
    let val_xs: Vec<Sparse> = splits
        .val
        .iter()
        .map(|r| model.features(r, src))
        .collect::<Result<_>>()?;

    let mut rng = seeded_rng(cfg.seed ^ 0x11ea_11ea);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut grads = store.zeros_like();
    let mut best = (f64::NEG_INFINITY, model.weights.clone(), model.bias.clone());
    let mut stale = 0;
    for epoch in 1..=cfg.epochs.max(1) {
        order.shuffle(&mut rng);
        for (b, batch) in order.chunks(cfg.batch_size.max(1)).enumerate() {
            grads.zero();
            let scale = 1.0 / batch.len() as f64;
            let mut loss = 0.0;
            for &i in batch {
                let (g, l) = model.score_grad(&model.scores(&xs[i]), labels[i]);
                loss += l * scale;
                let gw = grads.get_mut(w_id);
                for &(f, v) in &xs[i] {
                    for c in 0..3 {
                        gw.row_mut(f)[c] += scale * v * g[c];
                    }
                }
                for c in 0..3 {
                    grads.get_mut(b_id).data[c] += scale * g[c];
                }
            }
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: b + 1,
                    loss,
                });
            }
            let w = &store.get(w_id).data;
            for (g, x) in grads.get_mut(w_id).data.iter_mut().zip(w) {
                *g += cfg.l2 * x;
            }
            adam.step(&mut store, &grads);
            model.weights = store.get(w_id).clone();
            model.bias = store.get(b_id).data.clone();
        }
        let preds = val_xs
            .iter()
            .map(|x| UnifiedLabel::from_index(argmax(&model.scores(x))).expect("three classes"));
        let val = Metrics::from_pairs(splits.val.iter().map(|r| r.label).zip(preds))?;
        if val.f1_hate > best.0 {
            best = (val.f1_hate, model.weights.clone(), model.bias.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale > cfg.early_stop_patience {
                break;
            }
        }
    }
    model.weights = best.1;
    model.bias = best.2;
    Ok(model)
}
