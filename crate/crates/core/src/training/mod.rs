//! Mini-batch training with early stopping, evaluation metrics and linear
//! baselines.

mod baseline;
mod metrics;

pub use baseline::{train_linear_baseline, FeatureMode, LinearConfig, LinearKind, LinearModel};
pub use metrics::Metrics;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetSplits, TweetRecord};
use crate::error::{Error, Result};
use crate::model::{FeatureSource, HateModel, ModelConfig, ModelInput, Prediction};
use crate::nn::{seeded_rng, Adam, AdamConfig, Grads};
use crate::par::par_map;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub early_stop_patience: usize,
    /// Per-class loss weights in label index order.
    pub class_weights: Option<[f64; 3]>,
    pub text_only: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
            early_stop_patience: 5,
            class_weights: None,
            text_only: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "epochs and batch_size must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if let Some(w) = self.class_weights {
            if w.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::Config("class weights must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_f1_hate: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: HateModel,
    pub history: Vec<EpochStats>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
}

impl TrainedModel {
    pub fn history_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_f1_hate\n");
        for e in &self.history {
            s.push_str(&format!(
                "{},{:.6},{:.6}\n",
                e.epoch, e.train_loss, e.val_f1_hate
            ));
        }
        s
    }
}

/// Gradient work is split into this many fixed shards whose sums are
/// combined in order, so results do not depend on the machine's core count.
const GRAD_SHARDS: usize = 8;

fn batch_gradient(
    model: &HateModel,
    inputs: &[ModelInput],
    labels: &[usize],
    batch: &[usize],
    weights: [f64; 3],
    shards: &mut [Grads],
    total: &mut Grads,
) -> Result<f64> {
    let size = batch.len().div_ceil(GRAD_SHARDS).max(1);
    let scale = 1.0 / batch.len() as f64;
    let losses: Vec<Result<f64>> = std::thread::scope(|s| {
        let handles: Vec<_> = batch
            .chunks(size)
            .zip(shards.iter_mut())
            .map(|(chunk, g)| {
                s.spawn(move || {
                    g.zero();
                    let mut sum = 0.0;
                    for &i in chunk {
                        let w = weights[labels[i]];
                        sum +=
                            w * model.accumulate_gradient(&inputs[i], labels[i], w * scale, g)?;
                    }
                    Ok(sum)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("gradient worker panicked"))
            .collect()
    });
    total.zero();
    let mut loss = 0.0;
    for (l, g) in losses.into_iter().zip(shards.iter()) {
        loss += l?;
        total.add_assign(g);
    }
    Ok(loss * scale)
}

/// Predictions for every input, in order.
pub fn predict_inputs(model: &HateModel, inputs: &[ModelInput]) -> Result<Vec<Prediction>> {
    par_map(inputs, |x| model.predict(x)).into_iter().collect()
}

pub fn metrics_for(records: &[TweetRecord], predictions: &[Prediction]) -> Result<Metrics> {
    Metrics::from_pairs(
        records
            .iter()
            .zip(predictions)
            .map(|(r, p)| (r.label, p.label)),
    )
}

pub fn evaluate(model: &HateModel, records: &[TweetRecord], src: FeatureSource) -> Result<Metrics> {
    if records.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let inputs = model.prepare_all(records, src)?;
    metrics_for(records, &predict_inputs(model, &inputs)?)
}

/// Train with Adam and early stopping on validation hate F1, returning the
/// best validation checkpoint.
pub fn train(
    splits: &DatasetSplits,
    model_config: ModelConfig,
    config: &TrainConfig,
    src: FeatureSource,
) -> Result<TrainedModel> {
    config.validate()?;
    if splits.train.is_empty() || splits.val.is_empty() {
        return Err(Error::invalid(
            "train and validation splits must be non-empty",
        ));
    }
    let mut model = HateModel::for_records(
        model_config,
        &splits.train,
        src.graph.hate_accounts.len(),
        config.text_only,
        config.seed,
    )?;
    let train_inputs = model.prepare_all(&splits.train, src)?;
    let labels: Vec<usize> = splits.train.iter().map(|r| r.label.index()).collect();
    let val_inputs = model.prepare_all(&splits.val, src)?;
    let weights = config.class_weights.unwrap_or([1.0; 3]);

    let mut adam = Adam::new(
        AdamConfig {
            learning_rate: config.learning_rate,
            ..Default::default()
        },
        &model.params,
    );
    let mut shards: Vec<Grads> = (0..GRAD_SHARDS)
        .map(|_| model.params.zeros_like())
        .collect();
    let mut grads = model.params.zeros_like();
    let mut rng = seeded_rng(config.seed ^ 0x5eed_5eed_5eed_5eed);
    let mut order: Vec<usize> = (0..train_inputs.len()).collect();

    let mut history = Vec::new();
    let mut best = (f64::NEG_INFINITY, 0, model.params.clone());
    let mut stale = 0;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let loss = batch_gradient(
                &model,
                &train_inputs,
                &labels,
                batch,
                weights,
                &mut shards,
                &mut grads,
            )?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: b + 1,
                    loss,
                });
            }
            loss_sum += loss * batch.len() as f64;
            adam.step(&mut model.params, &grads);
        }
        let preds = predict_inputs(&model, &val_inputs)?;
        let val = metrics_for(&splits.val, &preds)?;
        history.push(EpochStats {
            epoch,
            train_loss: loss_sum / train_inputs.len() as f64,
            val_f1_hate: val.f1_hate,
        });
        if val.f1_hate > best.0 {
            best = (val.f1_hate, epoch, model.params.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale > config.early_stop_patience {
                break;
            }
        }
    }
    model.params = best.2;
    Ok(TrainedModel {
        model,
        history,
        best_epoch: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Source, UnifiedLabel};
    use crate::encoders::StubProvider;
    use crate::hategraph::HateAccountSet;
    use crate::model::GraphArtifacts;

    fn rec(i: usize, text: &str, label: UnifiedLabel) -> TweetRecord {
        TweetRecord {
            id: format!("t{i}"),
            text: text.into(),
            author_id: format!("u{i}"),
            label,
            source: Source::Synthetic,
        }
    }

    /// Each class has its own marker word.
    fn separable() -> DatasetSplits {
        let marker = ["calm", "jerk", "vile"];
        let filler = ["the", "a", "day", "sun", "we"];
        let mut recs = Vec::new();
        for i in 0..20 {
            let c = i % 3;
            let text = format!("{} {} {}", filler[i % 5], marker[c], filler[(i + 2) % 5]);
            recs.push(rec(i, &text, UnifiedLabel::from_index(c).unwrap()));
        }
        DatasetSplits {
            val: recs.clone(),
            test: recs.clone(),
            train: recs,
            seed: 0,
        }
    }

    fn tiny() -> ModelConfig {
        ModelConfig {
            word_dim: 8,
            char_dim: 4,
            hidden_dim: 8,
            cultural_dim: 4,
            social_dim: 4,
            social_hidden: 4,
            attn_dim: 4,
            fused_dim: 8,
            max_words: 10,
            min_word_count: 1,
        }
    }

    fn artifacts() -> (GraphArtifacts, StubProvider) {
        let hate = HateAccountSet::from_ordered(vec!["h".into()]).unwrap();
        (
            GraphArtifacts::new(hate, &[("u1", "h")]),
            StubProvider::new(4, 0),
        )
    }

    #[test]
    fn fits_a_separable_toy_corpus() {
        let splits = separable();
        let (graph, provider) = artifacts();
        let src = FeatureSource {
            graph: &graph,
            provider: &provider,
        };
        let cfg = TrainConfig {
            epochs: 200,
            batch_size: 4,
            learning_rate: 0.01,
            early_stop_patience: 200,
            ..Default::default()
        };
        let trained = train(&splits, tiny(), &cfg, src).unwrap();
        let m = evaluate(&trained.model, &splits.train, src).unwrap();
        assert_eq!(m.f1_overall, 1.0, "{:?}", trained.history.last());
    }

    #[test]
    fn same_seed_same_run() {
        let splits = separable();
        let (graph, provider) = artifacts();
        let src = FeatureSource {
            graph: &graph,
            provider: &provider,
        };
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 5,
            seed: 11,
            ..Default::default()
        };
        let a = train(&splits, tiny(), &cfg, src).unwrap();
        let b = train(&splits, tiny(), &cfg, src).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.model.params, b.model.params);
    }

    #[test]
    fn zero_patience_stops_after_first_stale_epoch() {
        let splits = separable();
        let (graph, provider) = artifacts();
        let src = FeatureSource {
            graph: &graph,
            provider: &provider,
        };
        // a vanishing learning rate keeps validation F1 flat after epoch 1
        let cfg = TrainConfig {
            epochs: 10,
            learning_rate: 1e-12,
            early_stop_patience: 0,
            ..Default::default()
        };
        let t = train(&splits, tiny(), &cfg, src).unwrap();
        assert_eq!(t.history.len(), 2);
        assert_eq!(t.best_epoch, 1);
    }

    #[test]
    fn best_checkpoint_is_kept() {
        let splits = separable();
        let (graph, provider) = artifacts();
        let src = FeatureSource {
            graph: &graph,
            provider: &provider,
        };
        let cfg = TrainConfig {
            epochs: 8,
            batch_size: 4,
            learning_rate: 0.02,
            early_stop_patience: 8,
            ..Default::default()
        };
        let t = train(&splits, tiny(), &cfg, src).unwrap();
        let best = t
            .history
            .iter()
            .map(|e| e.val_f1_hate)
            .fold(f64::NEG_INFINITY, f64::max);
        let m = evaluate(&t.model, &splits.val, src).unwrap();
        assert_eq!(m.f1_hate, best);
        assert_eq!(t.history[t.best_epoch - 1].val_f1_hate, best);
    }

    #[test]
    fn divergence_is_reported() {
        let splits = separable();
        let (graph, provider) = artifacts();
        let src = FeatureSource {
            graph: &graph,
            provider: &provider,
        };
        let cfg = TrainConfig {
            class_weights: Some([f64::MAX, f64::MAX, f64::MAX]),
            ..Default::default()
        };
        assert!(matches!(
            train(&splits, tiny(), &cfg, src),
            Err(Error::Diverged {
                epoch: 1,
                batch: 1,
                ..
            })
        ));
    }
}
