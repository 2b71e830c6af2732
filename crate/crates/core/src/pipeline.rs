//! Run configuration and the end-to-end experiment shared by the CLI, the
//! examples and the acceptance suite.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    agglomerative_cluster, agreement, hate_embeddings, perturb_importance, purity_report,
    Agreement, AttentionReport, ClusterAssignment, Linkage, PurityReport, PurityVariant,
};
use crate::corpus::{
    split, synth_corpus, DatasetSplits, GroundTruth, SynthCorpus, SynthSpec, TweetKind, TweetRecord,
};
use crate::encoders::SynthProvider;
use crate::error::{Error, Result};
use crate::fusion::SOCIAL;
use crate::hategraph::{
    build_graph, pagerank, select_hate_accounts, HateAccountSet, PageRank, PageRankParams,
};
use crate::model::{FeatureSource, GraphArtifacts, ModelConfig, ModelInput, Prediction};
use crate::par::par_map;
use crate::training::{
    metrics_for, predict_inputs, train, train_linear_baseline, FeatureMode, LinearConfig,
    LinearKind, Metrics, TrainConfig, TrainedModel,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Size of the hate-account set; capped at the vertex count.
    pub k: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        let p = PageRankParams::default();
        Self {
            damping: p.damping,
            tol: p.tol,
            max_iter: p.max_iter,
            k: 10_000,
        }
    }
}

impl GraphConfig {
    pub fn params(&self) -> PageRankParams {
        PageRankParams {
            damping: self.damping,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub k_clusters: usize,
    pub linkage: Linkage,
    pub purity: PurityVariant,
    pub top_words: usize,
    /// Records with fewer tokens are left out of the agreement score.
    pub min_tokens: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            k_clusters: 5,
            linkage: Linkage::Average,
            purity: PurityVariant::AsWritten,
            top_words: 5,
            min_tokens: 3,
        }
    }
}

/// Optional external inputs; the synthetic generator fills them otherwise.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub corpus: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub split: [f64; 3],
    pub paths: PathsConfig,
    pub synth: SynthSpec,
    pub graph: GraphConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub linear: LinearConfig,
    pub analysis: AnalysisConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            split: [0.7, 0.1, 0.2],
            paths: PathsConfig::default(),
            synth: SynthSpec::default(),
            graph: GraphConfig::default(),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            linear: LinearConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

impl RunConfig {
    /// Default configuration with `seed` applied everywhere.
    pub fn seeded(seed: u64) -> Self {
        let mut c = Self::default();
        c.set_seed(seed);
        c
    }

    /// Route one seed to every seeded component.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.synth.seed = seed;
        self.train.seed = seed;
        self.linear.seed = seed;
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let mut c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.set_seed(c.seed);
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn split_ratios(&self) -> (f64, f64, f64) {
        (self.split[0], self.split[1], self.split[2])
    }
}

/// Ranking, selection and projection results for one edge list.
#[derive(Debug, Clone)]
pub struct GraphStage {
    pub ranks: PageRank,
    pub ids: Vec<String>,
    pub artifacts: GraphArtifacts,
}

pub fn run_graph_stage<S: AsRef<str>>(
    edges: &[(S, S)],
    seeds: &[S],
    cfg: &GraphConfig,
) -> Result<GraphStage> {
    let graph = build_graph(edges);
    let ranks = pagerank(&graph, cfg.params())?;
    let hate: HateAccountSet = select_hate_accounts(&graph, &ranks, seeds, cfg.k)?;
    Ok(GraphStage {
        ranks,
        ids: graph.ids().to_vec(),
        artifacts: GraphArtifacts::new(hate, edges),
    })
}

/// One trained neural model with its test-split outputs.
#[derive(Debug, Clone)]
pub struct NeuralRun {
    pub trained: TrainedModel,
    pub inputs: Vec<ModelInput>,
    pub predictions: Vec<Prediction>,
    pub test: Metrics,
    /// Metrics on test tweets containing a code word.
    pub code_word: Metrics,
    pub clusters: Option<ClusterAssignment>,
    pub purity: Option<PurityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub model: String,
    pub f1_hate: f64,
    pub f1_overall: f64,
    pub code_word_f1_hate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityRow {
    pub model: String,
    pub purity: Option<f64>,
    pub n: usize,
}

/// Machine-readable summary of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub seed: u64,
    pub models: Vec<ModelRow>,
    pub purity: Vec<PurityRow>,
    pub beta_social_code_hate: f64,
    pub beta_social_overt_hate: f64,
    pub agreement: Agreement,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: RunConfig,
    pub corpus: SynthCorpus,
    pub splits: DatasetSplits,
    pub graph: GraphStage,
    pub text_sc: NeuralRun,
    pub text_only: NeuralRun,
    pub logistic: Metrics,
    pub hinge: Metrics,
    pub reports: Vec<AttentionReport>,
    pub agreement: Agreement,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Cluster predicted-hate embeddings and score them against `truth`.
pub fn cluster_and_score(
    inputs: &[ModelInput],
    predictions: &[Prediction],
    truth: &GroundTruth,
    cfg: &AnalysisConfig,
) -> Result<Option<(ClusterAssignment, PurityReport)>> {
    let points: Vec<(String, Vec<f64>)> = hate_embeddings(inputs, predictions)
        .into_iter()
        .map(|e| (e.id, e.vector))
        .collect();
    if points.len() < cfg.k_clusters {
        return Ok(None);
    }
    let clusters = agglomerative_cluster(&points, cfg.k_clusters)?;
    if !clusters.keys().any(|id| truth.contains_key(id)) {
        return Ok(None);
    }
    let report = purity_report(truth, &clusters, cfg.purity)?;
    Ok(Some((clusters, report)))
}

fn neural_run(
    splits: &DatasetSplits,
    cfg: &RunConfig,
    text_only: bool,
    src: FeatureSource,
    code_word_ids: &dyn Fn(&TweetRecord) -> bool,
    truth: &GroundTruth,
) -> Result<NeuralRun> {
    let train_cfg = TrainConfig {
        text_only,
        ..cfg.train.clone()
    };
    let trained = train(splits, cfg.model, &train_cfg, src)?;
    let inputs = trained.model.prepare_all(&splits.test, src)?;
    let predictions = predict_inputs(&trained.model, &inputs)?;
    let test = metrics_for(&splits.test, &predictions)?;
    let (cw_recs, cw_preds): (Vec<TweetRecord>, Vec<Prediction>) = splits
        .test
        .iter()
        .zip(&predictions)
        .filter(|(r, _)| code_word_ids(r))
        .map(|(r, p)| (r.clone(), p.clone()))
        .unzip();
    let code_word = metrics_for(&cw_recs, &cw_preds)?;
    let scored = cluster_and_score(&inputs, &predictions, truth, &cfg.analysis)?;
    let (clusters, purity) = match scored {
        Some((c, p)) => (Some(c), Some(p)),
        None => (None, None),
    };
    Ok(NeuralRun {
        trained,
        inputs,
        predictions,
        test,
        code_word,
        clusters,
        purity,
    })
}

impl Experiment {
    /// Synthesize, rank, train both neural variants and both linear
    /// baselines, then run the analysis layer on the test split.
    pub fn run(config: &RunConfig) -> Result<Self> {
        let corpus = synth_corpus(&config.synth)?;
        let graph = run_graph_stage(&corpus.edges, &corpus.seed_accounts, &config.graph)?;
        let provider = SynthProvider::new(
            config.model.cultural_dim,
            config.seed,
            corpus.communities.clone(),
        );
        let splits = split(&corpus.records, config.split_ratios(), config.seed)?;
        let src = FeatureSource {
            graph: &graph.artifacts,
            provider: &provider,
        };
        let is_code = |r: &TweetRecord| corpus.kinds.get(&r.id).is_some_and(|k| k.has_code_word());
        let text_sc = neural_run(&splits, config, false, src, &is_code, &corpus.truth)?;
        let text_only = neural_run(&splits, config, true, src, &is_code, &corpus.truth)?;
        let logistic = train_linear_baseline(
            LinearKind::Logistic,
            &splits,
            FeatureMode::TextSocialCultural,
            src,
            &config.linear,
        )?
        .evaluate(&splits.test, src)?;
        let hinge = train_linear_baseline(
            LinearKind::Hinge,
            &splits,
            FeatureMode::TextSocialCultural,
            src,
            &config.linear,
        )?
        .evaluate(&splits.test, src)?;

        let model = &text_sc.trained.model;
        let reports: Vec<AttentionReport> = text_sc
            .inputs
            .iter()
            .zip(&text_sc.predictions)
            .map(|(x, p)| AttentionReport::from_prediction(x, p))
            .collect();
        let importances = par_map(&text_sc.inputs, |x| perturb_importance(model, x))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let agreement = agreement(&reports, &importances, config.analysis.min_tokens);
        Ok(Self {
            config: config.clone(),
            corpus,
            splits,
            graph,
            text_sc,
            text_only,
            logistic,
            hinge,
            reports,
            agreement,
        })
    }

    /// Mean social attention over test tweets of `kind` under the fused model.
    pub fn mean_beta_social(&self, kind: TweetKind) -> f64 {
        mean(
            self.splits
                .test
                .iter()
                .zip(&self.reports)
                .filter(|(r, _)| self.corpus.kinds.get(&r.id) == Some(&kind))
                .map(|(_, rep)| rep.beta[SOCIAL]),
        )
    }

    pub fn summary(&self) -> ExperimentSummary {
        let row = |name: &str, m: &Metrics, cw: Option<&Metrics>| ModelRow {
            model: name.to_string(),
            f1_hate: m.f1_hate,
            f1_overall: m.f1_overall,
            code_word_f1_hate: cw.map(|c| c.f1_hate),
        };
        let prow = |name: &str, r: &NeuralRun| PurityRow {
            model: name.to_string(),
            purity: r.purity.as_ref().map(|p| p.purity),
            n: r.purity.as_ref().map_or(0, |p| p.n),
        };
        ExperimentSummary {
            seed: self.config.seed,
            models: vec![
                row("logistic", &self.logistic, None),
                row("hinge", &self.hinge, None),
                row(
                    "text-only",
                    &self.text_only.test,
                    Some(&self.text_only.code_word),
                ),
                row("text+sc", &self.text_sc.test, Some(&self.text_sc.code_word)),
            ],
            purity: vec![
                prow("text-only", &self.text_only),
                prow("text+sc", &self.text_sc),
            ],
            beta_social_code_hate: self.mean_beta_social(TweetKind::CodeHate),
            beta_social_overt_hate: self.mean_beta_social(TweetKind::OvertHate),
            agreement: self.agreement.clone(),
        }
    }
}

/// Ids per planted category, for reporting.
pub fn truth_by_category(truth: &GroundTruth) -> BTreeMap<usize, Vec<String>> {
    let mut out: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (id, c) in truth {
        out.entry(*c).or_default().push(id.clone());
    }
    out
}
