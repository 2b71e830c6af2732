//! The full classifier: text, cultural and social encoders feeding the
//! fusion head, plus feature preparation and checkpointing.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{TweetRecord, UnifiedLabel};
use crate::encoders::{
    encode_cultural, tokenize, CulturalProvider, EncodedText, SocialEncoder, TextDims, TextEncoder,
    TextVars, TokenizedText, Vocab, OOV,
};
use crate::error::{Error, Result};
use crate::fusion::{Fusion, FusionDims, FusionOutput, FusionVars};
use crate::hategraph::{
    follow_vector, project_hate_graph, BinaryFollowVector, FollowGraph, HateAccountSet,
};
use crate::nn::{seeded_rng, Grads, Matrix, ParamStore, Tape};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub word_dim: usize,
    pub char_dim: usize,
    pub hidden_dim: usize,
    pub cultural_dim: usize,
    pub social_dim: usize,
    pub social_hidden: usize,
    pub attn_dim: usize,
    pub fused_dim: usize,
    pub max_words: usize,
    pub min_word_count: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            word_dim: 64,
            char_dim: 16,
            hidden_dim: 64,
            cultural_dim: 16,
            social_dim: 16,
            social_hidden: 32,
            attn_dim: 32,
            fused_dim: 64,
            max_words: 40,
            min_word_count: 2,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("word_dim", self.word_dim),
            ("char_dim", self.char_dim),
            ("hidden_dim", self.hidden_dim),
            ("cultural_dim", self.cultural_dim),
            ("social_dim", self.social_dim),
            ("social_hidden", self.social_hidden),
            ("attn_dim", self.attn_dim),
            ("fused_dim", self.fused_dim),
            ("max_words", self.max_words),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if !self.hidden_dim.is_multiple_of(2) {
            return Err(Error::Config("hidden_dim must be even".into()));
        }
        Ok(())
    }

    fn text_dims(&self) -> TextDims {
        TextDims {
            word_dim: self.word_dim,
            char_dim: self.char_dim,
            hidden_dim: self.hidden_dim,
            attn_dim: self.attn_dim,
        }
    }

    fn fusion_dims(&self) -> FusionDims {
        FusionDims {
            text_dim: self.hidden_dim,
            cultural_dim: self.cultural_dim,
            social_dim: self.social_dim,
            fused_dim: self.fused_dim,
            attn_dim: self.attn_dim,
            n_classes: UnifiedLabel::ALL.len(),
        }
    }
}

/// Hate-account set plus the author→hate-account edges the follow vectors
/// are read from.
#[derive(Debug, Clone)]
pub struct GraphArtifacts {
    pub hate_accounts: HateAccountSet,
    pub author_edges: FollowGraph,
}

impl GraphArtifacts {
    pub fn new<S: AsRef<str>>(hate_accounts: HateAccountSet, edges: &[(S, S)]) -> Self {
        let author_edges = project_hate_graph(edges, &hate_accounts);
        Self {
            hate_accounts,
            author_edges,
        }
    }

    pub fn follow_vector(&self, author: &str) -> BinaryFollowVector {
        follow_vector(author, &self.author_edges, &self.hate_accounts)
    }
}

/// Everything a record needs besides its text.
#[derive(Clone, Copy)]
pub struct FeatureSource<'a> {
    pub graph: &'a GraphArtifacts,
    pub provider: &'a dyn CulturalProvider,
}

/// One record turned into model inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInput {
    pub id: String,
    pub tokens: Vec<String>,
    pub text: EncodedText,
    pub follow: BinaryFollowVector,
    pub cultural: Vec<f64>,
}

impl ModelInput {
    /// Copy with token `t` (word and characters) replaced by the OOV id.
    pub fn occlude_token(&self, t: usize) -> Self {
        let mut out = self.clone();
        out.text.word_ids[t] = OOV;
        let (p, q) = out.text.spans[t];
        out.text.char_ids[p..=q].iter_mut().for_each(|c| *c = OOV);
        out
    }
}

/// Modalities to zero out after encoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModalityMask {
    pub drop_cultural: bool,
    pub drop_social: bool,
}

#[derive(Debug, Clone)]
pub struct ForwardVars {
    pub text: TextVars,
    pub fusion: FusionVars,
}

/// Values of one forward pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: UnifiedLabel,
    pub probs: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub r_h: Vec<f64>,
    pub summary: Vec<f64>,
    pub social: Vec<f64>,
}

/// Argmax with ties to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointMeta {
    config: ModelConfig,
    text_only: bool,
    social_in: usize,
    vocab: Vocab,
}

#[derive(Debug, Clone)]
pub struct HateModel {
    pub config: ModelConfig,
    pub text_only: bool,
    pub vocab: Vocab,
    pub params: ParamStore,
    text: TextEncoder,
    social: SocialEncoder,
    fusion: Fusion,
}

impl HateModel {
    /// Fresh model with seeded initialization. `social_in` is the size of the
    /// hate-account set.
    pub fn new(
        config: ModelConfig,
        vocab: Vocab,
        social_in: usize,
        text_only: bool,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let mut rng = seeded_rng(seed);
        let mut params = ParamStore::new();
        let text = TextEncoder::register(
            &mut params,
            &mut rng,
            config.text_dims(),
            vocab.word_count(),
            vocab.char_count(),
        )?;
        let social = SocialEncoder::register(
            &mut params,
            &mut rng,
            social_in,
            config.social_hidden,
            config.social_dim,
        );
        let fusion = Fusion::register(&mut params, &mut rng, config.fusion_dims());
        Ok(Self {
            config,
            text_only,
            vocab,
            params,
            text,
            social,
            fusion,
        })
    }

    /// Build the vocabulary from `records` and initialize a model.
    pub fn for_records(
        config: ModelConfig,
        records: &[TweetRecord],
        social_in: usize,
        text_only: bool,
        seed: u64,
    ) -> Result<Self> {
        let toks: Vec<TokenizedText> = records
            .iter()
            .map(|r| tokenize(&r.text))
            .collect::<Result<_>>()?;
        let vocab = Vocab::build(&toks, config.min_word_count);
        Self::new(config, vocab, social_in, text_only, seed)
    }

    pub fn social_in(&self) -> usize {
        self.social.in_dim
    }

    pub fn prepare(&self, record: &TweetRecord, src: FeatureSource) -> Result<ModelInput> {
        let mut toks = tokenize(&record.text)?;
        toks.truncate(self.config.max_words);
        let follow = src.graph.follow_vector(&record.author_id);
        if follow.len() != self.social.in_dim {
            return Err(Error::dims(
                "hate-account set size",
                self.social.in_dim,
                follow.len(),
            ));
        }
        if src.provider.dim() != self.config.cultural_dim {
            return Err(Error::dims(
                "cultural provider dimension",
                self.config.cultural_dim,
                src.provider.dim(),
            ));
        }
        let cultural = encode_cultural(&record.author_id, src.provider)?;
        Ok(ModelInput {
            id: record.id.clone(),
            text: EncodedText::from_tokens(&toks, &self.vocab),
            tokens: toks.words,
            follow,
            cultural,
        })
    }

    pub fn prepare_all(
        &self,
        records: &[TweetRecord],
        src: FeatureSource,
    ) -> Result<Vec<ModelInput>> {
        records.iter().map(|r| self.prepare(r, src)).collect()
    }

    pub fn forward(
        &self,
        tape: &mut Tape,
        input: &ModelInput,
        mask: ModalityMask,
    ) -> Result<ForwardVars> {
        let text = self.text.encode(tape, &self.params, &input.text)?;
        let q = if mask.drop_cultural {
            tape.constant(Matrix::zeros(1, self.config.cultural_dim))
        } else {
            if input.cultural.len() != self.config.cultural_dim {
                return Err(Error::dims(
                    "cultural vector",
                    self.config.cultural_dim,
                    input.cultural.len(),
                ));
            }
            tape.constant(Matrix::row_vector(input.cultural.clone()))
        };
        let r = if mask.drop_social {
            tape.constant(Matrix::zeros(1, self.config.social_dim))
        } else {
            self.social.encode(tape, &input.follow)?
        };
        let fusion = self
            .fusion
            .forward(tape, text.summary, q, r, self.text_only)?;
        Ok(ForwardVars { text, fusion })
    }

    pub fn predict_masked(&self, input: &ModelInput, mask: ModalityMask) -> Result<Prediction> {
        let mut tape = Tape::new(&self.params);
        let vars = self.forward(&mut tape, input, mask)?;
        let FusionOutput { r_h, beta, probs } = FusionOutput::from_vars(&tape, &vars.fusion);
        let social = if mask.drop_social {
            vec![0.0; self.config.social_dim]
        } else {
            self.social.encode_values(&self.params, &input.follow)?
        };
        Ok(Prediction {
            label: UnifiedLabel::from_index(argmax(&probs)).expect("three classes"),
            alpha: tape.value(vars.text.alpha).data.clone(),
            summary: tape.value(vars.text.summary).data.clone(),
            probs,
            beta,
            r_h,
            social,
        })
    }

    pub fn predict(&self, input: &ModelInput) -> Result<Prediction> {
        self.predict_masked(input, ModalityMask::default())
    }

    /// Add `weight · ∂loss/∂θ` for one example to `grads`; returns the
    /// unweighted loss.
    pub fn accumulate_gradient(
        &self,
        input: &ModelInput,
        label: usize,
        weight: f64,
        grads: &mut Grads,
    ) -> Result<f64> {
        let mut tape = Tape::new(&self.params);
        let vars = self.forward(&mut tape, input, ModalityMask::default())?;
        let loss = tape.cross_entropy(vars.fusion.probs, label, 1.0);
        tape.backward(loss, grads, weight);
        Ok(tape.value(loss).data[0])
    }

    pub fn write_checkpoint<W: Write>(&self, w: W) -> Result<()> {
        let meta = serde_json::to_string(&CheckpointMeta {
            config: self.config,
            text_only: self.text_only,
            social_in: self.social.in_dim,
            vocab: self.vocab.clone(),
        })?;
        self.params
            .write_archive(w, &meta)
            .map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn read_checkpoint<R: Read>(r: R) -> Result<Self> {
        let (params, meta) = ParamStore::read_archive(r)?;
        let meta: CheckpointMeta = serde_json::from_str(&meta)?;
        let mut vocab = meta.vocab;
        vocab.reindex();
        let text = TextEncoder::bind(&params, meta.config.text_dims())?;
        let social = SocialEncoder::bind(&params, meta.social_in)?;
        let fusion = Fusion::bind(&params, meta.config.fusion_dims())?;
        Ok(Self {
            config: meta.config,
            text_only: meta.text_only,
            vocab,
            params,
            text,
            social,
            fusion,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_checkpoint(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_checkpoint(BufReader::new(f))
    }
}
