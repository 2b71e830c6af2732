//! Attention late fusion of the text summary, cultural vector and social
//! vector, followed by the three-way classification head.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{glorot, Matrix, ParamId, ParamStore, Tape, Var, PROB_FLOOR};

/// Modality order used by `beta` everywhere.
pub const MODALITIES: [&str; 3] = ["text", "cultural", "social"];
pub const TEXT: usize = 0;
pub const CULTURAL: usize = 1;
pub const SOCIAL: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionDims {
    pub text_dim: usize,
    pub cultural_dim: usize,
    pub social_dim: usize,
    /// Common dimension of the projected vectors and of `r_h`.
    pub fused_dim: usize,
    pub attn_dim: usize,
    pub n_classes: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FusionVars {
    /// Projected modality vectors, each `1 × fused_dim`.
    pub projected: [Var; 3],
    /// `1 × 3` modality weights.
    pub beta: Var,
    pub r_h: Var,
    pub logits: Var,
    pub probs: Var,
}

/// Plain values of one fusion pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionOutput {
    pub r_h: Vec<f64>,
    pub beta: Vec<f64>,
    pub probs: Vec<f64>,
}

impl FusionOutput {
    pub fn from_vars(tape: &Tape, vars: &FusionVars) -> Self {
        Self {
            r_h: tape.value(vars.r_h).data.clone(),
            beta: tape.value(vars.beta).data.clone(),
            probs: tape.value(vars.probs).data.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fusion {
    pub dims: FusionDims,
    proj_w: [ParamId; 3],
    proj_b: [ParamId; 3],
    attn_w: ParamId,
    attn_b: ParamId,
    attn_query: ParamId,
    cls_w: ParamId,
    cls_b: ParamId,
}

fn bind_param(store: &ParamStore, name: &str) -> Result<ParamId> {
    store
        .find(name)
        .ok_or_else(|| Error::Checkpoint(format!("missing parameter {name}")))
}

impl Fusion {
    pub fn register(store: &mut ParamStore, rng: &mut impl Rng, dims: FusionDims) -> Self {
        let ins = [dims.text_dim, dims.cultural_dim, dims.social_dim];
        let d = dims.fused_dim;
        let proj_w = std::array::from_fn(|m| {
            store.add(
                format!("fusion.proj_{}.w", MODALITIES[m]),
                glorot(rng, ins[m], d),
            )
        });
        let proj_b = std::array::from_fn(|m| {
            store.add(
                format!("fusion.proj_{}.b", MODALITIES[m]),
                Matrix::zeros(1, d),
            )
        });
        Self {
            dims,
            proj_w,
            proj_b,
            attn_w: store.add("fusion.attn_w", glorot(rng, d, dims.attn_dim)),
            attn_b: store.add("fusion.attn_b", Matrix::zeros(1, dims.attn_dim)),
            attn_query: store.add("fusion.attn_query", glorot(rng, dims.attn_dim, 1)),
            cls_w: store.add("fusion.cls_w", glorot(rng, d, dims.n_classes)),
            cls_b: store.add("fusion.cls_b", Matrix::zeros(1, dims.n_classes)),
        }
    }

    pub fn bind(store: &ParamStore, dims: FusionDims) -> Result<Self> {
        let mut proj_w = [ParamId(0); 3];
        let mut proj_b = [ParamId(0); 3];
        for m in 0..3 {
            proj_w[m] = bind_param(store, &format!("fusion.proj_{}.w", MODALITIES[m]))?;
            proj_b[m] = bind_param(store, &format!("fusion.proj_{}.b", MODALITIES[m]))?;
        }
        Ok(Self {
            dims,
            proj_w,
            proj_b,
            attn_w: bind_param(store, "fusion.attn_w")?,
            attn_b: bind_param(store, "fusion.attn_b")?,
            attn_query: bind_param(store, "fusion.attn_query")?,
            cls_w: bind_param(store, "fusion.cls_w")?,
            cls_b: bind_param(store, "fusion.cls_b")?,
        })
    }

    fn project(&self, tape: &mut Tape, m: usize, x: Var) -> Result<Var> {
        let expected = [
            self.dims.text_dim,
            self.dims.cultural_dim,
            self.dims.social_dim,
        ][m];
        let shape = tape.value(x).shape();
        if shape != (1, expected) {
            return Err(Error::dims(
                format!("{} feature width", MODALITIES[m]),
                expected,
                shape.1 * shape.0,
            ));
        }
        let w = tape.param(self.proj_w[m]);
        let b = tape.param(self.proj_b[m]);
        let y = tape.matmul(x, w);
        let y = tape.add(y, b);
        Ok(tape.tanh(y))
    }

    /// Fuse `(s, q, r)` into `r_h` and classify. With `text_only` the
    /// cultural and social vectors are ignored and `beta` is `[1, 0, 0]`.
    pub fn forward(
        &self,
        tape: &mut Tape,
        s: Var,
        q: Var,
        r: Var,
        text_only: bool,
    ) -> Result<FusionVars> {
        let v_text = self.project(tape, TEXT, s)?;
        let v_cult = self.project(tape, CULTURAL, q)?;
        let v_soc = self.project(tape, SOCIAL, r)?;
        let projected = [v_text, v_cult, v_soc];
        let (beta, r_h) = if text_only {
            (
                tape.constant(Matrix::row_vector(vec![1.0, 0.0, 0.0])),
                v_text,
            )
        } else {
            let stacked = tape.concat_rows(&projected);
            let aw = tape.param(self.attn_w);
            let ab = tape.param(self.attn_b);
            let u = tape.matmul(stacked, aw);
            let u = tape.add_row(u, ab);
            let u = tape.tanh(u);
            let query = tape.param(self.attn_query);
            let scores = tape.matmul(u, query);
            let scores = tape.transpose(scores);
            let beta = tape.softmax(scores);
            (beta, tape.matmul(beta, stacked))
        };
        let (logits, probs) = self.classify(tape, r_h);
        Ok(FusionVars {
            projected,
            beta,
            r_h,
            logits,
            probs,
        })
    }

    pub fn classify(&self, tape: &mut Tape, r_h: Var) -> (Var, Var) {
        let w = tape.param(self.cls_w);
        let b = tape.param(self.cls_b);
        let logits = tape.matmul(r_h, w);
        let logits = tape.add(logits, b);
        (logits, tape.softmax(logits))
    }
}

/// `-ln max(probs[label], 1e-12)`.
pub fn xent_loss(probs: &[f64], label: usize) -> f64 {
    -probs[label].max(PROB_FLOOR).ln()
}
