//! Character-enhanced word encoder.
//!
//! Each word is represented by its word embedding together with two
//! character context vectors: an attention summary of the characters inside
//! the word's span and one of every character outside it. Both attentions are
//! additive and queried by the word's own embedding. The projected
//! per-word vectors run through a bidirectional GRU, and a self-attention
//! layer with a single learned query pools the hidden states into the
//! summary `S`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tokenize::{TokenizedText, Vocab, PAD};
use crate::error::{Error, Result};
use crate::nn::{glorot, uniform, Matrix, ParamId, ParamStore, Tape, Var};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextDims {
    pub word_dim: usize,
    pub char_dim: usize,
    /// Width of `H` and `S`; each GRU direction gets half.
    pub hidden_dim: usize,
    pub attn_dim: usize,
}

/// Word and character ids for one text, plus inclusive character spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedText {
    pub word_ids: Vec<usize>,
    pub char_ids: Vec<usize>,
    pub spans: Vec<(usize, usize)>,
}

impl EncodedText {
    pub fn from_tokens(tokens: &TokenizedText, vocab: &Vocab) -> Self {
        Self {
            word_ids: tokens.words.iter().map(|w| vocab.word_id(w)).collect(),
            char_ids: tokens.chars.iter().map(|c| vocab.char_id(*c)).collect(),
            spans: tokens.spans.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.word_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_ids.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct Gru {
    wx: ParamId,
    bx: ParamId,
    uzr: ParamId,
    un: ParamId,
    bn: ParamId,
    hidden: usize,
}

impl Gru {
    fn register(
        store: &mut ParamStore,
        rng: &mut impl Rng,
        prefix: &str,
        input: usize,
        hidden: usize,
    ) -> Self {
        Self {
            wx: store.add(format!("{prefix}.wx"), glorot(rng, input, 3 * hidden)),
            bx: store.add(format!("{prefix}.bx"), Matrix::zeros(1, 3 * hidden)),
            uzr: store.add(format!("{prefix}.uzr"), glorot(rng, hidden, 2 * hidden)),
            un: store.add(format!("{prefix}.un"), glorot(rng, hidden, hidden)),
            bn: store.add(format!("{prefix}.bn"), Matrix::zeros(1, hidden)),
            hidden,
        }
    }

    /// Hidden state per position, in input order regardless of direction.
    fn run(&self, tape: &mut Tape, xs: Var, reverse: bool) -> Vec<Var> {
        let h = self.hidden;
        let n = tape.value(xs).rows;
        let (wx, bx, uzr, un, bn) = (
            tape.param(self.wx),
            tape.param(self.bx),
            tape.param(self.uzr),
            tape.param(self.un),
            tape.param(self.bn),
        );
        let xw = tape.matmul(xs, wx);
        let xw = tape.add_row(xw, bx);
        let mut state = tape.constant(Matrix::zeros(1, h));
        let mut out = vec![state; n];
        let order: Vec<usize> = if reverse {
            (0..n).rev().collect()
        } else {
            (0..n).collect()
        };
        for t in order {
            let xt = tape.row(xw, t);
            let xz = tape.cols(xt, 0, h);
            let xr = tape.cols(xt, h, 2 * h);
            let xn = tape.cols(xt, 2 * h, 3 * h);
            let hu = tape.matmul(state, uzr);
            let hz = tape.cols(hu, 0, h);
            let hr = tape.cols(hu, h, 2 * h);
            let z = tape.add(xz, hz);
            let z = tape.sigmoid(z);
            let r = tape.add(xr, hr);
            let r = tape.sigmoid(r);
            let hn = tape.matmul(state, un);
            let hn = tape.add_row(hn, bn);
            let gated = tape.mul(r, hn);
            let cand = tape.add(xn, gated);
            let cand = tape.tanh(cand);
            // h' = (1 - z)·n + z·h = n + z·(h - n)
            let diff = tape.sub(state, cand);
            let keep = tape.mul(z, diff);
            state = tape.add(cand, keep);
            out[t] = state;
        }
        out
    }
}

/// Character attention result for one word.
#[derive(Debug, Clone, Copy)]
pub struct CharContext {
    pub inside: Var,
    pub outside: Var,
    /// `1 × |inside|` weights.
    pub inside_weights: Var,
    /// `1 × |outside|` weights; `None` when nothing lies outside the span.
    pub outside_weights: Option<Var>,
}

/// Tape handles for one encoder pass.
#[derive(Debug, Clone)]
pub struct TextVars {
    pub hidden: Var,
    pub summary: Var,
    pub alpha: Var,
    pub chars: Vec<CharContext>,
}

/// Plain values of one encoder pass.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput {
    /// `n × hidden_dim` bidirectional states.
    pub hidden: Matrix,
    pub summary: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TextEncoder {
    pub dims: TextDims,
    word_emb: ParamId,
    char_emb: ParamId,
    char_key: ParamId,
    char_query: ParamId,
    char_bias: ParamId,
    char_v_in: ParamId,
    char_v_out: ParamId,
    proj_w: ParamId,
    proj_b: ParamId,
    fwd: Gru,
    bwd: Gru,
    attn_w: ParamId,
    attn_b: ParamId,
    attn_v: ParamId,
}

fn embedding_table(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    let mut m = uniform(rng, rows, cols, 0.1);
    m.row_mut(PAD).fill(0.0);
    m
}

impl TextEncoder {
    pub fn register(
        store: &mut ParamStore,
        rng: &mut impl Rng,
        dims: TextDims,
        vocab_words: usize,
        vocab_chars: usize,
    ) -> Result<Self> {
        if dims.hidden_dim < 2 || !dims.hidden_dim.is_multiple_of(2) {
            return Err(Error::invalid("hidden_dim must be a positive even number"));
        }
        let TextDims {
            word_dim: dw,
            char_dim: dc,
            hidden_dim: dh,
            attn_dim: da,
        } = dims;
        let half = dh / 2;
        Ok(Self {
            dims,
            word_emb: store.add("text.word_emb", embedding_table(rng, vocab_words, dw)),
            char_emb: store.add("text.char_emb", embedding_table(rng, vocab_chars, dc)),
            char_key: store.add("text.char_key", glorot(rng, dc, da)),
            char_query: store.add("text.char_query", glorot(rng, dw, da)),
            char_bias: store.add("text.char_bias", Matrix::zeros(1, da)),
            char_v_in: store.add("text.char_v_in", glorot(rng, da, 1)),
            char_v_out: store.add("text.char_v_out", glorot(rng, da, 1)),
            proj_w: store.add("text.proj_w", glorot(rng, dw + 2 * dc, dw)),
            proj_b: store.add("text.proj_b", Matrix::zeros(1, dw)),
            fwd: Gru::register(store, rng, "text.gru_fwd", dw, half),
            bwd: Gru::register(store, rng, "text.gru_bwd", dw, half),
            attn_w: store.add("text.attn_w", glorot(rng, dh, da)),
            attn_b: store.add("text.attn_b", Matrix::zeros(1, da)),
            attn_v: store.add("text.attn_v", glorot(rng, da, 1)),
        })
    }

    /// Resolve parameter handles by name, e.g. after loading a checkpoint.
    pub fn bind(store: &ParamStore, dims: TextDims) -> Result<Self> {
        let p = |n: &str| {
            store
                .find(n)
                .ok_or_else(|| Error::Checkpoint(format!("missing parameter {n}")))
        };
        let gru = |prefix: &str| -> Result<Gru> {
            Ok(Gru {
                wx: p(&format!("{prefix}.wx"))?,
                bx: p(&format!("{prefix}.bx"))?,
                uzr: p(&format!("{prefix}.uzr"))?,
                un: p(&format!("{prefix}.un"))?,
                bn: p(&format!("{prefix}.bn"))?,
                hidden: dims.hidden_dim / 2,
            })
        };
        Ok(Self {
            dims,
            word_emb: p("text.word_emb")?,
            char_emb: p("text.char_emb")?,
            char_key: p("text.char_key")?,
            char_query: p("text.char_query")?,
            char_bias: p("text.char_bias")?,
            char_v_in: p("text.char_v_in")?,
            char_v_out: p("text.char_v_out")?,
            proj_w: p("text.proj_w")?,
            proj_b: p("text.proj_b")?,
            fwd: gru("text.gru_fwd")?,
            bwd: gru("text.gru_bwd")?,
            attn_w: p("text.attn_w")?,
            attn_b: p("text.attn_b")?,
            attn_v: p("text.attn_v")?,
        })
    }

    fn check_input(&self, store: &ParamStore, input: &EncodedText) -> Result<()> {
        if input.is_empty() || input.char_ids.is_empty() {
            return Err(Error::invalid("cannot encode an empty text"));
        }
        if input.spans.len() != input.word_ids.len() {
            return Err(Error::dims(
                "text spans",
                input.word_ids.len(),
                input.spans.len(),
            ));
        }
        let vw = store.get(self.word_emb).rows;
        let vc = store.get(self.char_emb).rows;
        if let Some(&bad) = input.word_ids.iter().find(|&&i| i >= vw) {
            return Err(Error::dims("word id range", vw, bad));
        }
        if let Some(&bad) = input.char_ids.iter().find(|&&i| i >= vc) {
            return Err(Error::dims("char id range", vc, bad));
        }
        Ok(())
    }

    /// Additive attention over the characters inside and outside `span`.
    ///
    /// `char_embs` holds one row per character and `char_keys` its key
    /// projection; `query` is the already projected `1 × attn_dim` query.
    pub fn char_context(
        &self,
        tape: &mut Tape,
        char_embs: Var,
        char_keys: Var,
        query: Var,
        span: (usize, usize),
    ) -> Result<CharContext> {
        let n_chars = tape.value(char_embs).rows;
        let (p, q) = span;
        if p > q || q >= n_chars {
            return Err(Error::InvalidSpan {
                start: p,
                end: q,
                len: n_chars,
            });
        }
        let inside: Vec<usize> = (p..=q).collect();
        let outside: Vec<usize> = (0..p).chain(q + 1..n_chars).collect();
        let (c_in, w_in) =
            self.attend_chars(tape, char_embs, char_keys, query, &inside, self.char_v_in);
        let (c_out, w_out) = if outside.is_empty() {
            (tape.constant(Matrix::zeros(1, self.dims.char_dim)), None)
        } else {
            let (c, w) =
                self.attend_chars(tape, char_embs, char_keys, query, &outside, self.char_v_out);
            (c, Some(w))
        };
        Ok(CharContext {
            inside: c_in,
            outside: c_out,
            inside_weights: w_in,
            outside_weights: w_out,
        })
    }

    fn attend_chars(
        &self,
        tape: &mut Tape,
        char_embs: Var,
        char_keys: Var,
        query: Var,
        idx: &[usize],
        v: ParamId,
    ) -> (Var, Var) {
        let keys = tape.rows(char_keys, idx);
        let pre = tape.add_row(keys, query);
        let act = tape.tanh(pre);
        let v = tape.param(v);
        let scores = tape.matmul(act, v);
        let scores = tape.transpose(scores);
        let weights = tape.softmax(scores);
        let embs = tape.rows(char_embs, idx);
        (tape.matmul(weights, embs), weights)
    }

    /// Record the encoder on `tape`.
    pub fn encode(
        &self,
        tape: &mut Tape,
        store: &ParamStore,
        input: &EncodedText,
    ) -> Result<TextVars> {
        self.check_input(store, input)?;
        let n = input.len();
        let char_embs = tape.gather(self.char_emb, &input.char_ids);
        let key_w = tape.param(self.char_key);
        let char_keys = tape.matmul(char_embs, key_w);
        let word_embs = tape.gather(self.word_emb, &input.word_ids);
        let query_w = tape.param(self.char_query);
        let query_b = tape.param(self.char_bias);
        let queries = tape.matmul(word_embs, query_w);
        let queries = tape.add_row(queries, query_b);

        let mut rows = Vec::with_capacity(n);
        let mut chars = Vec::with_capacity(n);
        for (t, &span) in input.spans.iter().enumerate() {
            let query = tape.row(queries, t);
            let ctx = self.char_context(tape, char_embs, char_keys, query, span)?;
            let word = tape.row(word_embs, t);
            rows.push(tape.concat_cols(&[word, ctx.inside, ctx.outside]));
            chars.push(ctx);
        }
        let stacked = tape.concat_rows(&rows);
        let pw = tape.param(self.proj_w);
        let pb = tape.param(self.proj_b);
        let xs = tape.matmul(stacked, pw);
        let xs = tape.add_row(xs, pb);

        let fwd = self.fwd.run(tape, xs, false);
        let bwd = self.bwd.run(tape, xs, true);
        let per_step: Vec<Var> = fwd
            .iter()
            .zip(&bwd)
            .map(|(f, b)| tape.concat_cols(&[*f, *b]))
            .collect();
        let hidden = tape.concat_rows(&per_step);

        let aw = tape.param(self.attn_w);
        let ab = tape.param(self.attn_b);
        let av = tape.param(self.attn_v);
        let u = tape.matmul(hidden, aw);
        let u = tape.add_row(u, ab);
        let u = tape.tanh(u);
        let scores = tape.matmul(u, av);
        let scores = tape.transpose(scores);
        let alpha = tape.softmax(scores);
        let summary = tape.matmul(alpha, hidden);
        Ok(TextVars {
            hidden,
            summary,
            alpha,
            chars,
        })
    }

    /// Standalone forward pass returning plain values.
    pub fn encode_values(&self, store: &ParamStore, input: &EncodedText) -> Result<EncoderOutput> {
        let mut tape = Tape::new(store);
        let vars = self.encode(&mut tape, store, input)?;
        Ok(EncoderOutput {
            hidden: tape.value(vars.hidden).clone(),
            summary: tape.value(vars.summary).data.clone(),
            alpha: tape.value(vars.alpha).data.clone(),
        })
    }
}
