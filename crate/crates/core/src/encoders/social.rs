use rand::Rng;

use crate::error::{Error, Result};
use crate::hategraph::BinaryFollowVector;
use crate::nn::{glorot, Matrix, ParamId, ParamStore, Tape, Var};

/// Two affine layers with `tanh` between, mapping a follow vector over the
/// hate-account set to a dense `out_dim` vector.
#[derive(Debug, Clone)]
pub struct SocialEncoder {
    pub in_dim: usize,
    pub hidden_dim: usize,
    pub out_dim: usize,
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
}

impl SocialEncoder {
    pub fn register(
        store: &mut ParamStore,
        rng: &mut impl Rng,
        in_dim: usize,
        hidden_dim: usize,
        out_dim: usize,
    ) -> Self {
        Self {
            in_dim,
            hidden_dim,
            out_dim,
            w1: store.add("social.w1", glorot(rng, in_dim.max(1), hidden_dim)),
            b1: store.add("social.b1", Matrix::zeros(1, hidden_dim)),
            w2: store.add("social.w2", glorot(rng, hidden_dim, out_dim)),
            b2: store.add("social.b2", Matrix::zeros(1, out_dim)),
        }
    }

    pub fn bind(store: &ParamStore, in_dim: usize) -> Result<Self> {
        let p = |n: &str| {
            store
                .find(n)
                .ok_or_else(|| Error::Checkpoint(format!("missing parameter {n}")))
        };
        let (w1, w2) = (p("social.w1")?, p("social.w2")?);
        Ok(Self {
            in_dim,
            hidden_dim: store.get(w1).cols,
            out_dim: store.get(w2).cols,
            w1,
            b1: p("social.b1")?,
            w2,
            b2: p("social.b2")?,
        })
    }

    pub fn encode(&self, tape: &mut Tape, v: &BinaryFollowVector) -> Result<Var> {
        if v.len() != self.in_dim {
            return Err(Error::dims("follow vector length", self.in_dim, v.len()));
        }
        let x = tape.gather_sum(self.w1, &v.active());
        let b1 = tape.param(self.b1);
        let h = tape.add(x, b1);
        let h = tape.tanh(h);
        let w2 = tape.param(self.w2);
        let b2 = tape.param(self.b2);
        let out = tape.matmul(h, w2);
        Ok(tape.add(out, b2))
    }

    pub fn encode_values(&self, store: &ParamStore, v: &BinaryFollowVector) -> Result<Vec<f64>> {
        let mut tape = Tape::new(store);
        let r = self.encode(&mut tape, v)?;
        Ok(tape.value(r).data.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::seeded_rng;

    #[test]
    fn zero_input_zero_bias_gives_zero() {
        let mut store = ParamStore::new();
        let enc = SocialEncoder::register(&mut store, &mut seeded_rng(0), 7, 5, 3);
        let r = enc
            .encode_values(&store, &BinaryFollowVector::zeros(7))
            .unwrap();
        assert_eq!(r, vec![0.0; 3]);
    }

    #[test]
    fn matches_dense_product() {
        let mut store = ParamStore::new();
        let enc = SocialEncoder::register(&mut store, &mut seeded_rng(1), 4, 3, 2);
        let bits = vec![true, false, true, true];
        let r = enc
            .encode_values(&store, &BinaryFollowVector::from_bits(bits.clone()))
            .unwrap();
        let x = Matrix::row_vector(bits.iter().map(|&b| b as u8 as f64).collect());
        let mut h = x.matmul(store.get(enc.w1));
        h.data.iter_mut().for_each(|v| *v = v.tanh());
        let expect = h.matmul(store.get(enc.w2));
        for (a, b) in r.iter().zip(&expect.data) {
            assert!((a - b).abs() < 1e-12);
        }
        let again = enc
            .encode_values(&store, &BinaryFollowVector::from_bits(bits))
            .unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn rejects_wrong_length() {
        let mut store = ParamStore::new();
        let enc = SocialEncoder::register(&mut store, &mut seeded_rng(2), 4, 3, 2);
        assert!(matches!(
            enc.encode_values(&store, &BinaryFollowVector::zeros(5)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
