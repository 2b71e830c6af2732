use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Source of per-author cultural context vectors.
pub trait CulturalProvider: Send + Sync {
    fn dim(&self) -> usize;

    /// Must be deterministic per author and defined for unknown authors.
    fn embed(&self, author_id: &str) -> Result<Vec<f64>>;
}

/// Query `provider`, attaching the author to any failure and checking the
/// declared dimension.
pub fn encode_cultural(author_id: &str, provider: &dyn CulturalProvider) -> Result<Vec<f64>> {
    let wrap = |message: String| Error::Provider {
        author: author_id.to_string(),
        message,
    };
    let q = provider.embed(author_id).map_err(|e| match e {
        Error::Provider { .. } => e,
        other => wrap(other.to_string()),
    })?;
    if q.len() != provider.dim() {
        return Err(wrap(format!(
            "returned {} values, declared {}",
            q.len(),
            provider.dim()
        )));
    }
    if q.iter().any(|x| !x.is_finite()) {
        return Err(wrap("returned a non-finite value".into()));
    }
    Ok(q)
}

fn keyed_rng(seed: u64, domain: &str, key: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(domain.as_bytes());
    h.update([0u8]);
    h.update(key.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn uniform_vec(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Hash-seeded pseudo-random vectors in `[-1, 1]`. When constructed with a
/// known-author set, everyone outside it maps to one fixed vector.
#[derive(Debug, Clone)]
pub struct StubProvider {
    dim: usize,
    seed: u64,
    known: Option<BTreeSet<String>>,
}

impl StubProvider {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            seed,
            known: None,
        }
    }

    pub fn with_known(dim: usize, seed: u64, known: impl IntoIterator<Item = String>) -> Self {
        Self {
            dim,
            seed,
            known: Some(known.into_iter().collect()),
        }
    }

    pub fn unknown_vector(&self) -> Vec<f64> {
        uniform_vec(&mut keyed_rng(self.seed, "stub-unknown", ""), self.dim)
    }
}

impl CulturalProvider for StubProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, author_id: &str) -> Result<Vec<f64>> {
        match &self.known {
            Some(k) if !k.contains(author_id) => Ok(self.unknown_vector()),
            _ => Ok(uniform_vec(
                &mut keyed_rng(self.seed, "stub", author_id),
                self.dim,
            )),
        }
    }
}

/// Vectors that carry an author's planted community: a per-community
/// centroid plus per-author noise. Authors outside every community share a
/// mainstream centroid; unknown authors get the zero vector.
#[derive(Debug, Clone)]
pub struct SynthProvider {
    dim: usize,
    seed: u64,
    communities: BTreeMap<String, Option<usize>>,
    centroids: Vec<Vec<f64>>,
}

const CENTROID_WEIGHT: f64 = 2.5;
const NOISE_WEIGHT: f64 = 0.3;

impl SynthProvider {
    pub fn new(dim: usize, seed: u64, communities: BTreeMap<String, Option<usize>>) -> Self {
        let n = communities
            .values()
            .flatten()
            .map(|c| c + 1)
            .max()
            .unwrap_or(0);
        // last slot is the mainstream centroid
        let centroids = (0..=n)
            .map(|c| uniform_vec(&mut keyed_rng(seed, "synth-centroid", &c.to_string()), dim))
            .collect();
        Self {
            dim,
            seed,
            communities,
            centroids,
        }
    }
}

impl CulturalProvider for SynthProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, author_id: &str) -> Result<Vec<f64>> {
        let Some(community) = self.communities.get(author_id) else {
            return Ok(vec![0.0; self.dim]);
        };
        let centroid = &self.centroids[community.unwrap_or(self.centroids.len() - 1)];
        let noise = uniform_vec(
            &mut keyed_rng(self.seed, "synth-author", author_id),
            self.dim,
        );
        Ok(centroid
            .iter()
            .zip(noise)
            .map(|(c, e)| CENTROID_WEIGHT * c + NOISE_WEIGHT * e)
            .collect())
    }
}
