//! Pluggable text embedding.
//!
//! Index construction and dense retrieval only depend on the
//! [`EmbeddingProvider`] trait, so a model-backed embedder (a sentence
//! transformer served over HTTP, for instance) can be dropped in without
//! touching either. The built-in [`HashEmbedder`] is a deterministic
//! feature-hashing embedder that needs no model or network and keeps runs
//! reproducible.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding backend failure: {0}")]
    Backend(String),
}

pub trait EmbeddingProvider: Sync {
    /// Stable identifier recorded in the index; dense retrieval refuses to
    /// mix vectors from different embedders.
    fn embedder_id(&self) -> String;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f32>, EmbeddingError>;
}

/// Feature-hashing bag-of-words embedder with signed buckets and L2
/// normalization.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
}

impl HashEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        Self { dimension }
    }
}

// FNV-1a; fixed here so vectors never depend on the std hasher's seed.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl EmbeddingProvider for HashEmbedder {
    fn embedder_id(&self) -> String {
        format!("hash-{}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>, EmbeddingError> {
        let mut vector = vec![0.0f32; self.dimension];
        for term in crate::text::lexical_terms(text) {
            let h = fnv1a(term.as_bytes());
            let bucket = (h % self.dimension as u64) as usize;
            let sign = if (h >> 63) == 0 { 1.0 } else { -1.0 };
            vector[bucket] += sign;
        }
        let norm = vector.iter().map(|v| v * v).sum::<f32>().sqrt();
        if norm > 0.0 {
            for v in &mut vector {
                *v /= norm;
            }
        }
        Ok(vector)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_normalized() {
        let embedder = HashEmbedder::new(32);
        let a = embedder.embed("access control reviews").unwrap();
        let b = embedder.embed("access control reviews").unwrap();
        assert_eq!(a, b);
        let norm: f32 = a.iter().map(|v| v * v).sum::<f32>().sqrt();
        assert!((norm - 1.0).abs() < 1e-5);
    }

    #[test]
    fn different_texts_differ() {
        let embedder = HashEmbedder::new(64);
        let a = embedder.embed("incident response escalation").unwrap();
        let b = embedder.embed("cryptographic key rotation").unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn empty_text_is_zero_vector() {
        let embedder = HashEmbedder::new(8);
        let v = embedder.embed("").unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
    }
}
