//! Dense retrieval by exhaustive cosine scan.

use super::{rank_and_truncate, EvidenceItem, EvidenceSet, RetrievalError, RetrievalStrategy};
use crate::corpus::CorpusIndex;
use crate::embedding::EmbeddingProvider;

pub(crate) fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let mut dot = 0.0f64;
    let mut norm_a = 0.0f64;
    let mut norm_b = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        dot += (*x as f64) * (*y as f64);
        norm_a += (*x as f64) * (*x as f64);
        norm_b += (*y as f64) * (*y as f64);
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    dot / (norm_a.sqrt() * norm_b.sqrt())
}

/// Top-k chunks by cosine similarity between the embedded query and every
/// chunk vector. The provider must match the embedder the index was built
/// with, in both identifier and dimension.
pub fn retrieve_dense(
    index: &CorpusIndex,
    embed: &dyn EmbeddingProvider,
    control_id: &str,
    query: &str,
    k: usize,
) -> Result<EvidenceSet, RetrievalError> {
    if k == 0 {
        return Err(RetrievalError::InvalidK);
    }
    if index.is_empty() {
        return Err(RetrievalError::EmptyIndex);
    }
    let dense = index.dense.as_ref().ok_or(RetrievalError::NoDenseVectors)?;
    if dense.embedder_id != embed.embedder_id() || dense.dimension != embed.dimension() {
        return Err(RetrievalError::EmbedderMismatch {
            index_embedder: dense.embedder_id.clone(),
            index_dim: dense.dimension,
            query_embedder: embed.embedder_id(),
            query_dim: embed.dimension(),
        });
    }

    let query_vector = embed.embed(query)?;
    let scored: Vec<(f64, String, usize, &crate::corpus::PolicyChunk)> = index
        .chunks
        .iter()
        .enumerate()
        .map(|(i, chunk)| {
            let similarity = cosine(&query_vector, dense.row(i));
            (similarity, chunk.doc_id.clone(), chunk.index, chunk)
        })
        .filter(|(s, _, _, _)| s.is_finite())
        .collect();

    let items = rank_and_truncate(scored, k)
        .into_iter()
        .map(|(score, chunk)| EvidenceItem {
            chunk_id: chunk.chunk_id.clone(),
            score,
            text: chunk.text.clone(),
            doc_id: chunk.doc_id.clone(),
            section_heading: chunk.section_heading.clone(),
        })
        .collect();

    Ok(EvidenceSet {
        control_id: control_id.to_string(),
        items,
        strategy: RetrievalStrategy::Dense,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_corpus_index, ChunkParams, PolicyDocument};
    use crate::embedding::HashEmbedder;

    fn docs(bodies: &[&str]) -> Vec<PolicyDocument> {
        bodies
            .iter()
            .enumerate()
            .map(|(i, body)| PolicyDocument {
                doc_id: format!("doc{i}"),
                title: format!("doc{i}"),
                body: body.to_string(),
                source_path: String::new(),
                word_count: body.split_whitespace().count(),
            })
            .collect()
    }

    #[test]
    fn identical_text_scores_one() {
        let embedder = HashEmbedder::new(32);
        let index = build_corpus_index(
            &docs(&["account review schedule", "visitor badge procedure"]),
            ChunkParams::default(),
            Some(&embedder),
        )
        .unwrap();
        let result =
            retrieve_dense(&index, &embedder, "AC-2", "account review schedule", 2).unwrap();
        assert_eq!(result.items[0].doc_id, "doc0");
        assert!((result.items[0].score - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cosine_of_orthogonal_vectors_is_zero() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn ranking_matches_exhaustive_cosine_oracle() {
        let embedder = HashEmbedder::new(8);
        let bodies = [
            "access review records",
            "incident escalation chain",
            "encryption key custody",
            "visitor escort rules",
            "backup restoration drills",
            "password rotation policy",
        ];
        let index =
            build_corpus_index(&docs(&bodies), ChunkParams::default(), Some(&embedder)).unwrap();
        let query = "access review policy";
        let result = retrieve_dense(&index, &embedder, "AC-2", query, 6).unwrap();

        let query_vector = embedder.embed(query).unwrap();
        let dense = index.dense.as_ref().unwrap();
        let mut expected: Vec<(f64, String, usize)> = index
            .chunks
            .iter()
            .enumerate()
            .map(|(i, c)| (cosine(&query_vector, dense.row(i)), c.doc_id.clone(), c.index))
            .collect();
        expected.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)).then_with(|| a.2.cmp(&b.2)));
        let want: Vec<String> = expected.into_iter().map(|(_, d, _)| d).collect();
        let got: Vec<String> = result.items.iter().map(|i| i.doc_id.clone()).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn mismatched_embedder_is_rejected() {
        let build_embedder = HashEmbedder::new(8);
        let query_embedder = HashEmbedder::new(16);
        let index = build_corpus_index(
            &docs(&["some policy text"]),
            ChunkParams::default(),
            Some(&build_embedder),
        )
        .unwrap();
        assert!(matches!(
            retrieve_dense(&index, &query_embedder, "AC-2", "query", 1),
            Err(RetrievalError::EmbedderMismatch { .. })
        ));
    }

    #[test]
    fn missing_vectors_is_rejected() {
        let embedder = HashEmbedder::new(8);
        let index =
            build_corpus_index(&docs(&["some policy text"]), ChunkParams::default(), None).unwrap();
        assert!(matches!(
            retrieve_dense(&index, &embedder, "AC-2", "query", 1),
            Err(RetrievalError::NoDenseVectors)
        ));
    }
}
