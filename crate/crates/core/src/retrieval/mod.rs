//! Candidate-evidence retrieval over the corpus index.
//!
//! Four strategies are exposed: BM25 lexical ranking, exhaustive-scan dense
//! cosine ranking, dense ranking re-scored by a lexical-overlap re-ranker,
//! and document-level ranking (max chunk score per document). The corpus is
//! hundreds of chunks, so every scan is exhaustive; there is no approximate
//! index to maintain.

mod bm25;
mod dense;
mod metrics;

pub use bm25::{retrieve_documents, retrieve_lexical};
pub use dense::retrieve_dense;
pub use metrics::{
    load_judgments, precision_at_k, retrieval_metrics, top1_sufficiency, RelevanceJudgment,
    RetrievalMetrics,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::content_words;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("corpus index is empty")]
    EmptyIndex,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("index has no dense vectors")]
    NoDenseVectors,
    #[error("embedder mismatch: index built with '{index_embedder}' ({index_dim} dims), query uses '{query_embedder}' ({query_dim} dims)")]
    EmbedderMismatch {
        index_embedder: String,
        index_dim: usize,
        query_embedder: String,
        query_dim: usize,
    },
    #[error("embedding failed: {0}")]
    Embedding(#[from] crate::embedding::EmbeddingError),
    #[error("invalid judgment for control {control_id}, chunk {chunk_id}: sufficient implies relevant")]
    SufficientNotRelevant {
        control_id: String,
        chunk_id: String,
    },
    #[error("judgments file: {0}")]
    JudgmentsFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RetrievalStrategy {
    #[serde(rename = "LEXICAL")]
    Lexical,
    #[serde(rename = "DENSE")]
    Dense,
    #[serde(rename = "DENSE_RERANKED")]
    DenseReranked,
    #[serde(rename = "DOCUMENT")]
    Document,
}

impl std::fmt::Display for RetrievalStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Lexical => "LEXICAL",
            Self::Dense => "DENSE",
            Self::DenseReranked => "DENSE_RERANKED",
            Self::Document => "DOCUMENT",
        };
        f.write_str(s)
    }
}

/// One retrieved excerpt.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvidenceItem {
    pub chunk_id: String,
    pub score: f64,
    pub text: String,
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section_heading: Option<String>,
}

/// Ranked evidence for one control: sorted by score descending, ties broken
/// by (doc_id, chunk index) ascending, at most `k` items, finite scores.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvidenceSet {
    pub control_id: String,
    pub items: Vec<EvidenceItem>,
    pub strategy: RetrievalStrategy,
    pub k: usize,
}

impl EvidenceSet {
    pub fn empty(control_id: impl Into<String>, strategy: RetrievalStrategy, k: usize) -> Self {
        Self {
            control_id: control_id.into(),
            items: Vec::new(),
            strategy,
            k,
        }
    }

    /// All evidence texts concatenated, for grounding checks.
    pub fn concatenated_text(&self) -> String {
        self.items
            .iter()
            .map(|i| i.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Sort candidate (score, doc_id, chunk index, payload) rows by descending
/// score with the documented tie-break, and truncate to `k`.
fn rank_and_truncate<T>(mut scored: Vec<(f64, String, usize, T)>, k: usize) -> Vec<(f64, T)> {
    scored.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    scored.truncate(k);
    scored.into_iter().map(|(score, _, _, item)| (score, item)).collect()
}

/// Re-score candidates by content-word overlap with the query and stable-sort
/// by the new score (ties keep the prior rank). The overlap is
/// `|query ∩ chunk| / |query|` over distinct content words, stop-words
/// removed. A deterministic stand-in for a learned cross-encoder; the
/// strategy marker records that re-ranking happened.
pub fn rerank(candidates: &EvidenceSet, query: &str) -> EvidenceSet {
    let query_words = content_words(query);
    let mut items: Vec<EvidenceItem> = candidates
        .items
        .iter()
        .map(|item| {
            let overlap = if query_words.is_empty() {
                0.0
            } else {
                let chunk_words = content_words(&item.text);
                let shared = query_words.intersection(&chunk_words).count();
                shared as f64 / query_words.len() as f64
            };
            EvidenceItem {
                score: overlap,
                ..item.clone()
            }
        })
        .collect();
    items.sort_by(|a, b| b.score.total_cmp(&a.score));
    EvidenceSet {
        control_id: candidates.control_id.clone(),
        items,
        strategy: RetrievalStrategy::DenseReranked,
        k: candidates.k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(chunk_id: &str, text: &str) -> EvidenceItem {
        EvidenceItem {
            chunk_id: chunk_id.into(),
            score: 0.5,
            text: text.into(),
            doc_id: "d".into(),
            section_heading: None,
        }
    }

    #[test]
    fn rerank_puts_full_overlap_first() {
        let candidates = EvidenceSet {
            control_id: "AC-2".into(),
            items: vec![
                item("d:0", "unrelated words entirely"),
                item("d:1", "account review frequency defined here"),
            ],
            strategy: RetrievalStrategy::Dense,
            k: 5,
        };
        let reranked = rerank(&candidates, "account review frequency");
        assert_eq!(reranked.strategy, RetrievalStrategy::DenseReranked);
        assert_eq!(reranked.items[0].chunk_id, "d:1");
        assert!((reranked.items[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rerank_zero_overlap_preserves_order() {
        let candidates = EvidenceSet {
            control_id: "AC-2".into(),
            items: vec![item("d:0", "alpha"), item("d:1", "beta"), item("d:2", "gamma")],
            strategy: RetrievalStrategy::Dense,
            k: 5,
        };
        let reranked = rerank(&candidates, "zeta omega");
        let ids: Vec<&str> = reranked.items.iter().map(|i| i.chunk_id.as_str()).collect();
        assert_eq!(ids, vec!["d:0", "d:1", "d:2"]);
        assert!(reranked.items.iter().all(|i| i.score == 0.0));
    }

    #[test]
    fn rerank_matches_hand_computed_ratios() {
        // query content words: {account, review, owner, frequency}
        let candidates = EvidenceSet {
            control_id: "AC-2".into(),
            items: vec![
                item("d:0", "review owner"),                      // 2/4
                item("d:1", "account review owner frequency"),    // 4/4
                item("d:2", "nothing shared"),                    // 0
                item("d:3", "account"),                           // 1/4
            ],
            strategy: RetrievalStrategy::Dense,
            k: 5,
        };
        let reranked = rerank(&candidates, "account review owner frequency");
        let got: Vec<(&str, f64)> = reranked
            .items
            .iter()
            .map(|i| (i.chunk_id.as_str(), i.score))
            .collect();
        assert_eq!(
            got,
            vec![("d:1", 1.0), ("d:0", 0.5), ("d:3", 0.25), ("d:2", 0.0)]
        );
    }
}
