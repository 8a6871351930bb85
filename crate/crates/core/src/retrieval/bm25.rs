//! Okapi BM25 scoring over chunks, and the document-level variant.
//!
//! Parameters are the standard k1 = 1.2, b = 0.75. IDF uses the
//! `ln((N - df + 0.5)/(df + 0.5) + 1)` form, which is strictly positive, so
//! any chunk containing a query term scores above zero. Zero-score chunks
//! are dropped rather than padded: feeding text with no query term to the
//! coverage judge helps nobody.

use super::{rank_and_truncate, EvidenceItem, EvidenceSet, RetrievalError, RetrievalStrategy};
use crate::corpus::CorpusIndex;
use crate::text::lexical_terms;

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;

/// BM25 score of every chunk for `query`; indices align with `index.chunks`.
fn bm25_scores(index: &CorpusIndex, query: &str) -> Vec<f64> {
    let n_chunks = index.chunks.len();
    let mut scores = vec![0.0f64; n_chunks];
    let avgdl = index.lexical.average_chunk_length();
    if avgdl == 0.0 {
        return scores;
    }
    let n = n_chunks as f64;

    let mut query_terms = lexical_terms(query);
    query_terms.sort();
    query_terms.dedup();

    for term in &query_terms {
        let df = match index.lexical.doc_freq.get(term) {
            Some(df) => *df as f64,
            None => continue,
        };
        let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
        for (i, chunk_terms) in index.lexical.chunk_terms.iter().enumerate() {
            if let Some(tf) = chunk_terms.get(term) {
                let tf = *tf as f64;
                let dl = index.lexical.chunk_lengths[i] as f64;
                let tf_norm = (tf * (BM25_K1 + 1.0)) / (tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / avgdl));
                scores[i] += idf * tf_norm;
            }
        }
    }
    scores
}

/// Top-k chunks by BM25. Ties break by (doc_id, chunk index) ascending.
pub fn retrieve_lexical(
    index: &CorpusIndex,
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

    let scores = bm25_scores(index, query);
    let scored: Vec<(f64, String, usize, &crate::corpus::PolicyChunk)> = index
        .chunks
        .iter()
        .enumerate()
        .filter(|(i, _)| scores[*i] > 0.0)
        .map(|(i, chunk)| (scores[i], chunk.doc_id.clone(), chunk.index, chunk))
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
        strategy: RetrievalStrategy::Lexical,
        k,
    })
}

/// Document-level retrieval: each document scores as the max BM25 score over
/// its chunks, and the returned text is the best chunk with one neighbouring
/// chunk on each side. At most one item per document.
pub fn retrieve_documents(
    index: &CorpusIndex,
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

    let scores = bm25_scores(index, query);
    // doc_id -> (best score, position of best chunk in index.chunks)
    let mut best: std::collections::BTreeMap<&str, (f64, usize)> = std::collections::BTreeMap::new();
    for (i, chunk) in index.chunks.iter().enumerate() {
        let entry = best.entry(chunk.doc_id.as_str()).or_insert((f64::NEG_INFINITY, i));
        if scores[i] > entry.0 {
            *entry = (scores[i], i);
        }
    }

    let scored: Vec<(f64, String, usize, usize)> = best
        .into_iter()
        .filter(|(_, (score, _))| *score > 0.0)
        .map(|(doc_id, (score, pos))| (score, doc_id.to_string(), index.chunks[pos].index, pos))
        .collect();

    let items = rank_and_truncate(scored, k)
        .into_iter()
        .map(|(score, pos)| {
            let chunk = &index.chunks[pos];
            EvidenceItem {
                chunk_id: chunk.chunk_id.clone(),
                score,
                text: neighborhood_text(index, pos),
                doc_id: chunk.doc_id.clone(),
                section_heading: chunk.section_heading.clone(),
            }
        })
        .collect();

    Ok(EvidenceSet {
        control_id: control_id.to_string(),
        items,
        strategy: RetrievalStrategy::Document,
        k,
    })
}

/// Best chunk ± 1 neighbour within the same document, concatenated.
fn neighborhood_text(index: &CorpusIndex, pos: usize) -> String {
    let chunk = &index.chunks[pos];
    let mut parts: Vec<&str> = Vec::with_capacity(3);
    if pos > 0 {
        let prev = &index.chunks[pos - 1];
        if prev.doc_id == chunk.doc_id {
            parts.push(&prev.text);
        }
    }
    parts.push(&chunk.text);
    if pos + 1 < index.chunks.len() {
        let next = &index.chunks[pos + 1];
        if next.doc_id == chunk.doc_id {
            parts.push(&next.text);
        }
    }
    parts.join(" ")
}
