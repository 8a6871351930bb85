//! Policy corpus: document normalization, overlapping token chunking, and
//! the searchable index.
//!
//! Documents are ingested as plain text or markdown. Normalization strips
//! page-layout artifacts (page numbers, repeated header/footer lines, broken
//! line wraps) while preserving headings, lists, and paragraph boundaries.
//! The cleaned text is split into fixed-size windows of whitespace tokens
//! with a configurable overlap, and the windows are indexed for lexical and
//! (optionally) dense retrieval.

mod chunk;
mod index;
mod normalize;

pub use chunk::{chunk_document, ChunkParams};
pub use index::{build_corpus_index, CorpusIndex, DenseVectors, LexicalStats};
pub use normalize::normalize_text;

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

use crate::text::whitespace_token_count;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("document is empty after normalization")]
    EmptyDocument,
    #[error("invalid chunk parameters: chunk_size={chunk_size}, overlap={overlap} (require 0 <= overlap < chunk_size)")]
    InvalidChunkParams { chunk_size: usize, overlap: usize },
    #[error("duplicate document id: {0}")]
    DuplicateDocument(String),
    #[error("embedding backend failed on chunk {chunk_id}: {message}")]
    EmbeddingBackend { chunk_id: String, message: String },
    #[error("corpus index is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A normalized policy document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolicyDocument {
    pub doc_id: String,
    pub title: String,
    /// Normalized body text (see [`normalize_text`]).
    pub body: String,
    pub source_path: String,
    /// Whitespace-token count of `body`.
    pub word_count: usize,
}

impl PolicyDocument {
    /// Normalize raw text and build a document from it.
    pub fn from_raw(
        doc_id: impl Into<String>,
        title: impl Into<String>,
        raw: &str,
        source_path: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let body = normalize_text(raw)?;
        let word_count = whitespace_token_count(&body);
        Ok(Self {
            doc_id: doc_id.into(),
            title: title.into(),
            body,
            source_path: source_path.into(),
            word_count,
        })
    }
}

/// One contiguous token window of a policy document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolicyChunk {
    /// `"{doc_id}:{index}"`.
    pub chunk_id: String,
    pub doc_id: String,
    /// Ordinal of this chunk within its document, starting at 0.
    pub index: usize,
    /// Token offset of the first token (inclusive).
    pub token_start: usize,
    /// Token offset past the last token (exclusive).
    pub token_end: usize,
    pub text: String,
    /// Nearest heading line at or before `token_start`, when one exists.
    pub section_heading: Option<String>,
    pub page_hint: Option<usize>,
}

/// Read every `.txt`/`.md` file under `dir` into normalized documents.
///
/// `doc_id` is the path relative to `dir` with `/` separators; the title is
/// the first heading of the document, falling back to the file stem. Files
/// that normalize to nothing are rejected.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<PolicyDocument>, CorpusError> {
    let mut paths: Vec<_> = walkdir::WalkDir::new(dir)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| {
            matches!(
                p.extension().and_then(|s| s.to_str()),
                Some("txt") | Some("md") | Some("markdown")
            )
        })
        .collect();
    paths.sort();

    let mut docs = Vec::with_capacity(paths.len());
    for path in paths {
        let raw = std::fs::read_to_string(&path)?;
        let rel = path
            .strip_prefix(dir)
            .unwrap_or(&path)
            .to_string_lossy()
            .replace(std::path::MAIN_SEPARATOR, "/");
        let body = normalize_text(&raw)?;
        let title = body
            .lines()
            .find(|l| normalize::is_heading(l))
            .map(|l| normalize::heading_text(l))
            .unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| rel.clone())
            });
        let word_count = whitespace_token_count(&body);
        docs.push(PolicyDocument {
            doc_id: rel,
            title,
            body,
            source_path: path.to_string_lossy().into_owned(),
            word_count,
        });
    }
    Ok(docs)
}
