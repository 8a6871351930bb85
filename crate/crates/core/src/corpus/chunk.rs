//! Sliding-window token chunking.

use super::normalize::{heading_text, is_heading};
use super::{CorpusError, PolicyChunk, PolicyDocument};

/// Window geometry for chunking. Defaults to 512-token windows overlapping
/// by 50 tokens.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ChunkParams {
    pub chunk_size: usize,
    pub overlap: usize,
}

impl Default for ChunkParams {
    fn default() -> Self {
        Self {
            chunk_size: 512,
            overlap: 50,
        }
    }
}

impl ChunkParams {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.chunk_size == 0 || self.overlap >= self.chunk_size {
            return Err(CorpusError::InvalidChunkParams {
                chunk_size: self.chunk_size,
                overlap: self.overlap,
            });
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.chunk_size - self.overlap
    }
}

/// Split a document into overlapping token windows.
///
/// Window `i` starts at token `i * (chunk_size - overlap)`. A window is
/// emitted only if it contributes at least one token not covered by an
/// earlier window, so a document of exactly `chunk_size` tokens yields a
/// single chunk. Every chunk records its token offsets and the nearest
/// preceding heading.
pub fn chunk_document(
    doc: &PolicyDocument,
    params: ChunkParams,
) -> Result<Vec<PolicyChunk>, CorpusError> {
    params.validate()?;
    let tokens: Vec<&str> = doc.body.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(CorpusError::EmptyDocument);
    }

    let headings = heading_offsets(&doc.body);
    let stride = params.stride();
    let mut chunks = Vec::new();
    let mut covered = 0usize;
    let mut window = 0usize;
    loop {
        let start = window * stride;
        if start >= tokens.len() {
            break;
        }
        let end = (start + params.chunk_size).min(tokens.len());
        if end > covered {
            let index = chunks.len();
            chunks.push(PolicyChunk {
                chunk_id: format!("{}:{}", doc.doc_id, index),
                doc_id: doc.doc_id.clone(),
                index,
                token_start: start,
                token_end: end,
                text: tokens[start..end].join(" "),
                section_heading: nearest_heading(&headings, start),
                page_hint: None,
            });
            covered = end;
        }
        if covered == tokens.len() {
            break;
        }
        window += 1;
    }
    Ok(chunks)
}

/// (token offset, heading text) for every heading line of the body.
fn heading_offsets(body: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut offset = 0usize;
    for line in body.lines() {
        if is_heading(line) {
            out.push((offset, heading_text(line)));
        }
        offset += line.split_whitespace().count();
    }
    out
}

fn nearest_heading(headings: &[(usize, String)], token_start: usize) -> Option<String> {
    headings
        .iter()
        .take_while(|(off, _)| *off <= token_start)
        .last()
        .map(|(_, h)| h.clone())
}
