//! The searchable corpus store: chunk metadata, lexical statistics, and
//! optional dense vectors, with one-directory persistence.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{chunk_document, ChunkParams, CorpusError, PolicyChunk, PolicyDocument};
use crate::embedding::EmbeddingProvider;
use crate::text::lexical_terms;

/// Per-term document frequencies plus per-chunk term frequencies and
/// lengths; everything needed to score BM25 without re-reading the texts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct LexicalStats {
    pub doc_freq: BTreeMap<String, u32>,
    pub chunk_terms: Vec<BTreeMap<String, u32>>,
    pub chunk_lengths: Vec<u32>,
    pub total_terms: u64,
}

impl LexicalStats {
    fn from_chunks(chunks: &[PolicyChunk]) -> Self {
        let mut stats = LexicalStats::default();
        for chunk in chunks {
            let mut freqs: BTreeMap<String, u32> = BTreeMap::new();
            let terms = lexical_terms(&chunk.text);
            stats.chunk_lengths.push(terms.len() as u32);
            stats.total_terms += terms.len() as u64;
            for term in terms {
                *freqs.entry(term).or_insert(0) += 1;
            }
            for term in freqs.keys() {
                *stats.doc_freq.entry(term.clone()).or_insert(0) += 1;
            }
            stats.chunk_terms.push(freqs);
        }
        stats
    }

    pub fn average_chunk_length(&self) -> f64 {
        if self.chunk_lengths.is_empty() {
            0.0
        } else {
            self.total_terms as f64 / self.chunk_lengths.len() as f64
        }
    }
}

/// Row-major chunk embeddings, one row per chunk.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVectors {
    pub dimension: usize,
    pub embedder_id: String,
    data: Vec<f32>,
}

impl DenseVectors {
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn count(&self) -> usize {
        if self.dimension == 0 {
            0
        } else {
            self.data.len() / self.dimension
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct VectorsMeta {
    dimension: usize,
    count: usize,
    embedder_id: String,
}

/// Immutable searchable corpus. Build once, read from any number of threads.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusIndex {
    pub chunks: Vec<PolicyChunk>,
    pub lexical: LexicalStats,
    pub dense: Option<DenseVectors>,
}

/// Chunk all documents, compute lexical statistics, and (when a provider is
/// given) embed every chunk once.
pub fn build_corpus_index(
    docs: &[PolicyDocument],
    params: ChunkParams,
    embed: Option<&dyn EmbeddingProvider>,
) -> Result<CorpusIndex, CorpusError> {
    params.validate()?;
    let mut seen = std::collections::HashSet::new();
    for doc in docs {
        if !seen.insert(doc.doc_id.as_str()) {
            return Err(CorpusError::DuplicateDocument(doc.doc_id.clone()));
        }
    }

    let mut chunks = Vec::new();
    for doc in docs {
        chunks.extend(chunk_document(doc, params)?);
    }
    let lexical = LexicalStats::from_chunks(&chunks);

    let dense = match embed {
        Some(provider) => {
            let dimension = provider.dimension();
            let mut data = Vec::with_capacity(chunks.len() * dimension);
            for chunk in &chunks {
                let vector = provider.embed(&chunk.text).map_err(|e| {
                    CorpusError::EmbeddingBackend {
                        chunk_id: chunk.chunk_id.clone(),
                        message: e.to_string(),
                    }
                })?;
                if vector.len() != dimension {
                    return Err(CorpusError::EmbeddingBackend {
                        chunk_id: chunk.chunk_id.clone(),
                        message: format!(
                            "provider returned dimension {} instead of {}",
                            vector.len(),
                            dimension
                        ),
                    });
                }
                data.extend_from_slice(&vector);
            }
            Some(DenseVectors {
                dimension,
                embedder_id: provider.embedder_id(),
                data,
            })
        }
        None => None,
    };

    Ok(CorpusIndex {
        chunks,
        lexical,
        dense,
    })
}

impl CorpusIndex {
    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    /// Reconstruct a document's token sequence from its chunks, dropping the
    /// overlapped token spans.
    pub fn document_tokens(&self, doc_id: &str) -> Vec<String> {
        let mut chunks: Vec<&PolicyChunk> =
            self.chunks.iter().filter(|c| c.doc_id == doc_id).collect();
        chunks.sort_by_key(|c| c.index);
        let mut tokens = Vec::new();
        let mut covered = 0usize;
        for chunk in chunks {
            let chunk_tokens: Vec<&str> = chunk.text.split_whitespace().collect();
            if chunk.token_end > covered {
                let skip = covered.saturating_sub(chunk.token_start);
                tokens.extend(chunk_tokens[skip..].iter().map(|t| t.to_string()));
                covered = chunk.token_end;
            }
        }
        tokens
    }

    /// Document ids in first-chunk order.
    pub fn doc_ids(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for chunk in &self.chunks {
            if seen.insert(chunk.doc_id.as_str()) {
                out.push(chunk.doc_id.clone());
            }
        }
        out
    }

    /// The first `max_tokens` tokens of the corpus, documents concatenated
    /// in index order. Used by pipelines that skip retrieval.
    pub fn corpus_prefix(&self, max_tokens: usize) -> String {
        let mut tokens: Vec<String> = Vec::with_capacity(max_tokens.min(4096));
        for doc_id in self.doc_ids() {
            for token in self.document_tokens(&doc_id) {
                if tokens.len() >= max_tokens {
                    return tokens.join(" ");
                }
                tokens.push(token);
            }
        }
        tokens.join(" ")
    }

    /// Persist as a directory: `chunks.jsonl`, `lexical.json`, and, when
    /// vectors exist, `vectors.f32` (row-major little-endian) plus
    /// `vectors.meta.json`.
    pub fn save(&self, dir: &Path) -> Result<(), CorpusError> {
        std::fs::create_dir_all(dir)?;
        let mut chunk_file = BufWriter::new(std::fs::File::create(dir.join("chunks.jsonl"))?);
        for chunk in &self.chunks {
            serde_json::to_writer(&mut chunk_file, chunk)?;
            chunk_file.write_all(b"\n")?;
        }
        chunk_file.flush()?;

        std::fs::write(
            dir.join("lexical.json"),
            serde_json::to_string_pretty(&self.lexical)?,
        )?;

        if let Some(dense) = &self.dense {
            let mut vec_file = BufWriter::new(std::fs::File::create(dir.join("vectors.f32"))?);
            for value in &dense.data {
                vec_file.write_all(&value.to_le_bytes())?;
            }
            vec_file.flush()?;
            let meta = VectorsMeta {
                dimension: dense.dimension,
                count: dense.count(),
                embedder_id: dense.embedder_id.clone(),
            };
            std::fs::write(
                dir.join("vectors.meta.json"),
                serde_json::to_string_pretty(&meta)?,
            )?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, CorpusError> {
        let chunk_file = BufReader::new(std::fs::File::open(dir.join("chunks.jsonl"))?);
        let mut chunks = Vec::new();
        for line in chunk_file.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            chunks.push(serde_json::from_str(&line)?);
        }
        let lexical: LexicalStats =
            serde_json::from_str(&std::fs::read_to_string(dir.join("lexical.json"))?)?;
        if lexical.chunk_terms.len() != chunks.len() {
            return Err(CorpusError::Corrupt(format!(
                "lexical stats cover {} chunks but index has {}",
                lexical.chunk_terms.len(),
                chunks.len()
            )));
        }

        let meta_path = dir.join("vectors.meta.json");
        let dense = if meta_path.exists() {
            let meta: VectorsMeta = serde_json::from_str(&std::fs::read_to_string(meta_path)?)?;
            let mut bytes = Vec::new();
            std::fs::File::open(dir.join("vectors.f32"))?.read_to_end(&mut bytes)?;
            let expected = meta.count * meta.dimension * 4;
            if bytes.len() != expected || meta.count != chunks.len() {
                return Err(CorpusError::Corrupt(format!(
                    "vector file holds {} bytes for {} chunks; expected {} bytes for {} chunks",
                    bytes.len(),
                    meta.count,
                    expected,
                    chunks.len()
                )));
            }
            let data = bytes
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            Some(DenseVectors {
                dimension: meta.dimension,
                embedder_id: meta.embedder_id,
                data,
            })
        } else {
            None
        };

        Ok(Self {
            chunks,
            lexical,
            dense,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::HashEmbedder;

    fn doc(id: &str, n: usize) -> PolicyDocument {
        let body = (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        PolicyDocument {
            doc_id: id.into(),
            title: id.into(),
            word_count: n,
            body,
            source_path: String::new(),
        }
    }

    #[test]
    fn two_thousand_token_docs_give_six_chunks() {
        let docs = vec![doc("a", 1000), doc("b", 1000)];
        let index = build_corpus_index(&docs, ChunkParams::default(), None).unwrap();
        assert_eq!(index.chunks.len(), 6);
        assert!(index.dense.is_none());
    }

    #[test]
    fn stub_embedder_gives_one_vector_per_chunk() {
        let docs = vec![doc("a", 1000), doc("b", 1000)];
        let embedder = HashEmbedder::new(8);
        let index = build_corpus_index(&docs, ChunkParams::default(), Some(&embedder)).unwrap();
        let dense = index.dense.as_ref().unwrap();
        assert_eq!(dense.count(), 6);
        assert_eq!(dense.dimension, 8);
        assert_eq!(dense.row(3).len(), 8);
    }

    #[test]
    fn empty_doc_list_builds_empty_index() {
        let index = build_corpus_index(&[], ChunkParams::default(), None).unwrap();
        assert!(index.is_empty());
        assert_eq!(index.lexical.total_terms, 0);
    }

    #[test]
    fn duplicate_doc_id_is_rejected() {
        let docs = vec![doc("a", 10), doc("a", 20)];
        let err = build_corpus_index(&docs, ChunkParams::default(), None).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateDocument(id) if id == "a"));
    }

    #[test]
    fn save_load_round_trip() {
        let docs = vec![doc("a", 700), doc("b", 90)];
        let embedder = HashEmbedder::new(16);
        let index = build_corpus_index(&docs, ChunkParams::default(), Some(&embedder)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        index.save(dir.path()).unwrap();
        let loaded = CorpusIndex::load(dir.path()).unwrap();
        assert_eq!(index, loaded);
    }

    #[test]
    fn lexical_serialization_is_deterministic() {
        let docs = vec![doc("a", 600), doc("b", 300)];
        let a = build_corpus_index(&docs, ChunkParams::default(), None).unwrap();
        let b = build_corpus_index(&docs, ChunkParams::default(), None).unwrap();
        assert_eq!(
            serde_json::to_string(&a.lexical).unwrap(),
            serde_json::to_string(&b.lexical).unwrap()
        );
    }

    #[test]
    fn document_tokens_reconstruct_original() {
        let original = doc("a", 1234);
        let index = build_corpus_index(
            &[original.clone()],
            ChunkParams::default(),
            None,
        )
        .unwrap();
        let rebuilt = index.document_tokens("a");
        let expected: Vec<String> = original
            .body
            .split_whitespace()
            .map(|t| t.to_string())
            .collect();
        assert_eq!(rebuilt, expected);
    }

    #[test]
    fn corpus_prefix_caps_tokens() {
        let docs = vec![doc("a", 50), doc("b", 50)];
        let index = build_corpus_index(&docs, ChunkParams::default(), None).unwrap();
        let prefix = index.corpus_prefix(60);
        assert_eq!(prefix.split_whitespace().count(), 60);
    }
}
