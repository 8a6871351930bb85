//! Transcript recording and the replay backend.
//!
//! Every generation call a run makes is recorded to `transcript.jsonl`, one
//! JSON record per line, keyed by a SHA-256 over (stage, system prompt, user
//! prompt). A [`ReplayBackend`] loaded from such a transcript answers
//! identical prompts with the recorded responses and zero latency, which
//! makes full pipeline runs reproducible offline.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{BackendError, GenerationBackend, GenerationRequest, GenerationResult, Stage};

/// One line of `transcript.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub stage: Stage,
    pub prompt_sha256: String,
    pub system: String,
    pub user: String,
    pub response: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub latency_ms: u64,
}

/// Hash identifying a prompt pair; stage is included so identical text in
/// different stages cannot collide.
pub fn prompt_sha256(stage: Stage, system: &str, user: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(stage.as_str().as_bytes());
    hasher.update([0]);
    hasher.update(system.as_bytes());
    hasher.update([0]);
    hasher.update(user.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_transcript(path: &Path, records: &[TranscriptRecord]) -> std::io::Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut file, record)?;
        file.write_all(b"\n")?;
    }
    file.flush()
}

pub fn read_transcript(path: &Path) -> std::io::Result<Vec<TranscriptRecord>> {
    let file = BufReader::new(std::fs::File::open(path)?);
    let mut records = Vec::new();
    for line in file.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

/// Answers from a recorded transcript; unknown prompts are a
/// [`BackendError::ReplayMiss`].
pub struct ReplayBackend {
    responses: HashMap<String, TranscriptRecord>,
}

impl ReplayBackend {
    pub fn new(records: Vec<TranscriptRecord>) -> Self {
        let mut responses = HashMap::with_capacity(records.len());
        for record in records {
            responses.insert(record.prompt_sha256.clone(), record);
        }
        Self { responses }
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let records = read_transcript(path)
            .map_err(|e| BackendError::Fatal(format!("cannot read transcript: {e}")))?;
        Ok(Self::new(records))
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl GenerationBackend for ReplayBackend {
    fn backend_id(&self) -> String {
        "replay".into()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult, BackendError> {
        let hash = prompt_sha256(request.stage, &request.system_prompt, &request.user_prompt);
        match self.responses.get(&hash) {
            Some(record) => Ok(GenerationResult {
                text: record.response.clone(),
                input_tokens: record.input_tokens,
                output_tokens: record.output_tokens,
                // zero latency marks the result as replayed
                latency_ms: 0,
                backend_id: "replay".into(),
            }),
            None => Err(BackendError::ReplayMiss { prompt_sha256: hash }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(stage: Stage, system: &str, user: &str, response: &str) -> TranscriptRecord {
        TranscriptRecord {
            stage,
            prompt_sha256: prompt_sha256(stage, system, user),
            system: system.into(),
            user: user.into(),
            response: response.into(),
            input_tokens: 12,
            output_tokens: 7,
            latency_ms: 840,
        }
    }

    #[test]
    fn replay_returns_stored_response_with_zero_latency() {
        let backend = ReplayBackend::new(vec![record(
            Stage::Coverage,
            "sys",
            "user",
            "STATUS: NOT_COVERED\nCONFIDENCE: 1.0\nREASONING: r",
        )]);
        let request = GenerationRequest::new(Stage::Coverage, "sys".into(), "user".into());
        let result = backend.generate(&request).unwrap();
        assert!(result.text.starts_with("STATUS: NOT_COVERED"));
        assert_eq!(result.latency_ms, 0);
        assert_eq!(result.backend_id, "replay");
    }

    #[test]
    fn unknown_prompt_is_a_replay_miss() {
        let backend = ReplayBackend::new(vec![]);
        let request = GenerationRequest::new(Stage::Coverage, "sys".into(), "other".into());
        assert!(matches!(
            backend.generate(&request),
            Err(BackendError::ReplayMiss { .. })
        ));
    }

    #[test]
    fn stage_distinguishes_hashes() {
        assert_ne!(
            prompt_sha256(Stage::Coverage, "s", "u"),
            prompt_sha256(Stage::Gap, "s", "u")
        );
    }

    #[test]
    fn transcript_round_trips_through_file() {
        let records = vec![
            record(Stage::Coverage, "a", "b", "c"),
            record(Stage::Gap, "d", "e", "f"),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transcript.jsonl");
        write_transcript(&path, &records).unwrap();
        let loaded = read_transcript(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[0].prompt_sha256, records[0].prompt_sha256);
        assert_eq!(loaded[1].response, "f");
    }
}
