//! Control-level compliance assessment of security-policy corpora.
//!
//! The crate evaluates each control of a security framework (e.g. NIST
//! SP 800-53) against an organization's written policies. A policy corpus is
//! normalized, chunked, and indexed ([`corpus`]); evidence is retrieved per
//! control ([`retrieval`]); a pluggable text-generation backend judges
//! coverage, diagnoses gaps, and drafts recommendations and explanations
//! ([`reasoning`], [`orchestrator`]); results aggregate into audit reports
//! ([`reporting`]) and score against gold labels with full significance
//! statistics ([`evaluation`]).

pub mod controls;
pub mod corpus;
pub mod embedding;
pub mod evaluation;
pub mod orchestrator;
pub mod reasoning;
pub mod reporting;
pub mod retrieval;
pub mod text;

pub use controls::{ControlSet, ControlSpec, QueryMode};
pub use corpus::{CorpusIndex, PolicyChunk, PolicyDocument};
pub use reasoning::{
    CoverageJudgment, CoverageLabel, Explanation, Gap, GapType, GenerationBackend,
    GenerationRequest, GenerationResult, Priority, QualityScores, Recommendation, Severity, Stage,
};
pub use retrieval::{EvidenceItem, EvidenceSet, RelevanceJudgment, RetrievalStrategy};
