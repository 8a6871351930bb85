//! Prompt rendering, generation backends, and structured-output parsing.
//!
//! Each reasoning stage renders a fixed prompt pair, sends it through a
//! pluggable [`GenerationBackend`], and parses the plain-text completion
//! into a typed result. Parsers are forgiving about casing, markdown
//! emphasis, and field order, and never panic on arbitrary input: they
//! return a value or [`ParseError::MalformedOutput`].

mod backend;
mod http;
mod mock;
pub mod parser;
mod replay;
pub mod templates;

pub use backend::{
    BackendConfig, BackendError, BackendKind, GenerationBackend, GenerationClient, RateLimiter,
    TokenBudget,
};
pub use http::HttpBackend;
pub use mock::{MockBackend, MockScript};
pub use replay::{prompt_sha256, read_transcript, write_transcript, ReplayBackend, TranscriptRecord};
pub use templates::{render_prompt, PromptContext, TemplateError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The six reasoning stages, each with its own prompt pair and output
/// grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "COVERAGE")]
    Coverage,
    #[serde(rename = "GAP")]
    Gap,
    #[serde(rename = "RECOMMENDATION")]
    Recommendation,
    #[serde(rename = "EXPLANATION")]
    Explanation,
    #[serde(rename = "REPORT_SUMMARY")]
    ReportSummary,
    #[serde(rename = "QUALITY")]
    Quality,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Coverage => "COVERAGE",
            Stage::Gap => "GAP",
            Stage::Recommendation => "RECOMMENDATION",
            Stage::Explanation => "EXPLANATION",
            Stage::ReportSummary => "REPORT_SUMMARY",
            Stage::Quality => "QUALITY",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One generation call. Deterministic by default: temperature 0, top-p 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub stage: Stage,
    pub system_prompt: String,
    pub user_prompt: String,
    pub temperature: f64,
    pub top_p: f64,
    /// Output token budget for the call.
    pub max_output: usize,
}

impl GenerationRequest {
    pub fn new(stage: Stage, system_prompt: String, user_prompt: String) -> Self {
        Self {
            stage,
            system_prompt,
            user_prompt,
            temperature: 0.0,
            top_p: 1.0,
            max_output: 2048,
        }
    }
}

/// A completion plus usage accounting. Backends that do not report token
/// usage fall back to whitespace-token counts so efficiency accounting still
/// works with local models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationResult {
    pub text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub latency_ms: u64,
    pub backend_id: String,
}

/// The three-class coverage verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoverageLabel {
    #[serde(rename = "FULLY_COVERED")]
    FullyCovered,
    #[serde(rename = "PARTIALLY_COVERED")]
    PartiallyCovered,
    #[serde(rename = "NOT_COVERED")]
    NotCovered,
}

impl CoverageLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoverageLabel::FullyCovered => "FULLY_COVERED",
            CoverageLabel::PartiallyCovered => "PARTIALLY_COVERED",
            CoverageLabel::NotCovered => "NOT_COVERED",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        let normalized: String = text
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_lowercase();
        match normalized.as_str() {
            "fullycovered" => Some(CoverageLabel::FullyCovered),
            "partiallycovered" => Some(CoverageLabel::PartiallyCovered),
            "notcovered" => Some(CoverageLabel::NotCovered),
            _ => None,
        }
    }

    pub const ALL: [CoverageLabel; 3] = [
        CoverageLabel::FullyCovered,
        CoverageLabel::PartiallyCovered,
        CoverageLabel::NotCovered,
    ];
}

impl std::fmt::Display for CoverageLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parsed coverage stage output.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoverageJudgment {
    pub status: CoverageLabel,
    /// Clamped to [0, 1].
    pub confidence: f64,
    pub reasoning: String,
}

/// The closed six-item gap taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GapType {
    #[serde(rename = "MISSING_CONTROL")]
    MissingControl,
    #[serde(rename = "WEAK_SPECIFICATION")]
    WeakSpecification,
    #[serde(rename = "NO_OWNERSHIP_DEFINED")]
    NoOwnershipDefined,
    #[serde(rename = "NO_PROCEDURE")]
    NoProcedure,
    #[serde(rename = "NO_REVIEW_CYCLE")]
    NoReviewCycle,
    #[serde(rename = "NO_ENFORCEMENT_MECHANISM")]
    NoEnforcementMechanism,
}

impl GapType {
    pub fn as_str(&self) -> &'static str {
        match self {
            GapType::MissingControl => "MISSING_CONTROL",
            GapType::WeakSpecification => "WEAK_SPECIFICATION",
            GapType::NoOwnershipDefined => "NO_OWNERSHIP_DEFINED",
            GapType::NoProcedure => "NO_PROCEDURE",
            GapType::NoReviewCycle => "NO_REVIEW_CYCLE",
            GapType::NoEnforcementMechanism => "NO_ENFORCEMENT_MECHANISM",
        }
    }

    /// Taxonomy name as the gap-analysis prompt spells it.
    pub fn display_name(&self) -> &'static str {
        match self {
            GapType::MissingControl => "Missing Control",
            GapType::WeakSpecification => "Weak Specification",
            GapType::NoOwnershipDefined => "No Ownership Defined",
            GapType::NoProcedure => "No Procedure",
            GapType::NoReviewCycle => "No Review Cycle",
            GapType::NoEnforcementMechanism => "No Enforcement Mechanism",
        }
    }

    /// Case- and punctuation-insensitive taxonomy lookup.
    pub fn parse(text: &str) -> Option<Self> {
        let normalized: String = text
            .chars()
            .filter(|c| c.is_alphabetic())
            .collect::<String>()
            .to_lowercase();
        match normalized.as_str() {
            "missingcontrol" => Some(GapType::MissingControl),
            "weakspecification" => Some(GapType::WeakSpecification),
            "noownershipdefined" | "noownership" => Some(GapType::NoOwnershipDefined),
            "noprocedure" => Some(GapType::NoProcedure),
            "noreviewcycle" => Some(GapType::NoReviewCycle),
            "noenforcementmechanism" | "noenforcement" => Some(GapType::NoEnforcementMechanism),
            _ => None,
        }
    }
}

impl std::fmt::Display for GapType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    #[serde(rename = "LOW")]
    Low,
    #[serde(rename = "MEDIUM")]
    Medium,
    #[serde(rename = "HIGH")]
    High,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::Low => "LOW",
            Severity::Medium => "MEDIUM",
            Severity::High => "HIGH",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_uppercase().as_str() {
            "LOW" => Some(Severity::Low),
            "MEDIUM" => Some(Severity::Medium),
            "HIGH" => Some(Severity::High),
            _ => None,
        }
    }
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Recommendation priority; same closed set as [`Severity`] but kept as its
/// own type because the grammars name them differently.
pub type Priority = Severity;

/// One identified policy gap.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Gap {
    pub gap_type: GapType,
    pub severity: Severity,
    pub explanation: String,
    pub affected_elements: Vec<String>,
}

/// One policy-level recommendation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Recommendation {
    pub title: String,
    pub priority: Priority,
    pub description: String,
    pub rationale: String,
    pub implementation_guidance: String,
}

/// Stakeholder-facing explanation of an assessment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Explanation {
    pub summary: String,
    pub gap_explanation: String,
    pub impact: String,
    pub recommendation_rationale: String,
    pub evidence_citations: String,
}

/// Corpus-level quality scores, each clamped to [0, 1].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QualityScores {
    pub clarity: f64,
    pub actionability: f64,
    pub governance_maturity: f64,
    pub insights: Vec<String>,
}

impl QualityScores {
    pub fn overall_score(&self) -> f64 {
        (self.clarity + self.actionability + self.governance_maturity) / 3.0
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed {stage} output: {detail}")]
    MalformedOutput { stage: Stage, detail: String },
}

impl ParseError {
    pub fn stage(&self) -> Stage {
        match self {
            ParseError::MalformedOutput { stage, .. } => *stage,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_parse_tolerates_case_and_punctuation() {
        assert_eq!(
            CoverageLabel::parse("fully_covered"),
            Some(CoverageLabel::FullyCovered)
        );
        assert_eq!(
            CoverageLabel::parse("**PARTIALLY COVERED**"),
            Some(CoverageLabel::PartiallyCovered)
        );
        assert_eq!(CoverageLabel::parse("unknown"), None);
    }

    #[test]
    fn gap_type_parse_tolerates_spelling_variants() {
        assert_eq!(GapType::parse("No Review Cycle"), Some(GapType::NoReviewCycle));
        assert_eq!(GapType::parse("no_procedure"), Some(GapType::NoProcedure));
        assert_eq!(GapType::parse("Vague Language"), None);
    }

    #[test]
    fn deterministic_request_defaults() {
        let req = GenerationRequest::new(Stage::Coverage, "s".into(), "u".into());
        assert_eq!(req.temperature, 0.0);
        assert_eq!(req.top_p, 1.0);
    }
}
