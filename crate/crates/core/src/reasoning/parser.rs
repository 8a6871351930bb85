//! Parsers for the stage output grammars, and serializers for the same
//! grammars (used by scripted backends and round-trip tests).
//!
//! Markers like `STATUS:` are matched case-insensitively, tolerate markdown
//! emphasis (`**STATUS:**`, `## Status:`), and may appear in any order. A
//! field whose grammar allows free text captures everything until the next
//! recognized marker. Parsers never panic; anything unusable comes back as
//! [`ParseError::MalformedOutput`].

use regex::Regex;
use std::sync::OnceLock;

use super::{
    CoverageJudgment, CoverageLabel, Explanation, Gap, GapType, ParseError, Priority,
    QualityScores, Recommendation, Severity, Stage,
};

/// A parsed value plus any tolerated deviations from the grammar.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> ParseOutcome<T> {
    fn clean(value: T) -> Self {
        Self {
            value,
            warnings: Vec::new(),
        }
    }
}

/// One recognized `KEY: value` capture; `value` spans until the next marker.
#[derive(Debug)]
struct Capture {
    key: usize,
    value: String,
}

/// Match a `KEY:` marker at the start of a line, skipping markdown
/// decoration. Returns the key index and the inline remainder.
fn match_marker<'a>(line: &'a str, keys: &[&str]) -> Option<(usize, &'a str)> {
    let stripped = line.trim_start_matches([' ', '\t', '#', '*', '_', '`', '>']);
    for (i, key) in keys.iter().enumerate() {
        if stripped.len() >= key.len() && stripped[..key.len()].eq_ignore_ascii_case(key) {
            let mut rest = &stripped[key.len()..];
            rest = rest.trim_start_matches(['*', '_', '`']);
            if let Some(value) = rest.strip_prefix(':') {
                return Some((i, value.trim()));
            }
        }
    }
    None
}

/// Segment text into marker captures. Non-marker lines extend the current
/// capture; text before the first marker is dropped.
fn segment(raw: &str, keys: &[&str]) -> Vec<Capture> {
    let mut captures: Vec<Capture> = Vec::new();
    for line in raw.lines() {
        match match_marker(line, keys) {
            Some((key, inline)) => captures.push(Capture {
                key,
                value: strip_emphasis(inline).to_string(),
            }),
            None => {
                if let Some(current) = captures.last_mut() {
                    if !current.value.is_empty() {
                        current.value.push('\n');
                    }
                    current.value.push_str(line.trim_end());
                }
            }
        }
    }
    for capture in &mut captures {
        capture.value = capture.value.trim().to_string();
    }
    captures
}

fn strip_emphasis(value: &str) -> &str {
    value
        .trim()
        .trim_start_matches(['*', '_', '`', '['])
        .trim_end_matches(['*', '_', '`', ']'])
        .trim()
}

fn first_line(value: &str) -> &str {
    value.lines().next().unwrap_or("")
}

fn float_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[-+]?\d+(\.\d+)?([eE][-+]?\d+)?|[-+]?\.\d+").unwrap())
}

fn parse_float(text: &str) -> Option<f64> {
    float_re()
        .find(text)
        .and_then(|m| m.as_str().parse::<f64>().ok())
}

fn find_label(text: &str) -> Option<CoverageLabel> {
    let normalized: String = text
        .chars()
        .filter(|c| c.is_alphanumeric())
        .collect::<String>()
        .to_lowercase();
    let mut best: Option<(usize, CoverageLabel)> = None;
    for (needle, label) in [
        ("fullycovered", CoverageLabel::FullyCovered),
        ("partiallycovered", CoverageLabel::PartiallyCovered),
        ("notcovered", CoverageLabel::NotCovered),
    ] {
        if let Some(pos) = normalized.find(needle) {
            if best.is_none_or(|(p, _)| pos < p) {
                best = Some((pos, label));
            }
        }
    }
    best.map(|(_, label)| label)
}

const COVERAGE_KEYS: &[&str] = &["STATUS", "CONFIDENCE", "REASONING"];

/// Parse the coverage grammar: STATUS / CONFIDENCE / REASONING.
pub fn parse_coverage(raw: &str) -> Result<ParseOutcome<CoverageJudgment>, ParseError> {
    let captures = segment(raw, COVERAGE_KEYS);
    let mut warnings = Vec::new();

    let status_value = captures
        .iter()
        .find(|c| c.key == 0)
        .map(|c| first_line(&c.value));
    let status = match status_value {
        Some(value) => find_label(value).ok_or_else(|| ParseError::MalformedOutput {
            stage: Stage::Coverage,
            detail: format!("unrecognized status '{value}'"),
        })?,
        None => {
            return Err(ParseError::MalformedOutput {
                stage: Stage::Coverage,
                detail: "no STATUS field found".into(),
            })
        }
    };

    let confidence = match captures.iter().find(|c| c.key == 1) {
        Some(c) => match parse_float(first_line(&c.value)) {
            Some(v) => v.clamp(0.0, 1.0),
            None => {
                warnings.push("confidence value unparseable; defaulted to 0.5".into());
                0.5
            }
        },
        None => {
            warnings.push("confidence missing; defaulted to 0.5".into());
            0.5
        }
    };

    let reasoning = captures
        .iter()
        .find(|c| c.key == 2)
        .map(|c| c.value.clone())
        .unwrap_or_default();

    Ok(ParseOutcome {
        value: CoverageJudgment {
            status,
            confidence,
            reasoning,
        },
        warnings,
    })
}

const GAP_KEYS: &[&str] = &["GAP_TYPE", "SEVERITY", "EXPLANATION", "AFFECTED_ELEMENTS"];

/// Parse gap blocks. Blocks split on GAP_TYPE markers; an unrecognized
/// taxonomy name maps to WEAK_SPECIFICATION with a warning.
pub fn parse_gaps(raw: &str) -> Result<ParseOutcome<Vec<Gap>>, ParseError> {
    let captures = segment(raw, GAP_KEYS);
    let mut warnings = Vec::new();
    let mut gaps: Vec<Gap> = Vec::new();
    let mut current: Option<Gap> = None;

    for capture in captures {
        match capture.key {
            0 => {
                if let Some(gap) = current.take() {
                    gaps.push(gap);
                }
                let name = first_line(&capture.value);
                let gap_type = match GapType::parse(name) {
                    Some(t) => t,
                    None => {
                        warnings.push(format!(
                            "unrecognized gap type '{name}'; mapped to WEAK_SPECIFICATION"
                        ));
                        GapType::WeakSpecification
                    }
                };
                current = Some(Gap {
                    gap_type,
                    severity: Severity::Medium,
                    explanation: String::new(),
                    affected_elements: Vec::new(),
                });
            }
            1 => {
                if let Some(gap) = current.as_mut() {
                    match Severity::parse(strip_emphasis(first_line(&capture.value))) {
                        Some(severity) => gap.severity = severity,
                        None => warnings.push(format!(
                            "unrecognized severity '{}'; defaulted to MEDIUM",
                            first_line(&capture.value)
                        )),
                    }
                }
            }
            2 => {
                if let Some(gap) = current.as_mut() {
                    gap.explanation = capture.value.clone();
                }
            }
            3 => {
                if let Some(gap) = current.as_mut() {
                    gap.affected_elements = first_line(&capture.value)
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect();
                }
            }
            _ => unreachable!(),
        }
    }
    if let Some(gap) = current.take() {
        gaps.push(gap);
    }

    if gaps.is_empty() {
        return Err(ParseError::MalformedOutput {
            stage: Stage::Gap,
            detail: "no parseable gap blocks".into(),
        });
    }
    Ok(ParseOutcome {
        value: gaps,
        warnings,
    })
}

const REC_KEYS: &[&str] = &[
    "TITLE",
    "PRIORITY",
    "DESCRIPTION",
    "RATIONALE",
    "IMPLEMENTATION_GUIDANCE",
];

fn is_block_separator(line: &str) -> bool {
    let t = line.trim();
    t.len() >= 3 && t.chars().all(|c| c == '-')
}

/// Parse recommendation blocks separated by `---` lines. A block without a
/// TITLE is skipped with a warning; a missing PRIORITY defaults to MEDIUM.
pub fn parse_recommendations(raw: &str) -> Result<ParseOutcome<Vec<Recommendation>>, ParseError> {
    let mut warnings = Vec::new();
    let mut recommendations = Vec::new();

    let mut blocks: Vec<String> = Vec::new();
    let mut block = String::new();
    for line in raw.lines() {
        if is_block_separator(line) {
            blocks.push(std::mem::take(&mut block));
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    blocks.push(block);

    for block in blocks {
        if block.trim().is_empty() {
            continue;
        }
        let captures = segment(&block, REC_KEYS);
        if captures.is_empty() {
            continue;
        }
        let field = |key: usize| -> Option<String> {
            captures
                .iter()
                .find(|c| c.key == key)
                .map(|c| c.value.clone())
        };
        let title = match field(0).filter(|t| !t.is_empty()) {
            Some(title) => first_line(&title).to_string(),
            None => {
                warnings.push("recommendation block without TITLE skipped".into());
                continue;
            }
        };
        let priority = match field(1) {
            Some(p) => match Severity::parse(strip_emphasis(first_line(&p))) {
                Some(priority) => priority,
                None => {
                    warnings.push(format!(
                        "unrecognized priority '{}' for '{title}'; defaulted to MEDIUM",
                        first_line(&p)
                    ));
                    Priority::Medium
                }
            },
            None => {
                warnings.push(format!("priority missing for '{title}'; defaulted to MEDIUM"));
                Priority::Medium
            }
        };
        recommendations.push(Recommendation {
            title,
            priority,
            description: field(2).unwrap_or_default(),
            rationale: field(3).unwrap_or_default(),
            implementation_guidance: field(4).unwrap_or_default(),
        });
    }

    if recommendations.is_empty() {
        return Err(ParseError::MalformedOutput {
            stage: Stage::Recommendation,
            detail: "no parseable recommendation blocks".into(),
        });
    }
    Ok(ParseOutcome {
        value: recommendations,
        warnings,
    })
}

const EXPLANATION_KEYS: &[&str] = &[
    "SUMMARY",
    "GAP_EXPLANATION",
    "IMPACT",
    "RECOMMENDATION_RATIONALE",
    "EVIDENCE",
];

/// Parse the five-section explanation grammar. SUMMARY is required.
pub fn parse_explanation(raw: &str) -> Result<ParseOutcome<Explanation>, ParseError> {
    let captures = segment(raw, EXPLANATION_KEYS);
    let field = |key: usize| -> String {
        captures
            .iter()
            .find(|c| c.key == key)
            .map(|c| c.value.clone())
            .unwrap_or_default()
    };
    let summary = field(0);
    if summary.is_empty() {
        return Err(ParseError::MalformedOutput {
            stage: Stage::Explanation,
            detail: "SUMMARY section missing or empty".into(),
        });
    }
    Ok(ParseOutcome::clean(Explanation {
        summary,
        gap_explanation: field(1),
        impact: field(2),
        recommendation_rationale: field(3),
        evidence_citations: field(4),
    }))
}

const QUALITY_KEYS: &[&str] = &["CLARITY", "ACTIONABILITY", "GOVERNANCE_MATURITY", "INSIGHTS"];

/// Parse the quality grammar. All three scores are required and clamp to
/// [0, 1]; INSIGHTS bullets are optional.
pub fn parse_quality(raw: &str) -> Result<ParseOutcome<QualityScores>, ParseError> {
    let captures = segment(raw, QUALITY_KEYS);
    let score = |key: usize, name: &str| -> Result<f64, ParseError> {
        captures
            .iter()
            .find(|c| c.key == key)
            .and_then(|c| parse_float(first_line(&c.value)))
            .map(|v| v.clamp(0.0, 1.0))
            .ok_or_else(|| ParseError::MalformedOutput {
                stage: Stage::Quality,
                detail: format!("missing {name} score"),
            })
    };
    let clarity = score(0, "CLARITY")?;
    let actionability = score(1, "ACTIONABILITY")?;
    let governance_maturity = score(2, "GOVERNANCE_MATURITY")?;
    let insights = captures
        .iter()
        .find(|c| c.key == 3)
        .map(|c| {
            c.value
                .lines()
                .map(|line| {
                    line.trim()
                        .trim_start_matches(['-', '*', '•'])
                        .trim()
                        .to_string()
                })
                .filter(|s| !s.is_empty())
                .collect()
        })
        .unwrap_or_default();

    Ok(ParseOutcome::clean(QualityScores {
        clarity,
        actionability,
        governance_maturity,
        insights,
    }))
}

/// Parse the joint single-prompt grammar: a coverage block, then gap blocks,
/// then recommendation blocks. Gaps and recommendations are required
/// whenever the status is not FULLY_COVERED.
pub fn parse_joint(
    raw: &str,
) -> Result<ParseOutcome<(CoverageJudgment, Vec<Gap>, Vec<Recommendation>)>, ParseError> {
    let lines: Vec<&str> = raw.lines().collect();
    let gap_start = lines
        .iter()
        .position(|l| matches!(match_marker(l, GAP_KEYS), Some((0, _))));
    let rec_start = lines
        .iter()
        .position(|l| matches!(match_marker(l, REC_KEYS), Some((0, _))));

    let coverage_end = gap_start.or(rec_start).unwrap_or(lines.len());
    let coverage_text = lines[..coverage_end].join("\n");
    let coverage = parse_coverage(&coverage_text)?;
    let mut warnings = coverage.warnings;

    let fully = coverage.value.status == CoverageLabel::FullyCovered;

    let gaps = match gap_start {
        Some(start) => {
            let end = rec_start.filter(|r| *r > start).unwrap_or(lines.len());
            let outcome = parse_gaps(&lines[start..end].join("\n"))?;
            warnings.extend(outcome.warnings);
            outcome.value
        }
        None if fully => Vec::new(),
        None => {
            return Err(ParseError::MalformedOutput {
                stage: Stage::Gap,
                detail: "joint output has no gap blocks for a non-covered control".into(),
            })
        }
    };

    let recommendations = match rec_start {
        Some(start) => {
            let outcome = parse_recommendations(&lines[start..].join("\n"))?;
            warnings.extend(outcome.warnings);
            outcome.value
        }
        None if fully => Vec::new(),
        None => {
            return Err(ParseError::MalformedOutput {
                stage: Stage::Recommendation,
                detail: "joint output has no recommendation blocks for a non-covered control"
                    .into(),
            })
        }
    };

    Ok(ParseOutcome {
        value: (coverage.value, gaps, recommendations),
        warnings,
    })
}

// ---- answer-grammar serializers ----

pub fn coverage_to_text(judgment: &CoverageJudgment) -> String {
    format!(
        "STATUS: {}\nCONFIDENCE: {}\nREASONING: {}",
        judgment.status, judgment.confidence, judgment.reasoning
    )
}

pub fn gaps_to_text(gaps: &[Gap]) -> String {
    gaps.iter()
        .map(|gap| {
            format!(
                "GAP_TYPE: {}\nSEVERITY: {}\nEXPLANATION: {}\nAFFECTED_ELEMENTS: {}",
                gap.gap_type.display_name(),
                gap.severity,
                gap.explanation,
                gap.affected_elements.join(", ")
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

pub fn recommendations_to_text(recommendations: &[Recommendation]) -> String {
    recommendations
        .iter()
        .map(|r| {
            format!(
                "TITLE: {}\nPRIORITY: {}\nDESCRIPTION: {}\nRATIONALE: {}\nIMPLEMENTATION_GUIDANCE: {}",
                r.title, r.priority, r.description, r.rationale, r.implementation_guidance
            )
        })
        .collect::<Vec<_>>()
        .join("\n---\n")
}

pub fn explanation_to_text(explanation: &Explanation) -> String {
    format!(
        "SUMMARY: {}\nGAP_EXPLANATION: {}\nIMPACT: {}\nRECOMMENDATION_RATIONALE: {}\nEVIDENCE: {}",
        explanation.summary,
        explanation.gap_explanation,
        explanation.impact,
        explanation.recommendation_rationale,
        explanation.evidence_citations
    )
}

pub fn quality_to_text(quality: &QualityScores) -> String {
    let insights = quality
        .insights
        .iter()
        .map(|i| format!("- {i}"))
        .collect::<Vec<_>>()
        .join("\n");
    format!(
        "CLARITY: {}\nACTIONABILITY: {}\nGOVERNANCE_MATURITY: {}\nINSIGHTS:\n{}",
        quality.clarity, quality.actionability, quality.governance_maturity, insights
    )
}
