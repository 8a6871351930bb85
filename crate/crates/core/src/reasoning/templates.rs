//! The six stage prompt templates and their rendering.
//!
//! Template text is fixed; rendering only substitutes the named
//! placeholders, so two runs over the same inputs produce identical
//! prompts. Every placeholder a stage needs must be supplied through
//! [`PromptContext`]; a missing one is a [`TemplateError`] naming the field.

use thiserror::Error;

use super::{CoverageJudgment, Gap, Recommendation, Stage};
use crate::controls::ControlSpec;
use crate::retrieval::EvidenceItem;
use crate::text::truncate_chars;

#[derive(Debug, Error, PartialEq)]
#[error("{stage} template is missing required field '{field}'")]
pub struct TemplateError {
    pub stage: Stage,
    pub field: &'static str,
}

pub const COVERAGE_SYSTEM: &str = "You are a cybersecurity compliance auditor expert. Your task is to determine whether an organizational
policy adequately covers a security control.

Analyze the control requirements and the policy evidence provided, then make a judgement:

- FULLY_COVERED: The policy explicitly addresses all key aspects of the control with sufficient detail
- PARTIALLY_COVERED: The policy mentions the control area but lacks completeness, specificity, or
enforcement details
- NOT_COVERED: The policy does not address this control adequately

Provide your analysis in the following format:

STATUS: [FULLY_COVERED|PARTIALLY_COVERED|NOT_COVERED]
CONFIDENCE: [0.0-1.0]
REASONING: [Detailed explanation of your judgement]

Be strict but fair. Evidence must be concrete and specific.";

pub const COVERAGE_USER: &str = "Evaluate policy coverage for the following security control:

CONTROL ID: {control.control_id}
CONTROL NAME: {control.control_name}
FAMILY: {control.family}

CONTROL REQUIREMENT:
{control.control_text}

CONTROL INTENT:
{control.intent}

EXPECTED POLICY ELEMENTS:
{expected}

ORGANIZATIONAL POLICY EVIDENCE:
{evidence_text}

Based on this evidence, determine the coverage status.";

pub const GAP_SYSTEM: &str = "You are a cybersecurity compliance gap analyst. Your task is to identify specific, actionable gaps in
policy coverage.

Use the following gap taxonomy:
1. Missing Control - The control is not addressed at all
2. Weak Specification - The control is mentioned but lacks sufficient detail
3. No Ownership Defined - No roles or responsibilities are specified
4. No Procedure - No operational procedure is defined
5. No Review Cycle - No periodic review or update process is mentioned
6. No Enforcement Mechanism - No enforcement, monitoring, or compliance checking is specified

For each gap, provide:
GAP_TYPE: [one of the above]
SEVERITY: [LOW|MEDIUM|HIGH]
EXPLANATION: [Specific explanation]
AFFECTED_ELEMENTS: [Comma-separated list of missing elements]";

pub const GAP_USER: &str = "Analyze the gaps in policy coverage for this control:

CONTROL: {control.control_id} - {control.control_name}
CONTROL REQUIREMENT: {control.control_text[:500]}...
INTENT: {control.intent}

EXPECTED ELEMENTS:
{expected_elements}

COVERAGE STATUS: {coverage.status.value}
COVERAGE REASONING: {coverage.reasoning}

POLICY EVIDENCE FOUND:
{evidence_snippets}

Identify specific gaps in the policy using the gap taxonomy. What is missing or weak?";

pub const RECOMMENDATION_SYSTEM: &str = "You are a cybersecurity policy consultant. Generate concrete, actionable recommendations to improve
organizational policies.

Your recommendations must be:
- POLICY-LEVEL (not technical implementation details)
- CONCRETE and SPECIFIC (not vague advice)
- ACTIONABLE (clear what to add/modify)
- ALIGNED with the control intent

For each recommendation, provide:
TITLE: [Short title]
PRIORITY: [LOW|MEDIUM|HIGH]
DESCRIPTION: [Detailed recommendation - what to add to the policy]
RATIONALE: [Why this matters]
IMPLEMENTATION_GUIDANCE: [How to implement this in the policy]

---

Separate multiple recommendations with \"---\".";

pub const RECOMMENDATION_USER: &str = "Generate policy-level recommendations to address the following gaps:

CONTROL: {control.control_id} - {control.control_name}
INTENT: {control.intent}
{sector_context}
EXPECTED POLICY ELEMENTS:
{expected_elements}

IDENTIFIED GAPS:
{gaps_text}

Generate specific, actionable recommendations for improving the organizational policy to address
these gaps.";

/// Inserted for `{sector_context}` when a sector is configured; otherwise
/// the placeholder renders empty and no SECTOR CONTEXT block appears.
pub const SECTOR_CONTEXT_BLOCK: &str = "SECTOR CONTEXT:
The organization operates in the {sector.value} sector.
Please tailor the TONE and EMPHASIS of your recommendations to address the specific risks and priorities
of this sector.";

pub const EXPLANATION_SYSTEM: &str = "You are a compliance auditor explaining audit findings to stakeholders. Generate clear, professional
explanations that are accessible to both technical and non-technical audiences.

Structure your explanation as follows:

SUMMARY: [Executive summary in 2-3 sentences]
GAP_EXPLANATION: [Why gaps exist and what's missing]
IMPACT: [Why these gaps matter - business and security impact]
RECOMMENDATION_RATIONALE: [How recommendations fix the issues]
EVIDENCE: [Key evidence citations]

Be concise, professional, and actionable.";

pub const EXPLANATION_USER: &str = "Explain the audit findings for this control to stakeholders:

CONTROL: {control.control_id} - {control.control_name}
INTENT: {control.intent}
SEVERITY: {control.severity}

COVERAGE STATUS: {coverage.status}
COVERAGE REASONING: {coverage.reasoning[:300]}

GAPS IDENTIFIED:
{gaps_summary}

RECOMMENDATIONS:
{rec_summary}

EVIDENCE FOUND:
{evidence_summary}

Generate a clear, professional explanation of these findings.";

pub const REPORT_SUMMARY_SYSTEM: &str = "You are a senior compliance auditor writing executive summaries for C-level executives. Be concise,
professional, and highlight business impact.";

pub const REPORT_SUMMARY_USER: &str = "Generate an executive summary for a cybersecurity policy compliance audit.

FRAMEWORK: {framework.value}
TOTAL CONTROLS EVALUATED: {statistics['total_controls']}

COVERAGE:
- Fully Covered: {coverage_stats['fully_covered']} ({coverage_stats['fully_covered_pct']}
- Partially Covered: {coverage_stats['partially_covered']} ({coverage_stats['partially_covered_pct']}
- Not Covered: {coverage_stats['not_covered']} ({coverage_stats['not_covered_pct']}

GAPS IDENTIFIED:
- Total: {gap_stats['total']}
- High Severity: {gap_stats['high_severity']}
- Medium Severity: {gap_stats['medium_severity']}

RECOMMENDATIONS:
- Total: {rec_stats['total']}
- High Priority: {rec_stats['high_priority']}

POLICY QUALITY SCORE: {policy_quality.overall_score:.2f}/1.0

CRITICAL FINDINGS (Not Covered):
{critical_findings_text}

Write a professional executive summary (3-4 paragraphs) for senior management that:
1. Summarizes the audit scope and methodology
2. Highlights key findings and compliance level
3. Identifies critical risks and gaps
4. Provides high-level recommendations";

pub const QUALITY_SYSTEM: &str =
    "You are a policy quality assessor. Provide objective, quantitative assessments.";

pub const QUALITY_USER: &str = "Assess the quality of an organizational cybersecurity policy based on audit results.

AUDIT STATISTICS:
- Total controls evaluated: {total_controls}
- Fully covered: {fully_covered} ({fully_covered/total_controls*100:.1f}
- Partially covered: {partially_covered} ({partially_covered/total_controls*100:.1f}
- Not covered: {total_controls - fully_covered - partially_covered}

SAMPLE COVERAGE FINDINGS:
{reasonings_text}

Assess the policy on these dimensions (score 0.0-1.0):

CLARITY: [0.0-1.0] - How clear and understandable is the policy?
ACTIONABILITY: [0.0-1.0] - How actionable and specific are the requirements?
GOVERNANCE_MATURITY: [0.0-1.0] - How mature is the governance framework?

INSIGHTS: [3-5 key insights about policy strengths and weaknesses]";

/// Aggregate figures the executive-summary prompt needs.
#[derive(Debug, Clone, Default)]
pub struct ReportPromptStats {
    pub framework: String,
    pub total_controls: usize,
    pub fully_covered: usize,
    pub partially_covered: usize,
    pub not_covered: usize,
    pub gap_total: usize,
    pub gap_high: usize,
    pub gap_medium: usize,
    pub rec_total: usize,
    pub rec_high: usize,
    pub overall_quality: f64,
    /// (control_id, control_name) of NOT_COVERED controls.
    pub critical_findings: Vec<(String, String)>,
}

/// Aggregate figures plus sampled findings for the quality prompt.
#[derive(Debug, Clone, Default)]
pub struct QualityPromptInput {
    pub total_controls: usize,
    pub fully_covered: usize,
    pub partially_covered: usize,
    /// (control_id, coverage reasoning) samples.
    pub sample_findings: Vec<(String, String)>,
}

/// Everything a stage render might need. Fill only what the stage uses;
/// [`render_prompt`] reports the first missing required field.
#[derive(Debug, Clone, Copy, Default)]
pub struct PromptContext<'a> {
    pub control: Option<&'a ControlSpec>,
    pub evidence: Option<&'a [EvidenceItem]>,
    /// Replaces the evidence body for pipelines that skip retrieval and
    /// pass a corpus prefix instead.
    pub corpus_context: Option<&'a str>,
    pub coverage: Option<&'a CoverageJudgment>,
    pub gaps: Option<&'a [Gap]>,
    pub recommendations: Option<&'a [Recommendation]>,
    pub sector: Option<&'a str>,
    pub report: Option<&'a ReportPromptStats>,
    pub quality: Option<&'a QualityPromptInput>,
}

impl<'a> PromptContext<'a> {
    fn require_control(&self, stage: Stage) -> Result<&'a ControlSpec, TemplateError> {
        self.control.ok_or(TemplateError {
            stage,
            field: "control",
        })
    }

    fn require_coverage(&self, stage: Stage) -> Result<&'a CoverageJudgment, TemplateError> {
        self.coverage.ok_or(TemplateError {
            stage,
            field: "coverage",
        })
    }

    fn evidence_body(&self, stage: Stage) -> Result<String, TemplateError> {
        if let Some(prefix) = self.corpus_context {
            return Ok(prefix.to_string());
        }
        match self.evidence {
            Some(items) => Ok(render_evidence(items)),
            None => Err(TemplateError {
                stage,
                field: "evidence",
            }),
        }
    }
}

/// Render the (system, user) prompt pair for a stage.
pub fn render_prompt(
    stage: Stage,
    ctx: &PromptContext<'_>,
) -> Result<(String, String), TemplateError> {
    match stage {
        Stage::Coverage => {
            let control = ctx.require_control(stage)?;
            let user = substitute(
                COVERAGE_USER,
                &[
                    ("{control.control_id}", control.control_id.clone()),
                    ("{control.control_name}", control.control_name.clone()),
                    ("{control.family}", control.family.clone()),
                    ("{control.control_text}", control.control_text.clone()),
                    ("{control.intent}", control.intent.clone()),
                    ("{expected}", render_expected(&control.expected_elements)),
                    ("{evidence_text}", ctx.evidence_body(stage)?),
                ],
            );
            Ok((COVERAGE_SYSTEM.to_string(), user))
        }
        Stage::Gap => {
            let control = ctx.require_control(stage)?;
            let coverage = ctx.require_coverage(stage)?;
            let user = substitute(
                GAP_USER,
                &[
                    ("{control.control_id}", control.control_id.clone()),
                    ("{control.control_name}", control.control_name.clone()),
                    (
                        "{control.control_text[:500]}",
                        truncate_chars(&control.control_text, 500).to_string(),
                    ),
                    ("{control.intent}", control.intent.clone()),
                    (
                        "{expected_elements}",
                        render_expected(&control.expected_elements),
                    ),
                    ("{coverage.status.value}", coverage.status.to_string()),
                    ("{coverage.reasoning}", coverage.reasoning.clone()),
                    ("{evidence_snippets}", ctx.evidence_body(stage)?),
                ],
            );
            Ok((GAP_SYSTEM.to_string(), user))
        }
        Stage::Recommendation => {
            let control = ctx.require_control(stage)?;
            let gaps = ctx.gaps.ok_or(TemplateError {
                stage,
                field: "gaps",
            })?;
            let sector_context = match ctx.sector {
                Some(sector) => substitute(
                    SECTOR_CONTEXT_BLOCK,
                    &[("{sector.value}", sector.to_string())],
                ),
                None => String::new(),
            };
            let user = substitute(
                RECOMMENDATION_USER,
                &[
                    ("{control.control_id}", control.control_id.clone()),
                    ("{control.control_name}", control.control_name.clone()),
                    ("{control.intent}", control.intent.clone()),
                    ("{sector_context}", sector_context),
                    (
                        "{expected_elements}",
                        render_expected(&control.expected_elements),
                    ),
                    ("{gaps_text}", render_gaps(gaps)),
                ],
            );
            Ok((RECOMMENDATION_SYSTEM.to_string(), user))
        }
        Stage::Explanation => {
            let control = ctx.require_control(stage)?;
            let coverage = ctx.require_coverage(stage)?;
            let user = substitute(
                EXPLANATION_USER,
                &[
                    ("{control.control_id}", control.control_id.clone()),
                    ("{control.control_name}", control.control_name.clone()),
                    ("{control.intent}", control.intent.clone()),
                    (
                        "{control.severity}",
                        control.severity.clone().unwrap_or_else(|| "N/A".to_string()),
                    ),
                    ("{coverage.status}", coverage.status.to_string()),
                    (
                        "{coverage.reasoning[:300]}",
                        truncate_chars(&coverage.reasoning, 300).to_string(),
                    ),
                    ("{gaps_summary}", render_gaps(ctx.gaps.unwrap_or(&[]))),
                    (
                        "{rec_summary}",
                        render_recommendations(ctx.recommendations.unwrap_or(&[])),
                    ),
                    (
                        "{evidence_summary}",
                        render_evidence_summary(ctx.evidence.unwrap_or(&[])),
                    ),
                ],
            );
            Ok((EXPLANATION_SYSTEM.to_string(), user))
        }
        Stage::ReportSummary => {
            let report = ctx.report.ok_or(TemplateError {
                stage,
                field: "report",
            })?;
            let pct = |n: usize| -> String {
                if report.total_controls == 0 {
                    "0.0".to_string()
                } else {
                    format!("{:.1}", n as f64 / report.total_controls as f64 * 100.0)
                }
            };
            let user = substitute(
                REPORT_SUMMARY_USER,
                &[
                    ("{framework.value}", report.framework.clone()),
                    (
                        "{statistics['total_controls']}",
                        report.total_controls.to_string(),
                    ),
                    (
                        "{coverage_stats['fully_covered']}",
                        report.fully_covered.to_string(),
                    ),
                    ("{coverage_stats['fully_covered_pct']}", pct(report.fully_covered)),
                    (
                        "{coverage_stats['partially_covered']}",
                        report.partially_covered.to_string(),
                    ),
                    (
                        "{coverage_stats['partially_covered_pct']}",
                        pct(report.partially_covered),
                    ),
                    (
                        "{coverage_stats['not_covered']}",
                        report.not_covered.to_string(),
                    ),
                    ("{coverage_stats['not_covered_pct']}", pct(report.not_covered)),
                    ("{gap_stats['total']}", report.gap_total.to_string()),
                    ("{gap_stats['high_severity']}", report.gap_high.to_string()),
                    ("{gap_stats['medium_severity']}", report.gap_medium.to_string()),
                    ("{rec_stats['total']}", report.rec_total.to_string()),
                    ("{rec_stats['high_priority']}", report.rec_high.to_string()),
                    (
                        "{policy_quality.overall_score:.2f}",
                        format!("{:.2}", report.overall_quality),
                    ),
                    (
                        "{critical_findings_text}",
                        render_critical_findings(&report.critical_findings),
                    ),
                ],
            );
            Ok((REPORT_SUMMARY_SYSTEM.to_string(), user))
        }
        Stage::Quality => {
            let quality = ctx.quality.ok_or(TemplateError {
                stage,
                field: "quality",
            })?;
            let pct = |n: usize| -> String {
                if quality.total_controls == 0 {
                    "0.0".to_string()
                } else {
                    format!("{:.1}", n as f64 / quality.total_controls as f64 * 100.0)
                }
            };
            let not_covered = quality
                .total_controls
                .saturating_sub(quality.fully_covered + quality.partially_covered);
            let user = substitute(
                QUALITY_USER,
                &[
                    ("{total_controls}", quality.total_controls.to_string()),
                    ("{fully_covered}", quality.fully_covered.to_string()),
                    (
                        "{fully_covered/total_controls*100:.1f}",
                        pct(quality.fully_covered),
                    ),
                    ("{partially_covered}", quality.partially_covered.to_string()),
                    (
                        "{partially_covered/total_controls*100:.1f}",
                        pct(quality.partially_covered),
                    ),
                    (
                        "{total_controls - fully_covered - partially_covered}",
                        not_covered.to_string(),
                    ),
                    (
                        "{reasonings_text}",
                        render_sample_findings(&quality.sample_findings),
                    ),
                ],
            );
            Ok((QUALITY_SYSTEM.to_string(), user))
        }
    }
}

/// The single-prompt variant: one request that performs coverage judgment,
/// gap identification, and recommendation generation jointly. The answer
/// grammar is the coverage block, then gap blocks, then recommendation
/// blocks.
pub fn render_joint_prompt(ctx: &PromptContext<'_>) -> Result<(String, String), TemplateError> {
    let control = ctx.require_control(Stage::Coverage)?;
    let system = format!(
        "{COVERAGE_SYSTEM}\n\nIf the control is not fully covered, also identify gaps and recommendations.\n\n{GAP_SYSTEM}\n\n{RECOMMENDATION_SYSTEM}\n\nRespond with the STATUS/CONFIDENCE/REASONING block first, then any gap blocks, then any recommendation blocks."
    );
    let user = substitute(
        COVERAGE_USER,
        &[
            ("{control.control_id}", control.control_id.clone()),
            ("{control.control_name}", control.control_name.clone()),
            ("{control.family}", control.family.clone()),
            ("{control.control_text}", control.control_text.clone()),
            ("{control.intent}", control.intent.clone()),
            ("{expected}", render_expected(&control.expected_elements)),
            ("{evidence_text}", ctx.evidence_body(Stage::Coverage)?),
        ],
    );
    Ok((system, user))
}

fn substitute(template: &str, values: &[(&str, String)]) -> String {
    let mut out = template.to_string();
    for (placeholder, value) in values {
        out = out.replace(placeholder, value);
    }
    out
}

fn render_expected(elements: &[String]) -> String {
    if elements.is_empty() {
        "None specified.".to_string()
    } else {
        elements
            .iter()
            .map(|e| format!("- {e}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Numbered excerpts with source metadata; the coverage judge sees exactly
/// what was retrieved.
pub fn render_evidence(items: &[EvidenceItem]) -> String {
    if items.is_empty() {
        return "No relevant policy evidence was retrieved from the policy corpus.".to_string();
    }
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let section = item
                .section_heading
                .as_deref()
                .map(|h| format!(" (section: {h})"))
                .unwrap_or_default();
            format!(
                "[{n}] {doc} :: {chunk}{section}\n{text}",
                n = i + 1,
                doc = item.doc_id,
                chunk = item.chunk_id,
                text = item.text
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn render_gaps(gaps: &[Gap]) -> String {
    if gaps.is_empty() {
        return "None identified.".to_string();
    }
    gaps.iter()
        .map(|gap| {
            let affected = if gap.affected_elements.is_empty() {
                String::new()
            } else {
                format!(" (affected: {})", gap.affected_elements.join(", "))
            };
            format!(
                "- [{severity}] {name}: {explanation}{affected}",
                severity = gap.severity,
                name = gap.gap_type.display_name(),
                explanation = gap.explanation
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_recommendations(recs: &[Recommendation]) -> String {
    if recs.is_empty() {
        return "None.".to_string();
    }
    recs.iter()
        .map(|r| format!("- [{}] {}: {}", r.priority, r.title, r.description))
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_evidence_summary(items: &[EvidenceItem]) -> String {
    if items.is_empty() {
        return "No evidence retrieved.".to_string();
    }
    items
        .iter()
        .map(|item| {
            format!(
                "- {} :: {}: {}",
                item.doc_id,
                item.chunk_id,
                truncate_chars(&item.text, 160)
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_critical_findings(findings: &[(String, String)]) -> String {
    if findings.is_empty() {
        return "None.".to_string();
    }
    let mut lines: Vec<String> = findings
        .iter()
        .take(10)
        .map(|(id, name)| format!("- {id}: {name}"))
        .collect();
    if findings.len() > 10 {
        lines.push(format!("... and {} more.", findings.len() - 10));
    }
    lines.join("\n")
}

fn render_sample_findings(findings: &[(String, String)]) -> String {
    if findings.is_empty() {
        return "None available.".to_string();
    }
    findings
        .iter()
        .map(|(id, reasoning)| format!("{id}: {}", truncate_chars(reasoning, 200)))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reasoning::CoverageLabel;
    use crate::retrieval::EvidenceItem;

    fn control() -> ControlSpec {
        ControlSpec {
            control_id: "AC-2".into(),
            control_name: "Account Management".into(),
            family: "AC".into(),
            control_text: "The organization manages accounts.".into(),
            intent: "Accounts are governed end to end.".into(),
            expected_elements: vec!["ownership".into(), "review frequency".into()],
            severity: Some("HIGH".into()),
        }
    }

    fn evidence() -> Vec<EvidenceItem> {
        vec![
            EvidenceItem {
                chunk_id: "pol.md:0".into(),
                score: 2.0,
                text: "All accounts have a named owner.".into(),
                doc_id: "pol.md".into(),
                section_heading: Some("Accounts".into()),
            },
            EvidenceItem {
                chunk_id: "pol.md:1".into(),
                score: 1.0,
                text: "Reviews happen quarterly.".into(),
                doc_id: "pol.md".into(),
                section_heading: None,
            },
        ]
    }

    #[test]
    fn coverage_prompt_contains_control_and_evidence() {
        let c = control();
        let e = evidence();
        let ctx = PromptContext {
            control: Some(&c),
            evidence: Some(&e),
            ..Default::default()
        };
        let (system, user) = render_prompt(Stage::Coverage, &ctx).unwrap();
        assert!(system.contains("Be strict but fair."));
        assert!(user.contains("CONTROL ID: AC-2"));
        assert!(user.contains("All accounts have a named owner."));
        assert!(user.contains("Reviews happen quarterly."));
        assert!(user.contains("- ownership"));
    }

    #[test]
    fn gap_prompt_truncates_control_text_to_500_chars() {
        let mut c = control();
        c.control_text = "x".repeat(600);
        let coverage = CoverageJudgment {
            status: CoverageLabel::PartiallyCovered,
            confidence: 0.8,
            reasoning: "missing detail".into(),
        };
        let e = evidence();
        let ctx = PromptContext {
            control: Some(&c),
            coverage: Some(&coverage),
            evidence: Some(&e),
            ..Default::default()
        };
        let (_, user) = render_prompt(Stage::Gap, &ctx).unwrap();
        let expected = format!("CONTROL REQUIREMENT: {}...", "x".repeat(500));
        assert!(user.contains(&expected));
        assert!(!user.contains(&"x".repeat(501)));
    }

    #[test]
    fn recommendation_prompt_omits_sector_block_without_sector() {
        let c = control();
        let gaps = vec![Gap {
            gap_type: crate::reasoning::GapType::NoReviewCycle,
            severity: crate::reasoning::Severity::Medium,
            explanation: "no cadence".into(),
            affected_elements: vec!["review frequency".into()],
        }];
        let ctx = PromptContext {
            control: Some(&c),
            gaps: Some(&gaps),
            ..Default::default()
        };
        let (_, user) = render_prompt(Stage::Recommendation, &ctx).unwrap();
        assert!(!user.contains("SECTOR CONTEXT"));

        let ctx_with_sector = PromptContext {
            sector: Some("healthcare"),
            ..ctx
        };
        let (_, user) = render_prompt(Stage::Recommendation, &ctx_with_sector).unwrap();
        assert!(user.contains("SECTOR CONTEXT:"));
        assert!(user.contains("operates in the healthcare sector"));
    }

    #[test]
    fn missing_required_field_names_it() {
        let err = render_prompt(Stage::Coverage, &PromptContext::default()).unwrap_err();
        assert_eq!(err.field, "control");

        let c = control();
        let ctx = PromptContext {
            control: Some(&c),
            ..Default::default()
        };
        let err = render_prompt(Stage::Coverage, &ctx).unwrap_err();
        assert_eq!(err.field, "evidence");
    }

    #[test]
    fn corpus_context_replaces_evidence_body() {
        let c = control();
        let ctx = PromptContext {
            control: Some(&c),
            corpus_context: Some("first twelve thousand tokens of corpus"),
            ..Default::default()
        };
        let (_, user) = render_prompt(Stage::Coverage, &ctx).unwrap();
        assert!(user.contains("first twelve thousand tokens of corpus"));
    }

    #[test]
    fn explanation_renders_missing_severity_as_na() {
        let mut c = control();
        c.severity = None;
        let coverage = CoverageJudgment {
            status: CoverageLabel::FullyCovered,
            confidence: 1.0,
            reasoning: "covered".into(),
        };
        let ctx = PromptContext {
            control: Some(&c),
            coverage: Some(&coverage),
            ..Default::default()
        };
        let (_, user) = render_prompt(Stage::Explanation, &ctx).unwrap();
        assert!(user.contains("SEVERITY: N/A"));
        assert!(user.contains("GAPS IDENTIFIED:\nNone identified."));
    }

    #[test]
    fn distinct_evidence_renders_distinct_prompts() {
        let c = control();
        let e1 = evidence();
        let mut e2 = evidence();
        e2[1].text = "Reviews happen yearly.".into();
        let p1 = render_prompt(
            Stage::Coverage,
            &PromptContext {
                control: Some(&c),
                evidence: Some(&e1),
                ..Default::default()
            },
        )
        .unwrap();
        let p2 = render_prompt(
            Stage::Coverage,
            &PromptContext {
                control: Some(&c),
                evidence: Some(&e2),
                ..Default::default()
            },
        )
        .unwrap();
        assert_ne!(p1, p2);
    }

    #[test]
    fn report_summary_renders_statistics() {
        let report = ReportPromptStats {
            framework: "controls_25".into(),
            total_controls: 25,
            fully_covered: 6,
            partially_covered: 11,
            not_covered: 8,
            gap_total: 19,
            gap_high: 4,
            gap_medium: 10,
            rec_total: 19,
            rec_high: 5,
            overall_quality: 0.62,
            critical_findings: vec![("AC-9".into(), "Session Lock".into())],
        };
        let ctx = PromptContext {
            report: Some(&report),
            ..Default::default()
        };
        let (system, user) = render_prompt(Stage::ReportSummary, &ctx).unwrap();
        assert!(system.contains("C-level executives"));
        assert!(user.contains("TOTAL CONTROLS EVALUATED: 25"));
        assert!(user.contains("- Fully Covered: 6 (24.0"));
        assert!(user.contains("POLICY QUALITY SCORE: 0.62/1.0"));
        assert!(user.contains("- AC-9: Session Lock"));
    }
}
