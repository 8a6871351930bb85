//! Retrieval-quality scoring against human relevance judgments.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

use super::{EvidenceSet, RetrievalError};

/// One human judgment of a retrieved excerpt. `sufficient` means the excerpt
/// alone supports a coverage decision, which implies `relevant`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RelevanceJudgment {
    pub control_id: String,
    pub chunk_id: String,
    pub relevant: bool,
    pub sufficient: bool,
}

/// Summary emitted as `retrieval_metrics.json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RetrievalMetrics {
    pub precision_at_1: f64,
    pub precision_at_3: f64,
    pub top1_sufficiency: f64,
    pub n_controls: usize,
}

/// Load `judgments.csv` (`control_id,chunk_id,relevant{0|1},sufficient{0|1}`),
/// enforcing sufficient ⇒ relevant.
pub fn load_judgments(path: &Path) -> Result<Vec<RelevanceJudgment>, RetrievalError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| RetrievalError::JudgmentsFormat(e.to_string()))?;
    let mut judgments = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| RetrievalError::JudgmentsFormat(e.to_string()))?;
        if record.len() < 4 {
            return Err(RetrievalError::JudgmentsFormat(format!(
                "row {} has {} fields, expected 4",
                row + 1,
                record.len()
            )));
        }
        let parse_flag = |s: &str| -> Result<bool, RetrievalError> {
            match s.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(RetrievalError::JudgmentsFormat(format!(
                    "row {}: flag must be 0 or 1, got '{other}'",
                    row + 1
                ))),
            }
        };
        let judgment = RelevanceJudgment {
            control_id: record[0].trim().to_string(),
            chunk_id: record[1].trim().to_string(),
            relevant: parse_flag(&record[2])?,
            sufficient: parse_flag(&record[3])?,
        };
        if judgment.sufficient && !judgment.relevant {
            return Err(RetrievalError::SufficientNotRelevant {
                control_id: judgment.control_id,
                chunk_id: judgment.chunk_id,
            });
        }
        judgments.push(judgment);
    }
    Ok(judgments)
}

fn judgment_lookup<'a>(
    judgments: &'a [RelevanceJudgment],
) -> HashMap<(&'a str, &'a str), &'a RelevanceJudgment> {
    judgments
        .iter()
        .map(|j| ((j.control_id.as_str(), j.chunk_id.as_str()), j))
        .collect()
}

/// Precision@k: relevant items among the first `min(k, |items|)` positions,
/// divided by `k`. The denominator stays `k` even when fewer items were
/// returned, and unjudged items count as not relevant.
pub fn precision_at_k(ranking: &EvidenceSet, judgments: &[RelevanceJudgment], k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let lookup = judgment_lookup(judgments);
    let relevant = ranking
        .items
        .iter()
        .take(k)
        .filter(|item| {
            lookup
                .get(&(ranking.control_id.as_str(), item.chunk_id.as_str()))
                .is_some_and(|j| j.relevant)
        })
        .count();
    relevant as f64 / k as f64
}

/// Fraction of rankings whose top item is judged sufficient. Empty rankings
/// count as insufficient.
pub fn top1_sufficiency(rankings: &[EvidenceSet], judgments: &[RelevanceJudgment]) -> f64 {
    if rankings.is_empty() {
        return 0.0;
    }
    let lookup = judgment_lookup(judgments);
    let sufficient = rankings
        .iter()
        .filter(|ranking| {
            ranking.items.first().is_some_and(|top| {
                lookup
                    .get(&(ranking.control_id.as_str(), top.chunk_id.as_str()))
                    .is_some_and(|j| j.sufficient)
            })
        })
        .count();
    sufficient as f64 / rankings.len() as f64
}

/// Compute the `retrieval_metrics.json` summary over a batch of rankings.
pub fn retrieval_metrics(
    rankings: &[EvidenceSet],
    judgments: &[RelevanceJudgment],
) -> RetrievalMetrics {
    let n = rankings.len();
    let mean = |k: usize| -> f64 {
        if n == 0 {
            0.0
        } else {
            rankings.iter().map(|r| precision_at_k(r, judgments, k)).sum::<f64>() / n as f64
        }
    };
    RetrievalMetrics {
        precision_at_1: mean(1),
        precision_at_3: mean(3),
        top1_sufficiency: top1_sufficiency(rankings, judgments),
        n_controls: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::{EvidenceItem, RetrievalStrategy};
    use std::io::Write;

    fn ranking(control_id: &str, chunk_ids: &[&str]) -> EvidenceSet {
        EvidenceSet {
            control_id: control_id.into(),
            items: chunk_ids
                .iter()
                .enumerate()
                .map(|(i, id)| EvidenceItem {
                    chunk_id: id.to_string(),
                    score: 1.0 - i as f64 * 0.1,
                    text: String::new(),
                    doc_id: "d".into(),
                    section_heading: None,
                })
                .collect(),
            strategy: RetrievalStrategy::Lexical,
            k: chunk_ids.len().max(1),
        }
    }

    fn judgment(control_id: &str, chunk_id: &str, relevant: bool, sufficient: bool) -> RelevanceJudgment {
        RelevanceJudgment {
            control_id: control_id.into(),
            chunk_id: chunk_id.into(),
            relevant,
            sufficient,
        }
    }

    #[test]
    fn precision_counts_relevant_in_top_k() {
        let r = ranking("AC-2", &["c0", "c1", "c2"]);
        let j = vec![
            judgment("AC-2", "c0", true, false),
            judgment("AC-2", "c1", false, false),
            judgment("AC-2", "c2", true, false),
        ];
        assert!((precision_at_k(&r, &j, 3) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn precision_at_one_with_relevant_top() {
        let r = ranking("AC-2", &["c0"]);
        let j = vec![judgment("AC-2", "c0", true, true)];
        assert_eq!(precision_at_k(&r, &j, 1), 1.0);
    }

    #[test]
    fn short_list_keeps_denominator_k() {
        let r = ranking("AC-2", &["c0", "c1"]);
        let j = vec![judgment("AC-2", "c0", true, false)];
        // Literal-formula reference: 1 relevant among min(3, 2) items, over k = 3.
        assert!((precision_at_k(&r, &j, 3) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unjudged_items_count_as_not_relevant() {
        let r = ranking("AC-2", &["c0", "unjudged"]);
        let j = vec![judgment("AC-2", "c0", true, false)];
        assert!((precision_at_k(&r, &j, 2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn top1_sufficiency_fractions() {
        let rankings = vec![
            ranking("AC-1", &["a"]),
            ranking("AC-2", &["b"]),
            ranking("AC-3", &[]),
        ];
        let j = vec![
            judgment("AC-1", "a", true, true),
            judgment("AC-2", "b", true, false),
        ];
        assert!((top1_sufficiency(&rankings, &j) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(top1_sufficiency(&[], &j), 0.0);
    }

    #[test]
    fn top1_sufficiency_on_synthetic_scale() {
        // 200 rankings, 130 with a sufficient top item.
        let rankings: Vec<EvidenceSet> = (0..200)
            .map(|i| ranking(&format!("C-{i}"), &["top"]))
            .collect();
        let judgments: Vec<RelevanceJudgment> = (0..200)
            .map(|i| judgment(&format!("C-{i}"), "top", true, i < 130))
            .collect();
        assert!((top1_sufficiency(&rankings, &judgments) - 0.65).abs() < 1e-12);
    }

    #[test]
    fn judgments_load_and_enforce_sufficiency_rule() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "control_id,chunk_id,relevant,sufficient").unwrap();
        writeln!(file, "AC-2,d:0,1,1").unwrap();
        writeln!(file, "AC-2,d:1,1,0").unwrap();
        let judgments = load_judgments(file.path()).unwrap();
        assert_eq!(judgments.len(), 2);
        assert!(judgments[0].sufficient);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "control_id,chunk_id,relevant,sufficient").unwrap();
        writeln!(bad, "AC-2,d:0,0,1").unwrap();
        assert!(matches!(
            load_judgments(bad.path()),
            Err(RetrievalError::SufficientNotRelevant { .. })
        ));
    }
}
