//! The security-control knowledge base.
//!
//! Controls are consumed from a JSON array (`controls.json`) of records:
//!
//! ```json
//! {
//!   "control_id": "AC-2",
//!   "control_name": "Account Management",
//!   "family": "AC",
//!   "control_text": "The organization manages system accounts ...",
//!   "intent": "Accounts are created, reviewed, and removed under a defined process.",
//!   "expected_elements": ["account ownership", "review frequency"],
//!   "severity": "HIGH"
//! }
//! ```
//!
//! Intent and expected elements are maintained in the file itself so the
//! knowledge base stays reproducible and hand-editable; they are authored
//! once per control and reused across runs. A converter for the public OSCAL
//! catalog can emit this schema; the loader only consumes this schema.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControlsError {
    #[error("duplicate control id {control_id} (record {index})")]
    DuplicateControl { control_id: String, index: usize },
    #[error("schema error in record {index}: {message}")]
    Schema { index: usize, message: String },
    #[error("controls file is not a JSON array")]
    NotAnArray,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One security control with its assessment scaffolding.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ControlSpec {
    pub control_id: String,
    pub control_name: String,
    pub family: String,
    pub control_text: String,
    /// One-sentence objective of the control.
    pub intent: String,
    /// Policy elements an assessor expects to find (ownership, review
    /// frequency, scope, ...). May be empty only when `intent` is present.
    pub expected_elements: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<String>,
}

/// An ordered, immutable set of controls.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ControlSet {
    pub framework_name: String,
    pub controls: Vec<ControlSpec>,
    pub family_counts: BTreeMap<String, usize>,
}

impl ControlSet {
    pub fn new(framework_name: impl Into<String>, controls: Vec<ControlSpec>) -> Self {
        let mut family_counts = BTreeMap::new();
        for control in &controls {
            *family_counts.entry(control.family.clone()).or_insert(0) += 1;
        }
        Self {
            framework_name: framework_name.into(),
            controls,
            family_counts,
        }
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn get(&self, control_id: &str) -> Option<&ControlSpec> {
        self.controls.iter().find(|c| c.control_id == control_id)
    }
}

/// Load and validate `controls.json`, preserving file order.
pub fn load_controls(path: &Path) -> Result<ControlSet, ControlsError> {
    let raw = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&raw)?;
    let records = value.as_array().ok_or(ControlsError::NotAnArray)?;

    let mut controls = Vec::with_capacity(records.len());
    let mut seen = std::collections::HashSet::new();
    for (index, record) in records.iter().enumerate() {
        let control = parse_record(record, index)?;
        if !seen.insert(control.control_id.clone()) {
            return Err(ControlsError::DuplicateControl {
                control_id: control.control_id,
                index,
            });
        }
        controls.push(control);
    }

    let framework_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "controls".to_string());
    Ok(ControlSet::new(framework_name, controls))
}

fn parse_record(record: &serde_json::Value, index: usize) -> Result<ControlSpec, ControlsError> {
    let obj = record.as_object().ok_or_else(|| ControlsError::Schema {
        index,
        message: "record is not an object".into(),
    })?;
    let required_string = |field: &str| -> Result<String, ControlsError> {
        match obj.get(field).and_then(|v| v.as_str()) {
            Some(s) if !s.trim().is_empty() => Ok(s.to_string()),
            Some(_) => Err(ControlsError::Schema {
                index,
                message: format!("field '{field}' is empty"),
            }),
            None => Err(ControlsError::Schema {
                index,
                message: format!("missing required field '{field}'"),
            }),
        }
    };

    let control_id = required_string("control_id")?;
    let control_name = required_string("control_name")?;
    let family = required_string("family")?;
    let control_text = required_string("control_text")?;
    let intent = match obj.get("intent").and_then(|v| v.as_str()) {
        Some(s) => s.trim().to_string(),
        None => String::new(),
    };
    let expected_elements: Vec<String> = match obj.get("expected_elements") {
        Some(serde_json::Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str().map(|s| s.to_string()).ok_or_else(|| ControlsError::Schema {
                    index,
                    message: "expected_elements must be an array of strings".into(),
                })
            })
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
        Some(_) => {
            return Err(ControlsError::Schema {
                index,
                message: "expected_elements must be an array of strings".into(),
            })
        }
    };
    if intent.is_empty() && expected_elements.is_empty() {
        return Err(ControlsError::Schema {
            index,
            message: "record must provide an intent or expected_elements".into(),
        });
    }
    let severity = obj
        .get("severity")
        .and_then(|v| v.as_str())
        .map(|s| s.to_string());

    Ok(ControlSpec {
        control_id,
        control_name,
        family,
        control_text,
        intent,
        expected_elements,
        severity,
    })
}

/// How the retrieval query is formed from a control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueryMode {
    /// `"{intent}. {elements joined by '; '}. {control_text}"`, skipping
    /// empty segments. Matches policy content on objective rather than
    /// wording.
    IntentConditioned,
    /// The raw control text alone.
    Raw,
}

/// Build the retrieval query text for a control.
pub fn build_query(control: &ControlSpec, mode: QueryMode) -> String {
    match mode {
        QueryMode::Raw => control.control_text.clone(),
        QueryMode::IntentConditioned => {
            let mut segments: Vec<String> = Vec::with_capacity(3);
            if !control.intent.is_empty() {
                segments.push(control.intent.clone());
            }
            if !control.expected_elements.is_empty() {
                segments.push(control.expected_elements.join("; "));
            }
            segments.push(control.control_text.clone());
            segments.join(". ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn control(intent: &str, elements: &[&str], text: &str) -> ControlSpec {
        ControlSpec {
            control_id: "AC-2".into(),
            control_name: "Account Management".into(),
            family: "AC".into(),
            control_text: text.into(),
            intent: intent.into(),
            expected_elements: elements.iter().map(|s| s.to_string()).collect(),
            severity: None,
        }
    }

    #[test]
    fn intent_conditioned_query_concatenates_segments() {
        let c = control(
            "Accounts are reviewed periodically",
            &["owner", "frequency"],
            "The organization reviews accounts…",
        );
        assert_eq!(
            build_query(&c, QueryMode::IntentConditioned),
            "Accounts are reviewed periodically. owner; frequency. The organization reviews accounts…"
        );
    }

    #[test]
    fn raw_query_is_control_text() {
        let c = control("x", &["y"], "The organization reviews accounts…");
        assert_eq!(
            build_query(&c, QueryMode::Raw),
            "The organization reviews accounts…"
        );
    }

    #[test]
    fn empty_elements_skip_segment() {
        let c = control("Accounts are reviewed periodically", &[], "Text.");
        assert_eq!(
            build_query(&c, QueryMode::IntentConditioned),
            "Accounts are reviewed periodically. Text."
        );
    }

    fn write_controls(json: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
        file.write_all(json.as_bytes()).unwrap();
        file
    }

    #[test]
    fn loads_valid_file_and_counts_families() {
        let file = write_controls(
            r#"[
              {"control_id":"AC-1","control_name":"Policy","family":"AC","control_text":"t","intent":"i","expected_elements":[]},
              {"control_id":"IR-1","control_name":"Plan","family":"IR","control_text":"t","intent":"i","expected_elements":["a"],"severity":"HIGH"}
            ]"#,
        );
        let set = load_controls(file.path()).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.family_counts["AC"], 1);
        assert_eq!(set.family_counts["IR"], 1);
        assert_eq!(set.controls[1].severity.as_deref(), Some("HIGH"));
    }

    #[test]
    fn empty_array_is_empty_set() {
        let file = write_controls("[]");
        let set = load_controls(file.path()).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let file = write_controls(
            r#"[
              {"control_id":"AC-2","control_name":"A","family":"AC","control_text":"t","intent":"i","expected_elements":[]},
              {"control_id":"AC-2","control_name":"B","family":"AC","control_text":"t","intent":"i","expected_elements":[]}
            ]"#,
        );
        let err = load_controls(file.path()).unwrap_err();
        assert!(matches!(err, ControlsError::DuplicateControl { control_id, index: 1 } if control_id == "AC-2"));
    }

    #[test]
    fn missing_field_names_record_index() {
        let file = write_controls(
            r#"[
              {"control_id":"AC-1","control_name":"A","family":"AC","control_text":"t","intent":"i","expected_elements":[]},
              {"control_id":"AC-2","control_name":"B","family":"AC","intent":"i","expected_elements":[]}
            ]"#,
        );
        let err = load_controls(file.path()).unwrap_err();
        match err {
            ControlsError::Schema { index, message } => {
                assert_eq!(index, 1);
                assert!(message.contains("control_text"));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn round_trip_preserves_set() {
        let file = write_controls(
            r#"[
              {"control_id":"AC-1","control_name":"Policy","family":"AC","control_text":"t","intent":"i","expected_elements":["a","b"]}
            ]"#,
        );
        let set = load_controls(file.path()).unwrap();
        let serialized = serde_json::to_string(&set.controls).unwrap();
        let reparsed = write_controls(&serialized);
        let set2 = load_controls(reparsed.path()).unwrap();
        assert_eq!(set.controls, set2.controls);
        assert_eq!(set.family_counts, set2.family_counts);
    }
}
