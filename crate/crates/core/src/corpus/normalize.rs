//! Text normalization for extracted policy documents.
//!
//! The cleanup targets the usual extraction artifacts: page-number lines,
//! header/footer lines repeated throughout a document, and words broken
//! across line wraps with a hyphen. Paragraphs hard-wrapped onto multiple
//! lines are rejoined; headings, list items, and table-ish lines keep their
//! own line. The whole pass is idempotent.

use regex::Regex;
use std::collections::HashMap;
use std::sync::OnceLock;

use super::CorpusError;
use crate::text::whitespace_token_count;

fn page_number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^(page\s+\d+(\s+of\s+\d+)?|\d{1,4}|[-–—]\s*\d+\s*[-–—]|p\.?\s*\d+)$")
            .unwrap()
    })
}

fn numbered_heading_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(\d+(\.\d+)*\.?|[A-Z]\.|Appendix\s+[A-Z0-9]+)(\s+\S.*)?$").unwrap()
    })
}

/// Heading heuristic: markdown `#` lines, numbered section lines ("1.2
/// Scope"), or short title-cased lines without terminal sentence
/// punctuation. The capitalization requirement keeps wrapped sentence
/// fragments ("The organization reviews all privileged") out.
pub(crate) fn is_heading(line: &str) -> bool {
    let t = line.trim();
    if t.is_empty() || t.chars().count() >= 80 {
        return false;
    }
    if t.starts_with('#') {
        return true;
    }
    if is_list_item(t) {
        return false;
    }
    if numbered_heading_re().is_match(t) {
        return true;
    }
    if matches!(
        t.chars().last(),
        Some('.') | Some('!') | Some('?') | Some(';') | Some(':') | Some(',') | Some('-')
    ) {
        return false;
    }
    if whitespace_token_count(t) > 8 {
        return false;
    }
    let alpha_words: Vec<&str> = t
        .split_whitespace()
        .filter(|w| w.chars().next().is_some_and(|c| c.is_alphabetic()))
        .collect();
    if alpha_words.is_empty() {
        return false;
    }
    let capitalized = alpha_words
        .iter()
        .filter(|w| w.chars().next().is_some_and(|c| c.is_uppercase()))
        .count();
    capitalized * 10 >= alpha_words.len() * 6
}

/// Heading text with markdown markers stripped.
pub(crate) fn heading_text(line: &str) -> String {
    line.trim().trim_start_matches('#').trim().to_string()
}

fn is_list_item(t: &str) -> bool {
    t.starts_with("- ")
        || t.starts_with("* ")
        || t.starts_with("• ")
        || t.starts_with("+ ")
        || t == "-"
        || t == "*"
}

fn is_table_line(t: &str) -> bool {
    t.matches('|').count() >= 2 || t.contains('\t')
}

/// A line that must keep its own line during paragraph reflow.
fn is_standalone(t: &str) -> bool {
    is_heading(t) || is_list_item(t) || is_table_line(t)
}

/// Clean up extracted policy text.
///
/// Removes page-number-only lines and lines repeated verbatim three or more
/// times (header/footer heuristic), rejoins words hyphenated across line
/// breaks, joins hard-wrapped lines within a paragraph with a space, and
/// collapses runs of blank lines. Headings, list items, and table lines are
/// preserved on their own lines.
pub fn normalize_text(raw: &str) -> Result<String, CorpusError> {
    let unified = raw.replace("\r\n", "\n").replace('\r', "\n").replace('\x0c', "\n");
    let mut lines: Vec<String> = unified.lines().map(|l| l.trim_end().to_string()).collect();

    // Page-number lines go first so they cannot interrupt a hyphenated word.
    lines.retain(|l| !page_number_re().is_match(l.trim()));

    rejoin_hyphenated(&mut lines);
    let mut lines = reflow(&lines);
    remove_repeated_lines(&mut lines);
    let out = collapse_blank_lines(&lines);

    if out.trim().is_empty() {
        return Err(CorpusError::EmptyDocument);
    }
    Ok(out)
}

/// Join `"con-\ntrol"` style breaks: a line ending in letter+`-` followed
/// directly by a line starting with a lowercase letter. Blank lines are
/// paragraph boundaries and are never crossed.
fn rejoin_hyphenated(lines: &mut Vec<String>) {
    let mut i = 0;
    while i + 1 < lines.len() {
        let join = {
            let cur = lines[i].trim_end();
            let next = lines[i + 1].trim_start();
            let ends_hyphenated = cur
                .strip_suffix('-')
                .and_then(|s| s.chars().last())
                .is_some_and(|c| c.is_alphabetic());
            ends_hyphenated && next.chars().next().is_some_and(|c| c.is_lowercase() && c.is_alphabetic())
        };
        if join {
            let next = lines.remove(i + 1);
            let cur = &mut lines[i];
            cur.truncate(cur.trim_end().len() - 1);
            cur.push_str(next.trim_start());
            // stay on the same line: the merged tail may be hyphenated again
        } else {
            i += 1;
        }
    }
}

/// Merge consecutive plain lines of a paragraph with single spaces;
/// standalone lines (headings, list items, tables) keep their own line.
fn reflow(lines: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(lines.len());
    let mut paragraph = String::new();
    for line in lines {
        let t = line.trim();
        if t.is_empty() {
            if !paragraph.is_empty() {
                out.push(std::mem::take(&mut paragraph));
            }
            out.push(String::new());
        } else if is_standalone(t) {
            if !paragraph.is_empty() {
                out.push(std::mem::take(&mut paragraph));
            }
            out.push(t.to_string());
        } else {
            if !paragraph.is_empty() {
                paragraph.push(' ');
            }
            paragraph.push_str(t);
        }
    }
    if !paragraph.is_empty() {
        out.push(paragraph);
    }
    out
}

/// Drop every line whose trimmed text occurs three or more times; each
/// removal leaves a paragraph boundary so neighbours are not glued together.
fn remove_repeated_lines(lines: &mut Vec<String>) {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for line in lines.iter() {
        let t = line.trim();
        if !t.is_empty() {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    let repeated: Vec<String> = counts
        .into_iter()
        .filter(|(_, n)| *n >= 3)
        .map(|(t, _)| t.to_string())
        .collect();
    if repeated.is_empty() {
        return;
    }
    for line in lines.iter_mut() {
        if repeated.iter().any(|r| r == line.trim()) {
            line.clear();
        }
    }
}

fn collapse_blank_lines(lines: &[String]) -> String {
    let mut out: Vec<&str> = Vec::with_capacity(lines.len());
    let mut blank_pending = false;
    for line in lines {
        if line.trim().is_empty() {
            blank_pending = !out.is_empty();
        } else {
            if blank_pending {
                out.push("");
                blank_pending = false;
            }
            out.push(line);
        }
    }
    out.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejoins_hyphenated_line_break() {
        assert_eq!(
            normalize_text("Access con-\ntrol policy").unwrap(),
            "Access control policy"
        );
    }

    #[test]
    fn removes_page_number_lines() {
        let raw = "The access policy requires quarterly reviews of all accounts.\n\nPage 4\n\nExceptions are documented and approved by the CISO before use.";
        let out = normalize_text(raw).unwrap();
        assert!(!out.contains("Page 4"));
        assert!(out.contains("quarterly reviews"));
        assert!(out.contains("Exceptions are documented"));
    }

    #[test]
    fn only_page_numbers_is_empty() {
        assert!(matches!(
            normalize_text("Page 1\nPage 2"),
            Err(CorpusError::EmptyDocument)
        ));
    }

    #[test]
    fn removes_lines_repeated_three_times() {
        let raw = "ACME Corp Confidential\n\nFirst paragraph about access management and provisioning rules.\n\nACME Corp Confidential\n\nSecond paragraph about the incident escalation chain and contacts.\n\nACME Corp Confidential\n\nThird paragraph about audit logging retention periods and storage.";
        let out = normalize_text(raw).unwrap();
        assert!(!out.contains("ACME Corp Confidential"));
        assert!(out.contains("First paragraph"));
        assert!(out.contains("Third paragraph"));
    }

    #[test]
    fn joins_wrapped_paragraph_lines() {
        let raw = "The organization reviews all privileged\naccounts every ninety days without exception.";
        let out = normalize_text(raw).unwrap();
        assert_eq!(
            out,
            "The organization reviews all privileged accounts every ninety days without exception."
        );
    }

    #[test]
    fn keeps_headings_and_lists_standalone() {
        let raw = "# Access Control\n1.2 Scope\n- all user accounts\n- all service accounts\nEvery account has a named owner who is responsible for periodic review activities.";
        let out = normalize_text(raw).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "# Access Control");
        assert_eq!(lines[1], "1.2 Scope");
        assert_eq!(lines[2], "- all user accounts");
        assert_eq!(lines[3], "- all service accounts");
        assert!(lines[4].starts_with("Every account"));
    }

    #[test]
    fn idempotent_on_mixed_input() {
        let raw = "# Policy\nSome wrapped text that\ncontinues on the next line.\n\nPage 3\n\nAnother para-\ngraph with a break.";
        let once = normalize_text(raw).unwrap();
        let twice = normalize_text(&once).unwrap();
        assert_eq!(once, twice);
    }
}
