//! Parse, validate, and canonicalize raw evaluator responses into structured
//! session evaluations.
//!
//! Malformed material is never silently dropped: every raw entry ends up
//! either as a retained [`HeuristicEvaluation`] or as an [`ExclusionRecord`]
//! (and severity-level problems produce a record while the entry itself stays
//! usable for binary issue analysis).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::catalog::{canonicalize_heuristic, HeuristicId, SeverityRating};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("unparseable response for {site_id} session {session_index}: {detail}")]
    Unparseable {
        site_id: String,
        session_index: u32,
        detail: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    MalformedSeverity,
    MissingSeverity,
    UnrecognizedHeuristic,
    DuplicateHeuristic,
    SemanticInconsistency,
    UnparseableEntry,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MalformedSeverity => "malformed_severity",
            Self::MissingSeverity => "missing_severity",
            Self::UnrecognizedHeuristic => "unrecognized_heuristic",
            Self::DuplicateHeuristic => "duplicate_heuristic",
            Self::SemanticInconsistency => "semantic_inconsistency",
            Self::UnparseableEntry => "unparseable_entry",
        }
    }

    /// Severity-level reasons leave the entry usable for binary analysis;
    /// the rest drop the entry entirely.
    pub fn drops_entry(self) -> bool {
        matches!(
            self,
            Self::UnrecognizedHeuristic | Self::DuplicateHeuristic | Self::UnparseableEntry
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionRecord {
    pub heuristic_raw_name: String,
    pub reason: ExclusionReason,
    pub detail: String,
}

/// One heuristic's verdict within a session. `severity` is `None` when the
/// raw value was missing or malformed (see the matching exclusion record).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicEvaluation {
    #[serde(
        serialize_with = "ser_heuristic",
        deserialize_with = "de_heuristic"
    )]
    pub heuristic: &'static HeuristicId,
    pub severity: Option<SeverityRating>,
    pub issue_found: Option<bool>,
    pub issue_description: String,
    pub code_reference: String,
    pub code_snippet: String,
    pub evaluation_answers: BTreeMap<String, String>,
    pub recommendation: String,
    pub semantic_inconsistency: bool,
}

fn ser_heuristic<S: serde::Serializer>(
    h: &&'static HeuristicId,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.serialize_str(h.slug)
}

fn de_heuristic<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> Result<&'static HeuristicId, D::Error> {
    let slug = String::deserialize(d)?;
    crate::catalog::heuristic_by_slug(&slug)
        .ok_or_else(|| serde::de::Error::custom(format!("unknown heuristic slug {slug:?}")))
}

/// One evaluator session's parsed output for one site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvaluation {
    pub site_id: String,
    pub session_index: u32,
    pub entries: Vec<HeuristicEvaluation>,
    pub exclusions: Vec<ExclusionRecord>,
}

impl SessionEvaluation {
    /// Record a session whose response yielded no recoverable JSON at all.
    pub fn unparseable(site_id: &str, session_index: u32, detail: &str) -> Self {
        Self {
            site_id: site_id.to_string(),
            session_index,
            entries: Vec::new(),
            exclusions: vec![ExclusionRecord {
                heuristic_raw_name: "<entire session>".to_string(),
                reason: ExclusionReason::UnparseableEntry,
                detail: detail.to_string(),
            }],
        }
    }
}

/// Strip a single leading/trailing fenced code block, if present.
fn strip_code_fence(text: &str) -> Option<&str> {
    let start = text.find("```")?;
    let after_fence = &text[start + 3..];
    // skip an optional language tag up to the first newline
    let body_start = after_fence.find('\n')? + 1;
    let body = &after_fence[body_start..];
    let end = body.rfind("```")?;
    Some(&body[..end])
}

/// Recover the JSON array of heuristic entries from raw response text.
fn recover_entries(raw_text: &str) -> Option<Vec<Value>> {
    let candidates = [
        Some(raw_text.trim()),
        strip_code_fence(raw_text),
        bracketed_slice(raw_text),
    ];
    for cand in candidates.into_iter().flatten() {
        if let Ok(value) = serde_json::from_str::<Value>(cand.trim()) {
            if let Some(entries) = entries_from_value(value) {
                return Some(entries);
            }
        }
    }
    None
}

fn bracketed_slice(text: &str) -> Option<&str> {
    let start = text.find('[')?;
    let end = text.rfind(']')?;
    (end > start).then(|| &text[start..=end])
}

fn entries_from_value(value: Value) -> Option<Vec<Value>> {
    match value {
        Value::Array(items) => Some(items),
        Value::Object(map) => {
            // single-entry object, or a wrapper holding the array
            if map.contains_key("Heuristic") {
                return Some(vec![Value::Object(map)]);
            }
            map.into_iter().find_map(|(_, v)| match v {
                Value::Array(items) => Some(items),
                _ => None,
            })
        }
        _ => None,
    }
}

fn text_field(obj: &serde_json::Map<String, Value>, key: &str) -> String {
    match obj.get(key) {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Null) | None => String::new(),
        Some(other) => other.to_string(),
    }
}

fn answers_field(obj: &serde_json::Map<String, Value>) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    if let Some(Value::Object(map)) = obj.get("EvaluationAnswers") {
        for (k, v) in map {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.insert(k.clone(), text);
        }
    }
    out
}

enum SeverityParse {
    Valid(SeverityRating),
    Missing,
    Malformed(String),
}

/// Severity is accepted only as an exact integer 0-4, either a JSON integer
/// or a trimmed integer literal in a string. No rounding, no other coercion.
fn parse_severity(value: Option<&Value>) -> SeverityParse {
    match value {
        None | Some(Value::Null) => SeverityParse::Missing,
        Some(Value::Number(n)) => match n.as_i64() {
            Some(i) if (0..=4).contains(&i) => {
                SeverityParse::Valid(SeverityRating::new(i as u8).expect("range checked"))
            }
            _ => SeverityParse::Malformed(n.to_string()),
        },
        Some(Value::String(s)) => match s.trim().parse::<i64>() {
            Ok(i) if (0..=4).contains(&i) => {
                SeverityParse::Valid(SeverityRating::new(i as u8).expect("range checked"))
            }
            _ => SeverityParse::Malformed(format!("{s:?}")),
        },
        Some(other) => SeverityParse::Malformed(other.to_string()),
    }
}

/// Parse a raw evaluator response into a validated session evaluation.
///
/// Total over its input: any text yields either a session or the
/// unparseable-response error.
pub fn parse_evaluation(
    raw_text: &str,
    site_id: &str,
    session_index: u32,
) -> Result<SessionEvaluation, SchemaError> {
    let raw_entries = recover_entries(raw_text).ok_or_else(|| SchemaError::Unparseable {
        site_id: site_id.to_string(),
        session_index,
        detail: "no JSON array recoverable from response text".to_string(),
    })?;

    let mut entries: Vec<HeuristicEvaluation> = Vec::new();
    let mut exclusions: Vec<ExclusionRecord> = Vec::new();

    for raw in raw_entries {
        let obj = match raw {
            Value::Object(obj) => obj,
            other => {
                exclusions.push(ExclusionRecord {
                    heuristic_raw_name: "<non-object entry>".to_string(),
                    reason: ExclusionReason::UnparseableEntry,
                    detail: format!("entry is not a JSON object: {other}"),
                });
                continue;
            }
        };
        let raw_name = match obj.get("Heuristic") {
            Some(Value::String(s)) => s.clone(),
            _ => {
                exclusions.push(ExclusionRecord {
                    heuristic_raw_name: "<missing Heuristic field>".to_string(),
                    reason: ExclusionReason::UnparseableEntry,
                    detail: "entry has no Heuristic string field".to_string(),
                });
                continue;
            }
        };
        let heuristic = match canonicalize_heuristic(&raw_name) {
            Ok(h) => h,
            Err(_) => {
                exclusions.push(ExclusionRecord {
                    heuristic_raw_name: raw_name.clone(),
                    reason: ExclusionReason::UnrecognizedHeuristic,
                    detail: format!("{raw_name:?} is not in the catalog or alias table"),
                });
                continue;
            }
        };
        if entries.iter().any(|e| e.heuristic == heuristic) {
            // keep-first resolution
            exclusions.push(ExclusionRecord {
                heuristic_raw_name: raw_name.clone(),
                reason: ExclusionReason::DuplicateHeuristic,
                detail: format!("duplicate of {}, first occurrence kept", heuristic.slug),
            });
            continue;
        }

        let severity = match parse_severity(obj.get("SeverityRating")) {
            SeverityParse::Valid(s) => Some(s),
            SeverityParse::Missing => {
                exclusions.push(ExclusionRecord {
                    heuristic_raw_name: raw_name.clone(),
                    reason: ExclusionReason::MissingSeverity,
                    detail: "SeverityRating absent or null".to_string(),
                });
                None
            }
            SeverityParse::Malformed(detail) => {
                exclusions.push(ExclusionRecord {
                    heuristic_raw_name: raw_name.clone(),
                    reason: ExclusionReason::MalformedSeverity,
                    detail: format!("SeverityRating not an integer 0-4: {detail}"),
                });
                None
            }
        };
        let issue_found = match obj.get("IssueFound") {
            Some(Value::Bool(b)) => Some(*b),
            _ => None,
        };

        // flag, never repair: values are kept exactly as reported
        let semantic_inconsistency = matches!(
            (issue_found, severity),
            (Some(false), Some(s)) if s.value() > 0
        );
        if semantic_inconsistency {
            exclusions.push(ExclusionRecord {
                heuristic_raw_name: raw_name.clone(),
                reason: ExclusionReason::SemanticInconsistency,
                detail: format!(
                    "IssueFound={:?} conflicts with SeverityRating={:?}",
                    issue_found,
                    severity.map(|s| s.value())
                ),
            });
        }

        entries.push(HeuristicEvaluation {
            heuristic,
            severity,
            issue_found,
            issue_description: text_field(&obj, "IssueDescription"),
            code_reference: text_field(&obj, "CodeReference"),
            code_snippet: text_field(&obj, "CodeSnippet"),
            evaluation_answers: answers_field(&obj),
            recommendation: text_field(&obj, "Recommendation"),
            semantic_inconsistency,
        });
    }

    Ok(SessionEvaluation {
        site_id: site_id.to_string(),
        session_index,
        entries,
        exclusions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionBreakdown {
    pub site_id: String,
    pub session_index: u32,
    pub entries: usize,
    pub valid_severities: usize,
    pub exclusions: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub sites: usize,
    pub sessions: usize,
    pub expected_entries: usize,
    pub parsed_entries: usize,
    pub valid_severities: usize,
    pub valid_issue_flags: usize,
    pub exclusions_by_reason: BTreeMap<String, usize>,
    pub per_session: Vec<SessionBreakdown>,
}

impl ValidationSummary {
    pub fn total_exclusions(&self) -> usize {
        self.exclusions_by_reason.values().sum()
    }

    pub fn severity_exclusions(&self) -> usize {
        self.exclusions_by_reason
            .iter()
            .filter(|(k, _)| k.as_str() == "malformed_severity" || k.as_str() == "missing_severity")
            .map(|(_, v)| v)
            .sum()
    }
}

/// Aggregate dataset accounting: expected vs parsed entry counts and
/// exclusion totals by reason.
pub fn validate_dataset(sessions: &[SessionEvaluation]) -> ValidationSummary {
    let mut summary = ValidationSummary::default();
    let mut sites: Vec<&str> = sessions.iter().map(|s| s.site_id.as_str()).collect();
    sites.sort_unstable();
    sites.dedup();
    summary.sites = sites.len();
    summary.sessions = sessions.len();
    summary.expected_entries = sessions.len() * 10;
    for session in sessions {
        let valid_severities = session.entries.iter().filter(|e| e.severity.is_some()).count();
        summary.parsed_entries += session.entries.len();
        summary.valid_severities += valid_severities;
        summary.valid_issue_flags += session
            .entries
            .iter()
            .filter(|e| e.issue_found.is_some())
            .count();
        for excl in &session.exclusions {
            *summary
                .exclusions_by_reason
                .entry(excl.reason.as_str().to_string())
                .or_default() += 1;
        }
        summary.per_session.push(SessionBreakdown {
            site_id: session.site_id.clone(),
            session_index: session.session_index,
            entries: session.entries.len(),
            valid_severities,
            exclusions: session.exclusions.len(),
        });
    }
    summary
        .per_session
        .sort_by(|a, b| (&a.site_id, a.session_index).cmp(&(&b.site_id, b.session_index)));
    summary
}
