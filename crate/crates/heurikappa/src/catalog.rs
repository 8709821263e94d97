//! Canonical registry of Nielsen's ten usability heuristics, the 0-4 severity
//! scale, and the evaluator prompt template.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of Nielsen's ten usability heuristics.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeuristicId {
    pub canonical_name: &'static str,
    pub slug: &'static str,
}

/// Ordinal severity rating: 0 (no issue) through 4 (catastrophic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeverityRating(u8);

impl SeverityRating {
    pub const MAX: u8 = 4;

    pub fn new(value: u8) -> Option<Self> {
        (value <= Self::MAX).then_some(Self(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn label(self) -> &'static str {
        match self.0 {
            0 => "No Issue",
            1 => "Cosmetic",
            2 => "Minor",
            3 => "Major",
            _ => "Catastrophic",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("unrecognized heuristic name: {0:?}")]
    UnrecognizedHeuristic(String),
}

const CATALOG: [HeuristicId; 10] = [
    HeuristicId {
        canonical_name: "Visibility Of System Status",
        slug: "visibility-of-system-status",
    },
    HeuristicId {
        canonical_name: "Match System And Real World",
        slug: "match-system-and-real-world",
    },
    HeuristicId {
        canonical_name: "User Control And Freedom",
        slug: "user-control-and-freedom",
    },
    HeuristicId {
        canonical_name: "Consistency And Standards",
        slug: "consistency-and-standards",
    },
    HeuristicId {
        canonical_name: "Error Prevention",
        slug: "error-prevention",
    },
    HeuristicId {
        canonical_name: "Recognition Rather Than Recall",
        slug: "recognition-rather-than-recall",
    },
    HeuristicId {
        canonical_name: "Flexibility And Efficiency Of Use",
        slug: "flexibility-and-efficiency-of-use",
    },
    HeuristicId {
        canonical_name: "Aesthetic And Minimalist Design",
        slug: "aesthetic-and-minimalist-design",
    },
    HeuristicId {
        canonical_name: "Help Users Recognize Errors",
        slug: "help-users-recognize-errors",
    },
    HeuristicId {
        canonical_name: "Help And Documentation",
        slug: "help-and-documentation",
    },
];

/// Static alias table mapping normalized long-form names to canonical slugs.
/// Covers Nielsen's full phrasings, which LLM output tends to use verbatim.
const ALIASES: &[(&str, &str)] = &[
    (
        "match between system and the real world",
        "match-system-and-real-world",
    ),
    (
        "match between the system and the real world",
        "match-system-and-real-world",
    ),
    ("match system and the real world", "match-system-and-real-world"),
    (
        "flexibility and efficiency",
        "flexibility-and-efficiency-of-use",
    ),
    (
        "help users recognize diagnose and recover from errors",
        "help-users-recognize-errors",
    ),
    (
        "help users recognize and recover from errors",
        "help-users-recognize-errors",
    ),
    (
        "recognition rather than recall memory",
        "recognition-rather-than-recall",
    ),
];

/// The ten heuristics in their fixed canonical order.
pub fn heuristic_catalog() -> &'static [HeuristicId; 10] {
    &CATALOG
}

/// Look up a heuristic by its canonical slug.
pub fn heuristic_by_slug(slug: &str) -> Option<&'static HeuristicId> {
    CATALOG.iter().find(|h| h.slug == slug)
}

/// Lowercase, strip punctuation, collapse whitespace.
fn normalize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut last_space = true;
    for ch in raw.chars() {
        if ch.is_alphanumeric() {
            out.extend(ch.to_lowercase());
            last_space = false;
        } else if !last_space {
            out.push(' ');
            last_space = true;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Resolve a raw heuristic name (as emitted by an evaluator) to its canonical
/// identity. Matching is deterministic: normalization plus a fixed alias table,
/// no fuzzy matching.
pub fn canonicalize_heuristic(raw_name: &str) -> Result<&'static HeuristicId, CatalogError> {
    let norm = normalize(raw_name);
    let as_slug = norm.replace(' ', "-");
    if let Some(h) = heuristic_by_slug(&as_slug) {
        return Ok(h);
    }
    for (alias, slug) in ALIASES {
        if norm == *alias {
            return Ok(heuristic_by_slug(slug).expect("alias targets catalog slug"));
        }
    }
    Err(CatalogError::UnrecognizedHeuristic(raw_name.to_string()))
}

/// The full evaluator system prompt. Constant across calls.
pub fn build_instructions() -> &'static str {
    "You are a usability evaluation expert specializing in website usability based on code \
analysis. You will be provided the full source code of a website (HyperText Markup Language \
(HTML), Cascading Style Sheets (CSS), JavaScript (JS)), concatenated with per-file headers of \
the form `==== FILE: <path> ====`. Your task is to perform a detailed heuristic evaluation \
based on Jakob Nielsen's 10 usability heuristics. For each heuristic, you will:\n\
- Assign a SeverityRating (0 through 4)\n\
- Indicate IssueFound (true/false)\n\
- Write an IssueDescription\n\
- Provide CodeReference (file name(s) and line number(s))\n\
- Provide a CodeSnippet\n\
- Complete EvaluationAnswers (with explanations)\n\
- Offer a clear Recommendation\n\
\n\
If no issue is found, SeverityRating must be 0, IssueFound must be false, and placeholders \
used as directed. Always return a single, clean, valid JSON object for all 10 heuristics, \
without skipping any heuristic or reusing responses. Use professional, detailed language. \
Do not proceed unless the source code is provided. Verify internally that all heuristics are \
evaluated and JSON is valid before replying.\n\
\n\
Accuracy and clarity are mandatory. Nothing can be skipped or overlooked.\n\
\n\
The format must always be:\n\
[\n\
  {\n\
    \"Heuristic\": \"Heuristic\",\n\
    \"SeverityRating\": 0-4,\n\
    \"IssueFound\": true/false,\n\
    \"IssueDescription\": \"Issue Description\",\n\
    \"CodeReference\": \"Code reference\",\n\
    \"CodeSnippet\": \"Code snippet\",\n\
    \"EvaluationAnswers\": { },\n\
    \"Recommendation\": \"Clear and actionable recommendation.\"\n\
  }\n\
]"
}
