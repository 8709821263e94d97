//! Persist and reload evaluation results in the archival layout
//! `<root>/<site_id>/eval<k>.json`, with exclusion records in a
//! `eval<k>.exclusions.json` sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use crate::schema::{parse_evaluation, ExclusionRecord, SessionEvaluation};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("refusing to overwrite {0} (use --force)")]
    OverwriteRefused(PathBuf),
    #[error("dataset root not found: {0}")]
    RootNotFound(PathBuf),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn entry_to_appendix_json(entry: &crate::schema::HeuristicEvaluation) -> Value {
    json!({
        "Heuristic": entry.heuristic.canonical_name,
        "SeverityRating": entry.severity.map(|s| s.value()),
        "IssueFound": entry.issue_found,
        "IssueDescription": entry.issue_description,
        "CodeReference": entry.code_reference,
        "CodeSnippet": entry.code_snippet,
        "EvaluationAnswers": entry.evaluation_answers,
        "Recommendation": entry.recommendation,
    })
}

fn atomic_write(path: &Path, contents: &str) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Write one session's entries (Appendix-A wire format) and its exclusion
/// sidecar under `<root>/<site_id>/`. Writes are atomic; existing files are
/// only replaced with `force`.
pub fn save_results(
    session: &SessionEvaluation,
    root: &Path,
    force: bool,
) -> Result<PathBuf, StoreError> {
    let site_dir = root.join(&session.site_id);
    fs::create_dir_all(&site_dir).map_err(io_err(&site_dir))?;
    let eval_path = site_dir.join(format!("eval{}.json", session.session_index));
    if eval_path.exists() && !force {
        return Err(StoreError::OverwriteRefused(eval_path));
    }
    let entries: Vec<Value> = session.entries.iter().map(entry_to_appendix_json).collect();
    let body = serde_json::to_string_pretty(&entries).expect("serialize entries");
    atomic_write(&eval_path, &body)?;

    let sidecar = site_dir.join(format!("eval{}.exclusions.json", session.session_index));
    let side_body =
        serde_json::to_string_pretty(&session.exclusions).expect("serialize exclusions");
    atomic_write(&sidecar, &side_body)?;
    Ok(eval_path)
}

/// A loaded dataset plus the sites flagged as having too few sessions for
/// pairwise analysis.
#[derive(Debug, Default)]
pub struct LoadedDataset {
    pub sessions: Vec<SessionEvaluation>,
    pub insufficient_sites: Vec<String>,
}

fn eval_index_from_name(name: &str) -> Option<u32> {
    name.strip_prefix("eval")?
        .strip_suffix(".json")
        .filter(|rest| !rest.ends_with(".exclusions"))?
        .parse()
        .ok()
}

/// Locate the eval files for one site directory. Accepts both the flat
/// `eval<k>.json` form and the `eval<k>/<anything>.json` subdirectory form
/// used by the published archive.
fn eval_files(site_dir: &Path) -> Result<Vec<(u32, PathBuf)>, StoreError> {
    let mut found = Vec::new();
    for entry in fs::read_dir(site_dir).map_err(io_err(site_dir))? {
        let entry = entry.map_err(io_err(site_dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let path = entry.path();
        if path.is_file() {
            if let Some(idx) = eval_index_from_name(&name) {
                found.push((idx, path));
            }
        } else if path.is_dir() {
            if let Ok(idx) = name.strip_prefix("eval").unwrap_or("").parse::<u32>() {
                let mut inner: Vec<PathBuf> = fs::read_dir(&path)
                    .map_err(io_err(&path))?
                    .filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|p| {
                        p.is_file() && p.extension().map(|e| e == "json").unwrap_or(false)
                    })
                    .collect();
                inner.sort();
                if let Some(first) = inner.into_iter().next() {
                    found.push((idx, first));
                }
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Load every session under every site directory, re-running schema
/// validation. Per-file parse failures become full-session exclusions; a
/// trusted exclusions sidecar, when present, replaces the re-derived records.
pub fn load_dataset(root: &Path) -> Result<LoadedDataset, StoreError> {
    if !root.is_dir() {
        return Err(StoreError::RootNotFound(root.to_path_buf()));
    }
    let mut site_dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(io_err(root))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    site_dirs.sort();

    let mut dataset = LoadedDataset::default();
    for site_dir in site_dirs {
        let site_id = site_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if site_id == "analysis" {
            continue;
        }
        let files = eval_files(&site_dir)?;
        let mut site_sessions = Vec::new();
        for (index, path) in files {
            let raw = fs::read_to_string(&path).map_err(io_err(&path))?;
            let mut session = match parse_evaluation(&raw, &site_id, index) {
                Ok(session) => session,
                Err(err) => SessionEvaluation::unparseable(&site_id, index, &err.to_string()),
            };
            let sidecar = path.with_file_name(format!("eval{index}.exclusions.json"));
            if sidecar.is_file() {
                let side_raw = fs::read_to_string(&sidecar).map_err(io_err(&sidecar))?;
                if let Ok(records) = serde_json::from_str::<Vec<ExclusionRecord>>(&side_raw) {
                    session.exclusions = records;
                }
            }
            site_sessions.push(session);
        }
        if site_sessions.len() == 1 {
            dataset.insufficient_sites.push(site_id);
        }
        dataset.sessions.extend(site_sessions);
    }
    dataset
        .sessions
        .sort_by(|a, b| (&a.site_id, a.session_index).cmp(&(&b.site_id, b.session_index)));
    Ok(dataset)
}
