//! Repository ingestion: turn a directory tree or ZIP archive into a bounded,
//! filtered payload of front-end source files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("path not found: {0}")]
    PathNotFound(PathBuf),
    #[error("corrupt archive {path}: {source}")]
    ArchiveCorrupt {
        path: PathBuf,
        #[source]
        source: zip::result::ZipError,
    },
    #[error("path traversal entry in archive: {0:?}")]
    PathTraversal(String),
    #[error("bundle is empty, nothing to package")]
    EmptyBundle,
    #[error("payload limits too small to fit any file")]
    LimitTooSmall,
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileKind {
    Html,
    Css,
    Js,
    Other,
}

/// One source file inside a corpus. `path` is always relative with forward
/// slashes; binary files carry `kind: Other` and empty content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: String,
    pub content: String,
    pub kind: FileKind,
    pub byte_size: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusBundle {
    pub site_id: String,
    pub files: Vec<SourceFile>,
    pub total_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub case_insensitive_extensions: bool,
    /// When set, `filter_frontend` keeps every file regardless of kind.
    pub include_all: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            case_insensitive_extensions: true,
            include_all: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PayloadLimits {
    pub per_file_chars: usize,
    pub total_chars: usize,
}

impl Default for PayloadLimits {
    fn default() -> Self {
        Self {
            per_file_chars: 64_000,
            total_chars: 512_000,
        }
    }
}

/// Concatenated payload text plus a manifest of what was truncated or omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationPayload {
    pub site_id: String,
    pub text: String,
    pub manifest: PayloadManifest,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PayloadManifest {
    pub included: Vec<String>,
    pub truncated: Vec<String>,
    pub omitted: Vec<String>,
}

const TRUNCATION_MARKER: &str = "\n==== TRUNCATED ====\n";

fn classify(path: &str, case_insensitive: bool) -> FileKind {
    let ext = match path.rsplit_once('.') {
        Some((_, e)) => e,
        None => return FileKind::Other,
    };
    let lowered;
    let ext = if case_insensitive {
        lowered = ext.to_ascii_lowercase();
        lowered.as_str()
    } else {
        ext
    };
    match ext {
        "html" | "htm" => FileKind::Html,
        "css" => FileKind::Css,
        "js" | "mjs" => FileKind::Js,
        _ => FileKind::Other,
    }
}

fn site_id_from_path(root: &Path) -> String {
    root.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "site".to_string())
}

fn has_traversal(rel: &str) -> bool {
    rel.starts_with('/')
        || rel.starts_with('\\')
        || Path::new(rel)
            .components()
            .any(|c| matches!(c, Component::ParentDir | Component::RootDir | Component::Prefix(_)))
}

fn make_source_file(rel_path: String, bytes: Vec<u8>) -> SourceFile {
    let byte_size = bytes.len() as u64;
    match String::from_utf8(bytes) {
        Ok(content) => {
            let kind = classify(&rel_path, true);
            SourceFile {
                path: rel_path,
                content,
                kind,
                byte_size,
            }
        }
        // undecodable: keep an audit entry, drop the bytes
        Err(_) => SourceFile {
            path: rel_path,
            content: String::new(),
            kind: FileKind::Other,
            byte_size,
        },
    }
}

fn finish_bundle(site_id: String, mut files: Vec<SourceFile>) -> CorpusBundle {
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let total_bytes = files.iter().map(|f| f.byte_size).sum();
    CorpusBundle {
        site_id,
        files,
        total_bytes,
    }
}

/// Read every regular file under a directory or inside a ZIP archive into a
/// deterministic, lexicographically ordered bundle.
pub fn scan_repository(root: &Path) -> Result<CorpusBundle, CorpusError> {
    if !root.exists() {
        return Err(CorpusError::PathNotFound(root.to_path_buf()));
    }
    if root.is_file() {
        scan_archive(root)
    } else {
        scan_directory(root)
    }
}

fn scan_directory(root: &Path) -> Result<CorpusBundle, CorpusError> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(root) {
        let entry = entry.map_err(|e| CorpusError::Io {
            path: root.to_path_buf(),
            source: e.into(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walkdir yields paths under root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let bytes = fs::read(entry.path()).map_err(|e| CorpusError::Io {
            path: entry.path().to_path_buf(),
            source: e,
        })?;
        files.push(make_source_file(rel, bytes));
    }
    Ok(finish_bundle(site_id_from_path(root), files))
}

fn scan_archive(path: &Path) -> Result<CorpusBundle, CorpusError> {
    let file = fs::File::open(path).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut archive =
        zip::ZipArchive::new(file).map_err(|e| CorpusError::ArchiveCorrupt {
            path: path.to_path_buf(),
            source: e,
        })?;
    let mut files = Vec::new();
    for i in 0..archive.len() {
        let mut entry = archive.by_index(i).map_err(|e| CorpusError::ArchiveCorrupt {
            path: path.to_path_buf(),
            source: e,
        })?;
        if entry.is_dir() {
            continue;
        }
        let name = entry.name().to_string();
        if has_traversal(&name) {
            return Err(CorpusError::PathTraversal(name));
        }
        let mut bytes = Vec::with_capacity(entry.size() as usize);
        entry.read_to_end(&mut bytes).map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        files.push(make_source_file(name, bytes));
    }
    Ok(finish_bundle(site_id_from_path(path), files))
}

/// Keep only files whose kind is html, css, or js (unless `include_all`).
/// Idempotent; preserves ordering and site_id.
pub fn filter_frontend(bundle: &CorpusBundle, config: &IngestConfig) -> CorpusBundle {
    let files: Vec<SourceFile> = bundle
        .files
        .iter()
        .filter(|f| {
            config.include_all
                || matches!(
                    classify(&f.path, config.case_insensitive_extensions),
                    FileKind::Html | FileKind::Css | FileKind::Js
                )
        })
        .cloned()
        .collect();
    finish_bundle(bundle.site_id.clone(), files)
}

/// Concatenate the bundle into a single payload text with per-file headers,
/// applying per-file and total character limits. Deterministic.
pub fn package_payload(
    bundle: &CorpusBundle,
    limits: &PayloadLimits,
) -> Result<EvaluationPayload, CorpusError> {
    if bundle.files.is_empty() {
        return Err(CorpusError::EmptyBundle);
    }
    let mut text = String::new();
    let mut manifest = PayloadManifest::default();
    for file in &bundle.files {
        let header = format!("==== FILE: {} ====\n", file.path);
        let budget = limits.total_chars.saturating_sub(text.len());
        if budget < header.len() + 1 {
            manifest.omitted.push(file.path.clone());
            continue;
        }
        let body_budget = (budget - header.len()).min(limits.per_file_chars);
        if file.content.len() <= body_budget {
            text.push_str(&header);
            text.push_str(&file.content);
            if !file.content.ends_with('\n') {
                text.push('\n');
            }
            manifest.included.push(file.path.clone());
        } else {
            let keep = body_budget.saturating_sub(TRUNCATION_MARKER.len());
            if keep == 0 {
                manifest.omitted.push(file.path.clone());
                continue;
            }
            // cut on a char boundary at or below the budget
            let mut cut = keep;
            while !file.content.is_char_boundary(cut) {
                cut -= 1;
            }
            text.push_str(&header);
            text.push_str(&file.content[..cut]);
            text.push_str(TRUNCATION_MARKER);
            manifest.truncated.push(file.path.clone());
        }
    }
    if manifest.included.is_empty() && manifest.truncated.is_empty() {
        return Err(CorpusError::LimitTooSmall);
    }
    debug_assert!(text.len() <= limits.total_chars);
    Ok(EvaluationPayload {
        site_id: bundle.site_id.clone(),
        text,
        manifest,
    })
}

/// Per-file character counts, used in session summaries.
pub fn file_stats(bundle: &CorpusBundle) -> BTreeMap<&str, u64> {
    bundle
        .files
        .iter()
        .map(|f| (f.path.as_str(), f.byte_size))
        .collect()
}
