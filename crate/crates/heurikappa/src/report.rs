//! Render analysis results into markdown, JSON, and CSV artifacts.
//!
//! The renderer never recomputes a statistic: every numeric cell comes from a
//! field of [`AgreementReport`], which is assembled once by [`build_report`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::schema::{validate_dataset, SessionEvaluation, ValidationSummary};
use crate::stats::{
    issue_frequency, multi_rater_issue_agreement, pairwise_issue_agreement,
    pairwise_severity_agreement, per_heuristic_kappa, per_site_weighted_kappa, session_indices,
    severity_histogram, AlphaMetric, MultiRaterStats, PairAgreement, SeverityHistogram,
    StatsError, WeightScheme,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Markdown,
    Json,
    CsvBundle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
    pub dataset_root: String,
    pub weight_scheme: WeightScheme,
    pub alpha_metric: AlphaMetric,
    pub n_sessions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerHeuristicRow {
    pub heuristic: String,
    /// One cell per session pair, in pair order; `None` marks an undefined
    /// kappa.
    pub kappas: Vec<PairKappaCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairKappaCell {
    pub pair: (u32, u32),
    pub kappa: Option<f64>,
    pub p_e: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerSiteKappaRow {
    pub site_id: String,
    pub kappa: Option<f64>,
    pub defined: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub severity_histogram: SeverityHistogram,
    pub pairwise_issue: Vec<PairAgreement>,
    pub multi_rater: MultiRaterStats,
    pub pairwise_severity: Vec<PairAgreement>,
    /// Weighted kappa per pair under every scheme, so replication runs can
    /// state which scheme reproduces published values.
    pub scheme_comparison: BTreeMap<String, Vec<PairKappaCell>>,
    pub per_heuristic: Vec<PerHeuristicRow>,
    /// Per-site weighted kappa for the first session pair.
    pub per_site_weighted: Vec<PerSiteKappaRow>,
    pub per_site_pair: (u32, u32),
    pub issue_frequency: f64,
    pub validation: ValidationSummary,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub weight_scheme: WeightScheme,
    pub alpha_metric: AlphaMetric,
    pub dataset_root: String,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            weight_scheme: WeightScheme::Quadratic,
            alpha_metric: AlphaMetric::Nominal,
            dataset_root: String::new(),
        }
    }
}

fn config_hash(config: &ReportConfig, n_sessions: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config.weight_scheme.as_str());
    hasher.update(config.alpha_metric.as_str());
    hasher.update("exclusion_policy=severity_split_keep_binary");
    hasher.update(n_sessions.to_le_bytes());
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Run every statistic over the dataset and assemble the full report object.
pub fn build_report(
    dataset: &[SessionEvaluation],
    config: &ReportConfig,
) -> Result<AgreementReport, ReportError> {
    let raters = session_indices(dataset);
    let pairwise_issue = pairwise_issue_agreement(dataset)?;
    let multi_rater = multi_rater_issue_agreement(dataset, config.alpha_metric)?;
    let pairwise_severity = pairwise_severity_agreement(dataset, config.weight_scheme)?;

    let mut scheme_comparison = BTreeMap::new();
    for scheme in WeightScheme::ALL {
        let rows = pairwise_severity_agreement(dataset, scheme)?
            .into_iter()
            .map(|p| PairKappaCell {
                pair: p.pair,
                kappa: p.stats.kappa,
                p_e: Some(p.stats.p_e),
            })
            .collect();
        scheme_comparison.insert(scheme.as_str().to_string(), rows);
    }

    let per_heuristic = per_heuristic_kappa(dataset)
        .into_iter()
        .map(|(heuristic, cells)| PerHeuristicRow {
            heuristic: heuristic.canonical_name.to_string(),
            kappas: cells
                .into_iter()
                .map(|(pair, stats)| PairKappaCell {
                    pair,
                    kappa: stats.as_ref().and_then(|s| s.kappa),
                    p_e: stats.as_ref().map(|s| s.p_e),
                })
                .collect(),
        })
        .collect();

    let per_site_pair = (raters[0], raters[1]);
    let per_site_weighted = per_site_weighted_kappa(dataset, per_site_pair, config.weight_scheme)
        .into_iter()
        .map(|(site_id, stats)| match stats.as_ref().and_then(|s| s.kappa) {
            Some(kappa) => PerSiteKappaRow {
                site_id,
                kappa: Some(kappa),
                defined: true,
                note: String::new(),
            },
            None => PerSiteKappaRow {
                site_id,
                kappa: None,
                defined: false,
                note: "undefined (degenerate ratings), excluded from histogram".to_string(),
            },
        })
        .collect();

    let validation = validate_dataset(dataset);
    let provenance = Provenance {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(config, raters.len()),
        dataset_root: config.dataset_root.clone(),
        weight_scheme: config.weight_scheme,
        alpha_metric: config.alpha_metric,
        n_sessions: raters.len(),
    };

    Ok(AgreementReport {
        severity_histogram: severity_histogram(dataset),
        pairwise_issue,
        multi_rater,
        pairwise_severity,
        scheme_comparison,
        per_heuristic,
        per_site_weighted,
        per_site_pair,
        issue_frequency: issue_frequency(dataset),
        validation,
        provenance,
    })
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn fmt_kappa3(kappa: Option<f64>, p_e: Option<f64>) -> String {
    match kappa {
        Some(k) => format!("{k:.3}"),
        None => match p_e {
            Some(p) if (p - 1.0).abs() < 1e-12 => "n/a (p_e = 1)".to_string(),
            _ => "n/a".to_string(),
        },
    }
}

fn fmt_kappa6(kappa: Option<f64>) -> String {
    match kappa {
        Some(k) => format!("{k:.6}"),
        None => "n/a (expected disagreement = 0)".to_string(),
    }
}

fn pair_name(pair: (u32, u32)) -> String {
    format!("eval{}-eval{}", pair.0, pair.1)
}

fn paper_percent(p: &PairAgreement) -> f64 {
    if p.items_total == 0 {
        0.0
    } else {
        100.0 * p.stats.agreed as f64 / p.items_total as f64
    }
}

fn render_markdown(report: &AgreementReport) -> String {
    let mut out = String::new();
    let push = |out: &mut String, line: &str| {
        out.push_str(line);
        out.push('\n');
    };
    push(&mut out, "# Heuristic Evaluation Agreement Report");
    push(&mut out, "");
    push(
        &mut out,
        &format!(
            "- tool version: {}\n- config hash: {}\n- dataset root: {}\n- sessions per site: {}\n- weight scheme: {}\n- alpha metric: {}",
            report.provenance.tool_version,
            report.provenance.config_hash,
            report.provenance.dataset_root,
            report.provenance.n_sessions,
            report.provenance.weight_scheme.as_str(),
            report.provenance.alpha_metric.as_str(),
        ),
    );

    push(&mut out, "\n## Distribution of Severity Ratings");
    push(&mut out, "");
    push(&mut out, "| Severity Level | Count |");
    push(&mut out, "| --- | --- |");
    let labels = ["0 (No Issue)", "1 (Cosmetic)", "2 (Minor)", "3 (Major)", "4 (Catastrophic)"];
    for (label, count) in labels.iter().zip(report.severity_histogram.counts) {
        push(&mut out, &format!("| {label} | {count} |"));
    }
    push(
        &mut out,
        &format!(
            "\nTotal valid severity ratings: {} (excluded: {})",
            report.severity_histogram.total(),
            report.severity_histogram.excluded
        ),
    );

    push(&mut out, "\n## Unweighted Cohen's Kappa Across All Issue Pairs");
    push(&mut out, "");
    push(&mut out, "| Comparison | Cohen's kappa | Agreement | Exact Percent |");
    push(&mut out, "| --- | --- | --- | --- |");
    for pair in &report.pairwise_issue {
        push(
            &mut out,
            &format!(
                "| {} | {} | {}/{} | {:.1} |",
                pair_name(pair.pair),
                fmt_kappa3(pair.stats.kappa, Some(pair.stats.p_e)),
                pair.stats.agreed,
                pair.items_total,
                paper_percent(pair),
            ),
        );
    }

    push(&mut out, "\n## Multi-Rater Agreement Metrics");
    push(&mut out, "");
    push(&mut out, "| Metric | Value |");
    push(&mut out, "| --- | --- |");
    push(
        &mut out,
        &format!(
            "| Krippendorff's alpha | {} |",
            report
                .multi_rater
                .krippendorff_alpha
                .map(|a| format!("{a:.6}"))
                .unwrap_or_else(|| "n/a (D_e = 0)".to_string())
        ),
    );
    push(
        &mut out,
        &format!(
            "| Fleiss's kappa | {} |",
            fmt_kappa3(report.multi_rater.fleiss_kappa, Some(report.multi_rater.p_bar_e))
        ),
    );

    push(
        &mut out,
        &format!(
            "\n## Weighted Cohen's Kappa Across All Severity Pairs ({} weights)",
            report.provenance.weight_scheme.as_str()
        ),
    );
    push(&mut out, "");
    push(&mut out, "| Comparison | kappa_w | Agreement | Exact Percent |");
    push(&mut out, "| --- | --- | --- | --- |");
    for pair in &report.pairwise_severity {
        push(
            &mut out,
            &format!(
                "| {} | {} | {}/{} | {:.1} |",
                pair_name(pair.pair),
                fmt_kappa6(pair.stats.kappa),
                pair.stats.agreed,
                pair.items_total,
                paper_percent(pair),
            ),
        );
    }

    push(&mut out, "\n### Weight Scheme Comparison");
    push(&mut out, "");
    push(&mut out, "| Scheme | Comparison | kappa_w |");
    push(&mut out, "| --- | --- | --- |");
    for (scheme, rows) in &report.scheme_comparison {
        for cell in rows {
            push(
                &mut out,
                &format!(
                    "| {scheme} | {} | {} |",
                    pair_name(cell.pair),
                    fmt_kappa6(cell.kappa)
                ),
            );
        }
    }

    push(&mut out, "\n## Cohen's Kappa Values by Heuristic Across Evaluation Pairs");
    push(&mut out, "");
    if let Some(first) = report.per_heuristic.first() {
        let headers: Vec<String> = first
            .kappas
            .iter()
            .map(|c| format!("kappa ({}-{})", c.pair.0, c.pair.1))
            .collect();
        push(&mut out, &format!("| Heuristic | {} |", headers.join(" | ")));
        push(
            &mut out,
            &format!("| --- |{}", " --- |".repeat(first.kappas.len())),
        );
    }
    for row in &report.per_heuristic {
        let cells: Vec<String> = row
            .kappas
            .iter()
            .map(|c| fmt_kappa3(c.kappa, c.p_e))
            .collect();
        push(
            &mut out,
            &format!("| {} | {} |", row.heuristic, cells.join(" | ")),
        );
    }

    push(
        &mut out,
        &format!(
            "\n## Weighted Kappa Per Site ({})",
            pair_name(report.per_site_pair)
        ),
    );
    push(&mut out, "");
    push(&mut out, "| Site | kappa_w |");
    push(&mut out, "| --- | --- |");
    for row in &report.per_site_weighted {
        let cell = match row.kappa {
            Some(k) => format!("{k:.3}"),
            None => format!("n/a ({})", row.note),
        };
        push(&mut out, &format!("| {} | {cell} |", row.site_id));
    }

    push(&mut out, "\n## Issue Frequency");
    push(
        &mut out,
        &format!(
            "\nFraction of evaluations flagging an issue: {:.4}",
            report.issue_frequency
        ),
    );

    push(&mut out, "\n## Validation Summary");
    push(&mut out, "");
    push(
        &mut out,
        &format!(
            "- sites: {}\n- sessions: {}\n- expected entries: {}\n- parsed entries: {}\n- valid severities: {}\n- valid issue flags: {}",
            report.validation.sites,
            report.validation.sessions,
            report.validation.expected_entries,
            report.validation.parsed_entries,
            report.validation.valid_severities,
            report.validation.valid_issue_flags,
        ),
    );
    if report.validation.exclusions_by_reason.is_empty() {
        push(&mut out, "- exclusions: none");
    } else {
        for (reason, count) in &report.validation.exclusions_by_reason {
            push(&mut out, &format!("- exclusions ({reason}): {count}"));
        }
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, ReportError> {
    let file = fs::File::create(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn render_csv_bundle(report: &AgreementReport, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let mut written = Vec::new();

    let path = dir.join("table1_severity.csv");
    {
        let mut w = csv_writer(&path)?;
        w.write_record(["severity_level", "label", "count"]).map_err(csv_err(&path))?;
        let labels = ["No Issue", "Cosmetic", "Minor", "Major", "Catastrophic"];
        for (level, (label, count)) in labels.iter().zip(report.severity_histogram.counts).enumerate()
        {
            w.write_record([level.to_string(), label.to_string(), count.to_string()])
                .map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| ReportError::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    written.push(path);

    let path = dir.join("table2_issue_pairs.csv");
    {
        let mut w = csv_writer(&path)?;
        w.write_record(["comparison", "kappa", "agreed", "total", "exact_percent"])
            .map_err(csv_err(&path))?;
        for pair in &report.pairwise_issue {
            w.write_record([
                pair_name(pair.pair),
                pair.stats.kappa.map(|k| format!("{k:.3}")).unwrap_or_default(),
                pair.stats.agreed.to_string(),
                pair.items_total.to_string(),
                format!("{:.1}", paper_percent(pair)),
            ])
            .map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| ReportError::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    written.push(path);

    let path = dir.join("table3_multi_rater.csv");
    {
        let mut w = csv_writer(&path)?;
        w.write_record(["metric", "value"]).map_err(csv_err(&path))?;
        w.write_record([
            "krippendorff_alpha".to_string(),
            report
                .multi_rater
                .krippendorff_alpha
                .map(|a| format!("{a:.6}"))
                .unwrap_or_default(),
        ])
        .map_err(csv_err(&path))?;
        w.write_record([
            "fleiss_kappa".to_string(),
            report
                .multi_rater
                .fleiss_kappa
                .map(|k| format!("{k:.3}"))
                .unwrap_or_default(),
        ])
        .map_err(csv_err(&path))?;
        w.flush().map_err(|e| ReportError::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    written.push(path);

    let path = dir.join("table4_severity_pairs.csv");
    {
        let mut w = csv_writer(&path)?;
        w.write_record(["comparison", "scheme", "kappa_w", "agreed", "total", "exact_percent"])
            .map_err(csv_err(&path))?;
        for pair in &report.pairwise_severity {
            w.write_record([
                pair_name(pair.pair),
                report.provenance.weight_scheme.as_str().to_string(),
                pair.stats.kappa.map(|k| format!("{k:.6}")).unwrap_or_default(),
                pair.stats.agreed.to_string(),
                pair.items_total.to_string(),
                format!("{:.1}", paper_percent(pair)),
            ])
            .map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| ReportError::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    written.push(path);

    let path = dir.join("table5_per_heuristic.csv");
    {
        let mut w = csv_writer(&path)?;
        let mut header = vec!["heuristic".to_string()];
        if let Some(first) = report.per_heuristic.first() {
            for cell in &first.kappas {
                header.push(format!("kappa_{}_{}", cell.pair.0, cell.pair.1));
            }
        }
        w.write_record(&header).map_err(csv_err(&path))?;
        for row in &report.per_heuristic {
            let mut record = vec![row.heuristic.clone()];
            for cell in &row.kappas {
                record.push(cell.kappa.map(|k| format!("{k:.3}")).unwrap_or_default());
            }
            w.write_record(&record).map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| ReportError::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    written.push(path);

    written.push(emit_figure_data(report, Figure::IssueDistribution, dir)?);
    written.push(emit_figure_data(report, Figure::PerSiteKappa, dir)?);
    Ok(written)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    IssueDistribution,
    PerSiteKappa,
}

/// Emit plot-ready CSV data for one of the two figures.
pub fn emit_figure_data(
    report: &AgreementReport,
    figure: Figure,
    dir: &Path,
) -> Result<PathBuf, ReportError> {
    match figure {
        Figure::IssueDistribution => {
            let path = dir.join("fig1_issue_distribution.csv");
            let mut w = csv_writer(&path)?;
            w.write_record(["category", "count"]).map_err(csv_err(&path))?;
            let flagged = (report.issue_frequency
                * report.validation.valid_issue_flags as f64)
                .round() as usize;
            let not_flagged = report.validation.valid_issue_flags - flagged;
            w.write_record(["issue_found".to_string(), flagged.to_string()])
                .map_err(csv_err(&path))?;
            w.write_record(["no_issue".to_string(), not_flagged.to_string()])
                .map_err(csv_err(&path))?;
            w.flush().map_err(|e| ReportError::Io {
                path: path.clone(),
                source: e,
            })?;
            Ok(path)
        }
        Figure::PerSiteKappa => {
            let path = dir.join("fig2_per_site_kappa.csv");
            let mut w = csv_writer(&path)?;
            w.write_record(["site_id", "kappa", "defined_flag"]).map_err(csv_err(&path))?;
            for row in &report.per_site_weighted {
                w.write_record([
                    row.site_id.clone(),
                    row.kappa.map(|k| format!("{k:.6}")).unwrap_or_default(),
                    row.defined.to_string(),
                ])
                .map_err(csv_err(&path))?;
            }
            w.flush().map_err(|e| ReportError::Io {
                path: path.clone(),
                source: e,
            })?;
            Ok(path)
        }
    }
}

/// Render the report into the target directory. Returns the files written.
pub fn render_report(
    report: &AgreementReport,
    format: ReportFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    match format {
        ReportFormat::Markdown => {
            let path = dir.join("report.md");
            write_file(&path, &render_markdown(report))?;
            Ok(vec![path])
        }
        ReportFormat::Json => {
            let path = dir.join("report.json");
            let body = serde_json::to_string_pretty(report).expect("serialize report");
            write_file(&path, &body)?;
            Ok(vec![path])
        }
        ReportFormat::CsvBundle => render_csv_bundle(report, dir),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::{run_site, FaultMode, MockBackend, SessionConfig};
    use crate::corpus::{CorpusBundle, FileKind, PayloadLimits, SourceFile};
    use crate::schema::parse_evaluation;

    fn mock_dataset(sites: usize) -> Vec<SessionEvaluation> {
        let backend = MockBackend::new(11, FaultMode::None);
        let mut sessions = Vec::new();
        for i in 0..sites {
            let site_id = format!("site-{i:02}");
            let bundle = CorpusBundle {
                site_id: site_id.clone(),
                files: vec![SourceFile {
                    path: "index.html".to_string(),
                    content: "<html></html>".to_string(),
                    kind: FileKind::Html,
                    byte_size: 13,
                }],
                total_bytes: 13,
            };
            let outcome = run_site(
                &bundle,
                &backend,
                3,
                &SessionConfig::default(),
                &PayloadLimits::default(),
                1,
            )
            .unwrap();
            for (idx, response) in outcome.responses {
                sessions.push(parse_evaluation(&response.raw_text, &site_id, idx).unwrap());
            }
        }
        sessions
    }

    #[test]
    fn report_builds_and_renders_all_formats() {
        let dataset = mock_dataset(4);
        let report = build_report(&dataset, &ReportConfig::default()).unwrap();
        assert_eq!(report.pairwise_issue.len(), 3);
        assert_eq!(report.per_heuristic.len(), 10);
        assert_eq!(report.per_site_weighted.len(), 4);

        let dir = tempfile::tempdir().unwrap();
        for format in [ReportFormat::Markdown, ReportFormat::Json, ReportFormat::CsvBundle] {
            let files = render_report(&report, format, dir.path()).unwrap();
            assert!(!files.is_empty());
            for f in files {
                assert!(f.is_file());
            }
        }
    }

    #[test]
    fn json_roundtrip_is_lossless() {
        let dataset = mock_dataset(3);
        let report = build_report(&dataset, &ReportConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = render_report(&report, ReportFormat::Json, dir.path()).unwrap();
        let body = fs::read_to_string(&files[0]).unwrap();
        let parsed: AgreementReport = serde_json::from_str(&body).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn rendering_is_deterministic() {
        let dataset = mock_dataset(3);
        let report = build_report(&dataset, &ReportConfig::default()).unwrap();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        for format in [ReportFormat::Markdown, ReportFormat::Json, ReportFormat::CsvBundle] {
            let f1 = render_report(&report, format, d1.path()).unwrap();
            let f2 = render_report(&report, format, d2.path()).unwrap();
            for (a, b) in f1.iter().zip(&f2) {
                assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
            }
        }
    }

    #[test]
    fn undefined_kappa_rendered_with_reason() {
        // single site with identical constant severities across sessions
        let raw: Vec<serde_json::Value> = crate::catalog::heuristic_catalog()
            .iter()
            .map(|h| {
                serde_json::json!({
                    "Heuristic": h.canonical_name,
                    "SeverityRating": 1,
                    "IssueFound": true,
                })
            })
            .collect();
        let text = serde_json::to_string(&raw).unwrap();
        let dataset: Vec<SessionEvaluation> = (1..=3)
            .map(|i| parse_evaluation(&text, "flat", i).unwrap())
            .collect();
        let report = build_report(&dataset, &ReportConfig::default()).unwrap();
        let md = render_markdown(&report);
        assert!(md.contains("n/a (p_e = 1)"), "markdown was:\n{md}");
        assert!(!report.per_site_weighted[0].defined);
    }

    #[test]
    fn markdown_row_format_matches_table_layout() {
        let dataset = mock_dataset(3);
        let report = build_report(&dataset, &ReportConfig::default()).unwrap();
        let md = render_markdown(&report);
        let pair = &report.pairwise_issue[0];
        let expected = format!(
            "eval1-eval2 | {} | {}/{} | {:.1}",
            fmt_kappa3(pair.stats.kappa, Some(pair.stats.p_e)),
            pair.stats.agreed,
            pair.items_total,
            paper_percent(pair),
        );
        assert!(md.contains(&expected), "missing row {expected:?} in:\n{md}");
    }
}
