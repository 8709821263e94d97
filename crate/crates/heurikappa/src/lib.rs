//! heurikappa: automated heuristic usability evaluation of web-application
//! source code via a pluggable evaluator backend, with a full inter-rater
//! reliability analysis over repeated independent sessions.
//!
//! The pipeline has two halves: collection (ingest a site, run N independent
//! evaluator sessions, validate and archive the JSON output) and analysis
//! (agreement coefficients over the archived dataset, rendered as tables and
//! figure data).

pub mod catalog;
pub mod client;
pub mod corpus;
pub mod report;
pub mod schema;
pub mod stats;
pub mod store;

pub use catalog::{build_instructions, canonicalize_heuristic, heuristic_catalog};
pub use client::{evaluate_session, run_site, EvaluatorBackend, FaultMode, MockBackend};
pub use corpus::{filter_frontend, package_payload, scan_repository};
pub use report::{build_report, emit_figure_data, render_report, AgreementReport};
pub use schema::{parse_evaluation, validate_dataset, SessionEvaluation};
pub use stats::{
    cohen_kappa, fleiss_kappa, issue_frequency, krippendorff_alpha, multi_rater_issue_agreement,
    pairwise_issue_agreement, pairwise_severity_agreement, per_heuristic_kappa,
    per_site_weighted_kappa, severity_histogram, weighted_kappa, RatingsTable,
};
pub use store::{load_dataset, save_results};
