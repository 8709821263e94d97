//! Command-line entry point: `evaluate`, `validate`, `analyze`, `mock-run`.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use heurikappa::client::{
    run_site, EvaluatorBackend, FaultMode, HttpBackend, MockBackend, SessionConfig,
};
use heurikappa::corpus::{CorpusBundle, FileKind, PayloadLimits, SourceFile};
use heurikappa::report::{build_report, render_report, ReportConfig, ReportFormat};
use heurikappa::schema::{parse_evaluation, validate_dataset, SessionEvaluation};
use heurikappa::stats::{AlphaMetric, WeightScheme};
use heurikappa::store::{load_dataset, save_results};

#[derive(Parser)]
#[command(name = "heurikappa", version, about = "Automated heuristic usability evaluation with inter-rater reliability analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Http,
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WeightsArg {
    Identity,
    Linear,
    Quadratic,
}

impl From<WeightsArg> for WeightScheme {
    fn from(value: WeightsArg) -> Self {
        match value {
            WeightsArg::Identity => WeightScheme::Identity,
            WeightsArg::Linear => WeightScheme::Linear,
            WeightsArg::Quadratic => WeightScheme::Quadratic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlphaArg {
    Nominal,
    Interval,
    Ordinal,
}

impl From<AlphaArg> for AlphaMetric {
    fn from(value: AlphaArg) -> Self {
        match value {
            AlphaArg::Nominal => AlphaMetric::Nominal,
            AlphaArg::Interval => AlphaMetric::Interval,
            AlphaArg::Ordinal => AlphaMetric::Ordinal,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct AnalysisFlags {
    /// Weight scheme for the severity analysis.
    #[arg(long, value_enum, default_value = "quadratic")]
    weights: WeightsArg,
    /// Difference metric for Krippendorff's alpha.
    #[arg(long = "alpha-metric", value_enum, default_value = "nominal")]
    alpha_metric: AlphaArg,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest one site and run N independent evaluator sessions over it.
    Evaluate {
        /// Site source: a directory tree or a ZIP archive.
        site_path: PathBuf,
        /// Dataset root the results are archived under.
        #[arg(long, default_value = "results")]
        root: PathBuf,
        #[arg(long, value_enum, default_value = "mock")]
        backend: BackendKind,
        /// Number of independent sessions (raters). Minimum 2.
        #[arg(long, default_value_t = 3)]
        sessions: u32,
        /// Seed for the mock backend.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum concurrent sessions.
        #[arg(long, default_value_t = 3)]
        parallel: usize,
        /// Overwrite existing eval files.
        #[arg(long)]
        force: bool,
        #[arg(long, default_value = "gpt-4o")]
        model: String,
        #[arg(long, default_value_t = 0.0)]
        temperature: f64,
        #[arg(long, default_value_t = 3)]
        max_retries: u32,
        /// Per-file payload limit, characters.
        #[arg(long, default_value_t = 64_000)]
        max_file_chars: usize,
        /// Total payload limit, characters.
        #[arg(long, default_value_t = 512_000)]
        max_total_chars: usize,
        /// API credential for the HTTP backend.
        #[arg(long, env = "HEURIKAPPA_API_KEY", hide_env_values = true)]
        api_key: Option<String>,
        /// Base URL for the HTTP backend.
        #[arg(long, env = "HEURIKAPPA_BASE_URL", default_value = "https://api.openai.com/v1")]
        base_url: String,
        /// Append request/response audit records to this file.
        #[arg(long)]
        audit_log: Option<PathBuf>,
    },
    /// Print dataset validation accounting.
    Validate {
        #[arg(long, default_value = "results")]
        root: PathBuf,
    },
    /// Compute all agreement statistics and render the report.
    Analyze {
        #[arg(long, default_value = "results")]
        root: PathBuf,
        #[command(flatten)]
        analysis: AnalysisFlags,
    },
    /// Generate a synthetic dataset with the mock backend, then analyze it.
    MockRun {
        #[arg(long, default_value = "results")]
        root: PathBuf,
        #[arg(long, default_value_t = 30)]
        sites: usize,
        #[arg(long, default_value_t = 3)]
        sessions: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replace severity values with malformed text in exactly this many
        /// entries, spread deterministically over the dataset.
        #[arg(long = "inject-faults", default_value_t = 0)]
        inject_faults: usize,
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        analysis: AnalysisFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Evaluate {
            site_path,
            root,
            backend,
            sessions,
            seed,
            parallel,
            force,
            model,
            temperature,
            max_retries,
            max_file_chars,
            max_total_chars,
            api_key,
            base_url,
            audit_log,
        } => cmd_evaluate(EvaluateOpts {
            site_path,
            root,
            backend,
            sessions,
            seed,
            parallel,
            force,
            model,
            temperature,
            max_retries,
            limits: PayloadLimits {
                per_file_chars: max_file_chars,
                total_chars: max_total_chars,
            },
            api_key,
            base_url,
            audit_log,
        }),
        Command::Validate { root } => cmd_validate(&root),
        Command::Analyze { root, analysis } => cmd_analyze(&root, &analysis),
        Command::MockRun {
            root,
            sites,
            sessions,
            seed,
            inject_faults,
            force,
            analysis,
        } => cmd_mock_run(&root, sites, sessions, seed, inject_faults, force, &analysis),
    };
    ExitCode::from(code)
}

struct EvaluateOpts {
    site_path: PathBuf,
    root: PathBuf,
    backend: BackendKind,
    sessions: u32,
    seed: u64,
    parallel: usize,
    force: bool,
    model: String,
    temperature: f64,
    max_retries: u32,
    limits: PayloadLimits,
    api_key: Option<String>,
    base_url: String,
    audit_log: Option<PathBuf>,
}

fn cmd_evaluate(opts: EvaluateOpts) -> u8 {
    if opts.sessions < 2 {
        eprintln!("error: --sessions must be at least 2 (agreement needs two raters)");
        return 1;
    }
    let backend: Box<dyn EvaluatorBackend> = match opts.backend {
        BackendKind::Mock => Box::new(MockBackend::new(opts.seed, FaultMode::None)),
        BackendKind::Http => {
            let key = opts.api_key.unwrap_or_default();
            match HttpBackend::new(
                opts.base_url.clone(),
                key,
                Duration::from_secs(120),
                opts.audit_log.clone(),
            ) {
                Ok(b) => Box::new(b),
                Err(err) => {
                    eprintln!("error: {err}");
                    return 1;
                }
            }
        }
    };
    let bundle = match heurikappa::scan_repository(&opts.site_path) {
        Ok(b) => b,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    let config = SessionConfig {
        model_name: opts.model,
        temperature: opts.temperature,
        max_retries: opts.max_retries,
        ..Default::default()
    };
    let outcome = match run_site(
        &bundle,
        backend.as_ref(),
        opts.sessions,
        &config,
        &opts.limits,
        opts.parallel,
    ) {
        Ok(o) => o,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    let mut exit = 0u8;
    for (index, response) in &outcome.responses {
        let session = match parse_evaluation(&response.raw_text, &outcome.site_id, *index) {
            Ok(session) => session,
            Err(err) => {
                eprintln!("session {index}: {err}");
                SessionEvaluation::unparseable(&outcome.site_id, *index, &err.to_string())
            }
        };
        match save_results(&session, &opts.root, opts.force) {
            Ok(path) => println!(
                "session {index}: {} valid entries, {} exclusions -> {}",
                session.entries.len(),
                session.exclusions.len(),
                path.display()
            ),
            Err(err) => {
                eprintln!("session {index}: {err}");
                exit = 1;
            }
        }
    }
    for (index, err) in &outcome.failures {
        eprintln!("session {index} failed: {err}");
        exit = exit.max(2);
    }
    exit
}

fn cmd_validate(root: &PathBuf) -> u8 {
    let dataset = match load_dataset(root) {
        Ok(d) => d,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    let summary = validate_dataset(&dataset.sessions);
    println!("sites: {}", summary.sites);
    println!("sessions: {}", summary.sessions);
    println!("expected entries: {}", summary.expected_entries);
    println!("parsed entries: {}", summary.parsed_entries);
    println!("valid severities: {}", summary.valid_severities);
    println!("valid issue flags: {}", summary.valid_issue_flags);
    if summary.exclusions_by_reason.is_empty() {
        println!("exclusions: none");
        0
    } else {
        for (reason, count) in &summary.exclusions_by_reason {
            println!("exclusions ({reason}): {count}");
        }
        3
    }
}

fn cmd_analyze(root: &PathBuf, analysis: &AnalysisFlags) -> u8 {
    let dataset = match load_dataset(root) {
        Ok(d) => d,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    for site in &dataset.insufficient_sites {
        eprintln!("warning: site {site} has fewer than 2 sessions; excluded from pairwise analyses");
    }
    let config = ReportConfig {
        weight_scheme: analysis.weights.into(),
        alpha_metric: analysis.alpha_metric.into(),
        dataset_root: root.display().to_string(),
    };
    let report = match build_report(&dataset.sessions, &config) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    let out_dir = root.join("analysis");
    for format in [ReportFormat::Markdown, ReportFormat::Json, ReportFormat::CsvBundle] {
        if let Err(err) = render_report(&report, format, &out_dir) {
            eprintln!("error: {err}");
            return 1;
        }
    }
    println!("analysis written to {}", out_dir.display());
    for pair in &report.pairwise_issue {
        println!(
            "issue agreement eval{}-eval{}: kappa={}, {}/{}",
            pair.pair.0,
            pair.pair.1,
            pair.stats
                .kappa
                .map(|k| format!("{k:.3}"))
                .unwrap_or_else(|| "n/a".to_string()),
            pair.stats.agreed,
            pair.items_total
        );
    }
    0
}

fn synthetic_bundle(site_id: &str) -> CorpusBundle {
    let content = format!("<html><head><title>{site_id}</title></head><body></body></html>");
    let byte_size = content.len() as u64;
    CorpusBundle {
        site_id: site_id.to_string(),
        files: vec![SourceFile {
            path: "index.html".to_string(),
            content,
            kind: FileKind::Html,
            byte_size,
        }],
        total_bytes: byte_size,
    }
}

fn cmd_mock_run(
    root: &PathBuf,
    sites: usize,
    sessions: u32,
    seed: u64,
    inject_faults: usize,
    force: bool,
    analysis: &AnalysisFlags,
) -> u8 {
    if sessions < 2 {
        eprintln!("error: --sessions must be at least 2");
        return 1;
    }
    let site_ids: Vec<String> = (1..=sites).map(|i| format!("site-{i:02}")).collect();

    // deterministic fault plan: first N slots in (site, session, heuristic)
    // lexicographic order
    let mut slots = BTreeSet::new();
    'outer: for site_id in &site_ids {
        for session in 1..=sessions {
            for pos in 0..10usize {
                if slots.len() == inject_faults {
                    break 'outer;
                }
                slots.insert((site_id.clone(), session, pos));
            }
        }
    }
    if slots.len() < inject_faults {
        eprintln!(
            "error: cannot inject {inject_faults} faults into {} entries",
            site_ids.len() * sessions as usize * 10
        );
        return 1;
    }
    let backend = MockBackend::new(seed, FaultMode::None).with_malform_slots(slots);

    let config = SessionConfig::default();
    for site_id in &site_ids {
        let bundle = synthetic_bundle(site_id);
        let outcome = match run_site(
            &bundle,
            &backend,
            sessions,
            &config,
            &PayloadLimits::default(),
            sessions as usize,
        ) {
            Ok(o) => o,
            Err(err) => {
                eprintln!("error: {err}");
                return 1;
            }
        };
        for (index, response) in &outcome.responses {
            let session = match parse_evaluation(&response.raw_text, site_id, *index) {
                Ok(s) => s,
                Err(err) => SessionEvaluation::unparseable(site_id, *index, &err.to_string()),
            };
            if let Err(err) = save_results(&session, root, force) {
                eprintln!("error: {err}");
                return 1;
            }
        }
    }
    println!(
        "generated {} sites x {} sessions under {}",
        sites,
        sessions,
        root.display()
    );
    cmd_analyze(root, analysis)
}
