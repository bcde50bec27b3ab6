//! End-to-end campaigns: chess scans, genetic search, forecast runs and
//! reports, with resumable record files and a run manifest.
//!
//! Output directory layout:
//!
//! | file | content |
//! |---|---|
//! | `records.jsonl` | one violation record per line |
//! | `inputs.jsonl` | input id to FEN / question text |
//! | `summary.csv` | per-check threshold fractions |
//! | `manifest.json` | seed, engine identity, options, counts, timestamps |
//! | `errors.jsonl` | per-case failures and skips with reasons |
//! | `ga_stats.csv` | genetic search only: per-generation fitness |
//! | `responses.jsonl` | forecast runs only: raw oracle replies |

mod chess;
mod forecast;
mod pool;

pub use chess::{sweep_nodes, write_sweep_csv, NodeSweepRow};

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::chess::ChessError;
use crate::consistency::{
    load_records, summarize, write_summary_csv, CheckKind, CheckSummary, ConsistencyError, DEFAULT_CHESS_THRESHOLDS,
    DEFAULT_STRONG_EPSILON,
};
use crate::forecast::{ForecastError, OracleConfig, ScriptedReply};
use crate::ga::GaConfig;
use crate::uci::{EngineConfig, EngineError};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const INPUTS_FILE: &str = "inputs.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ERRORS_FILE: &str = "errors.jsonl";
pub const GA_STATS_FILE: &str = "ga_stats.csv";
pub const RESPONSES_FILE: &str = "responses.jsonl";

/// Default abort threshold on the per-case failure rate.
pub const DEFAULT_MAX_FAILURE_RATE: f64 = 0.01;

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Chess(#[from] ChessError),
    #[error(transparent)]
    Records(#[from] ConsistencyError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CampaignError + '_ {
    move |source| CampaignError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PositionSource {
    /// FEN list, one per line, `#` comments allowed.
    File { path: PathBuf },
    /// Seeded synthetic pawnless boards.
    RandomPawnless { count: usize },
}

fn default_checks() -> Vec<CheckKind> {
    CheckKind::CHESS.to_vec()
}

fn default_thresholds() -> Vec<f64> {
    DEFAULT_CHESS_THRESHOLDS.to_vec()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChessScanConfig {
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckKind>,
    pub positions: PositionSource,
    pub engine: EngineConfig,
    /// Overrides `engine.node_limit`.
    #[serde(default)]
    pub node_limit: Option<u64>,
    /// Maximum number of distinct positions taken from the source.
    #[serde(default)]
    pub sample_cap: Option<usize>,
    /// Skip positions failing the middle-game filter for the mirroring,
    /// forced-move and recommended-move checks.
    #[serde(default = "default_true")]
    pub middle_game_only: bool,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
}

impl ChessScanConfig {
    pub fn node_limit(&self) -> u64 {
        self.node_limit.unwrap_or(self.engine.node_limit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChessEvolveConfig {
    #[serde(default)]
    pub ga: GaConfig,
    pub engine: EngineConfig,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRunConfig {
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Tuple file; the bundled synthetic sample when absent.
    #[serde(default)]
    pub tuples: Option<PathBuf>,
    /// Scripted replies (question text to reply list) used instead of an
    /// HTTP endpoint.
    #[serde(default)]
    pub scripted_oracle: Option<PathBuf>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
}

fn default_epsilon() -> f64 {
    DEFAULT_STRONG_EPSILON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub records: PathBuf,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    ChessScan(ChessScanConfig),
    ChessEvolve(ChessEvolveConfig),
    ForecastRun(ForecastRunConfig),
    Report(ReportConfig),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::ChessScan(_) => "chess-scan",
            Mode::ChessEvolve(_) => "chess-evolve",
            Mode::ForecastRun(_) => "forecast-run",
            Mode::Report(_) => "report",
        }
    }
}

fn default_workers() -> usize {
    1
}

fn default_max_failure_rate() -> f64 {
    DEFAULT_MAX_FAILURE_RATE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub output_dir: PathBuf,
    /// Continue an interrupted run, skipping case ids already recorded.
    #[serde(default = "default_true")]
    pub resume: bool,
    #[serde(default = "default_max_failure_rate")]
    pub max_failure_rate: f64,
}

impl CampaignConfig {
    pub fn new(mode: Mode, output_dir: impl Into<PathBuf>) -> Self {
        CampaignConfig {
            mode,
            seed: 0,
            workers: 1,
            output_dir: output_dir.into(),
            resume: true,
            max_failure_rate: DEFAULT_MAX_FAILURE_RATE,
        }
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.workers == 0 {
            return Err(CampaignError::Config("worker count must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.max_failure_rate) {
            return Err(CampaignError::Config("max_failure_rate must lie in [0, 1]".into()));
        }
        let must_exist = |p: &Path, what: &str| {
            if p.exists() {
                Ok(())
            } else {
                Err(CampaignError::Config(format!("{what} `{}` does not exist", p.display())))
            }
        };
        match &self.mode {
            Mode::ChessScan(c) => {
                if c.checks.is_empty() || c.checks.iter().any(|k| !k.is_chess()) {
                    return Err(CampaignError::Config("chess-scan needs one or more chess checks".into()));
                }
                if c.sample_cap == Some(0) {
                    return Err(CampaignError::Config("sample cap must be at least 1".into()));
                }
                if let PositionSource::File { path } = &c.positions {
                    must_exist(path, "position file")?;
                }
                crate::consistency::validate_thresholds(&c.thresholds)?;
                let mut engine = c.engine.clone();
                engine.node_limit = c.node_limit();
                engine.validate()?;
            }
            Mode::ChessEvolve(c) => {
                c.ga.validate()?;
                c.engine.validate()?;
                crate::consistency::validate_thresholds(&c.thresholds)?;
            }
            Mode::ForecastRun(c) => {
                c.oracle.validate()?;
                if let Some(p) = &c.tuples {
                    must_exist(p, "tuple file")?;
                }
                if let Some(p) = &c.scripted_oracle {
                    must_exist(p, "scripted oracle file")?;
                } else if c.oracle.endpoint.is_none() {
                    return Err(CampaignError::Config(
                        "forecast-run needs an oracle endpoint or a scripted oracle file".into(),
                    ));
                }
                crate::consistency::validate_thresholds(&c.thresholds)?;
                check_epsilon(c.epsilon)?;
            }
            Mode::Report(c) => {
                must_exist(&c.records, "record file")?;
                crate::consistency::validate_thresholds(&c.thresholds)?;
                check_epsilon(c.epsilon)?;
            }
        }
        Ok(())
    }
}

fn check_epsilon(e: f64) -> Result<(), CampaignError> {
    if (0.0..=1.0).contains(&e) {
        Ok(())
    } else {
        Err(CampaignError::Config(format!("epsilon {e} outside [0, 1]")))
    }
}

/// Run metadata written to `manifest.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub mode: String,
    pub seed: u64,
    pub engine_identity: Option<String>,
    pub engine_options: Vec<(String, String)>,
    pub node_limit: Option<u64>,
    pub workers: usize,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// Cases scheduled in this invocation.
    pub cases: usize,
    pub records_written: usize,
    /// Case ids already present from an earlier interrupted run.
    pub resumed_skipped: usize,
    /// Positions dropped as duplicates of an earlier canonical FEN.
    pub duplicates_removed: usize,
    /// Positions not meeting a check's precondition or filter.
    pub not_applicable: usize,
    /// Forecast tuples skipped because a member question had no valid sample.
    pub skipped: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub budget_used: Option<u64>,
    pub restarts: Option<usize>,
}

/// Outcome of [`run_campaign`].
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub manifest: Manifest,
    pub summaries: Vec<CheckSummary>,
    /// False when the failure rate exceeded the configured maximum.
    pub ok: bool,
}

pub(crate) fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Per-case failure or skip, appended to `errors.jsonl`.
#[derive(Debug, Serialize)]
pub(crate) struct ErrorEntry<'a> {
    pub case_id: &'a str,
    pub kind: &'a str,
    pub reason: String,
}

pub(crate) struct ErrorLog {
    out: BufWriter<File>,
    path: PathBuf,
}

impl ErrorLog {
    pub fn open(path: &Path, append: bool) -> Result<Self, CampaignError> {
        let file = fs::OpenOptions::new()
            .create(true)
            .write(true)
            .append(append)
            .truncate(!append)
            .open(path)
            .map_err(io_err(path))?;
        Ok(ErrorLog { out: BufWriter::new(file), path: path.to_path_buf() })
    }

    pub fn log(&mut self, entry: &ErrorEntry<'_>) -> Result<(), CampaignError> {
        let line = serde_json::to_string(entry).expect("error entries serialize");
        writeln!(self.out, "{line}").and_then(|_| self.out.flush()).map_err(io_err(&self.path))
    }
}

pub(crate) fn write_summary(
    dir: &Path,
    records_path: &Path,
    thresholds: &[f64],
    epsilon: f64,
) -> Result<Vec<CheckSummary>, CampaignError> {
    let records = load_records(records_path)?;
    let summaries = summarize(&records, thresholds, epsilon)?;
    let path = dir.join(SUMMARY_FILE);
    let file = File::create(&path).map_err(io_err(&path))?;
    write_summary_csv(&summaries, thresholds, BufWriter::new(file))?;
    Ok(summaries)
}

pub(crate) fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), CampaignError> {
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))
}

pub(crate) fn failure_rate(failures: usize, cases: usize) -> f64 {
    if cases == 0 {
        0.0
    } else {
        failures as f64 / cases as f64
    }
}

/// Executes the configured mode end to end and writes all artifacts.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport, CampaignError> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir).map_err(io_err(&config.output_dir))?;
    match &config.mode {
        Mode::ChessScan(scan) => chess::run_scan(config, scan),
        Mode::ChessEvolve(evolve) => chess::run_evolve(config, evolve),
        Mode::ForecastRun(run) => forecast::run_forecasts(config, run),
        Mode::Report(report) => run_report(config, report),
    }
}

fn run_report(config: &CampaignConfig, report: &ReportConfig) -> Result<CampaignReport, CampaignError> {
    let started = unix_now();
    let summaries = write_summary(&config.output_dir, &report.records, &report.thresholds, report.epsilon)?;
    let manifest = Manifest {
        mode: config.mode.name().into(),
        seed: config.seed,
        workers: config.workers,
        started_unix: started,
        finished_unix: unix_now(),
        records_written: summaries.iter().map(|s| s.buckets.total).sum(),
        ..Manifest::default()
    };
    write_manifest(&config.output_dir, &manifest)?;
    Ok(CampaignReport { manifest, summaries, ok: true })
}

/// Reads a scripted-oracle file: a JSON object from question text to a
/// list of replies (strings, or `{"error": ..}` for transport failures).
pub fn load_scripted_replies(
    path: &Path,
) -> Result<std::collections::HashMap<String, Vec<ScriptedReply>>, CampaignError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CampaignError::Config(format!("{}: {e}", path.display())))
}
