//! Command-line flags and their merge with an optional config file.
//!
//! A config file supplies a complete `CampaignConfig`; any flag given on the
//! command line overrides the corresponding file value.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use metacheck_core::campaign::{
    CampaignConfig, ChessEvolveConfig, ChessScanConfig, ForecastRunConfig, Mode, PositionSource, ReportConfig,
};
use metacheck_core::consistency::{CheckKind, DEFAULT_CHESS_THRESHOLDS, DEFAULT_STRONG_EPSILON};
use metacheck_core::forecast::OracleConfig;
use metacheck_core::uci::{EngineConfig, EngineFlavor, MockSpec, Preset, SpatialPredicate};

#[derive(Debug, Parser)]
#[command(name = "metacheck", version, about = "Consistency checks for chess engines and forecasters")]
pub struct Cli {
    /// TOML file holding a full campaign configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn log_level(&self) -> &'static str {
        match self.verbose {
            0 => "warn",
            1 => "info",
            _ => "debug",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the four metamorphic checks over a position set.
    ChessScan(ScanArgs),
    /// Search for transformation violations with the genetic algorithm.
    ChessEvolve(EvolveArgs),
    /// Query an oracle on question tuples and score its consistency.
    ForecastRun(ForecastArgs),
    /// Summarize an existing record file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Directory for records, summary and manifest.
    #[arg(long, short)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Start over instead of skipping cases already in the record file.
    #[arg(long)]
    pub no_resume: bool,
    /// Fraction of failed cases above which the run exits nonzero.
    #[arg(long)]
    pub max_failure_rate: Option<f64>,
    /// Comma-separated reporting thresholds.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MockKind {
    Material,
    PlantedBug,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FlavorArg {
    Leela,
    Stockfish,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Engine executable (path, or a name looked up on PATH).
    #[arg(long)]
    pub engine: Option<PathBuf>,
    /// Argument passed to the engine executable; repeatable.
    #[arg(long = "engine-arg", allow_hyphen_values = true)]
    pub engine_args: Vec<String>,
    /// Named option set: leela, stockfish-nnue, stockfish-classical, stockfish.
    #[arg(long)]
    pub preset: Option<String>,
    /// How to read the engine's scores when no preset is given.
    #[arg(long, value_enum)]
    pub flavor: Option<FlavorArg>,
    /// Use an in-process mock instead of a process.
    #[arg(long, value_enum, conflicts_with = "engine")]
    pub mock: Option<MockKind>,
    /// Planted-bug offset.
    #[arg(long, default_value_t = 0.3)]
    pub delta: f64,
    /// Node limit per search.
    #[arg(long)]
    pub nodes: Option<u64>,
    /// Extra UCI option, `Name=value`; repeatable.
    #[arg(long = "option", value_parser = parse_option)]
    pub options: Vec<(String, String)>,
    /// Network weights file for MCTS engines.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

fn parse_option(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected Name=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl EngineArgs {
    fn resolve(&self, base: Option<EngineConfig>) -> anyhow::Result<EngineConfig> {
        let mut cfg = if let Some(kind) = self.mock {
            EngineConfig::mock(match kind {
                MockKind::Material => MockSpec::Material,
                MockKind::PlantedBug => {
                    MockSpec::PlantedBug { delta: self.delta, predicate: SpatialPredicate::default() }
                }
            })
        } else if let Some(exe) = &self.engine {
            match (&self.preset, base) {
                (Some(p), _) => EngineConfig::from_preset(p.parse::<Preset>()?, exe),
                (None, Some(mut b)) => {
                    b.executable = exe.clone();
                    b
                }
                (None, None) => {
                    let mut c = EngineConfig::mock(MockSpec::Material);
                    c.executable = exe.clone();
                    c.flavor = EngineFlavor::StockfishLike;
                    c.node_limit = 400;
                    c
                }
            }
        } else if let Some(b) = base {
            b
        } else {
            bail!("no engine configured: pass --engine, --mock or a config file");
        };
        if let Some(f) = self.flavor {
            if cfg.flavor == EngineFlavor::Mock {
                bail!("--flavor applies to process engines only");
            }
            cfg.flavor = match f {
                FlavorArg::Leela => EngineFlavor::LeelaLike,
                FlavorArg::Stockfish => EngineFlavor::StockfishLike,
            };
        }
        for (k, v) in &self.options {
            match cfg.options.iter_mut().find(|(name, _)| name.eq_ignore_ascii_case(k)) {
                Some(slot) => slot.1 = v.clone(),
                None => cfg.options.push((k.clone(), v.clone())),
            }
        }
        if !self.engine_args.is_empty() {
            cfg.args = self.engine_args.clone();
        }
        if let Some(w) = &self.weights {
            cfg.weights = Some(w.clone());
        }
        if let Some(n) = self.nodes {
            cfg.node_limit = n;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// FEN list, one per line.
    #[arg(long, conflicts_with = "random")]
    pub positions: Option<PathBuf>,
    /// Generate this many seeded random pawnless boards instead.
    #[arg(long)]
    pub random: Option<usize>,
    /// Comma-separated checks (default: all four chess checks).
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<CheckKind>>,
    /// Keep at most this many distinct positions.
    #[arg(long)]
    pub sample_cap: Option<usize>,
    /// Apply the mirroring, forced and recommended checks to every board,
    /// not just middle-game ones.
    #[arg(long)]
    pub all_positions: bool,
    /// Repeat the scan at each listed node limit.
    #[arg(long, value_delimiter = ',')]
    pub sweep_nodes: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub tournament_fraction: Option<f64>,
    /// Logical evaluation budget.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Generations without improvement before a restart.
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub no_elitism: bool,
    /// Fitness at which a board is reported as a discovery.
    #[arg(long)]
    pub report_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// JSON array of question tuples (default: bundled synthetic sample).
    #[arg(long)]
    pub tuples: Option<PathBuf>,
    /// JSON map from question to canned replies; replaces the HTTP oracle.
    #[arg(long)]
    pub scripted_oracle: Option<PathBuf>,
    /// Chat-completions URL.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Samples per question.
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Environment variable holding the API key.
    #[arg(long)]
    pub api_key_env: Option<String>,
    #[arg(long)]
    pub requests_per_minute: Option<u32>,
    #[arg(long)]
    pub zero_shot: bool,
    /// Strong-violation cutoff.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Record file to summarize.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

impl CommonArgs {
    fn apply(&self, mode: Mode, base: Option<&CampaignConfig>) -> anyhow::Result<CampaignConfig> {
        let mut cfg = match base {
            Some(b) => CampaignConfig { mode, ..b.clone() },
            None => {
                let dir =
                    self.output_dir.clone().ok_or_else(|| anyhow!("--output-dir is required without a config file"))?;
                CampaignConfig::new(mode, dir)
            }
        };
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if self.no_resume {
            cfg.resume = false;
        }
        if let Some(r) = self.max_failure_rate {
            cfg.max_failure_rate = r;
        }
        Ok(cfg)
    }
}

fn mismatch(expected: &str, base: &CampaignConfig) -> anyhow::Error {
    anyhow!("config file describes a {} campaign, not {expected}", base.mode.name())
}

impl Command {
    /// Merges flags over the config file. The second value is the node
    /// sweep, when one was requested.
    pub fn resolve(&self, base: Option<CampaignConfig>) -> anyhow::Result<(CampaignConfig, Option<Vec<u64>>)> {
        match self {
            Command::ChessScan(a) => {
                let file = match base.as_ref().map(|b| (&b.mode, b)) {
                    Some((Mode::ChessScan(s), _)) => Some(s.clone()),
                    Some((_, b)) => return Err(mismatch("chess-scan", b)),
                    None => None,
                };
                let positions = match (&a.positions, a.random, &file) {
                    (Some(p), _, _) => PositionSource::File { path: p.clone() },
                    (None, Some(n), _) => PositionSource::RandomPawnless { count: n },
                    (None, None, Some(f)) => f.positions.clone(),
                    (None, None, None) => bail!("no positions: pass --positions, --random or a config file"),
                };
                let engine = a.engine.resolve(file.as_ref().map(|f| f.engine.clone()))?;
                let scan = ChessScanConfig {
                    checks: a
                        .checks
                        .clone()
                        .or_else(|| file.as_ref().map(|f| f.checks.clone()))
                        .unwrap_or_else(|| CheckKind::CHESS.to_vec()),
                    positions,
                    node_limit: a.engine.nodes.or(file.as_ref().and_then(|f| f.node_limit)),
                    engine,
                    sample_cap: a.sample_cap.or(file.as_ref().and_then(|f| f.sample_cap)),
                    middle_game_only: !a.all_positions && file.as_ref().is_none_or(|f| f.middle_game_only),
                    thresholds: thresholds(&a.common, file.as_ref().map(|f| &f.thresholds)),
                };
                let cfg = a.common.apply(Mode::ChessScan(scan), base.as_ref())?;
                Ok((cfg, a.sweep_nodes.clone()))
            }
            Command::ChessEvolve(a) => {
                let file = match base.as_ref().map(|b| (&b.mode, b)) {
                    Some((Mode::ChessEvolve(e), _)) => Some(e.clone()),
                    Some((_, b)) => return Err(mismatch("chess-evolve", b)),
                    None => None,
                };
                let mut ga = file.as_ref().map(|f| f.ga.clone()).unwrap_or_default();
                if let Some(v) = a.population {
                    ga.population_size = v;
                }
                if let Some(v) = a.generations {
                    ga.max_generations = v;
                }
                if let Some(v) = a.tournament_fraction {
                    ga.tournament_fraction = v;
                }
                if let Some(v) = a.budget {
                    ga.eval_budget = v;
                }
                if let Some(v) = a.patience {
                    ga.early_stop_patience = v;
                }
                if let Some(v) = a.report_threshold {
                    ga.report_threshold = v;
                }
                if a.no_elitism {
                    ga.elitism = false;
                }
                let mut engine = a.engine.resolve(file.as_ref().map(|f| f.engine.clone()))?;
                if a.engine.mock.is_some() && a.engine.nodes.is_none() {
                    engine.node_limit = ga.node_limit;
                }
                let evolve = ChessEvolveConfig {
                    ga,
                    engine,
                    thresholds: thresholds(&a.common, file.as_ref().map(|f| &f.thresholds)),
                };
                Ok((a.common.apply(Mode::ChessEvolve(evolve), base.as_ref())?, None))
            }
            Command::ForecastRun(a) => {
                let file = match base.as_ref().map(|b| (&b.mode, b)) {
                    Some((Mode::ForecastRun(f), _)) => Some(f.clone()),
                    Some((_, b)) => return Err(mismatch("forecast-run", b)),
                    None => None,
                };
                let mut oracle = file.as_ref().map(|f| f.oracle.clone()).unwrap_or_else(OracleConfig::default);
                if let Some(v) = &a.endpoint {
                    oracle.endpoint = Some(v.clone());
                }
                if let Some(v) = &a.model {
                    oracle.model_name = v.clone();
                }
                if let Some(v) = a.temperature {
                    oracle.temperature = v;
                }
                if let Some(v) = a.repeats {
                    oracle.repeats = Some(v);
                }
                if let Some(v) = &a.api_key_env {
                    oracle.api_key_env = Some(v.clone());
                }
                if let Some(v) = a.requests_per_minute {
                    oracle.requests_per_minute = v;
                }
                if a.zero_shot {
                    oracle.zero_shot = true;
                }
                let run = ForecastRunConfig {
                    oracle,
                    tuples: a.tuples.clone().or(file.as_ref().and_then(|f| f.tuples.clone())),
                    scripted_oracle: a
                        .scripted_oracle
                        .clone()
                        .or(file.as_ref().and_then(|f| f.scripted_oracle.clone())),
                    epsilon: a.epsilon.or(file.as_ref().map(|f| f.epsilon)).unwrap_or(DEFAULT_STRONG_EPSILON),
                    thresholds: thresholds(&a.common, file.as_ref().map(|f| &f.thresholds)),
                };
                Ok((a.common.apply(Mode::ForecastRun(run), base.as_ref())?, None))
            }
            Command::Report(a) => {
                let file = match base.as_ref().map(|b| (&b.mode, b)) {
                    Some((Mode::Report(r), _)) => Some(r.clone()),
                    Some((_, b)) => return Err(mismatch("report", b)),
                    None => None,
                };
                let records = a
                    .records
                    .clone()
                    .or(file.as_ref().map(|f| f.records.clone()))
                    .context("no record file: pass --records or a config file")?;
                let report = ReportConfig {
                    records,
                    thresholds: thresholds(&a.common, file.as_ref().map(|f| &f.thresholds)),
                    epsilon: a.epsilon.or(file.as_ref().map(|f| f.epsilon)).unwrap_or(DEFAULT_STRONG_EPSILON),
                };
                Ok((a.common.apply(Mode::Report(report), base.as_ref())?, None))
            }
        }
    }
}

fn thresholds(common: &CommonArgs, file: Option<&Vec<f64>>) -> Vec<f64> {
    common.thresholds.clone().or_else(|| file.cloned()).unwrap_or_else(|| DEFAULT_CHESS_THRESHOLDS.to_vec())
}
