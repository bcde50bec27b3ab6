//! `metacheck`: run consistency campaigns against chess engines and
//! forecasting oracles.
//!
//! Exit codes: 0 success, 1 failure rate above the configured maximum,
//! 2 invalid configuration, 3 any other runtime error.

mod args;

use std::path::Path;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use log::info;
use metacheck_core::campaign::{run_campaign, sweep_nodes, CampaignConfig, CampaignError, CampaignReport};

use args::Cli;

const EXIT_FAILURE_RATE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn load_config_file(path: &Path) -> anyhow::Result<CampaignConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_report(report: &CampaignReport) {
    let m = &report.manifest;
    println!(
        "{}: {} records written, {} resumed, {} skipped, {} failures (rate {:.4})",
        m.mode, m.records_written, m.resumed_skipped, m.skipped, m.failures, m.failure_rate
    );
    for s in &report.summaries {
        let fractions: Vec<String> = s
            .buckets
            .thresholds
            .iter()
            .zip(s.buckets.fractions())
            .map(|(t, f)| format!(">{t}: {:.2}%", 100.0 * f))
            .collect();
        let strong = s.strong_fraction.map(|f| format!("  strong: {:.2}%", 100.0 * f)).unwrap_or_default();
        println!("  {:<22} n={:<7} {}{strong}", s.check.as_str(), s.buckets.total, fractions.join("  "));
    }
}

fn exit_for(err: &CampaignError) -> u8 {
    match err {
        CampaignError::Config(_) => EXIT_CONFIG,
        CampaignError::Engine(e) if matches!(e, metacheck_core::uci::EngineError::Config(_)) => EXIT_CONFIG,
        CampaignError::Forecast(metacheck_core::forecast::ForecastError::Config(_)) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(cli.log_level())).init();

    let base = match cli.config.as_deref().map(load_config_file).transpose() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let (config, sweep) = match cli.command.resolve(base) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    info!("{} campaign writing to {}", config.mode.name(), config.output_dir.display());

    if let Some(limits) = sweep {
        return match sweep_nodes(&config, &limits) {
            Ok(rows) => {
                for row in &rows {
                    println!("nodes {}:", row.node_limit);
                    for s in &row.summaries {
                        println!("  {:<22} n={:<7} {:?}", s.check.as_str(), s.buckets.total, s.buckets.fractions());
                    }
                }
                if rows.iter().all(|r| r.ok) {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_FAILURE_RATE)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_for(&e))
            }
        };
    }

    match run_campaign(&config) {
        Ok(report) => {
            print_report(&report);
            if report.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "error: failure rate {:.4} exceeds the maximum {:.4}",
                    report.manifest.failure_rate, config.max_failure_rate
                );
                ExitCode::from(EXIT_FAILURE_RATE)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
