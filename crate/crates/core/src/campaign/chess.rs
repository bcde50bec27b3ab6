use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::pool::ordered_pool;
use super::{
    failure_rate, io_err, unix_now, write_manifest, write_summary, CampaignConfig, CampaignError, CampaignReport,
    ChessEvolveConfig, ChessScanConfig, ErrorEntry, ErrorLog, Manifest, Mode, PositionSource, ERRORS_FILE,
    GA_STATS_FILE, INPUTS_FILE, RECORDS_FILE,
};
use crate::checks::{applicable, case_id, run_check, ChessCheckCase};
use crate::chess::{random_pawnless, read_position_list, Board};
use crate::consistency::{load_records, CheckKind, CheckSummary, InputSidecar, RecordSink, DEFAULT_STRONG_EPSILON};
use crate::ga::evolve;
use crate::uci::{engine_identity, start_engine, CachedEvaluator, EngineConfig, EngineError, EngineHandle, EvalCache};

struct Case {
    check: CheckKind,
    board: Board,
    case_id: String,
}

/// Distinct boards from the source in first-seen order, capped.
fn load_positions(scan: &ChessScanConfig, seed: u64) -> Result<(Vec<Board>, usize), CampaignError> {
    let raw = match &scan.positions {
        PositionSource::File { path } => read_position_list(path)?,
        PositionSource::RandomPawnless { count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..*count).map(|_| random_pawnless(&mut rng)).collect::<Result<Vec<_>, _>>()?
        }
    };
    let mut seen = HashSet::new();
    let mut boards = Vec::new();
    let mut duplicates = 0;
    for b in raw {
        if scan.sample_cap.is_some_and(|cap| boards.len() >= cap) {
            break;
        }
        if seen.insert(b.to_fen()) {
            boards.push(b);
        } else {
            duplicates += 1;
        }
    }
    Ok((boards, duplicates))
}

fn passes_filter(scan: &ChessScanConfig, check: CheckKind, board: &Board) -> bool {
    check == CheckKind::BoardTransformations || !scan.middle_game_only || board.is_middle_game()
}

struct ChessSession<'a> {
    engine: Option<CachedEvaluator<EngineHandle>>,
    config: &'a EngineConfig,
    cache: EvalCache,
}

impl ChessSession<'_> {
    fn run(&mut self, case: &Case, node_limit: u64) -> Result<ChessCheckCase, EngineError> {
        if self.engine.is_none() {
            self.engine = Some(CachedEvaluator::new(start_engine(self.config)?, self.cache.clone()));
        }
        let engine = self.engine.as_mut().expect("engine started above");
        let result = run_check(case.check, engine, &case.board, node_limit);
        if matches!(result, Err(EngineError::Transport { .. } | EngineError::Timeout { .. })) {
            // restart on the next case
            self.engine = None;
        }
        result
    }
}

fn open_outputs(dir: &Path, resume: bool) -> Result<(RecordSink, InputSidecar, ErrorLog), CampaignError> {
    let records = dir.join(RECORDS_FILE);
    let inputs = dir.join(INPUTS_FILE);
    if !resume && inputs.exists() {
        fs::remove_file(&inputs).map_err(io_err(&inputs))?;
    }
    let sink = if resume { RecordSink::append_to(&records)? } else { RecordSink::create(&records)? };
    Ok((sink, InputSidecar::open(&inputs)?, ErrorLog::open(&dir.join(ERRORS_FILE), resume)?))
}

pub(super) fn run_scan(config: &CampaignConfig, scan: &ChessScanConfig) -> Result<CampaignReport, CampaignError> {
    let started = unix_now();
    let dir = &config.output_dir;
    let node_limit = scan.node_limit();
    let mut engine_cfg = scan.engine.clone();
    engine_cfg.node_limit = node_limit;

    let (boards, duplicates) = load_positions(scan, config.seed)?;
    let done: HashSet<String> = if config.resume {
        load_records(&dir.join(RECORDS_FILE))?.into_iter().map(|r| r.case_id).collect()
    } else {
        HashSet::new()
    };
    let mut cases = Vec::new();
    let (mut not_applicable, mut resumed) = (0, 0);
    for board in &boards {
        for &check in &scan.checks {
            if !passes_filter(scan, check, board) || !applicable(check, board) {
                not_applicable += 1;
                continue;
            }
            let id = case_id(check, board);
            if done.contains(&id) {
                resumed += 1;
                continue;
            }
            cases.push(Case { check, board: board.clone(), case_id: id });
        }
    }
    info!(
        "{} positions ({} duplicates removed), {} cases scheduled, {} already recorded",
        boards.len(),
        duplicates,
        cases.len(),
        resumed
    );

    let identity = engine_identity(&engine_cfg)?;
    // a configuration that cannot start at all is a systemic failure
    let probe = Mutex::new(Some(start_engine(&engine_cfg)?));
    let cache = EvalCache::new();
    let (sink, sidecar, mut errors) = open_outputs(dir, config.resume)?;
    let (mut written, mut failures) = (0, 0);

    let make = || ChessSession {
        engine: probe.lock().expect("probe lock").take().map(|h| CachedEvaluator::new(h, cache.clone())),
        config: &engine_cfg,
        cache: cache.clone(),
    };
    let work = |s: &mut ChessSession<'_>, case: &Case| s.run(case, node_limit);
    ordered_pool(&cases, config.workers, &make, &work, &mut |i, result| {
        let case = &cases[i];
        match result.map_err(CampaignError::from).and_then(|c| Ok((c.to_record()?, c.fens()))) {
            Ok((record, fens)) => {
                for (id, fen) in record.inputs.iter().zip(&fens) {
                    sidecar.insert_with_id(id, fen)?;
                }
                sink.append(&record)?;
                written += 1;
            }
            Err(e) => {
                warn!("case {} failed: {e}", case.case_id);
                failures += 1;
                errors.log(&ErrorEntry { case_id: &case.case_id, kind: "engine_failure", reason: e.to_string() })?;
            }
        }
        Ok(())
    })?;
    drop(sink);

    let summaries = write_summary(dir, &dir.join(RECORDS_FILE), &scan.thresholds, DEFAULT_STRONG_EPSILON)?;
    let rate = failure_rate(failures, cases.len());
    let manifest = Manifest {
        mode: config.mode.name().into(),
        seed: config.seed,
        engine_identity: Some(identity),
        engine_options: engine_cfg.effective_options(),
        node_limit: Some(node_limit),
        workers: config.workers,
        started_unix: started,
        finished_unix: unix_now(),
        cases: cases.len(),
        records_written: written,
        resumed_skipped: resumed,
        duplicates_removed: duplicates,
        not_applicable,
        failures,
        failure_rate: rate,
        ..Manifest::default()
    };
    write_manifest(dir, &manifest)?;
    Ok(CampaignReport { manifest, summaries, ok: rate <= config.max_failure_rate })
}

pub(super) fn run_evolve(config: &CampaignConfig, cfg: &ChessEvolveConfig) -> Result<CampaignReport, CampaignError> {
    let started = unix_now();
    let dir = &config.output_dir;
    let mut ga = cfg.ga.clone();
    ga.seed = config.seed;
    ga.node_limit = cfg.engine.node_limit;
    let identity = engine_identity(&cfg.engine)?;
    let mut engine = CachedEvaluator::new(start_engine(&cfg.engine)?, EvalCache::new());
    let outcome = evolve(&ga, &mut engine)?;

    let (sink, sidecar, _errors) = open_outputs(dir, false)?;
    for (id, fen) in outcome.inputs() {
        sidecar.insert_with_id(&id, &fen)?;
    }
    let records = outcome.records()?;
    for r in &records {
        sink.append(r)?;
    }
    drop(sink);
    let stats_path = dir.join(GA_STATS_FILE);
    let file = File::create(&stats_path).map_err(io_err(&stats_path))?;
    outcome.stats.write_csv(BufWriter::new(file)).map_err(io_err(&stats_path))?;

    let summaries = write_summary(dir, &dir.join(RECORDS_FILE), &cfg.thresholds, DEFAULT_STRONG_EPSILON)?;
    let failures = outcome.stats.engine_failures as usize;
    let rate = failure_rate(failures, outcome.stats.budget_used as usize + failures);
    let manifest = Manifest {
        mode: config.mode.name().into(),
        seed: config.seed,
        engine_identity: Some(identity),
        engine_options: cfg.engine.effective_options(),
        node_limit: Some(ga.node_limit),
        workers: 1,
        started_unix: started,
        finished_unix: unix_now(),
        cases: outcome.stats.budget_used as usize,
        records_written: records.len(),
        failures,
        failure_rate: rate,
        budget_used: Some(outcome.stats.budget_used),
        restarts: Some(outcome.stats.restarts),
        ..Manifest::default()
    };
    write_manifest(dir, &manifest)?;
    Ok(CampaignReport { manifest, summaries, ok: rate <= config.max_failure_rate })
}

/// One node-limit row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSweepRow {
    pub node_limit: u64,
    pub summaries: Vec<CheckSummary>,
    pub ok: bool,
}

/// Repeats a chess scan at each node limit, writing each run to
/// `nodes-<n>/` under the output directory and the combined table to
/// `sweep.csv`.
pub fn sweep_nodes(config: &CampaignConfig, node_limits: &[u64]) -> Result<Vec<NodeSweepRow>, CampaignError> {
    let Mode::ChessScan(scan) = &config.mode else {
        return Err(CampaignError::Config("node sweeps need a chess-scan configuration".into()));
    };
    if node_limits.is_empty() {
        return Err(CampaignError::Config("node sweep needs at least one node limit".into()));
    }
    fs::create_dir_all(&config.output_dir).map_err(io_err(&config.output_dir))?;
    let mut rows = Vec::new();
    for &n in node_limits {
        let mut sub = config.clone();
        sub.output_dir = config.output_dir.join(format!("nodes-{n}"));
        let mut s = scan.clone();
        s.node_limit = Some(n);
        sub.mode = Mode::ChessScan(s);
        let report = super::run_campaign(&sub)?;
        rows.push(NodeSweepRow { node_limit: n, summaries: report.summaries, ok: report.ok });
    }
    let path = config.output_dir.join("sweep.csv");
    let file = File::create(&path).map_err(io_err(&path))?;
    write_sweep_csv(&rows, &scan.thresholds, BufWriter::new(file)).map_err(io_err(&path))?;
    Ok(rows)
}

/// Rows are (node limit, check); columns are threshold fractions.
pub fn write_sweep_csv<W: Write>(rows: &[NodeSweepRow], thresholds: &[f64], mut out: W) -> std::io::Result<()> {
    let mut header = vec!["nodes".to_string(), "check".into(), "total".into()];
    header.extend(thresholds.iter().map(|t| format!(">{t}")));
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        for s in &row.summaries {
            let mut cells = vec![row.node_limit.to_string(), s.check.to_string(), s.buckets.total.to_string()];
            cells.extend(s.buckets.fractions().iter().map(|f| f.to_string()));
            writeln!(out, "{}", cells.join(","))?;
        }
    }
    out.flush()
}
