use std::fs;
use std::path::Path;

use metacheck_core::campaign::{
    run_campaign, sweep_nodes, CampaignConfig, ChessEvolveConfig, ChessScanConfig, ForecastRunConfig, Mode,
    PositionSource, ReportConfig, ERRORS_FILE, GA_STATS_FILE, INPUTS_FILE, MANIFEST_FILE, RECORDS_FILE, RESPONSES_FILE,
    SUMMARY_FILE,
};
use metacheck_core::consistency::{load_inputs, load_records, CheckKind, DEFAULT_CHESS_THRESHOLDS};
use metacheck_core::forecast::OracleConfig;
use metacheck_core::ga::GaConfig;
use metacheck_core::uci::{EngineConfig, MockSpec, SpatialPredicate};

fn scan(count: usize, checks: Vec<CheckKind>, middle_game_only: bool) -> ChessScanConfig {
    ChessScanConfig {
        checks,
        positions: PositionSource::RandomPawnless { count },
        engine: EngineConfig::mock(MockSpec::Material),
        node_limit: None,
        sample_cap: None,
        middle_game_only,
        thresholds: DEFAULT_CHESS_THRESHOLDS.to_vec(),
    }
}

fn symmetric_checks() -> Vec<CheckKind> {
    vec![CheckKind::BoardTransformations, CheckKind::PositionMirroring]
}

#[test]
fn material_mock_scan_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let config = CampaignConfig::new(Mode::ChessScan(scan(1000, symmetric_checks(), false)), dir.path());
    let report = run_campaign(&config).unwrap();
    assert!(report.ok);
    assert_eq!(report.manifest.failures, 0);
    assert_eq!(report.summaries.len(), 2);
    for s in &report.summaries {
        assert_eq!(s.buckets.total, 1000 - report.manifest.duplicates_removed);
        assert!(s.buckets.counts.iter().all(|&c| c == 0), "{s:?}");
    }
    let records = load_records(&dir.path().join(RECORDS_FILE)).unwrap();
    assert!(records.iter().all(|r| r.value == 0.0));
    // every referenced input resolves through the sidecar
    let inputs = load_inputs(&dir.path().join(INPUTS_FILE)).unwrap();
    assert!(records.iter().flat_map(|r| &r.inputs).all(|id| inputs.contains_key(id)));
    for f in [SUMMARY_FILE, MANIFEST_FILE, ERRORS_FILE] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn middle_game_filter_excludes_opening_boards_from_move_checks() {
    let dir = tempfile::tempdir().unwrap();
    // synthetic boards carry fullmove 1, so only the transformation check survives
    let config = CampaignConfig::new(Mode::ChessScan(scan(50, CheckKind::CHESS.to_vec(), true)), dir.path());
    let report = run_campaign(&config).unwrap();
    let kinds: Vec<_> = report.summaries.iter().map(|s| s.check).collect();
    assert_eq!(kinds, vec![CheckKind::BoardTransformations]);
    assert_eq!(report.manifest.not_applicable, 150);
}

#[test]
fn resume_skips_recorded_cases() {
    let dir = tempfile::tempdir().unwrap();
    let small = CampaignConfig::new(Mode::ChessScan(scan(40, symmetric_checks(), false)), dir.path());
    let first = run_campaign(&small).unwrap();
    assert_eq!(first.manifest.resumed_skipped, 0);
    let written = first.manifest.records_written;

    // the same seed yields the same first 40 boards plus 20 more
    let large = CampaignConfig::new(Mode::ChessScan(scan(60, symmetric_checks(), false)), dir.path());
    let second = run_campaign(&large).unwrap();
    assert_eq!(second.manifest.resumed_skipped, written);
    let records = load_records(&dir.path().join(RECORDS_FILE)).unwrap();
    assert_eq!(records.len(), written + second.manifest.records_written);
    let mut ids: Vec<_> = records.iter().map(|r| &r.case_id).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), records.len(), "no case recorded twice");

    let mut fresh = large.clone();
    fresh.resume = false;
    let third = run_campaign(&fresh).unwrap();
    assert_eq!(third.manifest.resumed_skipped, 0);
    assert_eq!(load_records(&dir.path().join(RECORDS_FILE)).unwrap().len(), third.manifest.records_written);
}

#[test]
fn records_are_byte_identical_across_worker_counts() {
    let mut outputs = Vec::new();
    for workers in [1, 4] {
        let dir = tempfile::tempdir().unwrap();
        let mut s = scan(200, symmetric_checks(), false);
        s.engine = EngineConfig::mock(MockSpec::PlantedBug { delta: 0.3, predicate: SpatialPredicate::default() });
        let mut config = CampaignConfig::new(Mode::ChessScan(s), dir.path());
        config.workers = workers;
        config.seed = 11;
        run_campaign(&config).unwrap();
        outputs
            .push((fs::read(dir.path().join(RECORDS_FILE)).unwrap(), fs::read(dir.path().join(SUMMARY_FILE)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn duplicate_positions_are_removed() {
    let dir = tempfile::tempdir().unwrap();
    let fens = dir.path().join("positions.txt");
    fs::write(
        &fens,
        "# two copies of one board\n\
         8/8/3k4/8/8/3K4/3Q4/8 w - - 0 30\n\
         8/8/3k4/8/8/3K4/3Q4/8 w - - 0 30\n\
         8/8/3k4/8/R7/3K4/8/8 w - - 0 30\n",
    )
    .unwrap();
    let mut s = scan(0, symmetric_checks(), false);
    s.positions = PositionSource::File { path: fens };
    let out = dir.path().join("out");
    let report = run_campaign(&CampaignConfig::new(Mode::ChessScan(s), &out)).unwrap();
    assert_eq!(report.manifest.duplicates_removed, 1);
    assert_eq!(report.manifest.records_written, 4);
}

#[test]
fn report_mode_summarizes_an_existing_file() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("in.jsonl");
    let values = [0.0, 0.01, 0.06, 0.2, 0.3, 0.3, 0.6, 0.8, 1.2, 1.9];
    let lines: String = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            format!("{{\"check\":\"board_transformations\",\"case_id\":\"c{i}\",\"inputs\":[\"x\"],\"value\":{v}}}\n")
        })
        .collect();
    fs::write(&records, lines).unwrap();
    let mode = Mode::Report(ReportConfig { records, thresholds: DEFAULT_CHESS_THRESHOLDS.to_vec(), epsilon: 0.2 });
    let report = run_campaign(&CampaignConfig::new(mode, dir.path().join("out"))).unwrap();
    assert_eq!(report.summaries.len(), 1);
    // strictly greater than 0.05, 0.1, 0.25, 0.5, 0.75, 1.0
    assert_eq!(report.summaries[0].buckets.counts, vec![8, 7, 6, 4, 3, 2]);
    let csv = fs::read_to_string(dir.path().join("out").join(SUMMARY_FILE)).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("board_transformations,10,"));
}

#[test]
fn node_sweep_over_a_deterministic_mock_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let config = CampaignConfig::new(Mode::ChessScan(scan(100, symmetric_checks(), false)), dir.path());
    let rows = sweep_nodes(&config, &[1, 100, 400]).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[0].summaries == w[1].summaries));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    assert!(csv.starts_with("nodes,check,total,>0.05,"));
    for n in [1, 100, 400] {
        assert!(dir.path().join(format!("nodes-{n}")).join(RECORDS_FILE).exists());
    }
}

#[test]
fn evolve_campaign_writes_stats_and_budget() {
    let dir = tempfile::tempdir().unwrap();
    let mode = Mode::ChessEvolve(ChessEvolveConfig {
        ga: GaConfig { population_size: 20, max_generations: 3, eval_budget: 300, ..GaConfig::default() },
        engine: EngineConfig::mock(MockSpec::PlantedBug { delta: 0.3, predicate: SpatialPredicate::default() }),
        thresholds: DEFAULT_CHESS_THRESHOLDS.to_vec(),
    });
    let report = run_campaign(&CampaignConfig::new(mode, dir.path())).unwrap();
    let used = report.manifest.budget_used.unwrap();
    assert!(used > 0 && used <= 300);
    let stats = fs::read_to_string(dir.path().join(GA_STATS_FILE)).unwrap();
    assert!(stats.starts_with("generation,restart,best,mean,budget_used"));
    let records = load_records(&dir.path().join(RECORDS_FILE)).unwrap();
    assert_eq!(records.len(), report.manifest.records_written);
    assert!(records.iter().all(|r| r.check == CheckKind::BoardTransformations));
}

fn write_json(path: &Path, value: serde_json::Value) {
    fs::write(path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
}

#[test]
fn scripted_forecast_campaign_resumes_by_tuple_id() {
    let dir = tempfile::tempdir().unwrap();
    let tuples = dir.path().join("tuples.json");
    write_json(
        &tuples,
        serde_json::json!([
            {"id": "n1", "kind": "negation", "questions": ["Will A happen?", "Will A not happen?"]},
            {"id": "n2", "kind": "negation", "questions": ["Will B happen?", "Will B not happen?"]}
        ]),
    );
    let script = dir.path().join("script.json");
    write_json(
        &script,
        serde_json::json!({
            "Will A happen?": ["[Answer] 0.7"],
            "Will A not happen?": ["[Answer] 0.5"],
            "Will B happen?": ["no idea"],
            "Will B not happen?": ["[Answer] 0.5"]
        }),
    );
    let run = ForecastRunConfig {
        oracle: OracleConfig::default(),
        tuples: Some(tuples),
        scripted_oracle: Some(script),
        epsilon: 0.2,
        thresholds: vec![0.1, 0.2],
    };
    let out = dir.path().join("out");
    let config = CampaignConfig::new(Mode::ForecastRun(run), &out);
    let report = run_campaign(&config).unwrap();
    assert_eq!(report.manifest.records_written, 1);
    // an unparseable tuple is a skip, not a failure
    assert_eq!(report.manifest.skipped, 1);
    assert_eq!(report.manifest.failures, 0);
    assert!(report.ok);
    let records = load_records(&out.join(RECORDS_FILE)).unwrap();
    assert_eq!(records[0].case_id, "n1");
    assert!((records[0].value - 0.2).abs() < 1e-12);
    let responses = fs::read_to_string(out.join(RESPONSES_FILE)).unwrap();
    assert_eq!(responses.lines().count(), 2);
    assert!(fs::read_to_string(out.join(ERRORS_FILE)).unwrap().contains("\"n2\""));

    let again = run_campaign(&config).unwrap();
    assert_eq!(again.manifest.resumed_skipped, 1);
    assert_eq!(again.manifest.cases, 1);
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = CampaignConfig::new(Mode::ChessScan(scan(10, vec![CheckKind::Negation], false)), dir.path());
    assert!(run_campaign(&config).is_err());
    config.mode = Mode::ChessScan(scan(10, symmetric_checks(), false));
    config.workers = 0;
    assert!(run_campaign(&config).is_err());
    config.workers = 1;
    config.max_failure_rate = 1.5;
    assert!(run_campaign(&config).is_err());
    let run = ForecastRunConfig {
        oracle: OracleConfig::default(),
        tuples: None,
        scripted_oracle: None,
        epsilon: 0.2,
        thresholds: vec![0.1],
    };
    let forecast = CampaignConfig::new(Mode::ForecastRun(run), dir.path());
    assert!(run_campaign(&forecast).is_err(), "no endpoint and no script");
}
