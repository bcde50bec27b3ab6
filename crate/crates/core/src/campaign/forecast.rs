use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::{BufWriter, Write};

use log::{info, warn};
use serde::Serialize;

use super::pool::ordered_pool;
use super::{
    failure_rate, io_err, load_scripted_replies, unix_now, write_manifest, write_summary, CampaignConfig,
    CampaignError, CampaignReport, ErrorEntry, ErrorLog, ForecastRunConfig, Manifest, ERRORS_FILE, INPUTS_FILE,
    RECORDS_FILE, RESPONSES_FILE,
};
use crate::consistency::{load_records, InputSidecar, RecordSink};
use crate::forecast::{
    bundled_sample, load_tuples, run_tuple, ChatOracle, Forecast, ForecastError, HttpOracle, ScriptedOracle,
};

#[derive(Serialize)]
struct ResponseEntry<'a> {
    tuple_id: &'a str,
    forecast: &'a Forecast,
}

pub(super) fn run_forecasts(config: &CampaignConfig, run: &ForecastRunConfig) -> Result<CampaignReport, CampaignError> {
    let started = unix_now();
    let dir = &config.output_dir;
    let tuples = match &run.tuples {
        Some(p) => load_tuples(p)?,
        None => bundled_sample(),
    };
    let records_path = dir.join(RECORDS_FILE);
    let done: HashSet<String> = if config.resume {
        load_records(&records_path)?.into_iter().map(|r| r.case_id).collect()
    } else {
        HashSet::new()
    };
    let pending: Vec<_> = tuples.iter().filter(|t| !done.contains(&t.id)).cloned().collect();
    let resumed = tuples.len() - pending.len();
    info!("{} tuples scheduled, {resumed} already recorded", pending.len());

    // every worker gets its own session; HTTP clones share one rate limiter
    let scripted = run.scripted_oracle.as_deref().map(load_scripted_replies).transpose()?;
    let http = match &scripted {
        Some(_) => None,
        None => Some(HttpOracle::new(&run.oracle)?),
    };
    let make = || -> Box<dyn ChatOracle> {
        match (&scripted, &http) {
            (Some(script), _) => Box::new(ScriptedOracle::from_map(script.clone())),
            (None, Some(h)) => Box::new(h.clone()),
            (None, None) => unreachable!("oracle constructed above"),
        }
    };

    let inputs_path = dir.join(INPUTS_FILE);
    if !config.resume && inputs_path.exists() {
        std::fs::remove_file(&inputs_path).map_err(io_err(&inputs_path))?;
    }
    let sink = if config.resume { RecordSink::append_to(&records_path)? } else { RecordSink::create(&records_path)? };
    let sidecar = InputSidecar::open(&inputs_path)?;
    let mut errors = ErrorLog::open(&dir.join(ERRORS_FILE), config.resume)?;
    let responses_path = dir.join(RESPONSES_FILE);
    let mut responses = BufWriter::new(
        OpenOptions::new()
            .create(true)
            .write(true)
            .append(config.resume)
            .truncate(!config.resume)
            .open(&responses_path)
            .map_err(io_err(&responses_path))?,
    );
    let (mut written, mut skipped, mut failures) = (0, 0, 0);

    let work = |oracle: &mut Box<dyn ChatOracle>, t: &crate::forecast::QuestionTuple| run_tuple(&run.oracle, oracle, t);
    ordered_pool(&pending, config.workers, &make, &work, &mut |i, result| {
        let tuple = &pending[i];
        match result {
            Ok(outcome) => {
                for f in &outcome.forecasts {
                    sidecar.insert_with_id(&f.question_id, &f.question)?;
                    let line = serde_json::to_string(&ResponseEntry { tuple_id: &tuple.id, forecast: f })
                        .expect("forecasts serialize");
                    writeln!(responses, "{line}").map_err(io_err(&responses_path))?;
                }
                responses.flush().map_err(io_err(&responses_path))?;
                sink.append(&outcome.record)?;
                written += 1;
            }
            Err(ForecastError::Aggregation { question }) => {
                warn!("tuple {} skipped: no valid answers for `{question}`", tuple.id);
                skipped += 1;
                errors.log(&ErrorEntry {
                    case_id: &tuple.id,
                    kind: "skipped",
                    reason: format!("no valid samples for `{question}`"),
                })?;
            }
            Err(e) => {
                warn!("tuple {} failed: {e}", tuple.id);
                failures += 1;
                errors.log(&ErrorEntry { case_id: &tuple.id, kind: "oracle_failure", reason: e.to_string() })?;
            }
        }
        Ok(())
    })?;
    drop(sink);

    let summaries = write_summary(dir, &records_path, &run.thresholds, run.epsilon)?;
    let rate = failure_rate(failures, pending.len());
    let manifest = Manifest {
        mode: config.mode.name().into(),
        seed: config.seed,
        engine_identity: Some(if scripted.is_some() {
            "scripted-oracle".into()
        } else {
            format!("{}@{}", run.oracle.model_name, run.oracle.endpoint.as_deref().unwrap_or(""))
        }),
        engine_options: vec![
            ("temperature".into(), run.oracle.temperature.to_string()),
            ("repeats".into(), run.oracle.effective_repeats().to_string()),
        ],
        workers: config.workers,
        started_unix: started,
        finished_unix: unix_now(),
        cases: pending.len(),
        records_written: written,
        resumed_skipped: resumed,
        skipped,
        failures,
        failure_rate: rate,
        ..Manifest::default()
    };
    write_manifest(dir, &manifest)?;
    Ok(CampaignReport { manifest, summaries, ok: rate <= config.max_failure_rate })
}
