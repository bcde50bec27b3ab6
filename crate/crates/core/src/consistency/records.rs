use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{bucketize, strong_fraction, BucketSummary, CheckKind, ConsistencyError, ViolationRecord};

/// Stable short identifier for an input (FEN or question text).
pub fn input_id(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..8])
}

pub fn write_records<W: Write>(records: &[ViolationRecord], mut out: W) -> Result<(), ConsistencyError> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads line-delimited records; blank lines are skipped and line numbers
/// in errors are 1-based.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<ViolationRecord>, ConsistencyError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ViolationRecord =
            serde_json::from_str(&line).map_err(|e| ConsistencyError::Parse { line: i + 1, reason: e.to_string() })?;
        record.validate().map_err(|e| ConsistencyError::Parse { line: i + 1, reason: e.to_string() })?;
        out.push(record);
    }
    Ok(out)
}

pub fn persist_records(records: &[ViolationRecord], path: &Path) -> Result<(), ConsistencyError> {
    write_records(records, BufWriter::new(File::create(path)?))
}

/// Loads a record file; a missing file is an empty result set.
pub fn load_records(path: &Path) -> Result<Vec<ViolationRecord>, ConsistencyError> {
    match File::open(path) {
        Ok(f) => read_records(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

/// Append-only record file shared between producers. Each append writes one
/// whole line under the lock and flushes it.
#[derive(Debug)]
pub struct RecordSink {
    path: PathBuf,
    out: Mutex<BufWriter<File>>,
}

impl RecordSink {
    pub fn create(path: &Path) -> Result<Self, ConsistencyError> {
        Self::open_with(path, false)
    }

    pub fn append_to(path: &Path) -> Result<Self, ConsistencyError> {
        Self::open_with(path, true)
    }

    fn open_with(path: &Path, append: bool) -> Result<Self, ConsistencyError> {
        let file = OpenOptions::new().create(true).write(true).append(append).truncate(!append).open(path)?;
        Ok(RecordSink { path: path.to_path_buf(), out: Mutex::new(BufWriter::new(file)) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &ViolationRecord) -> Result<(), ConsistencyError> {
        record.validate()?;
        let mut line = serde_json::to_string(record).map_err(std::io::Error::from)?;
        line.push('\n');
        let mut out = self.out.lock().unwrap_or_else(|p| p.into_inner());
        out.write_all(line.as_bytes())?;
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct InputEntry {
    id: String,
    text: String,
}

/// Sidecar map from input identifier to the full input text, written as one
/// `{"id": .., "text": ..}` object per line. Duplicate ids are written once.
#[derive(Debug)]
pub struct InputSidecar {
    inner: Mutex<(BufWriter<File>, HashSet<String>)>,
}

impl InputSidecar {
    /// Opens for appending, remembering ids already present on disk.
    pub fn open(path: &Path) -> Result<Self, ConsistencyError> {
        let seen: HashSet<String> = load_inputs(path)?.into_keys().collect();
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(InputSidecar { inner: Mutex::new((BufWriter::new(file), seen)) })
    }

    /// Registers `text` and returns its id.
    pub fn insert(&self, text: &str) -> Result<String, ConsistencyError> {
        let id = input_id(text);
        self.insert_with_id(&id, text)?;
        Ok(id)
    }

    pub fn insert_with_id(&self, id: &str, text: &str) -> Result<(), ConsistencyError> {
        let mut guard = self.inner.lock().unwrap_or_else(|p| p.into_inner());
        let (out, seen) = &mut *guard;
        if seen.insert(id.to_string()) {
            let entry = InputEntry { id: id.to_string(), text: text.to_string() };
            let mut line = serde_json::to_string(&entry).map_err(std::io::Error::from)?;
            line.push('\n');
            out.write_all(line.as_bytes())?;
            out.flush()?;
        }
        Ok(())
    }
}

pub fn persist_inputs(map: &BTreeMap<String, String>, path: &Path) -> Result<(), ConsistencyError> {
    let mut out = BufWriter::new(File::create(path)?);
    for (id, text) in map {
        let entry = InputEntry { id: id.clone(), text: text.clone() };
        serde_json::to_writer(&mut out, &entry).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_inputs(path: &Path) -> Result<BTreeMap<String, String>, ConsistencyError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(e.into()),
    };
    let mut map = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: InputEntry =
            serde_json::from_str(&line).map_err(|e| ConsistencyError::Parse { line: i + 1, reason: e.to_string() })?;
        map.insert(entry.id, entry.text);
    }
    Ok(map)
}

/// Per-check statistics over a record set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: CheckKind,
    pub buckets: BucketSummary,
    /// Forecast checks only: fraction of values strictly above epsilon.
    pub strong_fraction: Option<f64>,
}

/// Groups records by check kind (in `CheckKind` order) and summarizes each.
pub fn summarize(
    records: &[ViolationRecord],
    thresholds: &[f64],
    epsilon: f64,
) -> Result<Vec<CheckSummary>, ConsistencyError> {
    let mut by_kind: BTreeMap<CheckKind, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_kind.entry(r.check).or_default().push(r.value);
    }
    by_kind
        .into_iter()
        .map(|(check, values)| {
            let buckets = bucketize(&values, thresholds)?;
            let strong = (!check.is_chess()).then(|| strong_fraction(&values, epsilon));
            Ok(CheckSummary { check, buckets, strong_fraction: strong })
        })
        .collect()
}

/// One row per check, one column per threshold holding the fraction of
/// cases strictly above it. `mean` and `strong_fraction` are filled for
/// forecast checks and left empty for chess checks.
pub fn write_summary_csv<W: Write>(
    summaries: &[CheckSummary],
    thresholds: &[f64],
    mut out: W,
) -> Result<(), ConsistencyError> {
    let mut header = vec!["check".to_string(), "total".to_string()];
    header.extend(thresholds.iter().map(|t| format!(">{t}")));
    header.push("mean".into());
    header.push("strong_fraction".into());
    writeln!(out, "{}", header.join(","))?;
    for s in summaries {
        let mut row = vec![s.check.to_string(), s.buckets.total.to_string()];
        row.extend(s.buckets.fractions().iter().map(|f| f.to_string()));
        match s.strong_fraction {
            Some(strong) => {
                row.push(s.buckets.mean.to_string());
                row.push(strong.to_string());
            }
            None => {
                row.push(String::new());
                row.push(String::new());
            }
        }
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(value: f64) -> ViolationRecord {
        ViolationRecord::new(CheckKind::RecommendedMove, "case-1", vec![input_id("fen")], value, "best=e2e4").unwrap()
    }

    #[test]
    fn single_record_round_trip() {
        let mut buf = Vec::new();
        write_records(&[record(0.25)], &mut buf).unwrap();
        let back = read_records(&buf[..]).unwrap();
        assert_eq!(back, vec![record(0.25)]);
    }

    #[test]
    fn empty_file_is_empty_list() {
        assert!(read_records(&b""[..]).unwrap().is_empty());
        let dir = tempfile::tempdir().unwrap();
        assert!(load_records(&dir.path().join("missing.jsonl")).unwrap().is_empty());
    }

    #[test]
    fn corrupted_line_names_its_index() {
        let mut buf = Vec::new();
        write_records(&[record(0.1), record(0.2)], &mut buf).unwrap();
        buf.extend_from_slice(b"{not json\n");
        match read_records(&buf[..]) {
            Err(ConsistencyError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_value_is_a_parse_error() {
        let line = r#"{"check":"negation","case_id":"x","inputs":["a"],"value":3.0,"detail":""}"#;
        assert!(matches!(read_records(line.as_bytes()), Err(ConsistencyError::Parse { line: 1, .. })));
    }

    #[test]
    fn sink_appends_across_threads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let sink = RecordSink::create(&path).unwrap();
        std::thread::scope(|s| {
            for t in 0..4 {
                let sink = &sink;
                s.spawn(move || {
                    for i in 0..50 {
                        let mut r = record(0.01 * (i % 10) as f64);
                        r.case_id = format!("{t}-{i}");
                        sink.append(&r).unwrap();
                    }
                });
            }
        });
        drop(sink);
        let back = load_records(&path).unwrap();
        assert_eq!(back.len(), 200);
        let ids: HashSet<_> = back.iter().map(|r| r.case_id.clone()).collect();
        assert_eq!(ids.len(), 200);
    }

    #[test]
    fn sidecar_deduplicates_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inputs.jsonl");
        let side = InputSidecar::open(&path).unwrap();
        let a = side.insert("8/8 w").unwrap();
        assert_eq!(side.insert("8/8 w").unwrap(), a);
        side.insert("other").unwrap();
        drop(side);
        let reopened = InputSidecar::open(&path).unwrap();
        reopened.insert("8/8 w").unwrap();
        drop(reopened);
        let map = load_inputs(&path).unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map[&a], "8/8 w");
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn summary_csv_layout() {
        let records = vec![
            record(0.06),
            record(0.3),
            ViolationRecord::new(CheckKind::Negation, "n1", vec!["q".into()], 0.5, "").unwrap(),
            ViolationRecord::new(CheckKind::Negation, "n2", vec!["q".into()], 0.1, "").unwrap(),
        ];
        let s = summarize(&records, &[0.05, 0.25], 0.2).unwrap();
        let mut out = Vec::new();
        write_summary_csv(&s, &[0.05, 0.25], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "check,total,>0.05,>0.25,mean,strong_fraction");
        assert_eq!(lines[1], "recommended_move,2,1,0.5,,");
        assert_eq!(lines[2], "negation,2,1,0.5,0.3,0.5");
    }

    fn arb_record() -> impl Strategy<Value = ViolationRecord> {
        (
            prop::sample::select(CheckKind::ALL.to_vec()),
            "[a-z0-9:-]{1,20}",
            prop::collection::vec("[ -~]{1,40}", 1..4),
            0.0f64..=1.0,
            "\\PC{0,30}",
        )
            .prop_map(|(check, case_id, inputs, value, detail)| ViolationRecord {
                check,
                case_id,
                inputs,
                value,
                detail,
            })
    }

    proptest! {
        #[test]
        fn persist_then_load_is_identity(records in prop::collection::vec(arb_record(), 0..20)) {
            let mut buf = Vec::new();
            write_records(&records, &mut buf).unwrap();
            prop_assert_eq!(read_records(&buf[..]).unwrap(), records);
        }
    }
}
