//! Domain-agnostic consistency-check records and threshold statistics.
//!
//! Every check produces a nonnegative violation value; a system is
//! consistent on a case exactly when that value is zero. Campaign results are
//! summarized by counting values strictly above each reporting threshold.

mod records;

pub use records::{
    input_id, load_inputs, load_records, persist_inputs, persist_records, read_records, summarize, write_records,
    write_summary_csv, CheckSummary, InputSidecar, RecordSink,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Reporting thresholds for chess evaluation differences (q-space).
pub const DEFAULT_CHESS_THRESHOLDS: [f64; 6] = [0.05, 0.1, 0.25, 0.5, 0.75, 1.0];

/// A forecast violation above this value counts as strong.
pub const DEFAULT_STRONG_EPSILON: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    BoardTransformations,
    PositionMirroring,
    ForcedMove,
    RecommendedMove,
    Negation,
    Paraphrase,
    Monotonicity,
    BayesRule,
    SelfConsistency,
}

impl CheckKind {
    pub const ALL: [CheckKind; 9] = [
        CheckKind::BoardTransformations,
        CheckKind::PositionMirroring,
        CheckKind::ForcedMove,
        CheckKind::RecommendedMove,
        CheckKind::Negation,
        CheckKind::Paraphrase,
        CheckKind::Monotonicity,
        CheckKind::BayesRule,
        CheckKind::SelfConsistency,
    ];

    pub const CHESS: [CheckKind; 4] = [
        CheckKind::BoardTransformations,
        CheckKind::PositionMirroring,
        CheckKind::ForcedMove,
        CheckKind::RecommendedMove,
    ];

    pub fn is_chess(self) -> bool {
        Self::CHESS.contains(&self)
    }

    /// Largest value a record of this kind may hold: the q-range diameter for
    /// chess checks, 1 for normalized forecast metrics.
    pub fn max_value(self) -> f64 {
        if self.is_chess() {
            2.0
        } else {
            1.0
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::BoardTransformations => "board_transformations",
            CheckKind::PositionMirroring => "position_mirroring",
            CheckKind::ForcedMove => "forced_move",
            CheckKind::RecommendedMove => "recommended_move",
            CheckKind::Negation => "negation",
            CheckKind::Paraphrase => "paraphrase",
            CheckKind::Monotonicity => "monotonicity",
            CheckKind::BayesRule => "bayes_rule",
            CheckKind::SelfConsistency => "self_consistency",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckKind {
    type Err = ConsistencyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        CheckKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| ConsistencyError::Config(format!("unknown check kind `{s}`")))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConsistencyError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Outcome of one consistency check on one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub check: CheckKind,
    pub case_id: String,
    pub inputs: Vec<String>,
    pub value: f64,
    #[serde(default)]
    pub detail: String,
}

impl ViolationRecord {
    pub fn new(
        check: CheckKind,
        case_id: impl Into<String>,
        inputs: Vec<String>,
        value: f64,
        detail: impl Into<String>,
    ) -> Result<Self, ConsistencyError> {
        let record = ViolationRecord { check, case_id: case_id.into(), inputs, value, detail: detail.into() };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<(), ConsistencyError> {
        if self.inputs.is_empty() {
            return Err(ConsistencyError::InvalidRecord(format!("{}: no inputs", self.case_id)));
        }
        if !self.value.is_finite() || self.value < 0.0 || self.value > self.check.max_value() {
            return Err(ConsistencyError::InvalidRecord(format!(
                "{}: value {} outside [0, {}]",
                self.case_id,
                self.value,
                self.check.max_value()
            )));
        }
        Ok(())
    }
}

/// Counts of values strictly above each threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketSummary {
    pub thresholds: Vec<f64>,
    pub counts: Vec<usize>,
    pub total: usize,
    pub mean: f64,
}

impl BucketSummary {
    pub fn fractions(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| if self.total == 0 { 0.0 } else { c as f64 / self.total as f64 }).collect()
    }
}

pub fn validate_thresholds(thresholds: &[f64]) -> Result<(), ConsistencyError> {
    if thresholds.iter().any(|t| !t.is_finite()) {
        return Err(ConsistencyError::Config("thresholds must be finite".into()));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConsistencyError::Config(format!("thresholds must be strictly ascending: {thresholds:?}")));
    }
    Ok(())
}

pub fn bucketize(values: &[f64], thresholds: &[f64]) -> Result<BucketSummary, ConsistencyError> {
    validate_thresholds(thresholds)?;
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(ConsistencyError::Config(format!("non-finite value {v}")));
    }
    let counts = thresholds.iter().map(|&t| values.iter().filter(|&&v| v > t).count()).collect();
    let mean = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 };
    Ok(BucketSummary { thresholds: thresholds.to_vec(), counts, total: values.len(), mean })
}

/// Fraction of values strictly greater than `epsilon` (0 for an empty list).
pub fn strong_fraction(values: &[f64], epsilon: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v > epsilon).count() as f64 / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bucketize_counts_strictly_above() {
        let s = bucketize(&[0.06, 0.30, 0.01], &DEFAULT_CHESS_THRESHOLDS).unwrap();
        assert_eq!(s.counts, vec![2, 1, 1, 0, 0, 0]);
        assert_eq!(s.total, 3);
        // boundary is exclusive
        let s = bucketize(&[0.05, 0.1], &[0.05, 0.1]).unwrap();
        assert_eq!(s.counts, vec![1, 0]);
    }

    #[test]
    fn bucketize_empty() {
        let s = bucketize(&[], &DEFAULT_CHESS_THRESHOLDS).unwrap();
        assert_eq!(s.counts, vec![0; 6]);
        assert_eq!(s.total, 0);
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.fractions(), vec![0.0; 6]);
    }

    #[test]
    fn non_ascending_thresholds_rejected() {
        assert!(bucketize(&[0.1], &[0.1, 0.1]).is_err());
        assert!(bucketize(&[0.1], &[0.5, 0.2]).is_err());
    }

    #[test]
    fn strong_fraction_examples() {
        assert!((strong_fraction(&[0.34, 0.05, 0.21], 0.2) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(strong_fraction(&[], 0.2), 0.0);
        assert_eq!(DEFAULT_STRONG_EPSILON, 0.2);
    }

    #[test]
    fn record_invariants() {
        assert!(ViolationRecord::new(CheckKind::Negation, "a", vec![], 0.1, "").is_err());
        assert!(ViolationRecord::new(CheckKind::Negation, "a", vec!["q".into()], 1.5, "").is_err());
        assert!(ViolationRecord::new(CheckKind::ForcedMove, "a", vec!["f".into()], 1.5, "").is_ok());
        assert!(ViolationRecord::new(CheckKind::ForcedMove, "a", vec!["f".into()], -0.1, "").is_err());
    }

    #[test]
    fn check_kind_names_parse() {
        for k in CheckKind::ALL {
            assert_eq!(k.as_str().parse::<CheckKind>().unwrap(), k);
        }
        assert_eq!("forced-move".parse::<CheckKind>().unwrap(), CheckKind::ForcedMove);
        assert!("bogus".parse::<CheckKind>().is_err());
    }

    proptest! {
        #[test]
        fn counts_nonincreasing(values in prop::collection::vec(0.0f64..2.0, 0..60)) {
            let s = bucketize(&values, &DEFAULT_CHESS_THRESHOLDS).unwrap();
            prop_assert!(s.counts.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(s.fractions().iter().all(|f| (0.0..=1.0).contains(f)));
            prop_assert!(s.mean >= 0.0);
        }

        #[test]
        fn bucketize_permutation_invariant(mut values in prop::collection::vec(0.0f64..2.0, 0..40), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let a = bucketize(&values, &DEFAULT_CHESS_THRESHOLDS).unwrap();
            values.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = bucketize(&values, &DEFAULT_CHESS_THRESHOLDS).unwrap();
            prop_assert_eq!(a.counts, b.counts);
            prop_assert_eq!(a.total, b.total);
        }

        #[test]
        fn strong_fraction_extremes(values in prop::collection::vec(0.0f64..=1.0, 0..40)) {
            let positive = if values.is_empty() { 0.0 } else {
                values.iter().filter(|&&v| v > 0.0).count() as f64 / values.len() as f64
            };
            prop_assert_eq!(strong_fraction(&values, 0.0), positive);
            prop_assert_eq!(strong_fraction(&values, 1.0), 0.0);
        }
    }
}
