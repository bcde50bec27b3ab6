//! Forecast consistency: question tuples, answer parsing, median
//! aggregation, oracle queries and the per-kind violation metrics.

mod metrics;
mod oracle;

pub use metrics::{average_ranks, metric_bayes, metric_monotonicity, metric_negation, metric_paraphrase, spearman};
pub use oracle::{
    ChatMessage, ChatOracle, ChatRequest, FixedOracle, HttpOracle, RateLimiter, Role, ScriptedOracle, ScriptedReply,
};

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::consistency::{input_id, CheckKind, ConsistencyError, ViolationRecord};

/// Marker that precedes the final numeric answer.
pub const ANSWER_TOKEN: &str = "[Answer]";
/// Prefix of every user question message.
pub const QUESTION_PREFIX: &str = "[Q] ";

#[derive(Debug, thiserror::Error)]
pub enum ForecastError {
    #[error("metric contract violated: {0}")]
    Contract(String),
    #[error("no valid samples for question `{question}`")]
    Aggregation { question: String },
    #[error("oracle transport failure: {0}")]
    Transport(String),
    #[error("malformed tuple `{id}`: {reason}")]
    Tuple { id: String, reason: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Record(#[from] ConsistencyError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    #[default]
    Probability,
    Quantity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TupleKind {
    /// Questions: A, not A.
    Negation,
    /// Two or more rewordings of one question.
    Paraphrase,
    /// Three or more questions indexed by ascending `keys`.
    Monotonicity,
    /// Questions: A, B, A given B, B given A.
    Bayes,
    /// One question asked `repeats` times.
    SelfConsistency,
}

impl TupleKind {
    pub fn check(self) -> CheckKind {
        match self {
            TupleKind::Negation => CheckKind::Negation,
            TupleKind::Paraphrase => CheckKind::Paraphrase,
            TupleKind::Monotonicity => CheckKind::Monotonicity,
            TupleKind::Bayes => CheckKind::BayesRule,
            TupleKind::SelfConsistency => CheckKind::SelfConsistency,
        }
    }

    pub fn default_unit(self) -> Unit {
        match self {
            TupleKind::Monotonicity => Unit::Quantity,
            _ => Unit::Probability,
        }
    }
}

fn default_self_repeats() -> usize {
    4
}

/// Related forecast questions sharing one consistency relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionTuple {
    pub id: String,
    pub kind: TupleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keys: Vec<i64>,
    pub questions: Vec<String>,
    /// Defaults to the kind's natural unit (quantities for monotonicity).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Unit>,
    /// Self-consistency only: how many times the question is asked.
    #[serde(default = "default_self_repeats")]
    pub repeats: usize,
}

impl QuestionTuple {
    pub fn unit(&self) -> Unit {
        self.unit.unwrap_or_else(|| self.kind.default_unit())
    }

    pub fn validate(&self) -> Result<(), ForecastError> {
        let bad = |reason: String| Err(ForecastError::Tuple { id: self.id.clone(), reason });
        let n = self.questions.len();
        if self.id.trim().is_empty() {
            return bad("empty id".into());
        }
        if self.questions.iter().any(|q| q.trim().is_empty()) {
            return bad("empty question text".into());
        }
        match self.kind {
            TupleKind::Negation if n != 2 => bad(format!("negation needs 2 questions, got {n}")),
            TupleKind::Bayes if n != 4 => bad(format!("bayes needs 4 questions, got {n}")),
            TupleKind::Paraphrase if n < 2 => bad(format!("paraphrase needs >= 2 questions, got {n}")),
            TupleKind::SelfConsistency if n != 1 || self.repeats < 2 => {
                bad(format!("self-consistency needs 1 question and >= 2 repeats, got {n} and {}", self.repeats))
            }
            TupleKind::Monotonicity => {
                if n < 3 {
                    return bad(format!("monotonicity needs >= 3 questions, got {n}"));
                }
                if self.direction.is_none() {
                    return bad("monotonicity needs a direction".into());
                }
                if self.keys.len() != n {
                    return bad(format!("{} keys for {n} questions", self.keys.len()));
                }
                if self.keys.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("keys must be strictly ascending".into());
                }
                Ok(())
            }
            _ => {
                if self.kind != TupleKind::Monotonicity && (self.direction.is_some() || !self.keys.is_empty()) {
                    return bad("direction/keys only apply to monotonicity tuples".into());
                }
                if self.kind != TupleKind::Monotonicity && self.unit() != Unit::Probability {
                    return bad("only monotonicity tuples may ask for quantities".into());
                }
                Ok(())
            }
        }
    }

    /// Question texts in query order (self-consistency expands repeats).
    pub fn expanded_questions(&self) -> Vec<&str> {
        if self.kind == TupleKind::SelfConsistency {
            vec![self.questions[0].as_str(); self.repeats]
        } else {
            self.questions.iter().map(String::as_str).collect()
        }
    }
}

/// Parses a JSON array of tuples and validates each.
pub fn parse_tuples(text: &str) -> Result<Vec<QuestionTuple>, ForecastError> {
    let tuples: Vec<QuestionTuple> =
        serde_json::from_str(text).map_err(|e| ForecastError::Config(format!("tuple file: {e}")))?;
    let mut ids = std::collections::HashSet::new();
    for t in &tuples {
        t.validate()?;
        if !ids.insert(t.id.clone()) {
            return Err(ForecastError::Tuple { id: t.id.clone(), reason: "duplicate id".into() });
        }
    }
    Ok(tuples)
}

pub fn load_tuples(path: &Path) -> Result<Vec<QuestionTuple>, ForecastError> {
    parse_tuples(&std::fs::read_to_string(path)?)
}

/// Small synthetic tuple set covering every kind; not real forecasting data.
pub fn bundled_sample() -> Vec<QuestionTuple> {
    parse_tuples(include_str!("../../data/sample_tuples.json")).expect("bundled sample is valid")
}

/// Value of the first numeric literal after the bottom-most `[Answer]`.
///
/// Percent forms are rejected, as are probabilities outside [0, 1]. Digit
/// groups separated by commas (`1,250`) are accepted.
pub fn parse_answer(response: &str, unit: Unit) -> Option<f64> {
    let line = response.lines().rev().find(|l| l.contains(ANSWER_TOKEN))?;
    let tail = &line[line.find(ANSWER_TOKEN)? + ANSWER_TOKEN.len()..];
    let (value, rest) = first_number(tail)?;
    if rest.trim_start().starts_with('%') || !value.is_finite() {
        return None;
    }
    match unit {
        Unit::Probability if !(0.0..=1.0).contains(&value) => None,
        _ => Some(value),
    }
}

fn first_number(text: &str) -> Option<(f64, &str)> {
    let b = text.as_bytes();
    let start = (0..b.len()).find(|&i| {
        b[i].is_ascii_digit()
            || (b[i] == b'.' && b.get(i + 1).is_some_and(u8::is_ascii_digit))
            || (matches!(b[i], b'-' | b'+') && b.get(i + 1).is_some_and(|c| c.is_ascii_digit() || *c == b'.'))
    })?;
    let mut i = start;
    let mut literal = String::new();
    if matches!(b[i], b'-' | b'+') {
        literal.push(b[i] as char);
        i += 1;
    }
    let mut seen_dot = false;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_digit() {
            literal.push(c as char);
        } else if c == b'.' && !seen_dot && b.get(i + 1).is_some_and(u8::is_ascii_digit) {
            seen_dot = true;
            literal.push('.');
        } else if c == b','
            && !seen_dot
            && b.len() >= i + 4
            && b[i + 1..i + 4].iter().all(u8::is_ascii_digit)
            && !b.get(i + 4).is_some_and(u8::is_ascii_digit)
        {
            // thousands separator
        } else if matches!(c, b'e' | b'E') && literal.chars().any(|ch| ch.is_ascii_digit()) {
            let exp_len = exponent_len(&b[i..]);
            if exp_len == 0 {
                break;
            }
            literal.push_str(&text[i..i + exp_len]);
            i += exp_len;
            break;
        } else {
            break;
        }
        i += 1;
    }
    literal.parse().ok().map(|v| (v, &text[i..]))
}

fn exponent_len(b: &[u8]) -> usize {
    let mut j = 1;
    if b.get(j).is_some_and(|c| matches!(c, b'-' | b'+')) {
        j += 1;
    }
    let digits = b[j.min(b.len())..].iter().take_while(|c| c.is_ascii_digit()).count();
    if digits == 0 {
        0
    } else {
        j + digits
    }
}

/// Median of the present samples; an even count averages the middle two.
pub fn aggregate_median(samples: &[Option<f64>]) -> Option<f64> {
    let mut present: Vec<f64> = samples.iter().flatten().copied().collect();
    if present.is_empty() {
        return None;
    }
    present.sort_by(f64::total_cmp);
    let n = present.len();
    Some(if n % 2 == 1 { present[n / 2] } else { (present[n / 2 - 1] + present[n / 2]) / 2.0 })
}

/// One fixed example exchange shown before the real question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub question: String,
    pub answer: String,
}

pub const DEFAULT_PROBABILITY_SYSTEM_PROMPT: &str = "You are helping with questions from a prediction market. \
Give one best probability estimate, never a range. Do not state the probability first: \
reason through arguments for and against, with intermediate estimates, and put the final \
number alone on the last line in the form [Answer] 0.5";

pub const DEFAULT_QUANTITY_SYSTEM_PROMPT: &str = "You are helping with questions from a prediction market. \
Give one best numerical estimate, never a range. Do not state the number first: \
reason through the relevant factors, with intermediate estimates, and put the final \
number alone on the last line in the form [Answer] 50";

pub fn default_probability_demonstration() -> Demonstration {
    Demonstration {
        question: "Will a crewed mission land on the Moon before 2030?".into(),
        answer: "Several national programs have announced crewed lunar landings for the late 2020s, \
and hardware for at least one of them is in testing.\n\n\
Against this, such schedules have slipped repeatedly, and the landers are not yet flight proven.\n\n\
Weighing both, I put the chance at roughly 55%.\n\n[Answer] 0.55"
            .into(),
    }
}

pub fn default_quantity_demonstration() -> Demonstration {
    Demonstration {
        question: "How many countries will have a national carbon price by the end of 2030?".into(),
        answer: "About 40 national jurisdictions price carbon today, and a handful join every few years.\n\n\
Adding roughly 2 per year for 6 years gives 40 + 12 = 52, slightly reduced for political reversals.\n\n\
[Answer] 50"
            .into(),
    }
}

fn default_model() -> String {
    "gpt-4".into()
}

fn default_api_key_env() -> Option<String> {
    Some("OPENAI_API_KEY".into())
}

/// How the oracle is queried. Prompt fields left unset fall back to the
/// unit's defaults; `repeats` unset means 3 at temperature 0 and 6 otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub endpoint: Option<String>,
    pub model_name: String,
    pub temperature: f64,
    pub repeats: Option<usize>,
    pub system_prompt: Option<String>,
    pub quantity_system_prompt: Option<String>,
    pub demonstration: Option<Demonstration>,
    pub quantity_demonstration: Option<Demonstration>,
    /// Send no one-shot exchange at all.
    pub zero_shot: bool,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    /// 0 disables rate limiting.
    pub requests_per_minute: u32,
    pub api_key_env: Option<String>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            endpoint: None,
            model_name: default_model(),
            temperature: 0.0,
            repeats: None,
            system_prompt: None,
            quantity_system_prompt: None,
            demonstration: None,
            quantity_demonstration: None,
            zero_shot: false,
            timeout_secs: 120.0,
            max_retries: 3,
            backoff_ms: 1000,
            requests_per_minute: 0,
            api_key_env: default_api_key_env(),
        }
    }
}

impl OracleConfig {
    pub fn effective_repeats(&self) -> usize {
        self.repeats.unwrap_or(if self.temperature == 0.0 { 3 } else { 6 })
    }

    pub fn validate(&self) -> Result<(), ForecastError> {
        if !(self.temperature >= 0.0) {
            return Err(ForecastError::Config("temperature must be nonnegative".into()));
        }
        if self.effective_repeats() == 0 {
            return Err(ForecastError::Config("repeats must be at least 1".into()));
        }
        if !(self.timeout_secs > 0.0) {
            return Err(ForecastError::Config("timeout must be positive".into()));
        }
        Ok(())
    }

    /// System prompt, optional one-shot exchange, then the question.
    pub fn request(&self, question: &str, unit: Unit) -> ChatRequest {
        let (system, demo) = match unit {
            Unit::Probability => (
                self.system_prompt.clone().unwrap_or_else(|| DEFAULT_PROBABILITY_SYSTEM_PROMPT.into()),
                self.demonstration.clone().unwrap_or_else(default_probability_demonstration),
            ),
            Unit::Quantity => (
                self.quantity_system_prompt.clone().unwrap_or_else(|| DEFAULT_QUANTITY_SYSTEM_PROMPT.into()),
                self.quantity_demonstration.clone().unwrap_or_else(default_quantity_demonstration),
            ),
        };
        let mut messages = vec![ChatMessage::new(Role::System, system)];
        if !self.zero_shot {
            messages.push(ChatMessage::new(Role::User, format!("{QUESTION_PREFIX}{}", demo.question)));
            messages.push(ChatMessage::new(Role::Assistant, demo.answer));
        }
        messages.push(ChatMessage::new(Role::User, format!("{QUESTION_PREFIX}{question}")));
        ChatRequest { model: self.model_name.clone(), temperature: self.temperature, messages }
    }
}

/// Aggregated answer to one question, with the raw responses kept for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub question_id: String,
    pub question: String,
    pub unit: Unit,
    pub samples: Vec<Option<f64>>,
    pub value: f64,
    /// Raw reply text, or `None` where the request itself failed.
    pub responses: Vec<Option<String>>,
}

/// Asks `question` `repeats` times, discards unparsable replies and takes
/// the median of the rest.
pub fn query_oracle<O: ChatOracle + ?Sized>(
    config: &OracleConfig,
    oracle: &mut O,
    question: &str,
    unit: Unit,
) -> Result<Forecast, ForecastError> {
    let request = config.request(question, unit);
    let mut samples = Vec::new();
    let mut responses = Vec::new();
    for _ in 0..config.effective_repeats() {
        match oracle.complete(&request) {
            Ok(text) => {
                samples.push(parse_answer(&text, unit));
                responses.push(Some(text));
            }
            Err(e) => {
                warn!("oracle request failed for `{question}`: {e}");
                samples.push(None);
                responses.push(None);
            }
        }
    }
    let value =
        aggregate_median(&samples).ok_or_else(|| ForecastError::Aggregation { question: question.to_string() })?;
    Ok(Forecast { question_id: input_id(question), question: question.to_string(), unit, samples, value, responses })
}

/// Applies the tuple's metric to aggregated forecasts in question order.
pub fn tuple_metric(tuple: &QuestionTuple, values: &[f64]) -> Result<f64, ForecastError> {
    match tuple.kind {
        TupleKind::Negation => metric_negation(values[0], values[1]),
        TupleKind::Paraphrase => metric_paraphrase(values),
        TupleKind::Bayes => metric_bayes(values[0], values[1], values[2], values[3]),
        TupleKind::Monotonicity => metric_monotonicity(
            values,
            tuple.direction.expect("validated monotonicity tuple has a direction"),
            &tuple.keys,
        ),
        // probability answers only, so max − min stays in [0, 1]
        TupleKind::SelfConsistency => metric_paraphrase(values),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TupleOutcome {
    pub record: ViolationRecord,
    pub forecasts: Vec<Forecast>,
}

/// Queries every member question and scores the tuple.
pub fn run_tuple<O: ChatOracle + ?Sized>(
    config: &OracleConfig,
    oracle: &mut O,
    tuple: &QuestionTuple,
) -> Result<TupleOutcome, ForecastError> {
    tuple.validate()?;
    let unit = tuple.unit();
    let forecasts = tuple
        .expanded_questions()
        .into_iter()
        .map(|q| query_oracle(config, oracle, q, unit))
        .collect::<Result<Vec<_>, _>>()?;
    let values: Vec<f64> = forecasts.iter().map(|f| f.value).collect();
    let value = tuple_metric(tuple, &values)?;
    let shown: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let inputs = forecasts.iter().map(|f| f.question_id.clone()).collect();
    let record = ViolationRecord::new(
        tuple.kind.check(),
        tuple.id.clone(),
        inputs,
        value,
        format!("forecasts=[{}]", shown.join(",")),
    )?;
    Ok(TupleOutcome { record, forecasts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_final_answer() {
        let text = "On one hand...\nHence around 90%.\n\n[Answer] 0.9";
        assert_eq!(parse_answer(text, Unit::Probability), Some(0.9));
        assert_eq!(parse_answer("blah\n[Answer] 67", Unit::Quantity), Some(67.0));
        assert_eq!(parse_answer("[Answer] 67", Unit::Probability), None);
        assert_eq!(parse_answer("no token here 0.4", Unit::Probability), None);
        assert_eq!(parse_answer("", Unit::Probability), None);
        assert_eq!(parse_answer("[Answer] 90%", Unit::Quantity), None);
        assert_eq!(parse_answer("[Answer] 1,250 people", Unit::Quantity), Some(1250.0));
        assert_eq!(parse_answer("[Answer] .35", Unit::Probability), Some(0.35));
        assert_eq!(parse_answer("[Answer] -3.5e2", Unit::Quantity), Some(-350.0));
        assert_eq!(parse_answer("[Answer] 0.3\nthanks", Unit::Probability), Some(0.3));
        assert_eq!(parse_answer("[Answer] 0.2\n[Answer] 0.7", Unit::Probability), Some(0.7));
        assert_eq!(parse_answer("[Answer] 1, 2", Unit::Quantity), Some(1.0));
    }

    #[test]
    fn median_conventions() {
        assert_eq!(aggregate_median(&[Some(0.1), Some(0.2), Some(0.9)]), Some(0.2));
        assert_eq!(aggregate_median(&[Some(0.1), None, Some(0.3)]), Some(0.2));
        assert_eq!(aggregate_median(&[Some(0.1), Some(0.3)]), Some(0.2));
        assert_eq!(aggregate_median(&[None, None]), None);
    }

    #[test]
    fn repeats_default_by_temperature() {
        let mut c = OracleConfig::default();
        assert_eq!(c.effective_repeats(), 3);
        c.temperature = 0.5;
        assert_eq!(c.effective_repeats(), 6);
        c.repeats = Some(2);
        assert_eq!(c.effective_repeats(), 2);
    }

    #[test]
    fn request_layout() {
        let r = OracleConfig::default().request("Will it rain?", Unit::Probability);
        let roles: Vec<Role> = r.messages.iter().map(|m| m.role).collect();
        assert_eq!(roles, [Role::System, Role::User, Role::Assistant, Role::User]);
        assert_eq!(r.question(), "[Q] Will it rain?");
        assert!(r.messages[0].content.ends_with("[Answer] 0.5"));
        let demo = &r.messages[2].content;
        assert_eq!(parse_answer(demo, Unit::Probability), Some(0.55));
        let q = OracleConfig { zero_shot: true, ..OracleConfig::default() }.request("x", Unit::Quantity);
        assert_eq!(q.messages.len(), 2);
        assert_eq!(parse_answer(&default_quantity_demonstration().answer, Unit::Quantity), Some(50.0));
    }

    #[test]
    fn fixed_oracle_forecast() {
        let f = query_oracle(&OracleConfig::default(), &mut FixedOracle("[Answer] 0.5".into()), "q", Unit::Probability)
            .unwrap();
        assert_eq!(f.value, 0.5);
        assert_eq!(f.samples.len(), 3);
    }

    #[test]
    fn two_valid_one_invalid() {
        let mut o = ScriptedOracle::new().with(
            "q",
            vec![
                ScriptedReply::Text("[Answer] 0.2".into()),
                ScriptedReply::Text("I cannot say".into()),
                ScriptedReply::Text("[Answer] 0.4".into()),
            ],
        );
        let f = query_oracle(&OracleConfig::default(), &mut o, "q", Unit::Probability).unwrap();
        assert!((f.value - 0.3).abs() < 1e-15);
        assert_eq!(f.samples[1], None);
    }

    #[test]
    fn all_failures_is_aggregation_error() {
        let mut o = ScriptedOracle::new();
        assert!(matches!(
            query_oracle(&OracleConfig::default(), &mut o, "q", Unit::Probability),
            Err(ForecastError::Aggregation { .. })
        ));
    }

    fn tuple(kind: TupleKind, questions: &[&str]) -> QuestionTuple {
        QuestionTuple {
            id: "t".into(),
            kind,
            direction: None,
            keys: vec![],
            questions: questions.iter().map(|s| s.to_string()).collect(),
            unit: None,
            repeats: 4,
        }
    }

    #[test]
    fn negation_tuple_record() {
        let mut o = ScriptedOracle::new().answering("A", 0.9).answering("not A", 0.9);
        let out = run_tuple(&OracleConfig::default(), &mut o, &tuple(TupleKind::Negation, &["A", "not A"])).unwrap();
        assert!((out.record.value - 0.8).abs() < 1e-12);
        assert_eq!(out.record.check, CheckKind::Negation);
    }

    #[test]
    fn bayes_tuple_record() {
        let mut o =
            ScriptedOracle::new().answering("A", 0.5).answering("B", 0.5).answering("A|B", 0.8).answering("B|A", 0.4);
        let t = tuple(TupleKind::Bayes, &["A", "B", "A|B", "B|A"]);
        let out = run_tuple(&OracleConfig::default(), &mut o, &t).unwrap();
        assert!((out.record.value - 0.2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn self_consistency_with_deterministic_oracle() {
        let t = tuple(TupleKind::SelfConsistency, &["A"]);
        let out = run_tuple(&OracleConfig::default(), &mut FixedOracle("[Answer] 0.3".into()), &t).unwrap();
        assert_eq!(out.record.value, 0.0);
        assert_eq!(out.forecasts.len(), 4);
    }

    #[test]
    fn tuple_validation() {
        assert!(tuple(TupleKind::Negation, &["A"]).validate().is_err());
        assert!(tuple(TupleKind::Bayes, &["A", "B", "C"]).validate().is_err());
        let mut m = tuple(TupleKind::Monotonicity, &["a", "b", "c"]);
        assert!(m.validate().is_err());
        m.direction = Some(Direction::Increasing);
        m.keys = vec![2025, 2028, 2028];
        assert!(m.validate().is_err());
        m.keys = vec![2025, 2028, 2032];
        m.validate().unwrap();
        assert_eq!(m.unit(), Unit::Quantity);
    }

    #[test]
    fn bundled_sample_covers_every_kind() {
        let s = bundled_sample();
        assert!(s.len() >= 15);
        for kind in [
            TupleKind::Negation,
            TupleKind::Paraphrase,
            TupleKind::Monotonicity,
            TupleKind::Bayes,
            TupleKind::SelfConsistency,
        ] {
            assert!(s.iter().any(|t| t.kind == kind), "{kind:?}");
        }
    }
}
