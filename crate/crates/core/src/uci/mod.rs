//! Engine evaluations: the [`Evaluator`] abstraction, a UCI process driver,
//! score conversions, caching, and in-process mock engines.

mod cache;
mod config;
mod convert;
mod handle;
mod mock;
mod process;
mod protocol;

pub use cache::{CachedEvaluator, EvalCache};
pub use config::{EngineConfig, EngineFlavor, MockSpec, Preset};
pub use convert::{cp_to_q, mate_to_q, q_d_to_winprob, wdl_to_q, CpMapping};
pub use handle::{engine_identity, start_engine, EngineHandle};
pub use mock::{MaterialMock, PlantedBugMock, SpatialPredicate};
pub use process::UciEngine;
pub use protocol::{parse_info_line, parse_verbose_stats, InfoLine, SearchResult, VerboseStat};

use serde::{Deserialize, Serialize};

use crate::chess::{Board, ChessError, MoveSpec};

/// Score as reported by the engine, before conversion to q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawScore {
    QValue(f64),
    Centipawn(i64),
    WdlPermille { win: u32, draw: u32, loss: u32 },
    MateIn(i64),
}

/// How the q-value of an [`Evaluation`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSource {
    /// Engine reported q (and d) directly.
    Native,
    /// Converted from a reported WDL triple.
    Wdl,
    /// Mate score, mapped to +-1.
    Mate,
    /// Logistic centipawn fallback; reduced fidelity.
    CentipawnFallback,
}

/// Engine verdict on a position, from the side to move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub q: f64,
    pub draw_prob: Option<f64>,
    pub best_move: Option<MoveSpec>,
    pub nodes_used: u64,
    pub raw: RawScore,
    pub source: ScoreSource,
}

impl Evaluation {
    /// Win probability (q + 1 - d) / 2, treating a missing draw estimate as 0.
    pub fn win_prob(&self) -> Result<f64, EngineError> {
        q_d_to_winprob(self.q, self.draw_prob.unwrap_or(0.0))
    }

    pub fn check_invariants(&self) -> Result<(), EngineError> {
        if !(-1.0..=1.0).contains(&self.q) || !self.q.is_finite() {
            return Err(EngineError::Invariant(format!("q = {} outside [-1, 1]", self.q)));
        }
        if let Some(d) = self.draw_prob {
            if !(0.0..=1.0).contains(&d) {
                return Err(EngineError::Invariant(format!("draw probability {d} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("failed to start engine `{executable}`: {reason}")]
    Spawn { executable: String, reason: String },
    #[error("engine rejected option `{name}`: {reason}")]
    OptionRejected { name: String, reason: String },
    #[error("timed out waiting for `{expected}` after {seconds:.1}s; last output: {tail:?}")]
    Timeout { expected: String, seconds: f64, tail: Vec<String> },
    #[error("engine transport failure: {message}; last output: {tail:?}")]
    Transport { message: String, tail: Vec<String> },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("engine returned illegal best move {mv} for {fen}")]
    IllegalBestMove { mv: String, fen: String },
    #[error("inconsistent engine output: {0}")]
    Invariant(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Chess(#[from] ChessError),
}

/// Anything that evaluates chess positions.
///
/// Implementations must be deterministic for a fixed (board, node limit)
/// within their lifetime when configured with a deterministic option set.
pub trait Evaluator: Send {
    /// Identifies engine build and configuration; used as a cache key.
    fn identity(&self) -> String;

    fn evaluate(&mut self, board: &Board, node_limit: u64) -> Result<Evaluation, EngineError>;
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn identity(&self) -> String {
        (**self).identity()
    }

    fn evaluate(&mut self, board: &Board, node_limit: u64) -> Result<Evaluation, EngineError> {
        (**self).evaluate(board, node_limit)
    }
}
