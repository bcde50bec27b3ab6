//! Consistency testing for black-box decision systems.
//!
//! The types most callers need are re-exported at the crate root; the
//! modules hold the full API.

pub mod campaign;
pub mod checks;
pub mod chess;
pub mod consistency;
pub mod forecast;
pub mod ga;
pub mod uci;

pub use campaign::{run_campaign, CampaignConfig, CampaignError, CampaignReport, Manifest, Mode};
pub use checks::ChessCheckCase;
pub use chess::{Board, ChessError, Color, MoveSpec, Piece, PieceKind, Square, Symmetry};
pub use consistency::{BucketSummary, CheckKind, CheckSummary, ConsistencyError, ViolationRecord};
pub use forecast::{ChatOracle, Forecast, ForecastError, OracleConfig, QuestionTuple, TupleKind, Unit};
pub use ga::{GaConfig, GaOutcome};
pub use uci::{EngineConfig, EngineError, Evaluation, Evaluator};
