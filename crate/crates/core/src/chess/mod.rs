//! Chess positions: FEN, legal moves, symmetries, position predicates.

mod board;
mod fen;
mod movegen;
mod positions;
mod symmetry;

pub use board::{Board, CastlingRights, Color, MoveSpec, Piece, PieceKind, Square};
pub use fen::{parse_position_list, read_position_list};
pub use positions::{
    empty_squares, has_symmetric_material, place_symmetric_set, random_pawnless, PAWNLESS_MAX_ATTEMPTS,
};
pub use symmetry::{symmetry_applicable, Symmetry};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChessError {
    #[error("invalid FEN `{fen}`: {reason}")]
    Fen { fen: String, reason: String },
    #[error("illegal position: {0}")]
    Illegal(String),
    #[error("illegal move {mv} in {fen}")]
    IllegalMove { mv: String, fen: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("position generation failed: {0}")]
    Generation(String),
    #[error("position list line {line}: {reason}")]
    PositionList { line: usize, reason: String },
    #[error("{0}")]
    Io(String),
}
