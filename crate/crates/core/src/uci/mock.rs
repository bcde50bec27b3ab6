//! In-process evaluators with known consistency properties, used to test
//! the harness itself.

use serde::{Deserialize, Serialize};

use crate::chess::{Board, Color, Square};

use super::{EngineError, Evaluation, Evaluator, RawScore, ScoreSource};

/// q = tanh(material balance / 8) from the side to move; best move is the
/// first legal move in square order.
///
/// Material balance is invariant under every board symmetry and under
/// color mirroring, so this evaluator never violates those checks.
#[derive(Debug, Clone, Default)]
pub struct MaterialMock;

impl MaterialMock {
    pub fn q_of(board: &Board) -> f64 {
        (board.material_balance(board.side_to_move()) as f64 / 8.0).tanh()
    }
}

impl Evaluator for MaterialMock {
    fn identity(&self) -> String {
        "mock:material".into()
    }

    fn evaluate(&mut self, board: &Board, _node_limit: u64) -> Result<Evaluation, EngineError> {
        let q = Self::q_of(board);
        Ok(Evaluation {
            q,
            draw_prob: None,
            best_move: board.legal_moves().first().copied(),
            nodes_used: 1,
            raw: RawScore::QValue(q),
            source: ScoreSource::Native,
        })
    }
}

/// Spatial condition under which a planted bug fires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialPredicate {
    /// White king on a file in `min..=max` (0 = a-file).
    WhiteKingOnFiles { min: u8, max: u8 },
    /// White king on one of the listed squares.
    WhiteKingOnSquares { squares: Vec<Square> },
}

impl Default for SpatialPredicate {
    fn default() -> Self {
        SpatialPredicate::WhiteKingOnFiles { min: 0, max: 3 }
    }
}

impl SpatialPredicate {
    pub fn holds(&self, board: &Board) -> bool {
        let Some(king) = board.king_square(Color::White) else {
            return false;
        };
        match self {
            SpatialPredicate::WhiteKingOnFiles { min, max } => (*min..=*max).contains(&king.file()),
            SpatialPredicate::WhiteKingOnSquares { squares } => squares.contains(&king),
        }
    }

    fn describe(&self) -> String {
        match self {
            SpatialPredicate::WhiteKingOnFiles { min, max } => format!("wk-files-{min}-{max}"),
            SpatialPredicate::WhiteKingOnSquares { squares } => {
                let names: Vec<String> = squares.iter().map(|s| s.to_string()).collect();
                format!("wk-on-{}", names.join("+"))
            }
        }
    }
}

/// Wraps an evaluator and shifts q by `delta` (clamped to [-1, 1]) whenever
/// the predicate holds.
pub struct PlantedBugMock<E> {
    inner: E,
    delta: f64,
    predicate: SpatialPredicate,
}

impl<E: Evaluator> PlantedBugMock<E> {
    pub fn new(inner: E, delta: f64, predicate: SpatialPredicate) -> Self {
        PlantedBugMock { inner, delta, predicate }
    }

    pub fn predicate(&self) -> &SpatialPredicate {
        &self.predicate
    }
}

impl<E: Evaluator> Evaluator for PlantedBugMock<E> {
    fn identity(&self) -> String {
        format!("mock:planted-bug({},{})/{}", self.delta, self.predicate.describe(), self.inner.identity())
    }

    fn evaluate(&mut self, board: &Board, node_limit: u64) -> Result<Evaluation, EngineError> {
        let mut eval = self.inner.evaluate(board, node_limit)?;
        if self.predicate.holds(board) {
            eval.q = (eval.q + self.delta).clamp(-1.0, 1.0);
            eval.raw = RawScore::QValue(eval.q);
        }
        Ok(eval)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::Symmetry;

    #[test]
    fn start_position_is_equal() {
        let e = MaterialMock.evaluate(&Board::startpos(), 1).unwrap();
        assert_eq!(e.q, 0.0);
        assert_eq!(e.best_move, Board::startpos().legal_moves().first().copied());
    }

    #[test]
    fn queen_up_value() {
        let b = Board::from_fen("4k3/8/8/8/8/8/8/3QK3 w - - 0 1").unwrap();
        let q = MaterialMock.evaluate(&b, 1).unwrap().q;
        assert!((q - (9.0f64 / 8.0).tanh()).abs() < 1e-15);
        assert!((q - 0.8093).abs() < 1e-4);
        let b = Board::from_fen("4k3/8/8/8/8/8/8/3QK3 b - - 0 1").unwrap();
        assert!((MaterialMock.evaluate(&b, 1).unwrap().q + 0.8093).abs() < 1e-4);
    }

    #[test]
    fn planted_bug_shifts_across_rotation() {
        // white king on c1: files a-d; after a 180 degree rotation it sits on f8
        let b = Board::from_fen("8/8/3k4/8/8/8/8/2K5 w - - 0 1").unwrap();
        let rotated = b.apply_symmetry(Symmetry::Rot180).unwrap();
        let mut bug = PlantedBugMock::new(MaterialMock, 0.3, SpatialPredicate::default());
        let a = bug.evaluate(&b, 1).unwrap().q;
        let r = bug.evaluate(&rotated, 1).unwrap().q;
        assert_eq!(a - r, 0.3);
    }

    #[test]
    fn planted_bug_clamps() {
        let b = Board::from_fen("4k3/8/8/8/8/8/8/QQQ1K3 w - - 0 1").unwrap();
        let mut bug = PlantedBugMock::new(MaterialMock, 0.9, SpatialPredicate::WhiteKingOnFiles { min: 4, max: 4 });
        assert_eq!(bug.evaluate(&b, 1).unwrap().q, 1.0);
    }
}
