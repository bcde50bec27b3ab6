//! The four chess consistency checks.
//!
//! All q-values are from the side to move, so a position and its successor
//! after any move should be evaluated as exact negatives of each other.

use crate::chess::{symmetry_applicable, Board, MoveSpec, Symmetry};
use crate::consistency::{input_id, CheckKind, ConsistencyError, ViolationRecord};
use crate::uci::{EngineError, Evaluation, Evaluator};

/// One evaluated check instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ChessCheckCase {
    pub check: CheckKind,
    pub base: Board,
    /// Transformed or successor positions, in evaluation order after `base`.
    pub derived: Vec<Board>,
    /// `evaluations[0]` is for `base`, then one per derived board.
    pub evaluations: Vec<Evaluation>,
    pub violation: f64,
    /// The move connecting base and successor, for move-based checks.
    pub played: Option<MoveSpec>,
}

impl ChessCheckCase {
    /// FENs of base and derived boards, in record-input order.
    pub fn fens(&self) -> Vec<String> {
        std::iter::once(&self.base).chain(&self.derived).map(Board::to_fen).collect()
    }

    pub fn case_id(&self) -> String {
        case_id(self.check, &self.base)
    }

    /// Record with input identifiers; pair with [`ChessCheckCase::fens`] for
    /// the sidecar map.
    pub fn to_record(&self) -> Result<ViolationRecord, ConsistencyError> {
        let inputs = self.fens().iter().map(|f| input_id(f)).collect();
        let qs: Vec<String> = self.evaluations.iter().map(|e| e.q.to_string()).collect();
        let mut detail = format!("q=[{}]", qs.join(","));
        if let Some(mv) = self.played {
            detail.push_str(&format!(" move={mv}"));
        }
        ViolationRecord::new(self.check, self.case_id(), inputs, self.violation, detail)
    }
}

/// `"{check}:{input id of the base FEN}"`.
pub fn case_id(check: CheckKind, base: &Board) -> String {
    format!("{check}:{}", input_id(&base.to_fen()))
}

/// Whether `board` satisfies the precondition of `check`.
pub fn applicable(check: CheckKind, board: &Board) -> bool {
    match check {
        CheckKind::BoardTransformations => symmetry_applicable(board),
        CheckKind::PositionMirroring => true,
        CheckKind::ForcedMove => board.is_forced(),
        CheckKind::RecommendedMove => !board.legal_moves().is_empty(),
        _ => false,
    }
}

/// Dispatches to the check function for `check`.
pub fn run_check<E: Evaluator + ?Sized>(
    check: CheckKind,
    evaluator: &mut E,
    board: &Board,
    node_limit: u64,
) -> Result<ChessCheckCase, EngineError> {
    match check {
        CheckKind::BoardTransformations => check_transformations(evaluator, board, node_limit),
        CheckKind::PositionMirroring => check_mirroring(evaluator, board, node_limit),
        CheckKind::ForcedMove => check_forced(evaluator, board, node_limit),
        CheckKind::RecommendedMove => check_recommended(evaluator, board, node_limit),
        other => Err(EngineError::Config(format!("`{other}` is not a chess check"))),
    }
}

fn eval<E: Evaluator + ?Sized>(ev: &mut E, board: &Board, nodes: u64) -> Result<Evaluation, EngineError> {
    let e = ev.evaluate(board, nodes)?;
    e.check_invariants()?;
    Ok(e)
}

/// max q − min q over the board and its 7 symmetric variants.
pub fn check_transformations<E: Evaluator + ?Sized>(
    evaluator: &mut E,
    board: &Board,
    node_limit: u64,
) -> Result<ChessCheckCase, EngineError> {
    let derived = Symmetry::ALL.iter().map(|&s| board.apply_symmetry(s)).collect::<Result<Vec<_>, _>>()?;
    let mut evaluations = vec![eval(evaluator, board, node_limit)?];
    for b in &derived {
        evaluations.push(eval(evaluator, b, node_limit)?);
    }
    let (lo, hi) =
        evaluations.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.q), hi.max(e.q)));
    Ok(ChessCheckCase {
        check: CheckKind::BoardTransformations,
        base: board.clone(),
        derived,
        evaluations,
        violation: hi - lo,
        played: None,
    })
}

/// |q(b) − q(mirror(b))|.
pub fn check_mirroring<E: Evaluator + ?Sized>(
    evaluator: &mut E,
    board: &Board,
    node_limit: u64,
) -> Result<ChessCheckCase, EngineError> {
    let mirrored = board.mirror_position();
    let a = eval(evaluator, board, node_limit)?;
    let b = eval(evaluator, &mirrored, node_limit)?;
    let violation = (a.q - b.q).abs();
    Ok(ChessCheckCase {
        check: CheckKind::PositionMirroring,
        base: board.clone(),
        derived: vec![mirrored],
        evaluations: vec![a, b],
        violation,
        played: None,
    })
}

fn successor_case<E: Evaluator + ?Sized>(
    check: CheckKind,
    evaluator: &mut E,
    board: &Board,
    base_eval: Evaluation,
    mv: MoveSpec,
    node_limit: u64,
) -> Result<ChessCheckCase, EngineError> {
    let next = board.apply_move(mv)?;
    let after = eval(evaluator, &next, node_limit)?;
    let violation = (base_eval.q + after.q).abs();
    Ok(ChessCheckCase {
        check,
        base: board.clone(),
        derived: vec![next],
        evaluations: vec![base_eval, after],
        violation,
        played: Some(mv),
    })
}

/// |q(b) + q(b after its only legal move)|.
pub fn check_forced<E: Evaluator + ?Sized>(
    evaluator: &mut E,
    board: &Board,
    node_limit: u64,
) -> Result<ChessCheckCase, EngineError> {
    let moves = board.legal_moves();
    let [only] = moves[..] else {
        return Err(crate::chess::ChessError::Precondition(format!(
            "forced-move check needs exactly one legal move, found {}",
            moves.len()
        ))
        .into());
    };
    let base = eval(evaluator, board, node_limit)?;
    successor_case(CheckKind::ForcedMove, evaluator, board, base, only, node_limit)
}

/// |q(b) + q(b after the evaluator's best move)|.
pub fn check_recommended<E: Evaluator + ?Sized>(
    evaluator: &mut E,
    board: &Board,
    node_limit: u64,
) -> Result<ChessCheckCase, EngineError> {
    let moves = board.legal_moves();
    if moves.is_empty() {
        return Err(crate::chess::ChessError::Precondition("position has no legal moves".into()).into());
    }
    let base = eval(evaluator, board, node_limit)?;
    let Some(best) = base.best_move else {
        return Err(EngineError::Protocol(format!("no best move reported for {}", board.to_fen())));
    };
    if !moves.contains(&best) {
        return Err(EngineError::IllegalBestMove { mv: best.to_string(), fen: board.to_fen() });
    }
    successor_case(CheckKind::RecommendedMove, evaluator, board, base, best, node_limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::random_pawnless;
    use crate::uci::{MaterialMock, PlantedBugMock, RawScore, ScoreSource, SpatialPredicate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn material_mock_is_transformation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let b = random_pawnless(&mut rng).unwrap();
            let case = check_transformations(&mut MaterialMock, &b, 1).unwrap();
            assert_eq!(case.violation, 0.0);
            assert_eq!(case.evaluations.len(), 8);
            assert_eq!(check_mirroring(&mut MaterialMock, &b, 1).unwrap().violation, 0.0);
        }
    }

    #[test]
    fn planted_bug_crossing_board() {
        // white king on c1 (file c) rotates to f8 (file f)
        let b = Board::from_fen("8/8/3k4/8/8/8/8/2K5 w - - 0 1").unwrap();
        let mut bug = PlantedBugMock::new(MaterialMock, 0.3, SpatialPredicate::default());
        let case = check_transformations(&mut bug, &b, 1).unwrap();
        assert!((case.violation - 0.3).abs() < 1e-12);
    }

    #[test]
    fn transformations_reject_pawns() {
        assert!(matches!(check_transformations(&mut MaterialMock, &Board::startpos(), 1), Err(EngineError::Chess(_))));
    }

    #[test]
    fn start_position_mirrors_to_zero() {
        let case = check_mirroring(&mut MaterialMock, &Board::startpos(), 1).unwrap();
        assert_eq!(case.violation, 0.0);
        assert_eq!(case.derived[0].side_to_move(), crate::chess::Color::Black);
    }

    #[test]
    fn forced_capture_swings_material() {
        // black king in check from the rook on g8 must capture it
        let b = Board::from_fen("6Rk/8/7K/8/8/8/8/8 b - - 0 1").unwrap();
        assert!(b.is_forced(), "{:?}", b.legal_moves());
        let case = check_forced(&mut MaterialMock, &b, 1).unwrap();
        let after = b.apply_move(b.legal_moves()[0]).unwrap();
        let expected = (MaterialMock::q_of(&b) + MaterialMock::q_of(&after)).abs();
        assert_eq!(case.violation, expected);
        assert!(case.violation > 0.0);
    }

    #[test]
    fn forced_requires_single_move() {
        assert!(check_forced(&mut MaterialMock, &Board::startpos(), 1).is_err());
    }

    struct Liar;

    impl Evaluator for Liar {
        fn identity(&self) -> String {
            "liar".into()
        }
        fn evaluate(&mut self, _: &Board, _: u64) -> Result<Evaluation, EngineError> {
            Ok(Evaluation {
                q: 0.0,
                draw_prob: None,
                best_move: Some(MoveSpec::parse_uci("a1a8").unwrap()),
                nodes_used: 1,
                raw: RawScore::QValue(0.0),
                source: ScoreSource::Native,
            })
        }
    }

    #[test]
    fn illegal_best_move_is_protocol_error() {
        assert!(matches!(
            check_recommended(&mut Liar, &Board::startpos(), 1),
            Err(EngineError::IllegalBestMove { .. })
        ));
    }

    #[test]
    fn recommended_quiet_move_is_consistent_for_material() {
        let case = check_recommended(&mut MaterialMock, &Board::startpos(), 1).unwrap();
        assert_eq!(case.violation, 0.0);
        let rec = case.to_record().unwrap();
        assert_eq!(rec.inputs.len(), 2);
        assert!(rec.case_id.starts_with("recommended_move:"));
    }
}
