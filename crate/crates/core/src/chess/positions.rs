//! Position predicates used to select check inputs, and the synthetic
//! pawnless position sampler.

use rand::seq::SliceRandom;
use rand::Rng;

use super::board::{Board, CastlingRights, Color, Piece, PieceKind, Square};
use super::ChessError;

/// Upper bound on rejection-sampling attempts for one synthetic position.
pub const PAWNLESS_MAX_ATTEMPTS: usize = 10_000;

impl Board {
    pub fn is_forced(&self) -> bool {
        self.legal_moves().len() == 1
    }

    /// Middle-game filter: after move 15, at least 10 pieces, more than 5
    /// officers (non-pawn, non-king), and either a queen or more than 6 officers.
    pub fn is_middle_game(&self) -> bool {
        let total = self.piece_count();
        let officers = self.pieces().filter(|(_, p)| !matches!(p.kind, PieceKind::King | PieceKind::Pawn)).count();
        let has_queen = self.pieces().any(|(_, p)| p.kind == PieceKind::Queen);
        self.fullmove_number > 15 && total >= 10 && officers > 5 && (has_queen || officers > 6)
    }
}

/// Samples an 8-piece pawnless position where each side has a king plus the
/// same three officers (drawn with replacement from Q, R, B, N).
pub fn random_pawnless<R: Rng + ?Sized>(rng: &mut R) -> Result<Board, ChessError> {
    let officers: Vec<PieceKind> =
        (0..3).map(|_| PieceKind::OFFICERS[rng.random_range(0..PieceKind::OFFICERS.len())]).collect();
    let mut set = vec![PieceKind::King];
    set.extend(officers);
    place_symmetric_set(rng, &set)
}

/// Places `kinds` for both colors on distinct uniformly chosen squares,
/// resampling until the position is legal.
pub fn place_symmetric_set<R: Rng + ?Sized>(rng: &mut R, kinds: &[PieceKind]) -> Result<Board, ChessError> {
    let mut all_squares: Vec<u8> = (0..64).collect();
    for _ in 0..PAWNLESS_MAX_ATTEMPTS {
        let n = kinds.len() * 2;
        let (chosen, _) = all_squares.partial_shuffle(rng, n);
        let mut squares = [None; 64];
        for (i, &idx) in chosen.iter().enumerate() {
            let color = if i < kinds.len() { Color::White } else { Color::Black };
            squares[idx as usize] = Some(Piece::new(color, kinds[i % kinds.len()]));
        }
        let side = if rng.random_bool(0.5) { Color::White } else { Color::Black };
        if let Ok(board) = Board::from_parts(squares, side, CastlingRights::NONE, None, 0, 1) {
            return Ok(board);
        }
    }
    Err(ChessError::Generation(format!("no legal placement found in {PAWNLESS_MAX_ATTEMPTS} attempts")))
}

/// Both colors hold identical piece-kind multisets.
pub fn has_symmetric_material(board: &Board) -> bool {
    board.kinds_of(Color::White) == board.kinds_of(Color::Black)
}

/// Squares with no piece, in index order.
pub fn empty_squares(board: &Board) -> Vec<Square> {
    Square::all().filter(|&sq| board.piece_at(sq).is_none()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::symmetry_applicable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn start_position_is_not_forced_or_middle_game() {
        let b = Board::startpos();
        assert!(!b.is_forced());
        assert!(!b.is_middle_game());
    }

    #[test]
    fn stalemate_is_not_forced() {
        let b = Board::from_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1").unwrap();
        assert!(b.legal_moves().is_empty());
        assert!(!b.is_forced());
    }

    #[test]
    fn single_escape_is_forced() {
        let b = Board::from_fen("7k/4N3/8/8/8/8/8/K6R b - - 0 1").unwrap();
        assert!(b.is_forced());
    }

    #[test]
    fn middle_game_filter() {
        let endgame = Board::from_fen("4k3/8/8/8/8/8/8/R3K3 w - - 0 40").unwrap();
        assert!(!endgame.is_middle_game());
        let mid = Board::from_fen("r1bqk2r/pppp1ppp/2n2n2/2b1p3/2B1P3/2N2N2/PPPP1PPP/R1BQK2R w KQkq - 6 20").unwrap();
        assert_eq!(mid.piece_count(), 32);
        assert!(mid.is_middle_game());
        // same material at move 15 fails the strict "after move 15" test
        let early = Board::from_fen("r1bqk2r/pppp1ppp/2n2n2/2b1p3/2B1P3/2N2N2/PPPP1PPP/R1BQK2R w KQkq - 6 15").unwrap();
        assert!(!early.is_middle_game());
    }

    #[test]
    fn queenless_needs_seven_officers() {
        // 6 officers, no queens: fails condition (d)
        let six = Board::from_fen("r3k2r/pppppppp/2n5/8/8/2N5/PPPPPPPP/R3K2R w KQkq - 0 20").unwrap();
        assert!(!six.is_middle_game());
        let seven = Board::from_fen("r3k2r/pppppppp/2n5/8/8/2N5/PPPPPPPP/R1B1K2R w KQkq - 0 20").unwrap();
        assert!(seven.is_middle_game());
    }

    #[test]
    fn random_pawnless_satisfies_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let b = random_pawnless(&mut rng).unwrap();
            assert_eq!(b.piece_count(), 8);
            assert!(symmetry_applicable(&b));
            assert!(has_symmetric_material(&b));
            assert_eq!(b.count(Color::White, PieceKind::King), 1);
            b.validate().unwrap();
        }
    }
}
