//! Board symmetries (the dihedral group of the square) and color mirroring.

use serde::{Deserialize, Serialize};

use super::board::{Board, Piece, Square};
use super::ChessError;

/// The seven non-identity elements of the dihedral group of order 8.
///
/// Coordinates are (file, rank) with a1 = (0, 0); `Rot90` is clockwise when
/// rank 1 is drawn at the bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symmetry {
    /// (f, r) -> (r, 7 - f)
    Rot90,
    /// (f, r) -> (7 - f, 7 - r)
    Rot180,
    /// (f, r) -> (7 - r, f)
    Rot270,
    /// Reflection across the horizontal midline: (f, r) -> (f, 7 - r)
    MirrorX,
    /// Reflection across the vertical midline: (f, r) -> (7 - f, r)
    MirrorY,
    /// Reflection across the a1-h8 diagonal: (f, r) -> (r, f)
    MirrorDiagMain,
    /// Reflection across the a8-h1 diagonal: (f, r) -> (7 - r, 7 - f)
    MirrorDiagAnti,
}

impl Symmetry {
    pub const ALL: [Symmetry; 7] = [
        Symmetry::Rot90,
        Symmetry::Rot180,
        Symmetry::Rot270,
        Symmetry::MirrorX,
        Symmetry::MirrorY,
        Symmetry::MirrorDiagMain,
        Symmetry::MirrorDiagAnti,
    ];

    pub const ROTATIONS: [Symmetry; 3] = [Symmetry::Rot90, Symmetry::Rot180, Symmetry::Rot270];

    pub const REFLECTIONS: [Symmetry; 4] =
        [Symmetry::MirrorX, Symmetry::MirrorY, Symmetry::MirrorDiagMain, Symmetry::MirrorDiagAnti];

    pub fn map(self, sq: Square) -> Square {
        let (f, r) = (sq.file(), sq.rank());
        let (nf, nr) = match self {
            Symmetry::Rot90 => (r, 7 - f),
            Symmetry::Rot180 => (7 - f, 7 - r),
            Symmetry::Rot270 => (7 - r, f),
            Symmetry::MirrorX => (f, 7 - r),
            Symmetry::MirrorY => (7 - f, r),
            Symmetry::MirrorDiagMain => (r, f),
            Symmetry::MirrorDiagAnti => (7 - r, 7 - f),
        };
        Square::new(nf, nr).unwrap()
    }

    pub fn inverse(self) -> Symmetry {
        match self {
            Symmetry::Rot90 => Symmetry::Rot270,
            Symmetry::Rot270 => Symmetry::Rot90,
            other => other,
        }
    }
}

/// True when every symmetry maps this board to a position with identical meaning.
pub fn symmetry_applicable(board: &Board) -> bool {
    !board.has_pawns() && !board.castling().any()
}

impl Board {
    pub fn apply_symmetry(&self, sym: Symmetry) -> Result<Board, ChessError> {
        if self.has_pawns() {
            return Err(ChessError::Precondition("board symmetries require a pawnless board".into()));
        }
        if self.castling().any() {
            return Err(ChessError::Precondition("board symmetries require no castling rights".into()));
        }
        Ok(self.transform_unchecked(sym))
    }

    /// Relocates pieces without precondition checks; used by operators that
    /// already hold a pawnless, castling-free board.
    pub(crate) fn transform_unchecked(&self, sym: Symmetry) -> Board {
        let mut squares = [None; 64];
        for (sq, p) in self.pieces() {
            squares[sym.map(sq).index()] = Some(p);
        }
        let mut out = self.with_squares(squares);
        out.en_passant = None;
        out
    }

    /// Recolors every piece and reflects it across the horizontal midline.
    /// The result is the same game with the roles of White and Black exchanged.
    pub fn mirror_position(&self) -> Board {
        let mut squares = [None; 64];
        for (sq, p) in self.pieces() {
            let to = Square::new(sq.file(), 7 - sq.rank()).unwrap();
            squares[to.index()] = Some(Piece::new(p.color.opposite(), p.kind));
        }
        Board {
            squares,
            side_to_move: self.side_to_move.opposite(),
            castling: self.castling.swapped(),
            en_passant: self.en_passant.map(|sq| Square::new(sq.file(), 7 - sq.rank()).unwrap()),
            halfmove_clock: self.halfmove_clock,
            fullmove_number: self.fullmove_number,
        }
    }
}
