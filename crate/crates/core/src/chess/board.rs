use std::fmt;

use serde::{Deserialize, Serialize};

use super::ChessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Color::White => 0,
            Color::Black => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PieceKind {
    King,
    Queen,
    Rook,
    Bishop,
    Knight,
    Pawn,
}

impl PieceKind {
    pub const ALL: [PieceKind; 6] =
        [PieceKind::King, PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight, PieceKind::Pawn];

    /// Kinds that may be placed freely on a pawnless board besides the king.
    pub const OFFICERS: [PieceKind; 4] = [PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight];

    pub fn letter(self) -> char {
        match self {
            PieceKind::King => 'k',
            PieceKind::Queen => 'q',
            PieceKind::Rook => 'r',
            PieceKind::Bishop => 'b',
            PieceKind::Knight => 'n',
            PieceKind::Pawn => 'p',
        }
    }

    pub fn from_letter(c: char) -> Option<PieceKind> {
        Some(match c.to_ascii_lowercase() {
            'k' => PieceKind::King,
            'q' => PieceKind::Queen,
            'r' => PieceKind::Rook,
            'b' => PieceKind::Bishop,
            'n' => PieceKind::Knight,
            'p' => PieceKind::Pawn,
            _ => return None,
        })
    }

    /// Conventional material value (king counts as zero).
    pub fn material(self) -> i32 {
        match self {
            PieceKind::King => 0,
            PieceKind::Queen => 9,
            PieceKind::Rook => 5,
            PieceKind::Bishop | PieceKind::Knight => 3,
            PieceKind::Pawn => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Piece {
    pub color: Color,
    pub kind: PieceKind,
}

impl Piece {
    pub const fn new(color: Color, kind: PieceKind) -> Self {
        Piece { color, kind }
    }

    pub fn fen_char(self) -> char {
        let c = self.kind.letter();
        match self.color {
            Color::White => c.to_ascii_uppercase(),
            Color::Black => c,
        }
    }

    pub fn from_fen_char(c: char) -> Option<Piece> {
        let kind = PieceKind::from_letter(c)?;
        let color = if c.is_ascii_uppercase() { Color::White } else { Color::Black };
        Some(Piece { color, kind })
    }
}

/// A board square; index = rank * 8 + file, a1 = 0, h8 = 63.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square(u8);

impl Square {
    pub fn new(file: u8, rank: u8) -> Option<Square> {
        (file < 8 && rank < 8).then(|| Square(rank * 8 + file))
    }

    /// Caller guarantees `index < 64`.
    pub const fn from_index(index: u8) -> Square {
        debug_assert!(index < 64);
        Square(index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn file(self) -> u8 {
        self.0 % 8
    }

    pub fn rank(self) -> u8 {
        self.0 / 8
    }

    pub fn offset(self, df: i8, dr: i8) -> Option<Square> {
        let f = self.file() as i8 + df;
        let r = self.rank() as i8 + dr;
        if (0..8).contains(&f) && (0..8).contains(&r) {
            Some(Square((r * 8 + f) as u8))
        } else {
            None
        }
    }

    pub fn all() -> impl Iterator<Item = Square> {
        (0..64u8).map(Square)
    }

    pub fn parse(text: &str) -> Option<Square> {
        let mut chars = text.chars();
        let f = chars.next()?;
        let r = chars.next()?;
        if chars.next().is_some() || !('a'..='h').contains(&f) || !('1'..='8').contains(&r) {
            return None;
        }
        Square::new(f as u8 - b'a', r as u8 - b'1')
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'a' + self.file()) as char, (b'1' + self.rank()) as char)
    }
}

impl fmt::Debug for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Square {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Square {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Square::parse(&text).ok_or_else(|| serde::de::Error::custom(format!("invalid square `{text}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CastlingRights {
    pub white_king: bool,
    pub white_queen: bool,
    pub black_king: bool,
    pub black_queen: bool,
}

impl CastlingRights {
    pub const NONE: CastlingRights =
        CastlingRights { white_king: false, white_queen: false, black_king: false, black_queen: false };

    pub fn any(self) -> bool {
        self.white_king || self.white_queen || self.black_king || self.black_queen
    }

    pub fn king_side(self, color: Color) -> bool {
        match color {
            Color::White => self.white_king,
            Color::Black => self.black_king,
        }
    }

    pub fn queen_side(self, color: Color) -> bool {
        match color {
            Color::White => self.white_queen,
            Color::Black => self.black_queen,
        }
    }

    pub fn clear(&mut self, color: Color) {
        match color {
            Color::White => {
                self.white_king = false;
                self.white_queen = false;
            }
            Color::Black => {
                self.black_king = false;
                self.black_queen = false;
            }
        }
    }

    pub fn swapped(self) -> CastlingRights {
        CastlingRights {
            white_king: self.black_king,
            white_queen: self.black_queen,
            black_king: self.white_king,
            black_queen: self.white_queen,
        }
    }
}

/// A move in coordinate form, as spoken over UCI (`e2e4`, `e7e8q`, castling as `e1g1`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MoveSpec {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
}

impl MoveSpec {
    pub fn new(from: Square, to: Square) -> Self {
        MoveSpec { from, to, promotion: None }
    }

    pub fn parse_uci(text: &str) -> Option<MoveSpec> {
        if !(text.len() == 4 || text.len() == 5) || !text.is_ascii() {
            return None;
        }
        let from = Square::parse(&text[0..2])?;
        let to = Square::parse(&text[2..4])?;
        let promotion = match text[4..].chars().next() {
            None => None,
            Some(c) => match PieceKind::from_letter(c)? {
                PieceKind::King | PieceKind::Pawn => return None,
                k => Some(k),
            },
        };
        (from != to).then_some(MoveSpec { from, to, promotion })
    }
}

impl fmt::Display for MoveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from, self.to)?;
        if let Some(p) = self.promotion {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for MoveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for MoveSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MoveSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        MoveSpec::parse_uci(&text).ok_or_else(|| serde::de::Error::custom(format!("invalid move `{text}`")))
    }
}

/// Full chess position state. Boards built through [`Board::from_parts`],
/// FEN parsing, or legal moves always satisfy the legality invariants.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Board {
    pub(crate) squares: [Option<Piece>; 64],
    pub(crate) side_to_move: Color,
    pub(crate) castling: CastlingRights,
    pub(crate) en_passant: Option<Square>,
    pub(crate) halfmove_clock: u32,
    pub(crate) fullmove_number: u32,
}

impl Board {
    pub const START_FEN: &'static str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

    pub fn startpos() -> Board {
        Board::from_fen(Board::START_FEN).expect("start position is legal")
    }

    /// Builds a board and validates every legality invariant.
    pub fn from_parts(
        squares: [Option<Piece>; 64],
        side_to_move: Color,
        castling: CastlingRights,
        en_passant: Option<Square>,
        halfmove_clock: u32,
        fullmove_number: u32,
    ) -> Result<Board, ChessError> {
        let board = Board { squares, side_to_move, castling, en_passant, halfmove_clock, fullmove_number };
        board.validate()?;
        Ok(board)
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.squares[sq.index()]
    }

    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    pub fn pieces(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        Square::all().filter_map(move |sq| self.squares[sq.index()].map(|p| (sq, p)))
    }

    pub fn placement(&self) -> &[Option<Piece>; 64] {
        &self.squares
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        self.pieces().find(|(_, p)| p.color == color && p.kind == PieceKind::King).map(|(sq, _)| sq)
    }

    pub fn count(&self, color: Color, kind: PieceKind) -> usize {
        self.pieces().filter(|(_, p)| p.color == color && p.kind == kind).count()
    }

    pub fn piece_count(&self) -> usize {
        self.squares.iter().flatten().count()
    }

    pub fn has_pawns(&self) -> bool {
        self.squares.iter().flatten().any(|p| p.kind == PieceKind::Pawn)
    }

    /// Sorted multiset of piece kinds held by `color`.
    pub fn kinds_of(&self, color: Color) -> Vec<PieceKind> {
        let mut kinds: Vec<PieceKind> = self.pieces().filter(|(_, p)| p.color == color).map(|(_, p)| p.kind).collect();
        kinds.sort();
        kinds
    }

    /// Material balance (Q=9, R=5, B=N=3, P=1) from `color`'s point of view.
    pub fn material_balance(&self, color: Color) -> i32 {
        self.pieces().map(|(_, p)| if p.color == color { p.kind.material() } else { -p.kind.material() }).sum()
    }

    pub fn in_check(&self, color: Color) -> bool {
        match self.king_square(color) {
            Some(k) => self.is_attacked(k, color.opposite()),
            None => false,
        }
    }

    pub fn validate(&self) -> Result<(), ChessError> {
        for color in [Color::White, Color::Black] {
            let kings = self.count(color, PieceKind::King);
            if kings != 1 {
                return Err(ChessError::Illegal(format!("{color:?} has {kings} kings, expected 1")));
            }
            let total = self.pieces().filter(|(_, p)| p.color == color).count();
            if total > 16 {
                return Err(ChessError::Illegal(format!("{color:?} has {total} pieces")));
            }
            if self.count(color, PieceKind::Pawn) > 8 {
                return Err(ChessError::Illegal(format!("{color:?} has more than 8 pawns")));
            }
        }
        for (sq, p) in self.pieces() {
            if p.kind == PieceKind::Pawn && (sq.rank() == 0 || sq.rank() == 7) {
                return Err(ChessError::Illegal(format!("pawn on back rank at {sq}")));
            }
        }
        let home = |color: Color, rook_file: u8| {
            let rank = if color == Color::White { 0 } else { 7 };
            let king_home = self.piece_at(Square::new(4, rank).unwrap()) == Some(Piece::new(color, PieceKind::King));
            let rook_home =
                self.piece_at(Square::new(rook_file, rank).unwrap()) == Some(Piece::new(color, PieceKind::Rook));
            king_home && rook_home
        };
        let c = self.castling;
        for (flag, color, file, name) in [
            (c.white_king, Color::White, 7, 'K'),
            (c.white_queen, Color::White, 0, 'Q'),
            (c.black_king, Color::Black, 7, 'k'),
            (c.black_queen, Color::Black, 0, 'q'),
        ] {
            if flag && !home(color, file) {
                return Err(ChessError::Illegal(format!(
                    "castling right `{name}` without king and rook on home squares"
                )));
            }
        }
        if let Some(ep) = self.en_passant {
            let expected = if self.side_to_move == Color::White { 5 } else { 2 };
            if ep.rank() != expected {
                return Err(ChessError::Illegal(format!(
                    "en passant square {ep} impossible with {:?} to move",
                    self.side_to_move
                )));
            }
        }
        if self.fullmove_number == 0 {
            return Err(ChessError::Illegal("fullmove number must be at least 1".into()));
        }
        if self.in_check(self.side_to_move.opposite()) {
            return Err(ChessError::Illegal("side not to move is in check".into()));
        }
        Ok(())
    }

    /// True if any piece of `by` attacks `target`.
    pub fn is_attacked(&self, target: Square, by: Color) -> bool {
        const KNIGHT: [(i8, i8); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
        const KING: [(i8, i8); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
        let is = |sq: Square, kinds: &[PieceKind]| matches!(self.piece_at(sq), Some(p) if p.color == by && kinds.contains(&p.kind));
        // a pawn of `by` attacks from one rank behind (relative to its direction)
        let pawn_dr = if by == Color::White { -1 } else { 1 };
        for df in [-1, 1] {
            if let Some(sq) = target.offset(df, pawn_dr) {
                if is(sq, &[PieceKind::Pawn]) {
                    return true;
                }
            }
        }
        for (df, dr) in KNIGHT {
            if let Some(sq) = target.offset(df, dr) {
                if is(sq, &[PieceKind::Knight]) {
                    return true;
                }
            }
        }
        for (df, dr) in KING {
            if let Some(sq) = target.offset(df, dr) {
                if is(sq, &[PieceKind::King]) {
                    return true;
                }
            }
        }
        let rays = [
            ((1, 0), PieceKind::Rook),
            ((-1, 0), PieceKind::Rook),
            ((0, 1), PieceKind::Rook),
            ((0, -1), PieceKind::Rook),
            ((1, 1), PieceKind::Bishop),
            ((1, -1), PieceKind::Bishop),
            ((-1, 1), PieceKind::Bishop),
            ((-1, -1), PieceKind::Bishop),
        ];
        for ((df, dr), slider) in rays {
            let mut cur = target;
            while let Some(next) = cur.offset(df, dr) {
                if let Some(p) = self.piece_at(next) {
                    if p.color == by && (p.kind == slider || p.kind == PieceKind::Queen) {
                        return true;
                    }
                    break;
                }
                cur = next;
            }
        }
        false
    }

    /// Board with one field changed but not yet validated.
    pub(crate) fn with_squares(&self, squares: [Option<Piece>; 64]) -> Board {
        Board { squares, ..self.clone() }
    }

    pub(crate) fn with_side(&self, side: Color) -> Board {
        Board { side_to_move: side, ..self.clone() }
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Board({})", self.to_fen())
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_fen())
    }
}
