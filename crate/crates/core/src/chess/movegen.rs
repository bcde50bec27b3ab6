//! Legal move generation by pseudo-legal generation plus king-safety filtering.

use super::board::{Board, Color, MoveSpec, Piece, PieceKind, Square};
use super::ChessError;

const KNIGHT_STEPS: [(i8, i8); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING_STEPS: [(i8, i8); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const ROOK_DIRS: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
const PROMOTIONS: [PieceKind; 4] = [PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight];

impl Board {
    /// All legal moves, ordered by (from square, to square, promotion).
    pub fn legal_moves(&self) -> Vec<MoveSpec> {
        let mut moves: Vec<MoveSpec> = self
            .pseudo_legal_moves()
            .into_iter()
            .filter(|m| !self.play_unchecked(*m).in_check(self.side_to_move))
            .collect();
        moves.sort();
        moves
    }

    pub fn is_capture(&self, mv: MoveSpec) -> bool {
        if self.piece_at(mv.to).is_some() {
            return true;
        }
        matches!(self.piece_at(mv.from), Some(p) if p.kind == PieceKind::Pawn) && Some(mv.to) == self.en_passant
    }

    pub fn apply_move(&self, mv: MoveSpec) -> Result<Board, ChessError> {
        if !self.legal_moves().contains(&mv) {
            return Err(ChessError::IllegalMove { mv: mv.to_string(), fen: self.to_fen() });
        }
        Ok(self.play_unchecked(mv))
    }

    /// Number of leaf nodes of the legal move tree at `depth`.
    pub fn perft(&self, depth: u32) -> u64 {
        if depth == 0 {
            return 1;
        }
        let moves = self.legal_moves();
        if depth == 1 {
            return moves.len() as u64;
        }
        moves.into_iter().map(|m| self.play_unchecked(m).perft(depth - 1)).sum()
    }

    fn pseudo_legal_moves(&self) -> Vec<MoveSpec> {
        let us = self.side_to_move;
        let mut out = Vec::with_capacity(48);
        for (from, piece) in self.pieces() {
            if piece.color != us {
                continue;
            }
            match piece.kind {
                PieceKind::Pawn => self.pawn_moves(from, us, &mut out),
                PieceKind::Knight => self.step_moves(from, us, &KNIGHT_STEPS, &mut out),
                PieceKind::King => {
                    self.step_moves(from, us, &KING_STEPS, &mut out);
                    self.castling_moves(from, us, &mut out);
                }
                PieceKind::Bishop => self.slide_moves(from, us, &BISHOP_DIRS, &mut out),
                PieceKind::Rook => self.slide_moves(from, us, &ROOK_DIRS, &mut out),
                PieceKind::Queen => {
                    self.slide_moves(from, us, &BISHOP_DIRS, &mut out);
                    self.slide_moves(from, us, &ROOK_DIRS, &mut out);
                }
            }
        }
        out
    }

    fn step_moves(&self, from: Square, us: Color, steps: &[(i8, i8)], out: &mut Vec<MoveSpec>) {
        for &(df, dr) in steps {
            if let Some(to) = from.offset(df, dr) {
                match self.piece_at(to) {
                    Some(p) if p.color == us => {}
                    _ => out.push(MoveSpec::new(from, to)),
                }
            }
        }
    }

    fn slide_moves(&self, from: Square, us: Color, dirs: &[(i8, i8)], out: &mut Vec<MoveSpec>) {
        for &(df, dr) in dirs {
            let mut cur = from;
            while let Some(to) = cur.offset(df, dr) {
                match self.piece_at(to) {
                    None => out.push(MoveSpec::new(from, to)),
                    Some(p) => {
                        if p.color != us {
                            out.push(MoveSpec::new(from, to));
                        }
                        break;
                    }
                }
                cur = to;
            }
        }
    }

    fn pawn_moves(&self, from: Square, us: Color, out: &mut Vec<MoveSpec>) {
        let (dir, start_rank, last_rank) = match us {
            Color::White => (1, 1, 7),
            Color::Black => (-1, 6, 0),
        };
        let push = |to: Square, out: &mut Vec<MoveSpec>| {
            if to.rank() == last_rank {
                for kind in PROMOTIONS {
                    out.push(MoveSpec { from, to, promotion: Some(kind) });
                }
            } else {
                out.push(MoveSpec::new(from, to));
            }
        };
        if let Some(one) = from.offset(0, dir) {
            if self.piece_at(one).is_none() {
                push(one, out);
                if from.rank() == start_rank {
                    let two = one.offset(0, dir).unwrap();
                    if self.piece_at(two).is_none() {
                        out.push(MoveSpec::new(from, two));
                    }
                }
            }
        }
        for df in [-1, 1] {
            if let Some(to) = from.offset(df, dir) {
                match self.piece_at(to) {
                    Some(p) if p.color != us => push(to, out),
                    None if Some(to) == self.en_passant => out.push(MoveSpec::new(from, to)),
                    _ => {}
                }
            }
        }
    }

    fn castling_moves(&self, from: Square, us: Color, out: &mut Vec<MoveSpec>) {
        let rank = if us == Color::White { 0 } else { 7 };
        if from != Square::new(4, rank).unwrap() || self.in_check(us) {
            return;
        }
        let them = us.opposite();
        let sq = |f: u8| Square::new(f, rank).unwrap();
        let empty = |files: &[u8]| files.iter().all(|&f| self.piece_at(sq(f)).is_none());
        let safe = |files: &[u8]| files.iter().all(|&f| !self.is_attacked(sq(f), them));
        if self.castling.king_side(us) && empty(&[5, 6]) && safe(&[5, 6]) {
            out.push(MoveSpec::new(from, sq(6)));
        }
        if self.castling.queen_side(us) && empty(&[1, 2, 3]) && safe(&[2, 3]) {
            out.push(MoveSpec::new(from, sq(2)));
        }
    }

    /// Plays a pseudo-legal move without checking legality.
    pub(crate) fn play_unchecked(&self, mv: MoveSpec) -> Board {
        let mut next = self.clone();
        let us = self.side_to_move;
        let piece = self.piece_at(mv.from).expect("move from an occupied square");
        let captured = self.piece_at(mv.to);
        let is_pawn = piece.kind == PieceKind::Pawn;

        next.squares[mv.from.index()] = None;
        if is_pawn && Some(mv.to) == self.en_passant && captured.is_none() {
            let victim = Square::new(mv.to.file(), mv.from.rank()).unwrap();
            next.squares[victim.index()] = None;
        }
        let placed = match mv.promotion {
            Some(kind) => Piece::new(us, kind),
            None => piece,
        };
        next.squares[mv.to.index()] = Some(placed);

        if piece.kind == PieceKind::King {
            next.castling.clear(us);
            let df = mv.to.file() as i8 - mv.from.file() as i8;
            if df.abs() == 2 {
                let rank = mv.from.rank();
                let (rook_from, rook_to) = if df > 0 { (7, 5) } else { (0, 3) };
                let rook = next.squares[Square::new(rook_from, rank).unwrap().index()].take();
                next.squares[Square::new(rook_to, rank).unwrap().index()] = rook;
            }
        }
        for sq in [mv.from, mv.to] {
            match sq.index() {
                0 => next.castling.white_queen = false,
                7 => next.castling.white_king = false,
                56 => next.castling.black_queen = false,
                63 => next.castling.black_king = false,
                _ => {}
            }
        }

        next.en_passant = None;
        if is_pawn && (mv.to.rank() as i8 - mv.from.rank() as i8).abs() == 2 {
            next.en_passant = Square::new(mv.from.file(), (mv.from.rank() + mv.to.rank()) / 2);
        }
        next.halfmove_clock = if is_pawn || captured.is_some() { 0 } else { self.halfmove_clock + 1 };
        if us == Color::Black {
            next.fullmove_number += 1;
        }
        next.side_to_move = us.opposite();
        next
    }
}
