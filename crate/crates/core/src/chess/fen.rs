//! Six-field FEN parsing and canonical serialization.

use std::path::Path;

use super::board::{Board, CastlingRights, Color, Piece, Square};
use super::ChessError;

impl Board {
    pub fn from_fen(text: &str) -> Result<Board, ChessError> {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(fen_err(text, format!("expected 6 fields, found {}", fields.len())));
        }

        let mut squares = [None; 64];
        let ranks: Vec<&str> = fields[0].split('/').collect();
        if ranks.len() != 8 {
            return Err(fen_err(text, format!("placement has {} ranks, expected 8", ranks.len())));
        }
        for (i, row) in ranks.iter().enumerate() {
            let rank = 7 - i as u8;
            let mut file = 0u8;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10) {
                    if !(1..=8).contains(&d) {
                        return Err(fen_err(text, format!("bad empty-square count `{c}`")));
                    }
                    file += d as u8;
                } else {
                    let piece =
                        Piece::from_fen_char(c).ok_or_else(|| fen_err(text, format!("unknown piece letter `{c}`")))?;
                    if file >= 8 {
                        return Err(fen_err(text, format!("rank {} overflows", rank + 1)));
                    }
                    squares[Square::new(file, rank).unwrap().index()] = Some(piece);
                    file += 1;
                }
                if file > 8 {
                    return Err(fen_err(text, format!("rank {} overflows", rank + 1)));
                }
            }
            if file != 8 {
                return Err(fen_err(text, format!("rank {} has {file} files", rank + 1)));
            }
        }

        let side = match fields[1] {
            "w" => Color::White,
            "b" => Color::Black,
            other => return Err(fen_err(text, format!("bad side to move `{other}`"))),
        };

        let mut castling = CastlingRights::NONE;
        if fields[2] != "-" {
            for c in fields[2].chars() {
                let flag = match c {
                    'K' => &mut castling.white_king,
                    'Q' => &mut castling.white_queen,
                    'k' => &mut castling.black_king,
                    'q' => &mut castling.black_queen,
                    _ => return Err(fen_err(text, format!("bad castling flag `{c}`"))),
                };
                if *flag {
                    return Err(fen_err(text, format!("repeated castling flag `{c}`")));
                }
                *flag = true;
            }
        }

        let en_passant = match fields[3] {
            "-" => None,
            s => Some(Square::parse(s).ok_or_else(|| fen_err(text, format!("bad en passant square `{s}`")))?),
        };
        let halfmove: u32 =
            fields[4].parse().map_err(|_| fen_err(text, format!("bad halfmove clock `{}`", fields[4])))?;
        let fullmove: u32 =
            fields[5].parse().map_err(|_| fen_err(text, format!("bad fullmove number `{}`", fields[5])))?;

        Board::from_parts(squares, side, castling, en_passant, halfmove, fullmove).map_err(|e| match e {
            ChessError::Illegal(reason) => fen_err(text, reason),
            other => other,
        })
    }

    pub fn to_fen(&self) -> String {
        let mut out = String::with_capacity(90);
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                match self.piece_at(Square::new(file, rank).unwrap()) {
                    Some(p) => {
                        if empty > 0 {
                            out.push(char::from_digit(empty, 10).unwrap());
                            empty = 0;
                        }
                        out.push(p.fen_char());
                    }
                    None => empty += 1,
                }
            }
            if empty > 0 {
                out.push(char::from_digit(empty, 10).unwrap());
            }
            if rank > 0 {
                out.push('/');
            }
        }
        out.push(' ');
        out.push(if self.side_to_move == Color::White { 'w' } else { 'b' });
        out.push(' ');
        let c = self.castling;
        if !c.any() {
            out.push('-');
        } else {
            for (flag, ch) in [(c.white_king, 'K'), (c.white_queen, 'Q'), (c.black_king, 'k'), (c.black_queen, 'q')] {
                if flag {
                    out.push(ch);
                }
            }
        }
        out.push(' ');
        match self.en_passant {
            Some(sq) => out.push_str(&sq.to_string()),
            None => out.push('-'),
        }
        out.push_str(&format!(" {} {}", self.halfmove_clock, self.fullmove_number));
        out
    }
}

fn fen_err(fen: &str, reason: String) -> ChessError {
    ChessError::Fen { fen: fen.to_string(), reason }
}

/// Reads a position list: one FEN per line; blank lines and `#` comments are ignored.
/// Trailing EPD-style operations after the sixth field are dropped.
pub fn read_position_list(path: &Path) -> Result<Vec<Board>, ChessError> {
    let text = std::fs::read_to_string(path).map_err(|e| ChessError::Io(format!("{}: {e}", path.display())))?;
    parse_position_list(&text)
}

pub fn parse_position_list(text: &str) -> Result<Vec<Board>, ChessError> {
    let mut boards = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fen: Vec<&str> = line.split_whitespace().take(6).collect();
        let board = Board::from_fen(&fen.join(" "))
            .map_err(|e| ChessError::PositionList { line: lineno + 1, reason: e.to_string() })?;
        boards.push(board);
    }
    Ok(boards)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_position_round_trips() {
        assert_eq!(Board::startpos().to_fen(), Board::START_FEN);
    }

    #[test]
    fn empty_board_is_rejected() {
        assert!(Board::from_fen("8/8/8/8/8/8/8/8 w - - 0 1").is_err());
    }

    #[test]
    fn two_white_kings_rejected() {
        let err = Board::from_fen("4k3/8/8/8/8/8/8/K3K3 w - - 0 1").unwrap_err();
        assert!(err.to_string().contains("kings"), "{err}");
    }

    #[test]
    fn pawn_on_back_rank_rejected() {
        let err = Board::from_fen("P3k3/8/8/8/8/8/8/4K3 w - - 0 1").unwrap_err();
        assert!(err.to_string().contains("back rank"), "{err}");
    }

    #[test]
    fn malformed_fields_rejected() {
        for bad in [
            "",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP w KQkq - 0 1",
            "rnbqkbnr/pppppppp/9/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR x KQkq - 0 1",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkx - 0 1",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq z9 0 1",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - a 1",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 0",
            "rnbqkbnrr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
        ] {
            assert!(Board::from_fen(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn en_passant_rank_must_match_side() {
        assert!(Board::from_fen("4k3/8/8/8/4P3/8/8/4K3 b - e3 0 1").is_ok());
        assert!(Board::from_fen("4k3/8/8/8/4P3/8/8/4K3 w - e3 0 1").is_err());
    }

    #[test]
    fn position_list_skips_comments_and_names_bad_line() {
        let text = format!("# header\n{}\n\n8/8/8/8/8/8/8/8 w - - 0 1\n", Board::START_FEN);
        let err = parse_position_list(&text).unwrap_err();
        assert!(matches!(err, ChessError::PositionList { line: 4, .. }), "{err}");
        let ok = parse_position_list(&format!("{} ; bm e4\n", Board::START_FEN)).unwrap();
        assert_eq!(ok.len(), 1);
    }
}
