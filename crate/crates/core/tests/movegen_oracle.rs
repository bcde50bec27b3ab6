//! Move generation against an independent generator.

mod common;

use std::collections::BTreeSet;

use metacheck_core::chess::{random_pawnless, Board};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shakmaty::uci::UciMove;
use shakmaty::{fen::Fen, CastlingMode, Chess, Position};

fn reference(board: &Board) -> Chess {
    // synthetic boards may hold checks unreachable in play; movegen is still defined
    Fen::from_ascii(board.to_fen().as_bytes())
        .unwrap()
        .into_position(CastlingMode::Standard)
        .or_else(|e: shakmaty::PositionError<Chess>| e.ignore_impossible_check())
        .unwrap()
}

fn reference_moves(pos: &Chess) -> BTreeSet<String> {
    pos.legal_moves().iter().map(|m| UciMove::from_standard(m).to_string()).collect()
}

fn own_moves(board: &Board) -> BTreeSet<String> {
    board.legal_moves().iter().map(|m| m.to_string()).collect()
}

#[test]
fn perft_matches_reference_on_random_positions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let board = common::random_walk(&mut rng, 40);
        let pos = reference(&board);
        assert_eq!(board.perft(2), shakmaty::perft(&pos, 2), "{}", board.to_fen());
    }
}

#[test]
fn legal_move_sets_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..2000 {
        let board = if i % 2 == 0 { common::random_walk(&mut rng, 120) } else { random_pawnless(&mut rng).unwrap() };
        assert_eq!(own_moves(&board), reference_moves(&reference(&board)), "{}", board.to_fen());
    }
}

#[test]
fn tricky_positions_match_reference_to_depth_three() {
    // castling through attacked squares, en passant pins, promotions
    let fens = [
        "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
        "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
        "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
        "rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
        "8/8/8/2k5/3Pp3/8/8/4K2R b K d3 0 1",
    ];
    for fen in fens {
        let board = Board::from_fen(fen).unwrap();
        assert_eq!(board.perft(3), shakmaty::perft(&reference(&board), 3), "{fen}");
    }
}
