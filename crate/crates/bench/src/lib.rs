//! Seeded workloads shared by the benchmarks and their acceptance checks.

use metacheck_core::chess::{random_pawnless, Board};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random pawnless boards, reproducible from `seed`.
pub fn pawnless_boards(n: usize, seed: u64) -> Vec<Board> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_pawnless(&mut rng).expect("pawnless synthesis")).collect()
}

/// Boards reached by uniformly random legal play from the initial position.
pub fn midgame_boards(n: usize, plies: usize, seed: u64) -> Vec<Board> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut board = Board::startpos();
            for _ in 0..plies {
                let moves = board.legal_moves();
                if moves.is_empty() {
                    break;
                }
                board = board.apply_move(moves[rng.random_range(0..moves.len())]).expect("legal move");
            }
            board
        })
        .collect()
}

/// Violation-like values in [0, 2], a quarter of them exactly zero.
pub fn violation_values(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| if rng.random_bool(0.25) { 0.0 } else { 2.0 * rng.random::<f64>() }).collect()
}

/// Forecast-like probabilities, with ties from rounding to two decimals.
pub fn forecast_series(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (rng.random::<f64>() * 100.0).round() / 100.0).collect()
}
