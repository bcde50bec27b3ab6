//! Board generators shared by the integration tests.

#![allow(dead_code)]

use metacheck_core::chess::Board;
use rand::Rng;

/// Plays up to `max_plies` uniformly random legal moves from the initial
/// position. Covers pawns, castling rights, en passant and promotions.
pub fn random_walk<R: Rng>(rng: &mut R, max_plies: usize) -> Board {
    let mut board = Board::startpos();
    let plies = rng.random_range(0..=max_plies);
    for _ in 0..plies {
        let moves = board.legal_moves();
        if moves.is_empty() {
            break;
        }
        board = board.apply_move(moves[rng.random_range(0..moves.len())]).unwrap();
    }
    board
}

/// Every ordering of `0..n`.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Ranks averaged over every tie-breaking order: enumerate all
/// permutations that sort the values and average each element's position.
pub fn brute_force_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut sums = vec![0.0; n];
    let mut count = 0.0;
    for p in permutations(n) {
        if p.windows(2).all(|w| values[w[0]] <= values[w[1]]) {
            for (pos, &i) in p.iter().enumerate() {
                sums[i] += (pos + 1) as f64;
            }
            count += 1.0;
        }
    }
    sums.iter().map(|s| s / count).collect()
}

/// Pearson correlation of brute-force ranks from raw moments; 1 for a
/// constant side.
pub fn brute_force_spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (brute_force_ranks(xs), brute_force_ranks(ys));
    let n = xs.len() as f64;
    let sx: f64 = rx.iter().sum();
    let sy: f64 = ry.iter().sum();
    let sxx: f64 = rx.iter().map(|a| a * a).sum();
    let syy: f64 = ry.iter().map(|b| b * b).sum();
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| a * b).sum();
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if vx.abs() < 1e-9 || vy.abs() < 1e-9 {
        return 1.0;
    }
    (n * sxy - sx * sy) / (vx * vy).sqrt()
}

/// Every sequence of length `n` over `alphabet`.
pub fn sequences(alphabet: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..n).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|s| {
                alphabet.iter().map(move |&a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect()
    })
}
