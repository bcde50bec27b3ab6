use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use metacheck_bench::{forecast_series, midgame_boards, pawnless_boards, violation_values};
use metacheck_core::checks::{check_mirroring, check_transformations};
use metacheck_core::chess::Board;
use metacheck_core::consistency::{bucketize, DEFAULT_CHESS_THRESHOLDS};
use metacheck_core::forecast::spearman;
use metacheck_core::ga::{crossover, mutate};
use metacheck_core::uci::MaterialMock;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn movegen(c: &mut Criterion) {
    let start = Board::startpos();
    c.bench_function("perft initial depth 3", |b| b.iter(|| black_box(&start).perft(3)));
    let boards = midgame_boards(64, 30, 1);
    c.bench_function("legal moves x64 midgame", |b| {
        b.iter(|| boards.iter().map(|x| x.legal_moves().len()).sum::<usize>())
    });
}

fn checks(c: &mut Criterion) {
    let boards = pawnless_boards(64, 2);
    let mut ev = MaterialMock;
    c.bench_function("transformations x64 material mock", |b| {
        b.iter(|| boards.iter().map(|x| check_transformations(&mut ev, x, 1).unwrap().violation).sum::<f64>())
    });
    let boards = midgame_boards(64, 30, 3);
    c.bench_function("mirroring x64 material mock", |b| {
        b.iter(|| boards.iter().map(|x| check_mirroring(&mut ev, x, 1).unwrap().violation).sum::<f64>())
    });
}

fn reporting(c: &mut Criterion) {
    let values = violation_values(100_000, 4);
    c.bench_function("bucketize 100k", |b| {
        b.iter(|| bucketize(black_box(&values), &DEFAULT_CHESS_THRESHOLDS).unwrap())
    });
    let xs = forecast_series(1000, 5);
    let keys: Vec<f64> = (0..1000).map(f64::from).collect();
    c.bench_function("spearman 1000 with ties", |b| b.iter(|| spearman(black_box(&xs), &keys).unwrap()));
}

fn search(c: &mut Criterion) {
    let boards = pawnless_boards(64, 6);
    c.bench_function("mutate x64", |b| {
        b.iter_batched(
            || ChaCha8Rng::seed_from_u64(7),
            |mut rng| boards.iter().map(|x| mutate(x, &mut rng).0.piece_count()).sum::<usize>(),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("crossover x32", |b| {
        b.iter_batched(
            || ChaCha8Rng::seed_from_u64(8),
            |mut rng| boards.chunks(2).map(|p| crossover(&p[0], &p[1], &mut rng).0.piece_count()).sum::<usize>(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, movegen, checks, reporting, search);
criterion_main!(benches);
