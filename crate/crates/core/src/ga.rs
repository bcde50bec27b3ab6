//! Genetic search for pawnless boards whose evaluation changes under a
//! 180° rotation.
//!
//! A logical evaluation is one engine evaluation of a board not seen before
//! in the run; repeated boards are free. The budget bounds logical
//! evaluations across all restarts.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use log::{debug, warn};
use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checks::check_transformations;
use crate::chess::{empty_squares, random_pawnless, Board, Color, Piece, PieceKind, Square, Symmetry};
use crate::consistency::{input_id, CheckKind, ConsistencyError, ViolationRecord, DEFAULT_CHESS_THRESHOLDS};
use crate::uci::{EngineError, Evaluator};

/// Attempts before a randomized operator gives up and returns its input.
pub const REPAIR_RETRIES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub tournament_fraction: f64,
    pub eval_budget: u64,
    /// Generations without best-fitness improvement before a restart.
    pub early_stop_patience: usize,
    pub seed: u64,
    /// Carry the single best individual unchanged into the next generation.
    pub elitism: bool,
    /// Boards with fitness strictly above this are reported.
    pub report_threshold: f64,
    pub node_limit: u64,
    /// Evaluate all 7 symmetries of each reported board after the search.
    pub posthoc_full_symmetry: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 1000,
            max_generations: 20,
            tournament_fraction: 0.10,
            eval_budget: 50_000,
            early_stop_patience: 5,
            seed: 0,
            elitism: true,
            report_threshold: DEFAULT_CHESS_THRESHOLDS[0],
            node_limit: 400,
            posthoc_full_symmetry: true,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::Config(m.to_string()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if self.max_generations == 0 || self.early_stop_patience == 0 {
            return bad("max_generations and early_stop_patience must be positive");
        }
        if !(self.tournament_fraction > 0.0 && self.tournament_fraction <= 1.0) {
            return bad("tournament_fraction must lie in (0, 1]");
        }
        if self.eval_budget < 2 {
            return bad("eval_budget must allow at least one fitness evaluation");
        }
        if self.node_limit == 0 {
            return bad("node_limit must be at least 1");
        }
        if !(self.report_threshold >= 0.0) {
            return bad("report_threshold must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub board: Board,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(board: Board) -> Self {
        Individual { board, fitness: None }
    }

    fn score(&self) -> f64 {
        self.fitness.unwrap_or(f64::NEG_INFINITY)
    }
}

/// |q(b) − q(rot180(b))| with no budget accounting.
pub fn fitness<E: Evaluator + ?Sized>(evaluator: &mut E, board: &Board, node_limit: u64) -> Result<f64, EngineError> {
    let rotated = board.apply_symmetry(Symmetry::Rot180)?;
    let a = evaluator.evaluate(board, node_limit)?;
    let b = evaluator.evaluate(&rotated, node_limit)?;
    a.check_invariants()?;
    b.check_invariants()?;
    Ok((a.q - b.q).abs())
}

/// Index of the fittest among ⌈fraction·n⌉ distinct uniformly drawn
/// individuals; ties go to the lowest index.
pub fn tournament_select<R: Rng + ?Sized>(population: &[Individual], fraction: f64, rng: &mut R) -> usize {
    assert!(!population.is_empty(), "tournament over an empty population");
    let n = population.len();
    let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut best: Option<usize> = None;
    for i in sample(rng, n, k).into_iter() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let (fi, fb) = (population[i].score(), population[b].score());
                if fi > fb || (fi == fb && i < b) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.expect("k >= 1")
}

/// Non-king kinds held by both colors, sorted.
fn swappable_kinds(board: &Board) -> Vec<PieceKind> {
    let white = board.kinds_of(Color::White);
    let black = board.kinds_of(Color::Black);
    let mut kinds: Vec<PieceKind> = white.into_iter().filter(|k| *k != PieceKind::King && black.contains(k)).collect();
    kinds.dedup();
    kinds
}

fn pick<T: Copy, R: Rng + ?Sized>(items: &[T], rng: &mut R) -> T {
    items[rng.random_range(0..items.len())]
}

fn squares_of(board: &Board, piece: Piece) -> Vec<Square> {
    board.pieces().filter(|&(_, p)| p == piece).map(|(s, _)| s).collect()
}

/// Replaces one white and one black `outgoing` piece by `incoming` pieces.
/// First attempt reuses the vacated squares; later attempts place the
/// incoming pair on random empty squares.
fn exchange_pair<R: Rng + ?Sized>(
    board: &Board,
    outgoing: PieceKind,
    incoming: PieceKind,
    rng: &mut R,
) -> Option<Board> {
    let w_from = pick(&squares_of(board, Piece::new(Color::White, outgoing)), rng);
    let b_from = pick(&squares_of(board, Piece::new(Color::Black, outgoing)), rng);
    let mut cleared = board.squares;
    cleared[w_from.index()] = None;
    cleared[b_from.index()] = None;
    for attempt in 0..=REPAIR_RETRIES {
        let (w_to, b_to) = if attempt == 0 {
            (w_from, b_from)
        } else {
            let empty: Vec<usize> = (0..64).filter(|&i| cleared[i].is_none()).collect();
            let idx = sample(rng, empty.len(), 2);
            (Square::from_index(empty[idx.index(0)] as u8), Square::from_index(empty[idx.index(1)] as u8))
        };
        let mut squares = cleared;
        squares[w_to.index()] = Some(Piece::new(Color::White, incoming));
        squares[b_to.index()] = Some(Piece::new(Color::Black, incoming));
        let candidate = board.with_squares(squares);
        if candidate.validate().is_ok() {
            return Some(candidate);
        }
    }
    None
}

/// Exchanges a same-kind white/black pair of `a` with a same-kind pair of `b`.
/// Returns the parents unchanged when either board has no such pair or
/// legality repair fails.
pub fn crossover<R: Rng + ?Sized>(a: &Board, b: &Board, rng: &mut R) -> (Board, Board) {
    let (ka, kb) = (swappable_kinds(a), swappable_kinds(b));
    if ka.is_empty() || kb.is_empty() {
        return (a.clone(), b.clone());
    }
    let (from_a, from_b) = (pick(&ka, rng), pick(&kb, rng));
    let child_a = exchange_pair(a, from_a, from_b, rng);
    let child_b = exchange_pair(b, from_b, from_a, rng);
    match (child_a, child_b) {
        (Some(x), Some(y)) => (x, y),
        _ => (a.clone(), b.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationRule {
    /// Reflect along a random axis or diagonal.
    Flip,
    /// Move one piece to a random empty square.
    Relocate,
    /// Move one piece to a random adjacent empty square.
    Step,
    /// Play one legal non-capturing move.
    QuietMove,
    /// Change the side to move.
    FlipSide,
    /// Rotate by 90°, 180° or 270°.
    Rotate,
    /// Replace one piece kind by another for both colors.
    Substitute,
}

impl MutationRule {
    pub const ALL: [MutationRule; 7] = [
        MutationRule::Flip,
        MutationRule::Relocate,
        MutationRule::Step,
        MutationRule::QuietMove,
        MutationRule::FlipSide,
        MutationRule::Rotate,
        MutationRule::Substitute,
    ];
}

/// Applies one uniformly drawn rule. A rule that cannot produce a legal
/// board within [`REPAIR_RETRIES`] attempts leaves the board unchanged.
pub fn mutate<R: Rng + ?Sized>(board: &Board, rng: &mut R) -> (Board, MutationRule) {
    let rule = pick(&MutationRule::ALL, rng);
    (apply_rule(board, rule, rng).unwrap_or_else(|| board.clone()), rule)
}

pub fn apply_rule<R: Rng + ?Sized>(board: &Board, rule: MutationRule, rng: &mut R) -> Option<Board> {
    match rule {
        MutationRule::Flip => Some(board.transform_unchecked(pick(&Symmetry::REFLECTIONS, rng))),
        MutationRule::Rotate => Some(board.transform_unchecked(pick(&Symmetry::ROTATIONS, rng))),
        MutationRule::FlipSide => {
            let flipped = board.with_side(board.side_to_move().opposite());
            flipped.validate().ok().map(|_| flipped)
        }
        MutationRule::QuietMove => {
            let quiet: Vec<_> = board.legal_moves().into_iter().filter(|&m| !board.is_capture(m)).collect();
            if quiet.is_empty() {
                return None;
            }
            board.apply_move(pick(&quiet, rng)).ok()
        }
        MutationRule::Relocate | MutationRule::Step => {
            let pieces: Vec<(Square, Piece)> = board.pieces().collect();
            for _ in 0..REPAIR_RETRIES {
                let (from, piece) = pick(&pieces, rng);
                let targets: Vec<Square> = if rule == MutationRule::Relocate {
                    empty_squares(board)
                } else {
                    neighbours(from).into_iter().filter(|&s| board.piece_at(s).is_none()).collect()
                };
                if targets.is_empty() {
                    continue;
                }
                let to = pick(&targets, rng);
                let mut squares = board.squares;
                squares[from.index()] = None;
                squares[to.index()] = Some(piece);
                let candidate = board.with_squares(squares);
                if candidate.validate().is_ok() {
                    return Some(candidate);
                }
            }
            None
        }
        MutationRule::Substitute => {
            let kinds = swappable_kinds(board);
            if kinds.is_empty() {
                return None;
            }
            for _ in 0..REPAIR_RETRIES {
                let old = pick(&kinds, rng);
                let choices: Vec<PieceKind> = PieceKind::OFFICERS.iter().copied().filter(|&k| k != old).collect();
                let new = pick(&choices, rng);
                let w = pick(&squares_of(board, Piece::new(Color::White, old)), rng);
                let b = pick(&squares_of(board, Piece::new(Color::Black, old)), rng);
                let mut squares = board.squares;
                squares[w.index()] = Some(Piece::new(Color::White, new));
                squares[b.index()] = Some(Piece::new(Color::Black, new));
                let candidate = board.with_squares(squares);
                if candidate.validate().is_ok() {
                    return Some(candidate);
                }
            }
            None
        }
    }
}

fn neighbours(sq: Square) -> Vec<Square> {
    let mut out = Vec::with_capacity(8);
    for df in -1..=1 {
        for dr in -1..=1 {
            if (df, dr) != (0, 0) {
                out.extend(sq.offset(df, dr));
            }
        }
    }
    out
}

/// A reported board together with its rotated partner.
#[derive(Debug, Clone, PartialEq)]
pub struct Discovery {
    pub board: Board,
    pub rotated: Board,
    pub fitness: f64,
    /// max − min over all 8 symmetric variants, when computed.
    pub full_symmetry_max: Option<f64>,
    pub restart: usize,
    pub generation: usize,
}

impl Discovery {
    /// Identifies the unordered {board, rot180(board)} pair.
    pub fn pair_key(&self) -> String {
        pair_key(&self.board, &self.rotated)
    }

    pub fn to_record(&self) -> Result<ViolationRecord, ConsistencyError> {
        let inputs = vec![input_id(&self.board.to_fen()), input_id(&self.rotated.to_fen())];
        let mut detail = format!("rot180 restart={} generation={}", self.restart, self.generation);
        if let Some(full) = self.full_symmetry_max {
            detail.push_str(&format!(" full_symmetry_max={full}"));
        }
        ViolationRecord::new(
            CheckKind::BoardTransformations,
            format!("ga:{}", self.pair_key()),
            inputs,
            self.fitness,
            detail,
        )
    }
}

fn pair_key(a: &Board, b: &Board) -> String {
    let (fa, fb) = (a.to_fen(), b.to_fen());
    let (lo, hi) = if fa <= fb { (fa, fb) } else { (fb, fa) };
    input_id(&format!("{lo}|{hi}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationStat {
    pub generation: usize,
    pub restart: usize,
    pub best: f64,
    pub mean: f64,
    pub budget_used: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GaStats {
    pub generations: Vec<GenerationStat>,
    pub restarts: usize,
    pub budget_used: u64,
    pub engine_failures: u64,
    pub truncated: bool,
}

impl GaStats {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "generation,restart,best,mean,budget_used")?;
        for g in &self.generations {
            writeln!(out, "{},{},{},{},{}", g.generation, g.restart, g.best, g.mean, g.budget_used)?;
        }
        out.flush()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaOutcome {
    pub discoveries: Vec<Discovery>,
    pub stats: GaStats,
}

impl GaOutcome {
    /// Discovered pairs with fitness strictly above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.discoveries.iter().filter(|d| d.fitness > threshold).count()
    }

    pub fn records(&self) -> Result<Vec<ViolationRecord>, ConsistencyError> {
        self.discoveries.iter().map(Discovery::to_record).collect()
    }

    /// (input id, FEN) pairs for every board referenced by the records.
    pub fn inputs(&self) -> Vec<(String, String)> {
        self.discoveries
            .iter()
            .flat_map(|d| [d.board.to_fen(), d.rotated.to_fen()])
            .map(|fen| (input_id(&fen), fen))
            .collect()
    }
}

/// Budgeted memo of q-values by canonical FEN.
struct Ledger<'a, E: ?Sized> {
    evaluator: &'a mut E,
    node_limit: u64,
    q: HashMap<String, f64>,
    used: u64,
    budget: u64,
    failures: u64,
}

impl<E: Evaluator + ?Sized> Ledger<'_, E> {
    fn remaining(&self) -> u64 {
        self.budget - self.used
    }

    fn q_of(&mut self, board: &Board) -> Result<f64, EngineError> {
        let fen = board.to_fen();
        if let Some(&q) = self.q.get(&fen) {
            return Ok(q);
        }
        let e = self.evaluator.evaluate(board, self.node_limit)?;
        e.check_invariants()?;
        self.used += 1;
        self.q.insert(fen, e.q);
        Ok(e.q)
    }

    /// None when the budget cannot cover a worst-case fitness evaluation.
    fn fitness(&mut self, board: &Board) -> Option<Result<f64, EngineError>> {
        if self.remaining() < 2 {
            return None;
        }
        let rotated = board.transform_unchecked(Symmetry::Rot180);
        Some(self.q_of(board).and_then(|a| Ok((a - self.q_of(&rotated)?).abs())))
    }
}

struct Search<'a, 'e, E: ?Sized, R> {
    config: &'a GaConfig,
    ledger: Ledger<'e, E>,
    rng: R,
    seen: HashSet<String>,
    outcome: GaOutcome,
}

impl<E: Evaluator + ?Sized, R: Rng> Search<'_, '_, E, R> {
    /// Scores every individual; failed evaluations are replaced by fresh
    /// random boards. Returns false when the budget ran out, in which case
    /// unscored individuals are dropped.
    fn score(&mut self, pop: &mut Vec<Individual>, restart: usize, generation: usize) -> Result<bool, EngineError> {
        let mut i = 0;
        let mut consecutive_failures = 0;
        while i < pop.len() {
            if pop[i].fitness.is_some() {
                i += 1;
                continue;
            }
            match self.ledger.fitness(&pop[i].board) {
                None => {
                    pop.retain(|ind| ind.fitness.is_some());
                    return Ok(false);
                }
                Some(Ok(f)) => {
                    consecutive_failures = 0;
                    pop[i].fitness = Some(f);
                    self.note(&pop[i].board, f, restart, generation);
                    i += 1;
                }
                Some(Err(e)) => {
                    self.ledger.failures += 1;
                    consecutive_failures += 1;
                    warn!("fitness evaluation failed for {}: {e}", pop[i].board);
                    if consecutive_failures > REPAIR_RETRIES {
                        return Err(e);
                    }
                    pop[i] = Individual::new(random_pawnless(&mut self.rng)?);
                }
            }
        }
        Ok(true)
    }

    fn note(&mut self, board: &Board, fitness: f64, restart: usize, generation: usize) {
        if fitness <= self.config.report_threshold {
            return;
        }
        let rotated = board.transform_unchecked(Symmetry::Rot180);
        let key = pair_key(board, &rotated);
        if self.seen.insert(key) {
            self.outcome.discoveries.push(Discovery {
                board: board.clone(),
                rotated,
                fitness,
                full_symmetry_max: None,
                restart,
                generation,
            });
        }
    }

    fn stat(&mut self, pop: &[Individual], restart: usize, generation: usize) -> f64 {
        let scores: Vec<f64> = pop.iter().filter_map(|i| i.fitness).collect();
        let best = scores.iter().copied().fold(0.0, f64::max);
        let mean = if scores.is_empty() { 0.0 } else { scores.iter().sum::<f64>() / scores.len() as f64 };
        self.outcome.stats.generations.push(GenerationStat {
            generation,
            restart,
            best,
            mean,
            budget_used: self.ledger.used,
        });
        best
    }

    fn random_population(&mut self) -> Result<Vec<Individual>, EngineError> {
        (0..self.config.population_size).map(|_| Ok(Individual::new(random_pawnless(&mut self.rng)?))).collect()
    }

    fn offspring(&mut self, pop: &[Individual]) -> Vec<Individual> {
        let n = self.config.population_size;
        let mut children = Vec::with_capacity(n);
        if self.config.elitism {
            let best = (0..pop.len()).fold(0, |b, i| if pop[i].score() > pop[b].score() { i } else { b });
            children.push(pop[best].clone());
        }
        while children.len() < n {
            let a = tournament_select(pop, self.config.tournament_fraction, &mut self.rng);
            let b = tournament_select(pop, self.config.tournament_fraction, &mut self.rng);
            let (x, y) = crossover(&pop[a].board, &pop[b].board, &mut self.rng);
            for child in [x, y] {
                if children.len() < n {
                    let (m, _) = mutate(&child, &mut self.rng);
                    children.push(Individual::new(m));
                }
            }
        }
        children
    }

    fn run(&mut self) -> Result<(), EngineError> {
        let mut restart = 0;
        loop {
            if self.ledger.remaining() < 2 {
                break;
            }
            let mut pop = self.random_population()?;
            let complete = self.score(&mut pop, restart, 0)?;
            if pop.is_empty() {
                self.outcome.stats.truncated = !complete;
                break;
            }
            let mut best = self.stat(&pop, restart, 0);
            let mut stale = 0;
            let mut exhausted = !complete;
            for generation in 1..self.config.max_generations {
                if exhausted {
                    break;
                }
                let mut next = self.offspring(&pop);
                exhausted = !self.score(&mut next, restart, generation)?;
                if next.is_empty() {
                    break;
                }
                pop = next;
                let gen_best = self.stat(&pop, restart, generation);
                if gen_best > best {
                    best = gen_best;
                    stale = 0;
                } else {
                    stale += 1;
                }
                if stale >= self.config.early_stop_patience {
                    debug!("restart {restart}: no improvement for {stale} generations");
                    break;
                }
            }
            restart += 1;
            if exhausted {
                self.outcome.stats.truncated = true;
                break;
            }
        }
        self.outcome.stats.restarts = restart;
        Ok(())
    }
}

fn finish<E: Evaluator + ?Sized>(
    config: &GaConfig,
    mut outcome: GaOutcome,
    ledger: Ledger<'_, E>,
) -> Result<GaOutcome, EngineError> {
    outcome.stats.budget_used = ledger.used;
    outcome.stats.engine_failures = ledger.failures;
    if config.posthoc_full_symmetry {
        for d in &mut outcome.discoveries {
            match check_transformations(ledger.evaluator, &d.board, config.node_limit) {
                Ok(case) => d.full_symmetry_max = Some(case.violation),
                Err(e) => warn!("post-hoc symmetry scan failed for {}: {e}", d.board),
            }
        }
    }
    Ok(outcome)
}

/// Runs restarts of the generational search until the budget is consumed.
pub fn evolve<E: Evaluator + ?Sized>(config: &GaConfig, evaluator: &mut E) -> Result<GaOutcome, EngineError> {
    config.validate()?;
    let mut search = Search {
        config,
        ledger: Ledger {
            evaluator,
            node_limit: config.node_limit,
            q: HashMap::new(),
            used: 0,
            budget: config.eval_budget,
            failures: 0,
        },
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        seen: HashSet::new(),
        outcome: GaOutcome::default(),
    };
    search.run()?;
    let Search { ledger, outcome, .. } = search;
    finish(config, outcome, ledger)
}

/// Scores fresh random pawnless boards until the same budget is consumed.
pub fn random_search<E: Evaluator + ?Sized>(config: &GaConfig, evaluator: &mut E) -> Result<GaOutcome, EngineError> {
    config.validate()?;
    let mut search = Search {
        config,
        ledger: Ledger {
            evaluator,
            node_limit: config.node_limit,
            q: HashMap::new(),
            used: 0,
            budget: config.eval_budget,
            failures: 0,
        },
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        seen: HashSet::new(),
        outcome: GaOutcome::default(),
    };
    let mut scored = Vec::new();
    while search.ledger.remaining() >= 2 {
        let mut batch = vec![Individual::new(random_pawnless(&mut search.rng)?)];
        search.score(&mut batch, 0, 0)?;
        scored.extend(batch);
    }
    search.stat(&scored, 0, 0);
    search.outcome.stats.restarts = 1;
    let Search { ledger, outcome, .. } = search;
    finish(config, outcome, ledger)
}
