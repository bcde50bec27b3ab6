use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use crate::chess::Board;

use super::{EngineError, Evaluation, Evaluator};

type Key = (String, String, u64);

/// Shared evaluation memo keyed by (engine identity, canonical FEN, node limit).
///
/// Cloning shares the underlying map.
#[derive(Debug, Clone, Default)]
pub struct EvalCache {
    map: Arc<RwLock<HashMap<Key, Evaluation>>>,
    hits: Arc<AtomicU64>,
    misses: Arc<AtomicU64>,
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, identity: &str, board: &Board, node_limit: u64) -> Option<Evaluation> {
        let key = (identity.to_string(), board.to_fen(), node_limit);
        let found = self.map.read().expect("cache lock poisoned").get(&key).cloned();
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    pub fn insert(&self, identity: &str, board: &Board, node_limit: u64, eval: Evaluation) {
        let key = (identity.to_string(), board.to_fen(), node_limit);
        self.map.write().expect("cache lock poisoned").insert(key, eval);
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }
}

/// Evaluator wrapper that consults an [`EvalCache`] first.
pub struct CachedEvaluator<E> {
    inner: E,
    cache: EvalCache,
    identity: String,
    fresh: u64,
}

impl<E: Evaluator> CachedEvaluator<E> {
    pub fn new(inner: E, cache: EvalCache) -> Self {
        let identity = inner.identity();
        CachedEvaluator { inner, cache, identity, fresh: 0 }
    }

    /// Evaluations that reached the inner evaluator.
    pub fn fresh_evaluations(&self) -> u64 {
        self.fresh
    }

    /// True when `board` would be answered from the cache.
    pub fn is_cached(&self, board: &Board, node_limit: u64) -> bool {
        let key = (self.identity.clone(), board.to_fen(), node_limit);
        self.cache.map.read().expect("cache lock poisoned").contains_key(&key)
    }

    pub fn cache(&self) -> &EvalCache {
        &self.cache
    }

    pub fn inner_mut(&mut self) -> &mut E {
        &mut self.inner
    }

    pub fn into_inner(self) -> E {
        self.inner
    }
}

impl<E: Evaluator> Evaluator for CachedEvaluator<E> {
    fn identity(&self) -> String {
        self.identity.clone()
    }

    fn evaluate(&mut self, board: &Board, node_limit: u64) -> Result<Evaluation, EngineError> {
        if let Some(hit) = self.cache.get(&self.identity, board, node_limit) {
            return Ok(hit);
        }
        let eval = self.inner.evaluate(board, node_limit)?;
        eval.check_invariants()?;
        self.fresh += 1;
        self.cache.insert(&self.identity, board, node_limit, eval.clone());
        Ok(eval)
    }
}
