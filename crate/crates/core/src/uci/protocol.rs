//! Parsing of engine search output.
//!
//! Accepted grammar (tokens are whitespace separated, unknown tokens ignored):
//!
//! ```text
//! info ... [multipv <k>] ... score (cp <x> | mate <y>) [lowerbound|upperbound]
//!      ... [wdl <w> <d> <l>] ... [nodes <n>] ...
//! info string <move|node> ... (Q: <q>) ... (D: <d>) ...
//! bestmove <move|(none)|0000> [ponder <move>]
//! ```
//!
//! The second form is the per-move statistics block some engines print when
//! verbose move statistics are enabled. Parentheses are optional and a value
//! may be attached to its key (`(Q:0.12)`).

use std::collections::HashMap;

use crate::chess::{Board, MoveSpec};

use super::convert::{cp_to_q, mate_to_q, wdl_to_q, CpMapping};
use super::{EngineError, EngineFlavor, Evaluation, RawScore, ScoreSource};

/// Score-bearing fields of one `info` line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InfoLine {
    pub multipv: Option<u32>,
    pub cp: Option<i64>,
    pub mate: Option<i64>,
    pub wdl: Option<(u32, u32, u32)>,
    pub nodes: Option<u64>,
    pub bound: bool,
}

impl InfoLine {
    pub fn has_score(&self) -> bool {
        self.cp.is_some() || self.mate.is_some()
    }
}

/// Parses a non-`string` info line. Returns `None` for lines that are not
/// info lines or that carry `info string`.
pub fn parse_info_line(line: &str) -> Option<InfoLine> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.first() != Some(&"info") || tokens.get(1) == Some(&"string") {
        return None;
    }
    let mut info = InfoLine::default();
    let mut i = 1;
    while i < tokens.len() {
        match tokens[i] {
            "multipv" => {
                info.multipv = tokens.get(i + 1).and_then(|t| t.parse().ok());
                i += 2;
            }
            "nodes" => {
                info.nodes = tokens.get(i + 1).and_then(|t| t.parse().ok());
                i += 2;
            }
            "score" => {
                match (tokens.get(i + 1), tokens.get(i + 2)) {
                    (Some(&"cp"), Some(v)) => info.cp = v.parse().ok(),
                    (Some(&"mate"), Some(v)) => info.mate = v.parse().ok(),
                    _ => {}
                }
                i += 3;
            }
            "lowerbound" | "upperbound" => {
                info.bound = true;
                i += 1;
            }
            "wdl" => {
                let nums: Option<Vec<u32>> =
                    tokens.get(i + 1..i + 4).map(|s| s.iter().filter_map(|t| t.parse().ok()).collect());
                if let Some(n) = nums.filter(|n| n.len() == 3) {
                    info.wdl = Some((n[0], n[1], n[2]));
                }
                i += 4;
            }
            // the principal variation runs to end of line
            "pv" => break,
            _ => i += 1,
        }
    }
    Some(info)
}

/// One row of verbose move statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct VerboseStat {
    /// Move in coordinate notation, or `node` for the root summary row.
    pub subject: String,
    pub q: f64,
    pub draw: Option<f64>,
}

pub fn parse_verbose_stats(line: &str) -> Option<VerboseStat> {
    let rest = line.trim_start().strip_prefix("info")?.trim_start().strip_prefix("string")?;
    let cleaned: String = rest.chars().map(|c| if c == '(' || c == ')' { ' ' } else { c }).collect();
    let tokens: Vec<&str> = cleaned.split_whitespace().collect();
    let subject = tokens.first()?.to_string();
    let value_of = |key: &str| -> Option<f64> {
        let with_colon = format!("{key}:");
        for (i, tok) in tokens.iter().enumerate() {
            if *tok == with_colon {
                return tokens.get(i + 1)?.parse().ok();
            }
            if let Some(v) = tok.strip_prefix(&with_colon) {
                if !v.is_empty() {
                    return v.parse().ok();
                }
            }
        }
        None
    };
    let q = value_of("Q")?;
    Some(VerboseStat { subject, q, draw: value_of("D") })
}

/// Everything collected between `go` and `bestmove`.
#[derive(Debug, Clone, Default)]
pub struct SearchResult {
    pub last_info: Option<InfoLine>,
    pub max_nodes: Option<u64>,
    pub verbose: HashMap<String, VerboseStat>,
    pub best_move: Option<String>,
}

impl SearchResult {
    pub fn absorb(&mut self, line: &str) {
        if let Some(stat) = parse_verbose_stats(line) {
            self.verbose.insert(stat.subject.clone(), stat);
        } else if let Some(info) = parse_info_line(line) {
            if let Some(n) = info.nodes {
                self.max_nodes = Some(self.max_nodes.map_or(n, |m| m.max(n)));
            }
            let primary = info.multipv.is_none_or(|k| k == 1);
            if info.has_score() && primary {
                self.last_info = Some(info);
            }
        } else if let Some(rest) = line.trim_start().strip_prefix("bestmove") {
            self.best_move = rest.split_whitespace().next().map(str::to_string);
        }
    }

    /// Converts the collected output into an [`Evaluation`] of `board`.
    pub fn into_evaluation(
        self,
        board: &Board,
        flavor: EngineFlavor,
        mapping: CpMapping,
    ) -> Result<Evaluation, EngineError> {
        let best_move = match self.best_move.as_deref() {
            None => return Err(EngineError::Protocol("search ended without bestmove".into())),
            Some("(none)") | Some("0000") => None,
            Some(text) => {
                let mv = MoveSpec::parse_uci(text)
                    .ok_or_else(|| EngineError::Protocol(format!("unparsable bestmove `{text}`")))?;
                if !board.legal_moves().contains(&mv) {
                    return Err(EngineError::IllegalBestMove { mv: text.to_string(), fen: board.to_fen() });
                }
                Some(mv)
            }
        };
        let nodes_used = self.max_nodes.unwrap_or(0);

        if flavor == EngineFlavor::LeelaLike {
            if let Some(stat) = best_move.and_then(|m| self.verbose.get(&m.to_string())) {
                let eval = Evaluation {
                    q: stat.q.clamp(-1.0, 1.0),
                    draw_prob: stat.draw,
                    best_move,
                    nodes_used,
                    raw: RawScore::QValue(stat.q),
                    source: ScoreSource::Native,
                };
                eval.check_invariants()?;
                return Ok(eval);
            }
        }

        let info = self.last_info.ok_or_else(|| EngineError::Protocol("no score reported before bestmove".into()))?;
        let eval = if let Some(n) = info.mate {
            Evaluation {
                q: mate_to_q(n),
                draw_prob: Some(0.0),
                best_move,
                nodes_used,
                raw: RawScore::MateIn(n),
                source: ScoreSource::Mate,
            }
        } else if let Some((win, draw, loss)) = info.wdl {
            let (q, d) = wdl_to_q(win, draw, loss)?;
            Evaluation {
                q,
                draw_prob: Some(d),
                best_move,
                nodes_used,
                raw: RawScore::WdlPermille { win, draw, loss },
                source: ScoreSource::Wdl,
            }
        } else if let Some(cp) = info.cp {
            Evaluation {
                q: cp_to_q(cp, mapping),
                draw_prob: None,
                best_move,
                nodes_used,
                raw: RawScore::Centipawn(cp),
                source: ScoreSource::CentipawnFallback,
            }
        } else {
            return Err(EngineError::Protocol("score line without cp or mate".into()));
        };
        eval.check_invariants()?;
        Ok(eval)
    }
}
