//! Child-process UCI driver.

use std::collections::{HashSet, VecDeque};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use log::{debug, warn};

use crate::chess::Board;

use super::protocol::SearchResult;
use super::{EngineConfig, EngineError, Evaluation, Evaluator};

const TAIL_LINES: usize = 32;

/// A running engine process that has completed the UCI handshake.
pub struct UciEngine {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    tail: VecDeque<String>,
    config: EngineConfig,
    name: Option<String>,
    identity: String,
    dead: bool,
}

impl UciEngine {
    /// Spawns the engine and performs `uci`/`setoption`/`isready`.
    pub fn start(config: &EngineConfig, identity: String) -> Result<Self, EngineError> {
        config.validate()?;
        let exe = config.executable.display().to_string();
        let mut child = Command::new(&config.executable)
            .args(&config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| EngineError::Spawn { executable: exe.clone(), reason: e.to_string() })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::Builder::new()
            .name("uci-reader".into())
            .spawn(move || {
                for line in BufReader::new(stdout).lines() {
                    let Ok(line) = line else { break };
                    if tx.send(line).is_err() {
                        break;
                    }
                }
            })
            .map_err(|e| EngineError::Spawn { executable: exe.clone(), reason: e.to_string() })?;

        let mut engine = UciEngine {
            child,
            stdin,
            lines: rx,
            tail: VecDeque::with_capacity(TAIL_LINES),
            config: config.clone(),
            name: None,
            identity,
            dead: false,
        };
        engine.handshake()?;
        Ok(engine)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    fn handshake(&mut self) -> Result<(), EngineError> {
        let timeout = self.config.handshake_timeout();
        self.send("uci")?;
        let mut advertised = HashSet::new();
        let mut name = None;
        self.read_until("uciok", timeout, |line| {
            if let Some(rest) = line.strip_prefix("id name ") {
                name = Some(rest.trim().to_string());
            } else if let Some(opt) = advertised_option(line) {
                advertised.insert(opt.to_ascii_lowercase());
            }
            line.trim() == "uciok"
        })?;
        self.name = name;

        let options = self.config.effective_options();
        for (key, _) in &options {
            if !advertised.is_empty() && !advertised.contains(&key.to_ascii_lowercase()) {
                return Err(EngineError::OptionRejected {
                    name: key.clone(),
                    reason: "engine does not advertise this option".into(),
                });
            }
        }
        for (key, value) in &options {
            self.send(&format!("setoption name {key} value {value}"))?;
        }
        self.send("isready")?;
        let mut rejected = None;
        self.read_until("readyok", timeout, |line| {
            let lower = line.to_ascii_lowercase();
            if lower.contains("no such option") || lower.contains("unknown option") || lower.starts_with("error") {
                if let Some((k, _)) = options.iter().find(|(k, _)| lower.contains(&k.to_ascii_lowercase())) {
                    rejected = Some((k.clone(), line.to_string()));
                }
            }
            line.trim() == "readyok"
        })?;
        if let Some((name, reason)) = rejected {
            return Err(EngineError::OptionRejected { name, reason });
        }
        debug!("engine {:?} ready", self.name);
        Ok(())
    }

    fn send(&mut self, command: &str) -> Result<(), EngineError> {
        if self.dead {
            return Err(self.transport("engine is no longer running"));
        }
        let res = writeln!(self.stdin, "{command}").and_then(|_| self.stdin.flush());
        if let Err(e) = res {
            self.dead = true;
            return Err(self.transport(&format!("write `{command}` failed: {e}")));
        }
        Ok(())
    }

    fn transport(&self, message: &str) -> EngineError {
        EngineError::Transport { message: message.to_string(), tail: self.tail.iter().cloned().collect() }
    }

    /// Reads lines until `done` returns true for one of them.
    fn read_until(
        &mut self,
        expected: &str,
        timeout: Duration,
        mut done: impl FnMut(&str) -> bool,
    ) -> Result<(), EngineError> {
        let deadline = Instant::now() + timeout;
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(remaining) {
                Ok(line) => {
                    if self.tail.len() == TAIL_LINES {
                        self.tail.pop_front();
                    }
                    self.tail.push_back(line.clone());
                    if done(&line) {
                        return Ok(());
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.dead = true;
                    let _ = self.child.kill();
                    return Err(EngineError::Timeout {
                        expected: expected.to_string(),
                        seconds: timeout.as_secs_f64(),
                        tail: self.tail.iter().cloned().collect(),
                    });
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.dead = true;
                    let status = self.child.wait().ok().map(|s| s.to_string()).unwrap_or_default();
                    return Err(self.transport(&format!("engine exited while waiting for `{expected}` ({status})")));
                }
            }
        }
    }

    fn search(&mut self, board: &Board, node_limit: u64) -> Result<Evaluation, EngineError> {
        self.send("ucinewgame")?;
        self.send("isready")?;
        self.read_until("readyok", self.config.handshake_timeout(), |l| l.trim() == "readyok")?;
        self.send(&format!("position fen {}", board.to_fen()))?;
        self.send(&format!("go nodes {node_limit}"))?;
        let mut result = SearchResult::default();
        self.read_until("bestmove", self.config.eval_timeout(), |line| {
            result.absorb(line);
            line.starts_with("bestmove")
        })?;
        result.into_evaluation(board, self.config.flavor, self.config.cp_mapping)
    }
}

impl Evaluator for UciEngine {
    fn identity(&self) -> String {
        self.identity.clone()
    }

    fn evaluate(&mut self, board: &Board, node_limit: u64) -> Result<Evaluation, EngineError> {
        self.search(board, node_limit)
    }
}

impl Drop for UciEngine {
    fn drop(&mut self) {
        if !self.dead {
            let _ = writeln!(self.stdin, "quit").and_then(|_| self.stdin.flush());
            let deadline = Instant::now() + Duration::from_millis(500);
            while Instant::now() < deadline {
                if let Ok(Some(_)) = self.child.try_wait() {
                    return;
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            warn!("engine did not exit after quit; killing");
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Extracts the option name from `option name <name...> type <...>`.
fn advertised_option(line: &str) -> Option<String> {
    let rest = line.trim().strip_prefix("option name ")?;
    let end = rest.find(" type ").unwrap_or(rest.len());
    Some(rest[..end].trim().to_string())
}
