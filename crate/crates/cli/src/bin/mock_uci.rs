//! Minimal UCI engine for exercising the process driver.
//!
//! Scores positions by material (q = tanh(balance / 8) for the side to move)
//! and plays the first legal move. Flags:
//!
//! * `--leela`: report through verbose move statistics instead of `score cp`
//! * `--wdl`: add `wdl w d l` to the score line
//! * `--crash-after N`: exit without replying on the N-th `go`
//! * `--hang-after N`: stop replying from the N-th `go`
//! * `--illegal`: answer every search with `a1a2`, illegal unless a piece
//!   of the side to move stands on a1
//! * `--options A,B`: option names to advertise (default `Threads,Hash`)
//! * `--reject NAME`: answer `No such option` when `NAME` is set

use std::io::{self, BufRead, Write};

use metacheck_core::chess::Board;
use metacheck_core::uci::MaterialMock;

#[derive(Default)]
struct Flags {
    leela: bool,
    wdl: bool,
    crash_after: Option<u32>,
    hang_after: Option<u32>,
    illegal: bool,
    options: Vec<String>,
    reject: Option<String>,
}

fn parse_flags() -> Flags {
    let mut f = Flags { options: vec!["Threads".into(), "Hash".into()], ..Flags::default() };
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        match a.as_str() {
            "--leela" => f.leela = true,
            "--wdl" => f.wdl = true,
            "--illegal" => f.illegal = true,
            "--crash-after" => f.crash_after = args.next().and_then(|v| v.parse().ok()),
            "--hang-after" => f.hang_after = args.next().and_then(|v| v.parse().ok()),
            "--options" => f.options = args.next().unwrap_or_default().split(',').map(str::to_string).collect(),
            "--reject" => f.reject = args.next(),
            other => eprintln!("mock-uci: ignoring `{other}`"),
        }
    }
    f
}

fn search(flags: &Flags, board: &Board, nodes: u64, out: &mut impl Write) -> io::Result<()> {
    let q = MaterialMock::q_of(board);
    let moves = board.legal_moves();
    let best = if flags.illegal {
        "a1a2".to_string()
    } else {
        moves.first().map(|m| m.to_string()).unwrap_or_else(|| "(none)".into())
    };
    if flags.leela {
        // the statistic for a move is from the mover's view before the move
        for m in &moves {
            writeln!(out, "info string {m:<5} (1234) N:      {nodes} (+ 0) (P: 10.00%) (Q: {q:.5}) (D: 0.100)")?;
        }
        writeln!(out, "info string node  ( 0) N:      {nodes} (+ 0) (P: 100.00%) (Q: {q:.5}) (D: 0.100)")?;
        writeln!(out, "info depth 1 nodes {nodes} score cp {}", (q * 300.0) as i64)?;
    } else {
        let cp = 100 * board.material_balance(board.side_to_move());
        let mut line = format!("info depth 1 seldepth 1 multipv 1 score cp {cp}");
        if flags.wdl {
            let win = ((1.0 + q) / 2.0 * 900.0).round() as u32;
            line.push_str(&format!(" wdl {win} 100 {}", 900 - win));
        }
        line.push_str(&format!(" nodes {nodes} pv {best}"));
        writeln!(out, "{line}")?;
    }
    writeln!(out, "bestmove {best}")
}

fn main() -> io::Result<()> {
    let flags = parse_flags();
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    let mut board = None;
    let mut searches = 0u32;
    let mut hung = false;
    for line in stdin.lock().lines() {
        let line = line?;
        let line = line.trim();
        if hung {
            if line == "quit" {
                return Ok(());
            }
            continue;
        }
        let (cmd, rest) = line.split_once(' ').unwrap_or((line, ""));
        match cmd {
            "uci" => {
                writeln!(out, "id name mock-uci")?;
                writeln!(out, "id author metacheck")?;
                for o in &flags.options {
                    writeln!(out, "option name {o} type string default 0")?;
                }
                writeln!(out, "uciok")?;
            }
            "setoption" => {
                let name = rest.strip_prefix("name ").and_then(|r| r.split(" value").next()).unwrap_or("");
                if flags.reject.as_deref() == Some(name) {
                    writeln!(out, "No such option: {name}")?;
                }
            }
            "isready" => writeln!(out, "readyok")?,
            "ucinewgame" => {}
            "position" => {
                board = if rest == "startpos" {
                    Some(Board::startpos())
                } else {
                    rest.strip_prefix("fen ").and_then(|f| Board::from_fen(f.trim()).ok())
                };
            }
            "go" => {
                searches += 1;
                if flags.crash_after == Some(searches) {
                    std::process::exit(3);
                }
                if flags.hang_after == Some(searches) {
                    hung = true;
                    continue;
                }
                let nodes = rest.strip_prefix("nodes ").and_then(|n| n.trim().parse().ok()).unwrap_or(1);
                match &board {
                    Some(b) => search(&flags, b, nodes, &mut out)?,
                    None => writeln!(out, "bestmove (none)")?,
                }
            }
            "quit" => return Ok(()),
            _ => {}
        }
        out.flush()?;
    }
    Ok(())
}
