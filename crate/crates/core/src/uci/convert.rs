//! Conversions between engine score domains and q-values.
//!
//! A q-value is the expected game outcome from the side to move, in [-1, 1].
//! With win/draw/loss probabilities w, d, l: q = w - l, and w = (q + 1 - d) / 2.

use serde::{Deserialize, Serialize};

use super::EngineError;

/// Per-mille win/draw/loss triple to (q, draw probability).
pub fn wdl_to_q(win: u32, draw: u32, loss: u32) -> Result<(f64, f64), EngineError> {
    if win + draw + loss != 1000 {
        return Err(EngineError::Protocol(format!("wdl {win} {draw} {loss} does not sum to 1000")));
    }
    let q = (win as f64 - loss as f64) / 1000.0;
    Ok((q, draw as f64 / 1000.0))
}

/// Win probability from a q-value and draw probability.
pub fn q_d_to_winprob(q: f64, draw: f64) -> Result<f64, EngineError> {
    if !(-1.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&draw) {
        return Err(EngineError::Invariant(format!("q={q}, d={draw} out of range")));
    }
    let p = (q + 1.0 - draw) / 2.0;
    // q and d from the same engine imply d <= 1 - |q|; allow rounding slack
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(EngineError::Invariant(format!("win probability {p} from q={q}, d={draw} outside [0, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Logistic centipawn mapping used when an engine reports no WDL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpMapping {
    /// Centipawns per unit of logistic argument.
    pub scale: f64,
}

impl Default for CpMapping {
    fn default() -> Self {
        CpMapping { scale: 300.0 }
    }
}

/// q = 2 * sigmoid(cp / scale) - 1, evaluated as tanh(cp / (2 * scale)) so
/// that oddness holds exactly in floating point.
pub fn cp_to_q(cp: i64, mapping: CpMapping) -> f64 {
    (cp as f64 / (2.0 * mapping.scale)).tanh()
}

/// Mate in `n` (positive: side to move mates; zero or negative: gets mated).
pub fn mate_to_q(n: i64) -> f64 {
    if n > 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wdl_examples() {
        assert_eq!(wdl_to_q(1000, 0, 0).unwrap(), (1.0, 0.0));
        assert_eq!(wdl_to_q(0, 1000, 0).unwrap(), (0.0, 1.0));
        let (q, d) = wdl_to_q(400, 400, 200).unwrap();
        assert_abs_diff_eq!(q, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(d, 0.4, epsilon = 1e-15);
        assert!(wdl_to_q(500, 500, 1).is_err());
    }

    #[test]
    fn winprob_examples() {
        assert_eq!(q_d_to_winprob(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(q_d_to_winprob(0.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(q_d_to_winprob(0.2, 0.4).unwrap(), 0.4, epsilon = 1e-15);
        // certain win cannot coexist with a draw probability
        assert!(q_d_to_winprob(1.0, 0.5).is_ok());
        assert!(q_d_to_winprob(-1.0, 0.5).is_err());
        assert!(q_d_to_winprob(1.5, 0.0).is_err());
    }

    #[test]
    fn cp_examples() {
        let m = CpMapping::default();
        assert_eq!(cp_to_q(0, m), 0.0);
        // 2 * sigmoid(1) - 1 evaluated directly
        let sigma = 1.0 / (1.0 + (-1.0f64).exp());
        assert_abs_diff_eq!(cp_to_q(300, m), 2.0 * sigma - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cp_to_q(300, m), 0.4621, epsilon = 1e-4);
        assert_eq!(mate_to_q(3), 1.0);
        assert_eq!(mate_to_q(-2), -1.0);
        assert_eq!(mate_to_q(0), -1.0);
    }
}
