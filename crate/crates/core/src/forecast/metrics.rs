//! Closed-form violation metrics. Every metric maps valid inputs into [0, 1].

use super::{Direction, ForecastError};

fn check_prob(name: &str, p: f64) -> Result<(), ForecastError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ForecastError::Contract(format!("{name} = {p} is not a probability")))
    }
}

/// |P(A) + P(not A) − 1|.
pub fn metric_negation(p_a: f64, p_not_a: f64) -> Result<f64, ForecastError> {
    check_prob("P(A)", p_a)?;
    check_prob("P(not A)", p_not_a)?;
    Ok((p_a + p_not_a - 1.0).abs().min(1.0))
}

/// Largest pairwise gap, max − min.
pub fn metric_paraphrase(values: &[f64]) -> Result<f64, ForecastError> {
    if values.is_empty() {
        return Err(ForecastError::Contract("paraphrase metric needs at least one value".into()));
    }
    for &v in values {
        check_prob("paraphrase forecast", v)?;
    }
    Ok(spread(values))
}

/// max − min with no range check; used for self-consistency of quantities.
pub(crate) fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// 1-based ranks; tied values share the mean of the positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's ρ: Pearson correlation of average ranks.
///
/// If either sequence is constant, ρ = 1 (a constant sequence is weakly
/// monotone in every direction).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, ForecastError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(ForecastError::Contract(format!(
            "spearman needs two equal-length sequences of length >= 2, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(ForecastError::Contract("spearman inputs must be finite".into()));
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(1.0);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// (1 − ρ)/2 where ρ correlates `values` with `keys` (Increasing) or with
/// the reversed keys (Decreasing).
pub fn metric_monotonicity(values: &[f64], direction: Direction, keys: &[i64]) -> Result<f64, ForecastError> {
    if values.len() != keys.len() || values.len() < 3 {
        return Err(ForecastError::Contract(format!(
            "monotonicity needs >= 3 values matching {} keys, got {}",
            keys.len(),
            values.len()
        )));
    }
    if keys.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ForecastError::Contract("monotonicity keys must be strictly ascending".into()));
    }
    let target: Vec<f64> = match direction {
        Direction::Increasing => keys.iter().map(|&k| k as f64).collect(),
        Direction::Decreasing => keys.iter().map(|&k| -(k as f64)).collect(),
    };
    let rho = spearman(values, &target)?;
    Ok(((1.0 - rho) / 2.0).clamp(0.0, 1.0))
}

/// |P(A|B)·P(B) − P(B|A)·P(A)|^½. The square root is part of the metric.
pub fn metric_bayes(p_a: f64, p_b: f64, p_a_given_b: f64, p_b_given_a: f64) -> Result<f64, ForecastError> {
    check_prob("P(A)", p_a)?;
    check_prob("P(B)", p_b)?;
    check_prob("P(A|B)", p_a_given_b)?;
    check_prob("P(B|A)", p_b_given_a)?;
    Ok((p_a_given_b * p_b - p_b_given_a * p_a).abs().sqrt().min(1.0))
}
