//! Goodness-of-fit statistics.

use serde::Serialize;

use super::gamma::chi_squared_sf;
use crate::error::{domain, Error, Result};

const PROBABILITY_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GofOutcome {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
}

/// Pearson chi-squared test of observed `counts` against cell `probabilities`.
pub fn multinomial_gof(counts: &[u64], probabilities: &[f64]) -> Result<GofOutcome> {
    if counts.len() != probabilities.len() {
        return Err(Error::LengthMismatch {
            left: counts.len(),
            right: probabilities.len(),
        });
    }
    if counts.len() < 2 {
        return Err(domain("multinomial_gof", "need at least two cells"));
    }
    if probabilities.iter().any(|&p| !(p >= 0.0)) {
        return Err(domain("multinomial_gof", "probabilities must be non-negative"));
    }
    let psum: f64 = probabilities.iter().sum();
    if (psum - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(domain(
            "multinomial_gof",
            format!("probabilities sum to {psum}, not 1"),
        ));
    }
    let total: u64 = counts.iter().sum();
    let total = total as f64;
    let mut statistic = 0.0;
    for (i, (&observed, &p)) in counts.iter().zip(probabilities).enumerate() {
        let expected = total * p;
        if expected == 0.0 {
            return Err(domain(
                "multinomial_gof",
                format!("expected count of cell {i} is zero"),
            ));
        }
        let diff = observed as f64 - expected;
        statistic += diff * diff / expected;
    }
    let df = (counts.len() - 1) as u32;
    Ok(GofOutcome {
        statistic,
        df,
        p_value: chi_squared_sf(statistic, df)?,
    })
}

/// One-sample Kolmogorov–Smirnov distance `sup |F_n(x) - F(x)|`.
pub fn ks_distance<F>(samples: &[f64], cdf: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}
