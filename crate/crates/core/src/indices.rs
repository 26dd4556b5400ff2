//! Competitive-balance measures and the perfect-balance test.
//!
//! C6 and HICB work on point shares. The goal-based index works on the
//! `2N` per-team-per-match goal counts `X`:
//!
//! ```text
//! GBI = Σ (X - λ̂)² / ((2N - 1) λ̂),   λ̂ = mean(X)
//! ```
//!
//! Under iid Poisson scoring `(2N - 1)·GBI` is asymptotically `χ²_{2N-1}`
//! (it is the second-order expansion of the Poisson likelihood-ratio
//! statistic `2 Σ X ln(X / λ̂)`), and the test rejects perfect balance in
//! the upper tail only. Seasons that are more even than Poisson scoring
//! permits are never flagged.

use serde::Serialize;

use crate::distributions::draw_probability;
use crate::error::{domain, Error, Result};
use crate::league::{aggregate, point_shares, SeasonData};
use crate::specfun::chi_squared_sf;

pub const SCHEMA_VERSION: u32 = 1;
const SHARE_SUM_TOL: f64 = 1e-9;
const C6_TOP: usize = 6;

fn check_shares(op: &'static str, shares: &[f64]) -> Result<()> {
    if shares.is_empty() {
        return Err(domain(op, "no shares"));
    }
    if shares.iter().any(|&p| !(p >= 0.0)) {
        return Err(domain(op, "shares must be non-negative"));
    }
    let sum: f64 = shares.iter().sum();
    if (sum - 1.0).abs() > SHARE_SUM_TOL {
        return Err(domain(op, format!("shares sum to {sum}, not 1")));
    }
    Ok(())
}

/// `(n/6) Σ` of the six largest point shares.
pub fn c6_index(shares: &[f64]) -> Result<f64> {
    check_shares("c6_index", shares)?;
    let n = shares.len();
    if n < C6_TOP {
        return Err(domain("c6_index", format!("needs at least {C6_TOP} teams, got {n}")));
    }
    let mut sorted = shares.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let top: f64 = sorted[..C6_TOP].iter().sum();
    Ok(n as f64 / C6_TOP as f64 * top)
}

/// `n Σ P_i²`.
pub fn hicb_index(shares: &[f64]) -> Result<f64> {
    check_shares("hicb_index", shares)?;
    Ok(shares.len() as f64 * shares.iter().map(|p| p * p).sum::<f64>())
}

/// Mean goals per team per match.
pub fn mle_lambda(season: &SeasonData) -> f64 {
    let total: u64 = season.goal_counts().map(u64::from).sum();
    total as f64 / (2 * season.match_count()) as f64
}

/// GBI over an arbitrary list of goal counts.
pub fn gbi_from_counts<I>(counts: I) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let it = counts.into_iter();
    let (m, total) = it.clone().fold((0usize, 0.0), |(m, s), x| (m + 1, s + x));
    if m < 2 {
        return Err(domain("gbi_index", "need at least two goal counts"));
    }
    let lambda = total / m as f64;
    if lambda <= 0.0 {
        return Err(Error::DegenerateSeason(
            "no goals scored; the goal-based index is undefined".into(),
        ));
    }
    let ss: f64 = it.map(|x| (x - lambda) * (x - lambda)).sum();
    Ok(ss / ((m - 1) as f64 * lambda))
}

pub fn gbi_index(season: &SeasonData) -> Result<f64> {
    gbi_from_counts(season.goal_counts().map(f64::from))
}

/// Exact Poisson likelihood-ratio statistic `2 Σ X ln(X / λ̂)`, `0 ln 0 = 0`.
pub fn lrt_statistic(season: &SeasonData) -> Result<f64> {
    let lambda = mle_lambda(season);
    if lambda <= 0.0 {
        return Err(Error::DegenerateSeason(
            "no goals scored; the likelihood ratio is undefined".into(),
        ));
    }
    Ok(2.0
        * season
            .goal_counts()
            .filter(|&x| x > 0)
            .map(|x| {
                let x = f64::from(x);
                x * (x / lambda).ln()
            })
            .sum::<f64>())
}

/// Degrees of freedom of the balance test, `2N - 1`.
pub fn balance_df(season: &SeasonData) -> u32 {
    (2 * season.match_count() - 1) as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BalanceTest {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub reject: bool,
}

/// Upper-tail χ² test of perfect balance at level `alpha`.
pub fn balance_test(season: &SeasonData, alpha: f64) -> Result<BalanceTest> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("balance_test", format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let df = balance_df(season);
    let statistic = f64::from(df) * gbi_index(season)?;
    let p_value = chi_squared_sf(statistic, df)?;
    Ok(BalanceTest {
        statistic,
        df,
        p_value,
        reject: p_value < alpha,
    })
}

/// Everything reported for one season.
///
/// Serializes to the stable report schema; the likelihood-ratio diagnostic
/// is carried alongside but kept out of the JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub match_count: usize,
    pub lambda_hat: f64,
    #[serde(rename = "d_lambda_hat")]
    pub draw_prob_theoretical: f64,
    #[serde(rename = "d_observed")]
    pub draw_prob_observed: f64,
    /// `None` for leagues of fewer than six teams.
    pub c6: Option<f64>,
    pub hicb: f64,
    pub gbi: f64,
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub balanced_at_5pct: bool,
    #[serde(skip)]
    pub lrt_statistic: f64,
    #[serde(skip)]
    pub lrt_p_value: f64,
    pub schema_version: u32,
}

pub fn balance_report(season: &SeasonData) -> Result<BalanceReport> {
    let lambda_hat = mle_lambda(season);
    let test = balance_test(season, 0.05)?;
    let shares = point_shares(&aggregate(season))?;
    let (_, draws, _) = season.outcome_counts();
    let lrt = lrt_statistic(season)?;
    Ok(BalanceReport {
        n: season.team_count(),
        match_count: season.match_count(),
        lambda_hat,
        draw_prob_theoretical: draw_probability(lambda_hat)?,
        draw_prob_observed: draws as f64 / season.match_count() as f64,
        c6: if shares.len() >= C6_TOP {
            Some(c6_index(&shares)?)
        } else {
            None
        },
        hicb: hicb_index(&shares)?,
        gbi: test.statistic / f64::from(test.df),
        statistic: test.statistic,
        df: test.df,
        p_value: test.p_value,
        balanced_at_5pct: test.p_value >= 0.05,
        lrt_statistic: lrt,
        lrt_p_value: chi_squared_sf(lrt, test.df)?,
        schema_version: SCHEMA_VERSION,
    })
}
