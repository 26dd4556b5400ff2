//! Goal-difference law for two iid Poisson scorers and the points it induces.
//!
//! With both sides scoring Poisson(λ) the goal difference is Skellam(λ, λ):
//! `P(Y = k) = e^{-2λ} I_{|k|}(2λ)`, so the draw probability is
//! `d_λ = e^{-2λ} I_0(2λ)` and each side wins with `w_λ = (1 - d_λ)/2`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::specfun::{scaled_bessel_i, scaled_bessel_i0, MAX_POISSON_RATE};

const LAMBDA0_BRACKET: (f64, f64) = (0.01, 10.0);
const LAMBDA0_TOL: f64 = 1e-12;

fn check_rate(op: &'static str, lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain(op, format!("rate must be positive and finite, got {lambda}")))
    }
}

/// One point on the draw-probability curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DrawCurvePoint {
    pub lambda: f64,
    pub draw_prob: f64,
    pub win_prob: f64,
}

impl DrawCurvePoint {
    pub fn at(lambda: f64) -> Result<Self> {
        let draw_prob = draw_probability(lambda)?;
        Ok(Self {
            lambda,
            draw_prob,
            win_prob: (1.0 - draw_prob) / 2.0,
        })
    }
}

/// `d_λ`, the probability that two Poisson(λ) scorers draw.
pub fn draw_probability(lambda: f64) -> Result<f64> {
    check_rate("draw_probability", lambda)?;
    scaled_bessel_i0(2.0 * lambda)
}

/// Evenly spaced points on `[from, to]`, `steps` intervals.
pub fn draw_curve(from: f64, to: f64, steps: usize) -> Result<Vec<DrawCurvePoint>> {
    if steps == 0 || !(to >= from) {
        return Err(domain("draw_curve", format!("need from <= to and steps >= 1, got [{from}, {to}] / {steps}")));
    }
    (0..=steps)
        .map(|i| DrawCurvePoint::at(from + (to - from) * i as f64 / steps as f64))
        .collect()
}

/// The rate at which win, draw and loss are each equally likely.
///
/// Solved once by bisection on `d_λ = 1/3`; `d_λ` is strictly decreasing so
/// the bracket always holds a single root.
pub fn solve_lambda0() -> f64 {
    static LAMBDA0: OnceLock<f64> = OnceLock::new();
    *LAMBDA0.get_or_init(|| {
        let target = 1.0 / 3.0;
        let d = |l: f64| scaled_bessel_i0(2.0 * l).expect("bracket is inside the domain");
        let (mut lo, mut hi) = LAMBDA0_BRACKET;
        debug_assert!(d(lo) > target && d(hi) < target);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let dm = d(mid);
            if dm > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * mid {
                break;
            }
        }
        let root = 0.5 * (lo + hi);
        debug_assert!((d(root) - target).abs() < LAMBDA0_TOL);
        root
    })
}

/// Skellam(λ, λ) mass at `k`.
pub fn skellam_pmf(k: i64, lambda: f64) -> Result<f64> {
    check_rate("skellam_pmf", lambda)?;
    let order = u32::try_from(k.unsigned_abs())
        .map_err(|_| domain("skellam_pmf", format!("|k| too large: {k}")))?;
    scaled_bessel_i(order, 2.0 * lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OutcomeProbs {
    pub home_win: f64,
    pub draw: f64,
    pub away_win: f64,
}

fn poisson_pmf_table(rate: f64, max: usize) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(max + 1);
    let mut p = (-rate).exp();
    pmf.push(p);
    for k in 1..=max {
        p *= rate / k as f64;
        pmf.push(p);
    }
    pmf
}

/// Win/draw/loss probabilities for independent Poisson scorers.
///
/// Direct double sum over goals `0..=K` with
/// `K = ceil(λ_max + 12 √λ_max + 20)`, leaving well under 1e-12 of mass out.
pub fn match_outcome_probs(home_rate: f64, away_rate: f64) -> Result<OutcomeProbs> {
    for rate in [home_rate, away_rate] {
        if !(rate > 0.0) || rate > MAX_POISSON_RATE {
            return Err(domain(
                "match_outcome_probs",
                format!("rates must lie in (0, {MAX_POISSON_RATE}], got {rate}"),
            ));
        }
    }
    let lmax = home_rate.max(away_rate);
    let k = (lmax + 12.0 * lmax.sqrt() + 20.0).ceil() as usize;
    let home = poisson_pmf_table(home_rate, k);
    let away = poisson_pmf_table(away_rate, k);

    let mut draw = 0.0;
    let mut home_win = 0.0;
    let mut away_win = 0.0;
    let mut home_cdf = 0.0;
    let mut away_cdf = 0.0;
    for g in 0..=k {
        draw += home[g] * away[g];
        // home scores g and away strictly fewer
        home_win += home[g] * away_cdf;
        away_win += away[g] * home_cdf;
        home_cdf += home[g];
        away_cdf += away[g];
    }
    Ok(OutcomeProbs {
        home_win,
        draw,
        away_win,
    })
}

/// Joint law of the points two teams take off each other over their home
/// and away fixtures, `(S_12, S_21)`, in an iid-Poisson league.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairPointsDistribution {
    pub draw_prob: f64,
    pub win_prob: f64,
}

impl PairPointsDistribution {
    /// Support of `(S_12, S_21)`.
    pub const SUPPORT: [(u8, u8); 6] = [(6, 0), (0, 6), (4, 1), (1, 4), (3, 3), (2, 2)];

    pub fn probability(&self, a: u8, b: u8) -> f64 {
        let (w, d) = (self.win_prob, self.draw_prob);
        match (a, b) {
            (6, 0) | (0, 6) => w * w,
            (4, 1) | (1, 4) => 2.0 * w * d,
            (3, 3) => 2.0 * w * w,
            (2, 2) => d * d,
            _ => 0.0,
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = ((u8, u8), f64)> + '_ {
        Self::SUPPORT
            .iter()
            .map(move |&(a, b)| ((a, b), self.probability(a, b)))
    }
}

pub fn pair_points_joint_pmf(lambda: f64) -> Result<PairPointsDistribution> {
    check_rate("pair_points_joint_pmf", lambda)?;
    let d = draw_probability(lambda)?;
    Ok(PairPointsDistribution {
        draw_prob: d,
        win_prob: (1.0 - d) / 2.0,
    })
}

/// Exact pmf of the points a team collects from `games` iid fixtures,
/// each worth 3/1/0 with probabilities `(w, d, w)`. Index = points.
pub fn season_points_pmf(games: usize, lambda: f64) -> Result<Vec<f64>> {
    check_rate("season_points_pmf", lambda)?;
    let d = draw_probability(lambda)?;
    let w = (1.0 - d) / 2.0;
    let mut pmf = vec![1.0];
    for _ in 0..games {
        let mut next = vec![0.0; pmf.len() + 3];
        for (s, &p) in pmf.iter().enumerate() {
            next[s] += p * w;
            next[s + 1] += p * d;
            next[s + 3] += p * w;
        }
        pmf = next;
    }
    Ok(pmf)
}

/// Probabilities that team 1 finishes above, below, or level with team 2
/// on points in an `n`-team iid-Poisson(λ) double round robin.
///
/// Conditions on the mutual fixtures: `P(S_1 > S_2) = Σ_B P(S'_1 - S'_2 > b - a) P(a, b)`
/// where `S'_i` are the iid points taken from the other `n - 2` teams.
pub fn points_order_probs(n: usize, lambda: f64) -> Result<(f64, f64, f64)> {
    if n < 2 {
        return Err(domain("points_order_probs", "need at least two teams"));
    }
    let rest = season_points_pmf(2 * (n - 2), lambda)?;
    let pair = pair_points_joint_pmf(lambda)?;
    let offset = rest.len() as i64 - 1;
    // pmf of S'_1 - S'_2, indexed by diff + offset
    let mut diff = vec![0.0; 2 * rest.len() - 1];
    for (x, &px) in rest.iter().enumerate() {
        for (y, &py) in rest.iter().enumerate() {
            diff[(x as i64 - y as i64 + offset) as usize] += px * py;
        }
    }
    let tail_above = |r: i64| -> f64 {
        diff.iter()
            .enumerate()
            .filter(|(i, _)| *i as i64 - offset > r)
            .map(|(_, p)| p)
            .sum()
    };
    let point_mass = |r: i64| -> f64 {
        usize::try_from(r + offset).ok().and_then(|i| diff.get(i)).copied().unwrap_or(0.0)
    };
    let (mut above, mut below, mut level) = (0.0, 0.0, 0.0);
    for ((a, b), p) in pair.cells() {
        let r = i64::from(b) - i64::from(a);
        above += p * tail_above(r);
        below += p * tail_above(-r);
        level += p * point_mass(r);
    }
    Ok((above, below, level))
}
