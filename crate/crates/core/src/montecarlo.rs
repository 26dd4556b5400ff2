//! Simulated iid-Poisson leagues and the experiments built on them.
//!
//! Every replicate draws from its own ChaCha stream keyed by
//! `(seed, param_index, replicate_index)`, and per-replicate results are
//! merged as integer counts. A run is therefore reproducible from its
//! configuration alone, whatever the thread count.

use std::collections::BTreeMap;

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indices::{balance_test, lrt_statistic};
use crate::league::{standings, MatchRecord, SeasonData, TeamId};
use crate::specfun::{multinomial_gof, PoissonSampler, RngState};

/// Largest league size for which the permutation tally is supported.
pub const MAX_PERMUTATION_TEAMS: usize = 10;
const MIN_EXPECTED_PER_CELL: f64 = 5.0;

/// Goal-scoring rates for a simulated season.
#[derive(Clone, Debug, PartialEq)]
pub enum GoalRates {
    /// Every `X_ijk` is Poisson(λ).
    Constant(f64),
    /// Team `i` scores Poisson(`rates[i]`) in every match, home or away.
    Scoring(Vec<f64>),
    /// Full table indexed `[(i * n + j) * 2 + k]`: goals of `i` against `j`,
    /// `k = 1` at home, `k = 0` away.
    Fixture(Vec<f64>),
}

enum Samplers {
    Constant(PoissonSampler),
    Scoring(Vec<PoissonSampler>),
    Fixture(Vec<PoissonSampler>),
}

impl Samplers {
    fn new(n: usize, rates: &GoalRates) -> Result<Self> {
        let build = |rs: &[f64]| rs.iter().map(|&r| PoissonSampler::new(r)).collect::<Result<Vec<_>>>();
        match rates {
            GoalRates::Constant(r) => Ok(Self::Constant(PoissonSampler::new(*r)?)),
            GoalRates::Scoring(rs) => {
                if rs.len() != n {
                    return Err(Error::LengthMismatch { left: rs.len(), right: n });
                }
                Ok(Self::Scoring(build(rs)?))
            }
            GoalRates::Fixture(rs) => {
                if rs.len() != 2 * n * n {
                    return Err(Error::LengthMismatch { left: rs.len(), right: 2 * n * n });
                }
                // diagonal entries are never used
                let mut samplers = Vec::with_capacity(rs.len());
                for (idx, &r) in rs.iter().enumerate() {
                    let (i, j) = ((idx / 2) / n, (idx / 2) % n);
                    samplers.push(if i == j { PoissonSampler::new(1.0)? } else { PoissonSampler::new(r)? });
                }
                Ok(Self::Fixture(samplers))
            }
        }
    }

    /// Goals of `team` against `opponent`.
    #[inline]
    fn draw(&self, n: usize, team: usize, opponent: usize, home: bool, rng: &mut RngState) -> u32 {
        match self {
            Self::Constant(s) => s.sample(rng),
            Self::Scoring(s) => s[team].sample(rng),
            Self::Fixture(s) => s[(team * n + opponent) * 2 + usize::from(home)].sample(rng),
        }
    }
}

fn team_names(n: usize) -> Vec<String> {
    let width = n.to_string().len().max(2);
    (1..=n).map(|i| format!("T{i:0width$}")).collect()
}

/// One double round robin with independent Poisson goals.
pub fn simulate_season(n: usize, rates: &GoalRates, rng: &mut RngState) -> Result<SeasonData> {
    if n < 2 {
        return Err(Error::Config(format!("need at least two teams, got {n}")));
    }
    let samplers = Samplers::new(n, rates)?;
    let mut matches = Vec::with_capacity(n * (n - 1));
    for h in 0..n {
        for a in 0..n {
            if h == a {
                continue;
            }
            let hg = samplers.draw(n, h, a, true, rng);
            let ag = samplers.draw(n, a, h, false, rng);
            matches.push(MatchRecord::new(TeamId(h), TeamId(a), hg, ag)?);
        }
    }
    SeasonData::new(team_names(n), matches)
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lehmer-code rank of a permutation of `0..n`, in `0..n!`.
pub fn permutation_rank(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller_after = perm[i + 1..].iter().filter(|&&x| x < perm[i]).count();
        rank = rank * (n - i) + smaller_after;
    }
    rank
}

/// Inverse of [`permutation_rank`].
pub fn permutation_unrank(mut rank: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for i in (0..n).rev() {
        let base = n - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<usize> = (0..n).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    DrawSweep,
    PermutationGof,
    Type1,
    Power,
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "draw-sweep" => Ok(Self::DrawSweep),
            "permutation-gof" => Ok(Self::PermutationGof),
            "type1" => Ok(Self::Type1),
            "power" => Ok(Self::Power),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub lambda_grid: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    /// Significance level for type1/power.
    pub alpha: f64,
    /// Multiplicative per-team factors on λ; empty means all ones.
    pub team_rate_factors: Vec<f64>,
    /// Power only: numbers of perturbed teams, one result row each.
    pub perturbed_counts: Vec<usize>,
    /// Power only: perturbed teams score at `base_rate + lambda_shift`.
    pub lambda_shift: f64,
    pub base_rate: f64,
    /// Power only: draw a fresh set of perturbed teams each replicate.
    /// When false, teams `0..k` are perturbed.
    pub reselect_each_replication: bool,
}

impl ExperimentConfig {
    pub const DEFAULT_REPLICATIONS: usize = 10_000;

    pub fn new(scenario: Scenario, seed: u64) -> Self {
        let lambda0 = crate::distributions::solve_lambda0();
        let (n, lambda_grid) = match scenario {
            Scenario::DrawSweep | Scenario::PermutationGof => (5, vec![0.5, lambda0, 1.5, 2.0, 2.5]),
            Scenario::Type1 => (20, vec![lambda0, 1.5, 2.5]),
            Scenario::Power => (20, Vec::new()),
        };
        Self {
            scenario,
            n,
            lambda_grid,
            replications: Self::DEFAULT_REPLICATIONS,
            seed,
            alpha: 0.05,
            team_rate_factors: Vec::new(),
            perturbed_counts: (1..=20).collect(),
            lambda_shift: 1.0,
            base_rate: 1.0,
            reselect_each_replication: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("need at least two teams, got {}", self.n)));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be positive".into()));
        }
        if self.scenario != Scenario::Power {
            if self.lambda_grid.is_empty() {
                return Err(Error::Config("empty lambda grid".into()));
            }
            if self.lambda_grid.iter().any(|&l| !(l > 0.0)) {
                return Err(Error::Config("lambda grid values must be positive".into()));
            }
        }
        if !self.team_rate_factors.is_empty() && self.team_rate_factors.len() != self.n {
            return Err(Error::Config(format!(
                "{} team rate factors for {} teams",
                self.team_rate_factors.len(),
                self.n
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    fn rates_for(&self, lambda: f64) -> GoalRates {
        if self.team_rate_factors.is_empty() {
            GoalRates::Constant(lambda)
        } else {
            GoalRates::Scoring(self.team_rate_factors.iter().map(|f| f * lambda).collect())
        }
    }
}

/// One row of an experiment: a λ value, or a perturbed-team count for power.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub param: f64,
    pub home_win: f64,
    pub draw: f64,
    pub away_win: f64,
    pub reject_rate: Option<f64>,
    pub p_value: Option<f64>,
    /// Monte-Carlo standard error of the row's headline quantity: the draw
    /// proportion for draw-sweep/permutation-gof, the rejection rate otherwise.
    pub se: f64,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub scenario: Scenario,
    pub rows: Vec<ExperimentRow>,
}

#[derive(Clone, Debug, Default)]
struct Tally {
    home: u64,
    draw: u64,
    away: u64,
    rejects: u64,
    cells: Vec<u64>,
}

impl Tally {
    fn with_cells(cells: usize) -> Self {
        Self {
            cells: vec![0; cells],
            ..Self::default()
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.home += other.home;
        self.draw += other.draw;
        self.away += other.away;
        self.rejects += other.rejects;
        for (a, b) in self.cells.iter_mut().zip(other.cells) {
            *a += b;
        }
        self
    }

    fn add_outcomes(&mut self, season: &SeasonData) {
        let (h, d, a) = season.outcome_counts();
        self.home += h as u64;
        self.draw += d as u64;
        self.away += a as u64;
    }

    fn row(&self, param: f64, reps: usize, seed: u64) -> ExperimentRow {
        let matches = (self.home + self.draw + self.away) as f64;
        let draw = self.draw as f64 / matches;
        ExperimentRow {
            param,
            home_win: self.home as f64 / matches,
            draw,
            away_win: self.away as f64 / matches,
            reject_rate: None,
            p_value: None,
            se: (draw * (1.0 - draw) / matches).sqrt(),
            reps,
            seed,
        }
    }
}

fn replicate_rng(seed: u64, param_index: usize, replicate: usize) -> RngState {
    RngState::new(seed, ((param_index as u64) << 40) | replicate as u64)
}

fn run_replicates<F>(config: &ExperimentConfig, param_index: usize, cells: usize, body: F) -> Result<Tally>
where
    F: Fn(&mut RngState, &mut Tally) -> Result<()> + Sync,
{
    (0..config.replications)
        .into_par_iter()
        .try_fold(
            || Tally::with_cells(cells),
            |mut acc, r| {
                let mut rng = replicate_rng(config.seed, param_index, r);
                body(&mut rng, &mut acc)?;
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(|| Tally::with_cells(cells), |a, b| Ok(a.merge(b)))
}

fn expect_scenario(config: &ExperimentConfig, scenario: Scenario) -> Result<()> {
    if config.scenario == scenario {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "configuration is for {:?}, not {:?}",
            config.scenario, scenario
        )))
    }
}

/// Outcome proportions per λ.
pub fn draw_sweep(config: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_scenario(config, Scenario::DrawSweep)?;
    config.validate()?;
    let rows = config
        .lambda_grid
        .iter()
        .enumerate()
        .map(|(pi, &lambda)| {
            let rates = config.rates_for(lambda);
            let tally = run_replicates(config, pi, 0, |rng, acc| {
                let season = simulate_season(config.n, &rates, rng)?;
                acc.add_outcomes(&season);
                Ok(())
            })?;
            Ok(tally.row(lambda, config.replications, config.seed))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        scenario: Scenario::DrawSweep,
        rows,
    })
}

/// Final-standing permutation frequencies against the uniform law.
pub fn permutation_gof(config: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_scenario(config, Scenario::PermutationGof)?;
    config.validate()?;
    if config.n > MAX_PERMUTATION_TEAMS {
        return Err(Error::Config(format!(
            "permutation tally supports at most {MAX_PERMUTATION_TEAMS} teams, got {}",
            config.n
        )));
    }
    let cells = factorial(config.n);
    let expected = config.replications as f64 / cells as f64;
    if expected < MIN_EXPECTED_PER_CELL {
        return Err(Error::Config(format!(
            "{} replications over {cells} permutations leaves {expected:.2} expected per cell; need at least {MIN_EXPECTED_PER_CELL}",
            config.replications
        )));
    }
    let uniform = vec![1.0 / cells as f64; cells];
    let rows = config
        .lambda_grid
        .iter()
        .enumerate()
        .map(|(pi, &lambda)| {
            let rates = config.rates_for(lambda);
            let tally = run_replicates(config, pi, cells, |rng, acc| {
                let season = simulate_season(config.n, &rates, rng)?;
                acc.add_outcomes(&season);
                let order: Vec<usize> = standings(&season, rng).order().into_iter().map(|t| t.0).collect();
                acc.cells[permutation_rank(&order)] += 1;
                Ok(())
            })?;
            let gof = multinomial_gof(&tally.cells, &uniform)?;
            let mut row = tally.row(lambda, config.replications, config.seed);
            row.p_value = Some(gof.p_value);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        scenario: Scenario::PermutationGof,
        rows,
    })
}

fn rejection_row(tally: &Tally, param: f64, config: &ExperimentConfig) -> ExperimentRow {
    let mut row = tally.row(param, config.replications, config.seed);
    let rate = tally.rejects as f64 / config.replications as f64;
    row.reject_rate = Some(rate);
    row.se = (rate * (1.0 - rate) / config.replications as f64).sqrt();
    row
}

/// Empirical size of the balance test per λ.
pub fn type1_study(config: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_scenario(config, Scenario::Type1)?;
    config.validate()?;
    let rows = config
        .lambda_grid
        .iter()
        .enumerate()
        .map(|(pi, &lambda)| {
            let rates = config.rates_for(lambda);
            let tally = run_replicates(config, pi, 0, |rng, acc| {
                let season = simulate_season(config.n, &rates, rng)?;
                acc.add_outcomes(&season);
                if balance_test(&season, config.alpha)?.reject {
                    acc.rejects += 1;
                }
                Ok(())
            })?;
            Ok(rejection_row(&tally, lambda, config))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        scenario: Scenario::Type1,
        rows,
    })
}

/// Power of the balance test when `k` teams score at `base + shift`.
pub fn power_study(config: &ExperimentConfig) -> Result<ExperimentResult> {
    expect_scenario(config, Scenario::Power)?;
    config.validate()?;
    if config.perturbed_counts.is_empty() {
        return Err(Error::Config("no perturbed-team counts given".into()));
    }
    if let Some(&k) = config.perturbed_counts.iter().find(|&&k| k > config.n) {
        return Err(Error::Config(format!("cannot perturb {k} of {} teams", config.n)));
    }
    if !(config.lambda_shift > 0.0) || !(config.base_rate > 0.0) {
        return Err(Error::Config("base rate and shift must be positive".into()));
    }
    let n = config.n;
    let rows = config
        .perturbed_counts
        .iter()
        .enumerate()
        .map(|(pi, &k)| {
            let tally = run_replicates(config, pi, 0, |rng, acc| {
                let mut rates = vec![config.base_rate; n];
                if config.reselect_each_replication {
                    for i in index::sample(rng, n, k) {
                        rates[i] += config.lambda_shift;
                    }
                } else {
                    for r in &mut rates[..k] {
                        *r += config.lambda_shift;
                    }
                }
                let season = simulate_season(n, &GoalRates::Scoring(rates), rng)?;
                acc.add_outcomes(&season);
                if balance_test(&season, config.alpha)?.reject {
                    acc.rejects += 1;
                }
                Ok(())
            })?;
            Ok(rejection_row(&tally, k as f64, config))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        scenario: Scenario::Power,
        rows,
    })
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    match config.scenario {
        Scenario::DrawSweep => draw_sweep(config),
        Scenario::PermutationGof => permutation_gof(config),
        Scenario::Type1 => type1_study(config),
        Scenario::Power => power_study(config),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NullDraw {
    /// `(2N - 1)·GBI`
    pub gbi_statistic: f64,
    pub lrt_statistic: f64,
}

/// Balance-test statistics of `reps` iid-Poisson(λ) seasons, in replicate order.
pub fn null_statistics(n: usize, lambda: f64, reps: usize, seed: u64) -> Result<Vec<NullDraw>> {
    let rates = GoalRates::Constant(lambda);
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, 0, r);
            let season = simulate_season(n, &rates, &mut rng)?;
            Ok(NullDraw {
                gbi_statistic: balance_test(&season, 0.05)?.statistic,
                lrt_statistic: lrt_statistic(&season)?,
            })
        })
        .collect()
}

/// Frequencies of `(S_12, S_21)` over `pairs` simulated home-and-away
/// pairings of two Poisson(λ) teams.
pub fn simulate_pair_points(lambda: f64, pairs: usize, seed: u64) -> Result<BTreeMap<(u32, u32), u64>> {
    let sampler = PoissonSampler::new(lambda)?;
    let chunk = 10_000;
    let chunks = pairs.div_ceil(chunk);
    let merged = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = replicate_rng(seed, 0, c);
            let mut counts = BTreeMap::new();
            for _ in 0..chunk.min(pairs - c * chunk) {
                let first = MatchRecord {
                    home: TeamId(0),
                    away: TeamId(1),
                    home_goals: sampler.sample(&mut rng),
                    away_goals: sampler.sample(&mut rng),
                };
                let second = MatchRecord {
                    home: TeamId(1),
                    away: TeamId(0),
                    home_goals: sampler.sample(&mut rng),
                    away_goals: sampler.sample(&mut rng),
                };
                let (a1, b1) = crate::league::score_match(&first);
                let (b2, a2) = crate::league::score_match(&second);
                *counts.entry((a1 + a2, b1 + b2)).or_insert(0u64) += 1;
            }
            counts
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(merged)
}
