//! Double round-robin seasons, team aggregates and final standings.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::RngState;

/// Index of a team within its season's roster.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TeamId(pub usize);

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// One played fixture with full-time goals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MatchRecord {
    pub home: TeamId,
    pub away: TeamId,
    pub home_goals: u32,
    pub away_goals: u32,
}

impl MatchRecord {
    pub fn new(home: TeamId, away: TeamId, home_goals: u32, away_goals: u32) -> Result<Self> {
        if home == away {
            return Err(Error::InvalidSeason(format!("team {home} cannot play itself")));
        }
        Ok(Self {
            home,
            away,
            home_goals,
            away_goals,
        })
    }

    pub fn is_draw(&self) -> bool {
        self.home_goals == self.away_goals
    }
}

/// Points for home and away: 3 for a win, 1 for a draw, 0 for a loss.
pub fn score_match(m: &MatchRecord) -> (u32, u32) {
    use std::cmp::Ordering::*;
    match m.home_goals.cmp(&m.away_goals) {
        Greater => (3, 0),
        Equal => (1, 1),
        Less => (0, 3),
    }
}

/// A complete double round robin: every ordered pair of distinct teams
/// meets exactly once, `N = n(n-1)` matches.
///
/// Matches are stored sorted by `(home, away)`, so two seasons built from
/// the same fixtures in any order compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeasonData {
    teams: Vec<String>,
    matches: Vec<MatchRecord>,
}

impl SeasonData {
    pub fn new(teams: Vec<String>, mut matches: Vec<MatchRecord>) -> Result<Self> {
        let n = teams.len();
        if n < 2 {
            return Err(Error::InvalidSeason(format!("need at least two teams, got {n}")));
        }
        let mut seen_names = HashMap::with_capacity(n);
        for (i, name) in teams.iter().enumerate() {
            if name.trim().is_empty() {
                return Err(Error::InvalidSeason(format!("team {i} has an empty name")));
            }
            if let Some(prev) = seen_names.insert(name.as_str(), i) {
                return Err(Error::InvalidSeason(format!(
                    "team name {name:?} used for both #{prev} and #{i}"
                )));
            }
        }

        let mut played = vec![0u32; n * n];
        for m in &matches {
            if m.home.0 >= n || m.away.0 >= n {
                return Err(Error::InvalidSeason(format!(
                    "match {} v {} refers to a team outside the roster of {n}",
                    m.home, m.away
                )));
            }
            if m.home == m.away {
                return Err(Error::InvalidSeason(format!("team {} plays itself", m.home)));
            }
            played[m.home.0 * n + m.away.0] += 1;
        }
        let mut missing = Vec::new();
        let mut duplicated = Vec::new();
        for h in 0..n {
            for a in 0..n {
                if h == a {
                    continue;
                }
                match played[h * n + a] {
                    1 => {}
                    0 => missing.push((teams[h].clone(), teams[a].clone())),
                    _ => duplicated.push((teams[h].clone(), teams[a].clone())),
                }
            }
        }
        if !missing.is_empty() || !duplicated.is_empty() {
            return Err(Error::IncompleteSeason {
                missing,
                duplicated,
            });
        }

        matches.sort_by_key(|m| (m.home, m.away));
        Ok(Self { teams, matches })
    }

    /// Builds a season from `(home, away, home_goals, away_goals)` rows
    /// keyed by team name. The roster is the sorted set of names.
    pub fn from_named_results<I, S>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, u32, u32)>,
        S: AsRef<str>,
    {
        let rows: Vec<(String, String, u32, u32)> = rows
            .into_iter()
            .map(|(h, a, hg, ag)| (h.as_ref().trim().to_owned(), a.as_ref().trim().to_owned(), hg, ag))
            .collect();
        let mut teams: Vec<String> = rows
            .iter()
            .flat_map(|(h, a, _, _)| [h.clone(), a.clone()])
            .collect();
        teams.sort();
        teams.dedup();
        let index: HashMap<&str, usize> =
            teams.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let matches = rows
            .iter()
            .map(|(h, a, hg, ag)| MatchRecord::new(TeamId(index[h.as_str()]), TeamId(index[a.as_str()]), *hg, *ag))
            .collect::<Result<Vec<_>>>()?;
        Self::new(teams, matches)
    }

    pub fn teams(&self) -> &[String] {
        &self.teams
    }

    pub fn team_name(&self, id: TeamId) -> &str {
        &self.teams[id.0]
    }

    pub fn matches(&self) -> &[MatchRecord] {
        &self.matches
    }

    /// Number of teams `n`.
    pub fn team_count(&self) -> usize {
        self.teams.len()
    }

    /// Number of matches `N = n(n-1)`.
    pub fn match_count(&self) -> usize {
        self.matches.len()
    }

    /// The fixture with `home` hosting `away`.
    pub fn fixture(&self, home: TeamId, away: TeamId) -> Option<&MatchRecord> {
        let n = self.team_count();
        if home == away || home.0 >= n || away.0 >= n {
            return None;
        }
        let col = if away.0 < home.0 { away.0 } else { away.0 - 1 };
        self.matches.get(home.0 * (n - 1) + col)
    }

    /// All `2N` per-team-per-match goal counts.
    pub fn goal_counts(&self) -> impl Iterator<Item = u32> + Clone + '_ {
        self.matches
            .iter()
            .flat_map(|m| [m.home_goals, m.away_goals])
    }

    /// `(home wins, draws, away wins)`.
    pub fn outcome_counts(&self) -> (usize, usize, usize) {
        self.matches.iter().fold((0, 0, 0), |(h, d, a), m| match score_match(m) {
            (3, _) => (h + 1, d, a),
            (1, _) => (h, d + 1, a),
            _ => (h, d, a + 1),
        })
    }

    /// Points `a` and `b` take off each other across both mutual fixtures.
    pub fn pair_points(&self, a: TeamId, b: TeamId) -> Option<(u32, u32)> {
        let first = self.fixture(a, b)?;
        let second = self.fixture(b, a)?;
        let (a1, b1) = score_match(first);
        let (b2, a2) = score_match(second);
        Some((a1 + a2, b1 + b2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TeamAggregate {
    pub team: TeamId,
    pub points: u32,
    pub goals_scored: u32,
    pub goals_conceded: u32,
    pub goal_difference: i64,
}

/// Season totals per team, indexed by `TeamId`.
pub fn aggregate(season: &SeasonData) -> Vec<TeamAggregate> {
    let mut out: Vec<TeamAggregate> = (0..season.team_count())
        .map(|i| TeamAggregate {
            team: TeamId(i),
            points: 0,
            goals_scored: 0,
            goals_conceded: 0,
            goal_difference: 0,
        })
        .collect();
    for m in season.matches() {
        let (hp, ap) = score_match(m);
        let home = &mut out[m.home.0];
        home.points += hp;
        home.goals_scored += m.home_goals;
        home.goals_conceded += m.away_goals;
        let away = &mut out[m.away.0];
        away.points += ap;
        away.goals_scored += m.away_goals;
        away.goals_conceded += m.home_goals;
    }
    for t in &mut out {
        t.goal_difference = i64::from(t.goals_scored) - i64::from(t.goals_conceded);
    }
    out
}

/// `P_i = S_i / Σ S`.
pub fn point_shares(aggregates: &[TeamAggregate]) -> Result<Vec<f64>> {
    let total: u64 = aggregates.iter().map(|t| u64::from(t.points)).sum();
    if total == 0 {
        return Err(Error::DegenerateSeason(
            "no points awarded; a complete season always awards at least two per match".into(),
        ));
    }
    let total = total as f64;
    Ok(aggregates.iter().map(|t| f64::from(t.points) / total).collect())
}

/// Criterion that separated two adjacent teams in the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    Points,
    GoalDifference,
    GoalsScored,
    HeadToHead,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Standing {
    pub rank: usize,
    #[serde(flatten)]
    pub aggregate: TeamAggregate,
    /// Points within the group of teams level on points, GD and GS.
    pub head_to_head: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StandingsTable {
    pub entries: Vec<Standing>,
    /// `tie_resolution_log[r]` separates ranks `r + 1` and `r + 2`.
    pub tie_resolution_log: Vec<TieBreak>,
}

impl StandingsTable {
    /// Team ids from first to last.
    pub fn order(&self) -> Vec<TeamId> {
        self.entries.iter().map(|s| s.aggregate.team).collect()
    }
}

type SortKey = (u32, i64, u32, u32);

fn sort_key(s: &Standing) -> SortKey {
    let a = &s.aggregate;
    (a.points, a.goal_difference, a.goals_scored, s.head_to_head)
}

/// Final table ordered by points, goal difference, goals scored, then
/// head-to-head points among the teams still level. Anything left tied
/// is ordered uniformly at random from `rng`.
pub fn standings(season: &SeasonData, rng: &mut RngState) -> StandingsTable {
    let aggregates = aggregate(season);

    let mut groups: HashMap<(u32, i64, u32), Vec<TeamId>> = HashMap::new();
    for a in &aggregates {
        groups
            .entry((a.points, a.goal_difference, a.goals_scored))
            .or_default()
            .push(a.team);
    }
    let mut head_to_head = vec![0u32; aggregates.len()];
    for members in groups.values().filter(|g| g.len() > 1) {
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                let (pa, pb) = season.pair_points(a, b).expect("complete season");
                head_to_head[a.0] += pa;
                head_to_head[b.0] += pb;
            }
        }
    }

    let mut entries: Vec<Standing> = aggregates
        .iter()
        .map(|&aggregate| Standing {
            rank: 0,
            aggregate,
            head_to_head: head_to_head[aggregate.team.0],
        })
        .collect();
    entries.shuffle(rng);
    // stable: the shuffle decides among exact ties
    entries.sort_by_key(|e| std::cmp::Reverse(sort_key(e)));
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }

    let tie_resolution_log = entries
        .windows(2)
        .map(|w| {
            let (x, y) = (&w[0], &w[1]);
            if x.aggregate.points != y.aggregate.points {
                TieBreak::Points
            } else if x.aggregate.goal_difference != y.aggregate.goal_difference {
                TieBreak::GoalDifference
            } else if x.aggregate.goals_scored != y.aggregate.goals_scored {
                TieBreak::GoalsScored
            } else if x.head_to_head != y.head_to_head {
                TieBreak::HeadToHead
            } else {
                TieBreak::Random
            }
        })
        .collect();

    StandingsTable {
        entries,
        tie_resolution_log,
    }
}
