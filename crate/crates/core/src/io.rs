//! CSV ingestion and emission.
//!
//! Match files follow the football-data.co.uk layout (`HomeTeam`,
//! `AwayTeam`, `FTHG`, `FTAG`; other columns ignored). A [`ColumnMapping`]
//! renames these for files using another convention.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices::{c6_index, gbi_index, hicb_index};
use crate::league::{aggregate, point_shares, SeasonData};
use crate::montecarlo::ExperimentResult;
use crate::panel::{PanelDataset, PanelRow};

/// Header names for the four required match columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub home_team: String,
    pub away_team: String,
    pub home_goals: String,
    pub away_goals: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            home_team: "HomeTeam".into(),
            away_team: "AwayTeam".into(),
            home_goals: "FTHG".into(),
            away_goals: "FTAG".into(),
        }
    }
}

impl ColumnMapping {
    /// Parses overrides of the form `HomeTeam=Home,FTHG=HG`. Keys are the
    /// default header names.
    pub fn parse_overrides(spec: &str) -> Result<Self> {
        let mut m = Self::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("mapping entry {part:?} is not KEY=COLUMN")))?;
            let value = value.trim().to_owned();
            match key.trim() {
                "HomeTeam" => m.home_team = value,
                "AwayTeam" => m.away_team = value,
                "FTHG" => m.home_goals = value,
                "FTAG" => m.away_goals = value,
                other => return Err(Error::Config(format!("unknown mapping key {other:?}"))),
            }
        }
        Ok(m)
    }
}

/// One parsed match line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchCsvRow {
    pub date: Option<String>,
    pub home_team: String,
    pub away_team: String,
    pub home_goals: u32,
    pub away_goals: u32,
}

/// A season file tagged with its league and season labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelledSeason {
    pub league: String,
    pub season: String,
    pub data: SeasonData,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_owned(),
        source,
    }
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Parse {
            path: path.to_owned(),
            row: 1,
            detail: format!("missing column {name:?}"),
        })
}

/// Reads the match lines of a CSV file. Row numbers in errors count the
/// header as row 1. Fully blank lines are skipped.
pub fn read_match_rows(path: &Path, mapping: &ColumnMapping) -> Result<Vec<MatchCsvRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(csv_err(path))?;
    let headers = reader.headers().map_err(csv_err(path))?.clone();
    let date = headers.iter().position(|h| h.trim() == "Date");
    let ht = column(&headers, &mapping.home_team, path)?;
    let at = column(&headers, &mapping.away_team, path)?;
    let hg = column(&headers, &mapping.home_goals, path)?;
    let ag = column(&headers, &mapping.away_goals, path)?;

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(csv_err(path))?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let parse_err = |detail: String| Error::Parse {
            path: path.to_owned(),
            row,
            detail,
        };
        let text = |idx: usize, name: &str| -> Result<String> {
            let v = record.get(idx).unwrap_or("").trim();
            if v.is_empty() {
                Err(parse_err(format!("empty {name}")))
            } else {
                Ok(v.to_owned())
            }
        };
        let goals = |idx: usize, name: &str| -> Result<u32> {
            let v = text(idx, name)?;
            v.parse::<u32>()
                .map_err(|_| parse_err(format!("{name} {v:?} is not a non-negative integer")))
        };
        rows.push(MatchCsvRow {
            date: date.and_then(|d| record.get(d)).map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()),
            home_team: text(ht, &mapping.home_team)?,
            away_team: text(at, &mapping.away_team)?,
            home_goals: goals(hg, &mapping.home_goals)?,
            away_goals: goals(ag, &mapping.away_goals)?,
        });
    }
    Ok(rows)
}

fn roster_key(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Rejects rosters in which one club appears under spellings that differ
/// only in case or spacing.
fn check_roster(rows: &[MatchCsvRow], path: &Path) -> Result<()> {
    let mut seen: HashMap<String, &str> = HashMap::new();
    for r in rows {
        for name in [r.home_team.as_str(), r.away_team.as_str()] {
            let prev = *seen.entry(roster_key(name)).or_insert(name);
            if prev != name {
                return Err(Error::InvalidSeason(format!(
                    "{}: inconsistent roster, {prev:?} and {name:?} look like the same team",
                    path.display()
                )));
            }
        }
    }
    Ok(())
}

pub fn load_season(path: &Path, league: &str, season: &str, mapping: &ColumnMapping) -> Result<LabelledSeason> {
    let rows = read_match_rows(path, mapping)?;
    if rows.is_empty() {
        return Err(Error::InvalidSeason(format!("{}: no matches", path.display())));
    }
    check_roster(&rows, path)?;
    let data = SeasonData::from_named_results(
        rows.iter()
            .map(|r| (r.home_team.as_str(), r.away_team.as_str(), r.home_goals, r.away_goals)),
    )?;
    Ok(LabelledSeason {
        league: league.to_owned(),
        season: season.to_owned(),
        data,
    })
}

/// Writes a season with the default football-data headers.
pub fn write_season_csv(season: &SeasonData, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["HomeTeam", "AwayTeam", "FTHG", "FTAG"])
        .map_err(csv_err(path))?;
    for m in season.matches() {
        w.write_record([
            season.team_name(m.home),
            season.team_name(m.away),
            &m.home_goals.to_string(),
            &m.away_goals.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevenueCsvRow {
    pub league: String,
    pub season: String,
    pub revenue_beur: f64,
}

pub fn read_revenue(path: &Path) -> Result<Vec<RevenueCsvRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err(path))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<RevenueCsvRow>().enumerate() {
        let row = i + 2;
        let r = rec.map_err(|e| Error::Parse {
            path: path.to_owned(),
            row,
            detail: e.to_string(),
        })?;
        if !(r.revenue_beur.is_finite() && r.revenue_beur > 0.0) {
            return Err(Error::Parse {
                path: path.to_owned(),
                row,
                detail: format!("revenue {} is not positive", r.revenue_beur),
            });
        }
        season_start(&r.season).ok_or_else(|| Error::Parse {
            path: path.to_owned(),
            row,
            detail: format!("season {:?} is not YYYY-YY", r.season),
        })?;
        rows.push(r);
    }
    Ok(rows)
}

/// Start year of a `YYYY-YY` label whose second half is the following year.
pub fn season_start(label: &str) -> Option<u32> {
    let (a, b) = label.split_once('-')?;
    if a.len() != 4 || b.len() != 2 {
        return None;
    }
    let start: u32 = a.parse().ok()?;
    let end: u32 = b.parse().ok()?;
    ((start + 1) % 100 == end).then_some(start)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Measure {
    C6,
    Hicb,
    Gbi,
}

impl Measure {
    pub fn compute(self, season: &SeasonData) -> Result<f64> {
        match self {
            Measure::Gbi => gbi_index(season),
            Measure::C6 => c6_index(&point_shares(&aggregate(season))?),
            Measure::Hicb => hicb_index(&point_shares(&aggregate(season))?),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Measure::C6 => "C6",
            Measure::Hicb => "HICB",
            Measure::Gbi => "GBI",
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c6" => Ok(Measure::C6),
            "hicb" => Ok(Measure::Hicb),
            "gbi" => Ok(Measure::Gbi),
            _ => Err(Error::Config(format!("unknown measure {s:?}; expected c6, hicb or gbi"))),
        }
    }
}

/// Builds a panel from `<matches_dir>/<league>/<season>.csv` match files
/// and a revenue table. Every revenue row needs its season file; each
/// league's seasons must be consecutive and shared by all leagues.
pub fn load_panel(
    matches_dir: &Path,
    revenue_csv: &Path,
    measure: Measure,
    mapping: &ColumnMapping,
) -> Result<PanelDataset> {
    let revenue = read_revenue(revenue_csv)?;
    let mut by_league: BTreeMap<&str, BTreeMap<u32, &RevenueCsvRow>> = BTreeMap::new();
    for r in &revenue {
        let start = season_start(&r.season).expect("validated on read");
        if by_league.entry(&r.league).or_default().insert(start, r).is_some() {
            return Err(Error::InvalidPanel(format!("duplicate revenue row ({}, {})", r.league, r.season)));
        }
    }
    let all_starts: Vec<u32> = by_league
        .values()
        .flat_map(|m| m.keys().copied())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let (Some(&first), Some(&last)) = (all_starts.first(), all_starts.last()) else {
        return Err(Error::InvalidPanel(format!("{}: no revenue rows", revenue_csv.display())));
    };

    let label = |y: u32| format!("{y}-{:02}", (y + 1) % 100);
    let mut missing = Vec::new();
    for (league, seasons) in &by_league {
        for y in first..=last {
            if !seasons.contains_key(&y) {
                missing.push((league.to_string(), label(y)));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::UnbalancedPanel { missing });
    }

    let mut rows = Vec::new();
    let mut absent = Vec::new();
    for (league, seasons) in &by_league {
        for (&y, r) in seasons {
            let path: PathBuf = matches_dir.join(league).join(format!("{}.csv", r.season));
            if !path.is_file() {
                absent.push((league.to_string(), r.season.clone()));
                continue;
            }
            let s = load_season(&path, league, &r.season, mapping)?;
            rows.push(PanelRow {
                league: league.to_string(),
                season: r.season.clone(),
                t: (y - first + 1) as usize,
                revenue: r.revenue_beur,
                cb: measure.compute(&s.data)?,
            });
        }
    }
    if !absent.is_empty() {
        return Err(Error::UnbalancedPanel { missing: absent });
    }
    PanelDataset::new(rows)
}

/// Writes an experiment as CSV with header
/// `param,home_win,draw,away_win,reject_rate,p_value,se,reps,seed`.
pub fn write_experiment_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |source| Error::Csv {
        path: PathBuf::from("<output>"),
        source,
    };
    for row in &result.rows {
        w.serialize(row).map_err(io_err)?;
    }
    if result.rows.is_empty() {
        w.write_record(["param", "home_win", "draw", "away_win", "reject_rate", "p_value", "se", "reps", "seed"])
            .map_err(io_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<output>"),
        source,
    })
}

/// Reads the whole of a small text file, mapping failures to [`Error::Io`].
pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}
