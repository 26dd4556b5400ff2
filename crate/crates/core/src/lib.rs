//! Competitive balance of round-robin football leagues under a Poisson
//! scoring model.
//!
//! * [`specfun`]: Bessel functions, χ² tails, goodness-of-fit and the seeded RNG.
//! * [`distributions`]: draw curve, λ₀, Skellam and pairwise-points laws.
//! * [`league`]: seasons, scoring and standings.
//! * [`indices`]: C6, HICB, the goal-based index and its χ² test.
//! * [`montecarlo`]: simulated leagues and the calibration experiments.
//! * [`panel`]: fixed- and random-effects revenue panels, Hausman test.
//! * [`io`]: CSV ingestion and emission.

pub mod distributions;
pub mod error;
pub mod indices;
pub mod io;
pub mod league;
pub mod montecarlo;
pub mod panel;
pub mod specfun;

pub use error::{Error, Result};
pub use indices::{balance_report, balance_test, BalanceReport, BalanceTest};
pub use io::{ColumnMapping, LabelledSeason, Measure};
pub use league::{MatchRecord, SeasonData, StandingsTable, TeamId};
pub use montecarlo::{ExperimentConfig, ExperimentResult, ExperimentRow, GoalRates, Scenario};
pub use panel::{HausmanTest, ModelKind, PanelDataset, PanelFit, PanelRow};
pub use specfun::RngState;
