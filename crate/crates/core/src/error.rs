use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("numerical routine {op} did not converge after {iterations} iterations")]
    NoConvergence { op: &'static str, iterations: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid season: {0}")]
    InvalidSeason(String),

    /// The fixture list is not a complete double round robin.
    #[error("incomplete season: {}", describe_pairs(missing, duplicated))]
    IncompleteSeason {
        missing: Vec<(String, String)>,
        duplicated: Vec<(String, String)>,
    },

    #[error("degenerate season: {0}")]
    DegenerateSeason(String),

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error("unbalanced panel, missing cells: {}", .missing.iter().map(|(l, s)| format!("({l}, {s})")).collect::<Vec<_>>().join(", "))]
    UnbalancedPanel { missing: Vec<(String, String)> },

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("singular design: {0}")]
    Singular(String),

    #[error("fits come from different datasets")]
    MismatchedFits,

    #[error("{path}: row {row}: {detail}")]
    Parse {
        path: PathBuf,
        row: usize,
        detail: String,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn describe_pairs(missing: &[(String, String)], duplicated: &[(String, String)]) -> String {
    let fmt = |pairs: &[(String, String)]| {
        pairs
            .iter()
            .map(|(h, a)| format!("{h} v {a}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("missing fixtures [{}]", fmt(missing)));
    }
    if !duplicated.is_empty() {
        parts.push(format!("duplicated fixtures [{}]", fmt(duplicated)));
    }
    parts.join("; ")
}

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
