//! `balance-lab`: competitive-balance reports, simulations and revenue panels.

mod render;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use balance_core::distributions::{draw_curve, draw_probability, solve_lambda0};
use balance_core::io::{load_panel, load_season, write_experiment_csv};
use balance_core::montecarlo::run;
use balance_core::panel::{fit_fixed_effects, fit_random_effects, hausman_test};
use balance_core::{balance_report, ColumnMapping, ExperimentConfig, Measure, Scenario};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "balance-lab", version, about = "Goal-based competitive balance for round-robin leagues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Balance indices and the perfect-balance test for one season file.
    Report {
        season: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Column renames, e.g. `HomeTeam=Home,FTHG=HG`.
        #[arg(long)]
        mapping: Option<String>,
        #[arg(long, default_value = "")]
        league: String,
        #[arg(long, default_value = "")]
        season_label: String,
    },
    /// The goal rate at which win, draw and loss are equally likely.
    Lambda0,
    /// Draw probability on an even grid of goal rates, as CSV.
    Drawcurve {
        #[arg(long, default_value_t = 0.05)]
        from: f64,
        #[arg(long, default_value_t = 4.0)]
        to: f64,
        #[arg(long, default_value_t = 80)]
        steps: usize,
    },
    /// Run a Monte-Carlo experiment and write its rows as CSV.
    Simulate {
        /// draw-sweep, permutation-gof, type1 or power.
        scenario: Scenario,
        #[arg(long)]
        n: Option<usize>,
        /// Goal rates, comma separated.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, env = "BALANCE_LAB_SEED", default_value_t = 2021)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Power: numbers of perturbed teams, comma separated.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        /// Power: rate added for perturbed teams.
        #[arg(long, default_value_t = 1.0)]
        shift: f64,
        /// Power: rate of unperturbed teams.
        #[arg(long, default_value_t = 1.0)]
        base: f64,
        /// Power: perturb teams `0..k` instead of a fresh random set each replicate.
        #[arg(long)]
        fixed_selection: bool,
        /// Per-team multiplicative rate factors, comma separated.
        #[arg(long, value_delimiter = ',')]
        team_factors: Vec<f64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fixed- and random-effects revenue panels with the Hausman test.
    Panel {
        #[arg(long, value_enum, default_value_t = MeasureArg::Gbi)]
        measure: MeasureArg,
        /// Directory holding `<league>/<season>.csv` match files.
        #[arg(long)]
        matches: PathBuf,
        /// CSV with header `league,season,revenue_beur`.
        #[arg(long)]
        revenue: PathBuf,
        #[arg(long, value_enum, default_value_t = Model::Both)]
        model: Model,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        mapping: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeasureArg {
    C6,
    Hicb,
    Gbi,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::C6 => Measure::C6,
            MeasureArg::Hicb => Measure::Hicb,
            MeasureArg::Gbi => Measure::Gbi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    Fe,
    Re,
    Both,
}

fn mapping(spec: Option<&str>) -> Result<ColumnMapping> {
    Ok(match spec {
        Some(s) => ColumnMapping::parse_overrides(s)?,
        None => ColumnMapping::default(),
    })
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Report {
            season,
            format,
            mapping: m,
            league,
            season_label,
        } => {
            let loaded = load_season(&season, &league, &season_label, &mapping(m.as_deref())?)?;
            let report = balance_report(&loaded.data)?;
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
                Format::Table => render::report_table(&report, out)?,
            }
        }
        Command::Lambda0 => {
            let l0 = solve_lambda0();
            writeln!(out, "lambda0 {l0:.10}")?;
            writeln!(out, "d_lambda0 {:.10}", draw_probability(l0)?)?;
        }
        Command::Drawcurve { from, to, steps } => {
            writeln!(out, "lambda,draw_prob,win_prob")?;
            for p in draw_curve(from, to, steps)? {
                writeln!(out, "{},{},{}", p.lambda, p.draw_prob, p.win_prob)?;
            }
        }
        Command::Simulate {
            scenario,
            n,
            lambda,
            reps,
            seed,
            alpha,
            k,
            shift,
            base,
            fixed_selection,
            team_factors,
            output,
        } => {
            let mut config = ExperimentConfig::new(scenario, seed);
            if let Some(n) = n {
                config.n = n;
                if scenario == Scenario::Power && k.is_empty() {
                    config.perturbed_counts = (1..=n).collect();
                }
            }
            if !lambda.is_empty() {
                config.lambda_grid = lambda;
            }
            if let Some(reps) = reps {
                config.replications = reps;
            }
            if !k.is_empty() {
                config.perturbed_counts = k;
            }
            config.alpha = alpha;
            config.lambda_shift = shift;
            config.base_rate = base;
            config.reselect_each_replication = !fixed_selection;
            config.team_rate_factors = team_factors;
            let result = run(&config)?;
            match output {
                Some(path) => {
                    let file = File::create(&path).map_err(|e| anyhow!("creating {}: {e}", path.display()))?;
                    write_experiment_csv(&result, BufWriter::new(file))?;
                }
                None => write_experiment_csv(&result, &mut *out)?,
            }
        }
        Command::Panel {
            measure,
            matches,
            revenue,
            model,
            format,
            mapping: m,
        } => {
            let measure = Measure::from(measure);
            let data = load_panel(&matches, &revenue, measure, &mapping(m.as_deref())?)?;
            let fe = matches!(model, Model::Fe | Model::Both).then(|| fit_fixed_effects(&data)).transpose()?;
            let re = matches!(model, Model::Re | Model::Both).then(|| fit_random_effects(&data)).transpose()?;
            let hausman = match (&fe, &re) {
                (Some(f), Some(r)) => Some(hausman_test(f, r)?),
                _ => None,
            };
            match format {
                Format::Json => render::panel_json(measure, fe.as_ref(), re.as_ref(), hausman.as_ref(), out)?,
                Format::Table => render::panel_table(measure, &data, fe.as_ref(), re.as_ref(), hausman.as_ref(), out)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = execute(cli.command, &mut out).and_then(|()| Ok(out.flush()?));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
