//! Command-line front end: data ingestion, fitting, model selection,
//! simulation studies, and metric reporting.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 all fits failed.

mod commands;
mod ingest;

pub use commands::{cmd_eval, cmd_fit, cmd_select, cmd_simulate, cmd_study, RunConfig};
pub use ingest::{column_preset, ingest_csv, ColumnPreset};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

#[derive(Parser)]
#[command(
    name = "skewcwm",
    about = "Cluster-weighted models with skewed component distributions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Input CSV with a header row
    #[arg(long)]
    input: Option<String>,
    /// Response column names (comma separated)
    #[arg(long, value_delimiter = ',')]
    responses: Vec<String>,
    /// Covariate column names (comma separated)
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    /// Ground-truth label column, used for ARI reporting
    #[arg(long)]
    labels: Option<String>,
    /// Models: family pairs like GH-ST, FMR-VG, or all / cwm-all / fmr-all
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
    /// Smallest number of groups to fit
    #[arg(long, default_value_t = 1)]
    gmin: usize,
    /// Largest number of groups to fit
    #[arg(long, default_value_t = 3)]
    gmax: usize,
    /// Random seed; every command is deterministic given the seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// EM relative log-likelihood tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// EM iteration cap
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: String,
    /// Named preset: a generator (simulate/study) or a column mapping
    /// (fit/select/eval): ais, pulpfiber
    #[arg(long)]
    preset: Option<String>,
    /// Replicates for study commands
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    /// Observations per simulated dataset
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Z-score all columns before fitting
    #[arg(long, default_value_t = false)]
    standardize: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a dataset from a generator preset and write data.csv
    Simulate(CommonOpts),
    /// Fit one model at one G (use --models X-Y --gmin G --gmax G)
    Fit(CommonOpts),
    /// Fit a grid of models and group counts; rank by BIC
    Select(CommonOpts),
    /// Replicated simulation study (--mode selection or recovery)
    Study {
        #[command(flatten)]
        common: CommonOpts,
        /// selection: tally BIC-chosen G; recovery: coefficient averages
        #[arg(long, default_value = "selection")]
        mode: String,
    },
    /// Score a predicted partition against a label column
    Eval {
        #[command(flatten)]
        common: CommonOpts,
        /// CSV with a `label` column, as written by fit/select
        #[arg(long)]
        pred: String,
    },
}

fn to_config(command: &str, o: &CommonOpts, mode: Option<&str>) -> RunConfig {
    RunConfig {
        command: command.to_string(),
        input: o.input.clone(),
        responses: o.responses.clone(),
        covariates: o.covariates.clone(),
        labels: o.labels.clone(),
        models: o.models.clone(),
        gmin: o.gmin,
        gmax: o.gmax,
        seed: o.seed,
        tol: o.tol,
        max_iter: o.max_iter,
        out: o.out.clone(),
        preset: o.preset.clone(),
        replicates: o.replicates,
        n: o.n,
        standardize: o.standardize,
        mode: mode.map(|m| m.to_string()),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::InvalidParam(_) => 1,
        Error::AllFitsFailed(_) | Error::Collapse { .. } => 3,
        _ => 2,
    }
}

/// Parses the command line and runs the command; returns the process exit
/// code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(o) => cmd_simulate(&to_config("simulate", o, None)),
        Command::Fit(o) => cmd_fit(&to_config("fit", o, None)),
        Command::Select(o) => cmd_select(&to_config("select", o, None)),
        Command::Study { common, mode } => {
            cmd_study(&to_config("study", common, Some(mode)))
        }
        Command::Eval { common, pred } => cmd_eval(&to_config("eval", common, None), pred),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
