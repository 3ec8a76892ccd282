//! Command-line front end. Exit codes: 0 success or certified, 1 error,
//! 2 violation found, 3 undecided within the budget or training exhausted.

mod args;
mod bench;
mod commands;
mod config;

use std::ffi::OsString;

use clap::Parser;

pub use args::{AttackArgs, BenchArgs, BudgetArgs, Cli, Command, ReportArgs, TrainArgs, VerifyArgs};
pub use bench::{cmd_bench, family_sweep, timing_curve, BenchPlan, BenchReport, FamilyRow, TimingRow};
pub use commands::{
    attack_exit_code, cmd_attack, cmd_report, cmd_train, cmd_verify, initial_network, verification_exit_code,
    TrainMetrics, EXIT_ERROR, EXIT_OK, EXIT_UNDECIDED, EXIT_VIOLATION,
};
pub use config::{DataConfig, ModelConfig, RunConfig, VerifyConfig};

use crate::data::Dataset;
use crate::model::io;
use crate::Result;

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Train(args) => {
            let mut config = match &args.config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            args.apply(&mut config);
            cmd_train(config, args.json)
        }
        Command::Verify(args) => {
            let mut v = VerifyConfig::default();
            args.budget.apply(&mut v);
            cmd_verify(&args.model, &v, args.out.as_deref(), args.json)
        }
        Command::Attack(args) => {
            let mut v = VerifyConfig::default();
            args.budget.apply(&mut v);
            let dim = io::load(&args.model)?.input_dim;
            let mut points = commands::chunk_points(&args.point, dim)?;
            if let Some(path) = &args.data {
                let data = Dataset::load(path)?;
                let take = args.max_points.unwrap_or(data.len());
                points.extend(data.features.into_iter().take(take));
            }
            cmd_attack(&args.model, points, &v, args.out.as_deref(), args.json)
        }
        Command::Bench(args) => {
            let mut verify = VerifyConfig::default();
            args.budget.apply(&mut verify);
            let family = if args.family {
                let mut c = match &args.config {
                    Some(p) => RunConfig::load(p)?,
                    None => RunConfig::default(),
                };
                args.budget.apply(&mut c.verify);
                c.seed = args.seed;
                c.train.seed = args.seed;
                Some(c)
            } else {
                None
            };
            let plan = BenchPlan {
                widths: &args.widths,
                repeats: args.repeats,
                train_epochs: args.train_epochs,
                timing: !args.no_timing,
                family,
                seed: args.seed,
                verify,
                out: args.out.as_deref(),
            };
            cmd_bench(plan).map(|r| r.0)
        }
        Command::Report(args) => cmd_report(&args.file),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
