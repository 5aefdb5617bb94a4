//! Thin command-line front end over [`resurface::commands`].
//!
//! All real work — parsing workspace files, training, simulating, rendering
//! tables — lives in the library; this file only maps arguments onto the
//! command option structs and picks the process exit code.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use resurface::commands::{
    self, InstanceOptions, MatchOptions, OutputFormat, SearchOptions, SimulateOptions,
    SweepOptions, TrainKind, TrainOptions, Workspace,
};

#[derive(Parser)]
#[command(
    name = "resurface",
    version,
    about = "Search policies and profile classifiers for finding users who \
             returned to a social network under a new account"
)]
struct Cli {
    /// Seed for every randomized step (splits, simulations, random policies).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory holding profiles.jsonl, edges.csv, models/, instances/,
    /// and reports/.
    #[arg(long, global = true, default_value = ".")]
    workspace: PathBuf,

    /// Output style.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    /// Aligned columns for people.
    Table,
    /// Tab-separated rows for scripts.
    Delimited,
}

impl From<FormatArg> for OutputFormat {
    fn from(arg: FormatArg) -> Self {
        match arg {
            FormatArg::Table => OutputFormat::Table,
            FormatArg::Delimited => OutputFormat::Delimited,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// Did this account get suspended? (sparse linear model)
    Suspension,
    /// Are these two profiles the same person? (sparse linear model)
    Match,
    /// Will the returned user refollow this friend? (kernel model)
    Refollow,
}

impl From<KindArg> for TrainKind {
    fn from(arg: KindArg) -> Self {
        match arg {
            KindArg::Suspension => TrainKind::Suspension,
            KindArg::Match => TrainKind::Match,
            KindArg::Refollow => TrainKind::Refollow,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Score candidate profile pairs and write bootstrap labels.
    Match {
        /// Match cutoff; defaults to the bundled model's calibrated value.
        #[arg(long)]
        threshold: Option<f64>,
        /// Compare only pairs sharing a character 3-gram.
        #[arg(long)]
        blocking: bool,
        /// Refuse all-pairs comparison beyond this many profiles.
        #[arg(long, default_value_t = 2000)]
        max_profiles: usize,
    },
    /// Rebuild the match graph across a threshold grid.
    Sweep {
        /// First threshold of the grid.
        #[arg(long, default_value_t = 0.50)]
        start: f64,
        /// Last threshold of the grid (inclusive).
        #[arg(long, default_value_t = 0.99)]
        end: f64,
        /// Grid spacing.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Compare only pairs sharing a character 3-gram.
        #[arg(long)]
        blocking: bool,
        /// Refuse all-pairs comparison beyond this many profiles.
        #[arg(long, default_value_t = 2000)]
        max_profiles: usize,
    },
    /// Train a classifier from a feature CSV and save the best model.
    Train {
        /// Which model to train.
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Feature CSV with a `label` column.
        #[arg(long)]
        features: PathBuf,
        /// Penalty grid, comma separated; omit for the kind's default grid.
        #[arg(long, value_delimiter = ',')]
        lambdas: Vec<f64>,
        /// Fraction of rows held out for evaluation.
        #[arg(long, default_value_t = 0.3)]
        test_fraction: f64,
        /// Hold out whole clusters (needs a `cluster` column) instead of rows.
        #[arg(long)]
        group_split: bool,
    },
    /// Build the search instance for one user from edges, account snapshots,
    /// and the trained refollow model.
    Instance {
        /// The user whose friends will be searched.
        #[arg(long)]
        user: u64,
        /// Prior probability that the user returns at all.
        #[arg(long, default_value_t = 0.5)]
        rho0: f64,
        /// Stop searching once the return posterior falls below this.
        #[arg(long, default_value_t = 0.0)]
        rho_bar: f64,
        /// Follower-list page size per query.
        #[arg(long, default_value_t = 5000)]
        page_size: u64,
    },
    /// Rank query policies on an instance: analytic cost vs. Monte Carlo.
    Search {
        /// Instance JSON (see `instance`).
        #[arg(long)]
        instance: PathBuf,
        /// Pinned ground truth JSON; adds a realized-cost column.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Monte Carlo runs per table row.
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        /// Size of the random-policy ensemble row.
        #[arg(long, default_value_t = 500)]
        random_draws: u64,
    },
    /// Monte Carlo one policy on an instance and write a JSON report.
    Simulate {
        /// Instance JSON (see `instance`).
        #[arg(long)]
        instance: PathBuf,
        /// Policy JSON (a bare id array); omit for the optimal policy.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Pinned ground truth JSON (existence and refollows fixed).
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Monte Carlo runs.
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        /// Report destination; defaults to reports/simulation.json.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn run(cli: Cli, out: &mut dyn Write) -> resurface::Result<()> {
    let workspace = Workspace::rooted_at(&cli.workspace);
    let format = cli.format.into();
    match cli.command {
        Command::Match {
            threshold,
            blocking,
            max_profiles,
        } => {
            let options = MatchOptions {
                threshold,
                blocking,
                max_profiles,
            };
            commands::cmd_match(&workspace, &options, format, out)
        }
        Command::Sweep {
            start,
            end,
            step,
            blocking,
            max_profiles,
        } => {
            let options = SweepOptions {
                start,
                end,
                step,
                blocking,
                max_profiles,
            };
            commands::cmd_sweep(&workspace, &options, format, out)
        }
        Command::Train {
            kind,
            features,
            lambdas,
            test_fraction,
            group_split,
        } => {
            let options = TrainOptions {
                kind: kind.into(),
                features,
                lambdas,
                test_fraction,
                seed: cli.seed,
                group_split,
            };
            commands::cmd_train(&workspace, &options, format, out)
        }
        Command::Instance {
            user,
            rho0,
            rho_bar,
            page_size,
        } => {
            let options = InstanceOptions {
                user,
                rho0,
                rho_bar,
                page_size,
            };
            commands::cmd_instance(&workspace, &options, format, out)
        }
        Command::Search {
            instance,
            truth,
            runs,
            random_draws,
        } => {
            let options = SearchOptions {
                instance,
                truth,
                runs,
                random_draws,
                seed: cli.seed,
            };
            commands::cmd_search(&options, format, out)
        }
        Command::Simulate {
            instance,
            policy,
            truth,
            runs,
            report,
        } => {
            let options = SimulateOptions {
                instance,
                policy,
                truth,
                runs,
                seed: cli.seed,
                report,
            };
            commands::cmd_simulate(&workspace, &options, format, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::FAILURE
        }
    }
}
