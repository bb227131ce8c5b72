//! Experiment runner for the adaptive sparse softmax loss family.

mod commands;
mod config;
mod exit;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{CommonArgs, GenKind, ImbalanceSetting, SweepParam};
use exit::CliError;

#[derive(Parser)]
#[command(
    name = "assoftmax",
    version,
    about = "Train and analyse adaptive sparse softmax classifiers on desk-scale data"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Run seeds (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "42")]
    seed: Vec<i64>,
    /// Output directory (created if missing; files are overwritten).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn args(&self) -> CommonArgs {
        CommonArgs {
            seeds: self.seed.clone(),
            out: self.out.clone(),
            quiet: self.quiet,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset and write it as CSV.
    GenData {
        #[arg(long, value_enum, default_value = "multiclass")]
        kind: GenKind,
        #[arg(long, default_value_t = 5)]
        classes: usize,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        /// Samples per cluster.
        #[arg(long, default_value_t = 300)]
        per_class: usize,
        #[arg(long, default_value_t = 6.0)]
        separation: f64,
        /// Fraction of train labels resampled among other classes.
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        /// Positive labels per sample (multilabel only).
        #[arg(long, default_value_t = 2)]
        labels_per_sample: usize,
        /// Generator seed (independent of run seeds).
        #[arg(long, default_value_t = 11)]
        data_seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Train one configuration and write report.json / series.csv /
    /// margins.csv / resolved_config.json.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run several configurations over the seed list and tabulate final
    /// metrics, step counts, and loss–metric correlations.
    Compare {
        /// Config file; pass two or more.
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run one configuration over a list of margin values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Retrain plain softmax on the hard (never-masked) train subset of an
    /// adaptive-sparse run versus an equal-size random subset.
    HardSamples {
        /// report.json of an adaptive-sparse training run.
        #[arg(long)]
        report: PathBuf,
        /// Base config describing the same dataset; retraining uses softmax.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare softmax and AS-Softmax under skewed train distributions.
    Imbalance {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: ImbalanceSetting,
        /// Major class indices (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        major: Vec<usize>,
        /// Setting 1: one row per minor-class train count.
        #[arg(long, value_delimiter = ',')]
        minor_counts: Vec<usize>,
        /// Setting 2: fixed minor-class train count.
        #[arg(long)]
        minor: Option<usize>,
        /// Setting 2: one row per major:minor ratio.
        #[arg(long, value_delimiter = ',')]
        ratios: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::GenData {
            kind,
            classes,
            dim,
            per_class,
            separation,
            noise,
            labels_per_sample,
            data_seed,
            common,
        } => commands::gen_data(
            kind,
            classes,
            dim,
            per_class,
            separation,
            noise,
            labels_per_sample,
            data_seed,
            &common.args(),
        ),
        Cmd::Train { config, common } => commands::cmd_train(&config, &common.args()),
        Cmd::Compare { configs, common } => commands::cmd_compare(&configs, &common.args()),
        Cmd::Sweep {
            config,
            param,
            values,
            common,
        } => commands::cmd_sweep(&config, param, &values, &common.args()),
        Cmd::HardSamples {
            report,
            config,
            common,
        } => commands::cmd_hard_samples(&report, &config, &common.args()),
        Cmd::Imbalance {
            config,
            mode,
            major,
            minor_counts,
            minor,
            ratios,
            common,
        } => commands::cmd_imbalance(
            &config,
            mode,
            &major,
            &minor_counts,
            minor,
            &ratios,
            &common.args(),
        ),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
