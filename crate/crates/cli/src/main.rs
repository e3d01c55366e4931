//! `motifconv` command-line interface.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use motifconv::convolution::Readout;
use motifconv::kernel::KernelPreset;
use motifconv::synthgen::AttachPolicy;

#[derive(Debug, Parser)]
#[command(
    name = "motifconv",
    version,
    about = "Motif convolution for attributed relational graphs"
)]
pub struct Cli {
    /// TOML run configuration; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Kernel and matcher settings shared by every matching command.
#[derive(Debug, Clone, Default, Args)]
pub struct MatchArgs {
    /// Kernel preset: synthetic, indicator or qm9.
    #[arg(long)]
    pub kernel: Option<KernelPreset>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long = "beta-f")]
    pub beta_f: Option<f64>,
    #[arg(long = "beta-r")]
    pub beta_r: Option<f64>,
    #[arg(long)]
    pub sinkhorn_iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Match two graphs and print their similarity score and node pairs.
    Match {
        #[arg(long)]
        graph_a: PathBuf,
        #[arg(long)]
        graph_b: PathBuf,
        #[command(flatten)]
        matching: MatchArgs,
    },
    /// All-pairs similarity of a dataset as an upper-triangular CSV.
    Pairwise {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        matching: MatchArgs,
    },
    /// Build a motif vocabulary from a dataset.
    Vocab {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        motifs: Option<usize>,
        #[arg(long)]
        partition_size: Option<usize>,
        #[arg(long)]
        keep_per_partition: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        matching: MatchArgs,
    },
    /// Per-node motif features, or graph features with --readout.
    Convolve {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Pool node rows into one vector per graph: max, mean or sum.
        #[arg(long)]
        readout: Option<Readout>,
        /// Feature cache directory.
        #[arg(long, env = motifconv::convolution::CACHE_ENV)]
        cache_dir: Option<PathBuf>,
        #[command(flatten)]
        matching: MatchArgs,
    },
    /// Train logistic regression on graph features and report accuracy.
    Classify {
        #[arg(long)]
        train_features: PathBuf,
        #[arg(long)]
        test_features: PathBuf,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        l2: Option<f64>,
    },
    /// Generate the five-template synthetic dataset.
    Synth {
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also (or only) write the five templates to this file.
        #[arg(long)]
        emit_templates: Option<PathBuf>,
        /// Wiring of added nodes: one or none.
        #[arg(long)]
        attach_policy: Option<AttachPolicy>,
    },
    /// Full synthetic classification experiment over one or more seeds.
    ExperimentSynthetic {
        #[arg(long)]
        size: Option<usize>,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the JSON reports here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write train/val/test graph-feature CSVs here (one subdirectory per seed).
        #[arg(long)]
        features_dir: Option<PathBuf>,
        #[arg(long, env = motifconv::convolution::CACHE_ENV)]
        cache_dir: Option<PathBuf>,
        #[command(flatten)]
        matching: MatchArgs,
    },
    /// Time all-pairs matching at several worker counts.
    Bench {
        /// Dataset to match; a synthetic one is generated when omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Size of the generated dataset.
        #[arg(long, default_value_t = 100)]
        size: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        workers: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        matching: MatchArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("motifconv: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
