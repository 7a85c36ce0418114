//! `uavsense`: synthesize RF burst corpora, extract wavelet-packet
//! fingerprints, train the LOF detector and run the evaluation sweeps.

mod commands;
mod grid;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uavsense_core::Metric;

/// Semi-supervised UAV controller detection from RF burst fingerprints.
///
/// Seeds: every stage derives its own seed from `--seed` by hashing the stage
/// name ("synth", "split", "balance", "sweep-snr") into the master seed, so a
/// single flag reproduces a whole run.
#[derive(Debug, Parser)]
#[command(name = "uavsense", version, about, long_about = None)]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Cap on worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labelled synthetic burst corpus with train/eval manifests.
    Synth(SynthArgs),
    /// Turn the bursts listed in a manifest into a feature CSV.
    Extract(ExtractArgs),
    /// Fit the LOF model on recognized fingerprints only.
    Train(TrainArgs),
    /// Score fingerprints with a trained model.
    Score(ScoreArgs),
    /// Confusion matrix and metrics on the test split of an evaluation set.
    Eval(EvalArgs),
    /// Validation/test accuracy over a grid of neighbor counts.
    #[command(name = "sweep-n")]
    SweepN(SweepNArgs),
    /// Accuracy over SNR × neighbor count on a balanced evaluation set.
    #[command(name = "sweep-snr")]
    SweepSnr(SweepSnrArgs),
    /// Rank the 44 packet statistics by across-signal variance.
    Rank(RankArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Bursts per device.
    #[arg(long, default_value_t = 300)]
    pub per_device: usize,
    /// Share of each recognized device's bursts used for training.
    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub train_fraction: f64,
    /// SNR in dB, or "inf" for clean bursts.
    #[arg(long, default_value = "30")]
    pub snr: String,
    /// Capture length in samples (multiple of 4).
    #[arg(long, default_value_t = 4096)]
    pub capture_len: usize,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct TriggerArgs {
    /// Capture length in samples (multiple of 4).
    #[arg(long, default_value_t = 4096)]
    pub capture_len: usize,
    /// Sliding energy window in samples.
    #[arg(long, default_value_t = 64)]
    pub window_len: usize,
    /// Mean-square energy that starts a capture.
    #[arg(long, default_value_t = 0.1)]
    pub trigger_threshold: f64,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Manifest CSV (path,device_id,class,snr_db).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Feature CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the 44-statistic CSV here.
    #[arg(long)]
    pub stats_out: Option<PathBuf>,
    #[command(flatten)]
    pub trigger: TriggerArgs,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct LofArgs {
    /// Decision threshold on the LOF score (outlier iff score > threshold).
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pub threshold: f64,
    /// Distance metric: manhattan or euclidean.
    #[arg(long, default_value_t = Metric::Manhattan)]
    pub metric: Metric,
    /// Skip z-scoring of feature columns.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Feature CSV of recognized bursts.
    #[arg(long)]
    pub features: PathBuf,
    /// Model JSON to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Neighbor count.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    #[command(flatten)]
    pub lof: LofArgs,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Scores CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Evaluation feature CSV.
    #[arg(long)]
    pub features: PathBuf,
    /// Output directory for confusion.csv and metrics.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Share of the evaluation set used as the test split.
    #[arg(long, default_value_t = 0.7)]
    pub test_frac: f64,
    /// Evaluate every row instead of the test split.
    #[arg(long)]
    pub all: bool,
    /// Override the model's decision threshold.
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepNArgs {
    /// Training feature CSV (recognized only).
    #[arg(long)]
    pub train: PathBuf,
    /// Evaluation feature CSV, split into test and validation.
    #[arg(long)]
    pub eval: PathBuf,
    /// Neighbor counts: "start:end:step" or a comma list.
    #[arg(long, default_value = "10:200:10")]
    pub k_grid: String,
    #[arg(long, default_value_t = 0.7)]
    pub test_frac: f64,
    #[command(flatten)]
    pub lof: LofArgs,
    /// Output directory for neighbors_sweep.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepSnrArgs {
    /// Training feature CSV (recognized only, at the reference SNR).
    #[arg(long)]
    pub train: PathBuf,
    /// Manifest of clean evaluation bursts (from `synth --snr inf`).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Neighbor counts: "start:end:step" or a comma list.
    #[arg(long, default_value = "100:200:20")]
    pub k_grid: String,
    /// SNR values in dB: "start:end:step" or a comma list.
    #[arg(long, default_value = "6:30:2")]
    pub snr_grid: String,
    /// Bursts per class in the balanced set.
    #[arg(long, default_value_t = 200)]
    pub per_class: usize,
    #[command(flatten)]
    pub lof: LofArgs,
    #[command(flatten)]
    pub trigger: TriggerArgs,
    /// Output directory for snr_sweep.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// SVG plot path; defaults to <out>/snr_sweep.svg.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// 44-statistic CSV from `extract --stats-out`.
    #[arg(long)]
    pub stats: PathBuf,
    /// How many ranked columns to print.
    #[arg(long, default_value_t = 44)]
    pub top: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let jobs = (cli.jobs > 0).then_some(cli.jobs);
    match uavsense_core::exec::with_jobs(jobs, || commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
