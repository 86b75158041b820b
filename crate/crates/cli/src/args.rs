use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hrt_core::datasets::{FunctionId, TargetColumn};
use hrt_core::{HrtConfig, StepPolicy};

#[derive(Debug, Parser)]
#[command(name = "hrt", version, about = "Hinge regression trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a tree and write it as a model file.
    Train(TrainArgs),
    /// Predict with a saved model, one line per input row.
    Predict(PredictArgs),
    /// Score a saved model, or run repeated train/test experiments.
    Eval(EvalArgs),
    /// Write a synthetic benchmark dataset as CSV.
    Synth(SynthArgs),
    /// Compare step policies over repeated train/test splits.
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
pub struct Hyper {
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 10)]
    pub min_samples: usize,
    #[arg(long, default_value_t = 0.0)]
    pub rmse_threshold: f64,
    /// Ridge penalty on the weights; the bias is never penalized.
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    /// `auto` or a fixed step in (0, 1].
    #[arg(long, default_value = "auto")]
    pub step: StepPolicy,
    #[arg(long, default_value_t = 100)]
    pub t_max: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Hyper {
    pub fn config(&self) -> HrtConfig {
        HrtConfig {
            max_depth: self.max_depth,
            min_samples: self.min_samples,
            rmse_threshold: self.rmse_threshold,
            ridge_alpha: self.ridge,
            step_policy: self.step,
            t_max: self.t_max,
            epsilon: self.epsilon,
            seed: self.seed,
        }
    }
}

/// Either a synthetic function or a CSV file.
#[derive(Debug, Args)]
pub struct Source {
    #[arg(
        long,
        value_name = "FN",
        conflicts_with = "csv",
        required_unless_present = "csv"
    )]
    pub synth: Option<FunctionId>,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Target column name, or a zero-based index.
    #[arg(long, default_value = "y", requires = "csv")]
    pub target: TargetColumn,
    /// The CSV has no header line.
    #[arg(long, requires = "csv")]
    pub no_header: bool,
    /// Rows to generate for a synthetic source.
    #[arg(long, default_value_t = 1000, requires = "synth")]
    pub n: usize,
    /// Noise standard deviation; defaults to the function's benchmark value.
    #[arg(long, requires = "synth")]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Jobs {
    /// Worker threads; 1 keeps everything serial.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub hyper: Hyper,
    /// Targets are 0/1 labels.
    #[arg(long)]
    pub classify: bool,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    pub jobs: Jobs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub csv: PathBuf,
    /// Column to drop before predicting, if the file carries targets.
    #[arg(long)]
    pub target: Option<TargetColumn>,
    #[arg(long)]
    pub no_header: bool,
    /// Print `prob,label` with the score clipped to [0, 1].
    #[arg(long)]
    pub classify: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Score this model on the whole source instead of fitting.
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub hyper: Hyper,
    /// Report AUC, accuracy and F1 of a saved model.
    #[arg(long, requires = "model")]
    pub classify: bool,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[command(flatten)]
    pub jobs: Jobs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long = "fn", value_name = "FN")]
    pub function: FunctionId,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub hyper: Hyper,
    /// Comma-separated step policies, e.g. `0.01,0.5,auto`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub steps: Vec<StepPolicy>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    /// CSV destination; without it the CSV goes to standard output and the
    /// table to standard error.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub jobs: Jobs,
}
