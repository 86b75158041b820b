//! Metrics, repeated-split experiments and step-size ablations.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::HrtConfig;
use crate::data::{DataError, DesignMatrix};
use crate::datasets::{self, DatasetError, SplitSpec, SyntheticSpec, TargetColumn};
use crate::seed::{self, stream};
use crate::split::StepPolicy;
use crate::tree::{fit_with, FitError, Parallelism};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("prediction and truth lengths differ ({predictions} vs {truth})")]
    LengthMismatch { predictions: usize, truth: usize },
    #[error("no samples to evaluate")]
    Empty,
    #[error("targets have zero variance; R² is undefined")]
    ZeroVariance,
    #[error("labels contain a single class; AUC is undefined")]
    SingleClass,
    #[error("label at row {row} is {value}, expected 0 or 1")]
    InvalidLabel { row: usize, value: f64 },
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionMetrics {
    pub rmse: f64,
    pub mae: f64,
    pub r2: f64,
}

pub fn regression_metrics(pred: &[f64], truth: &[f64]) -> Result<RegressionMetrics, EvalError> {
    check_lengths(pred.len(), truth.len())?;
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    let (mut sse, mut sae) = (0.0, 0.0);
    for (p, y) in pred.iter().zip(truth) {
        let r = y - p;
        sse += r * r;
        sae += r.abs();
    }
    Ok(RegressionMetrics {
        rmse: (sse / n).sqrt(),
        mae: sae / n,
        r2: 1.0 - sse / ss_tot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationMetrics {
    pub auc: f64,
    pub accuracy: f64,
    pub f1: f64,
}

/// `scores` are probabilities (or any monotone score); `labels` are 0/1.
/// Accuracy and F1 threshold at `score ≥ 0.5`. AUC uses midranks for ties.
pub fn classification_metrics(
    scores: &[f64],
    labels: &[f64],
) -> Result<ClassificationMetrics, EvalError> {
    check_lengths(scores.len(), labels.len())?;
    if let Some((row, &value)) = labels
        .iter()
        .enumerate()
        .find(|(_, &l)| l != 0.0 && l != 1.0)
    {
        return Err(EvalError::InvalidLabel { row, value });
    }
    let n_pos = labels.iter().filter(|&&l| l == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their mean.
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_pos += midrank * order[i..=j].iter().filter(|&&k| labels[k] == 1.0).count() as f64;
        i = j + 1;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    let auc = (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);

    let (mut tp, mut fp, mut fn_, mut correct) = (0usize, 0usize, 0usize, 0usize);
    for (&s, &l) in scores.iter().zip(labels) {
        let predicted = s >= 0.5;
        let actual = l == 1.0;
        match (predicted, actual) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
        if predicted == actual {
            correct += 1;
        }
    }
    Ok(ClassificationMetrics {
        auc,
        accuracy: correct as f64 / labels.len() as f64,
        f1: 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64,
    })
}

fn check_lengths(predictions: usize, truth: usize) -> Result<(), EvalError> {
    if predictions != truth {
        return Err(EvalError::LengthMismatch { predictions, truth });
    }
    if truth == 0 {
        return Err(EvalError::Empty);
    }
    Ok(())
}

/// Mean and sample standard deviation (`n − 1`); the deviation is 0 for
/// a single value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len();
        if n == 0 {
            return MeanStd::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Regenerated per repetition with a derived seed.
    Synthetic(SyntheticSpec),
    Csv {
        path: PathBuf,
        target: TargetColumn,
        header: bool,
    },
    Matrix(DesignMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: DataSource,
    pub cfg: HrtConfig,
    pub repetitions: usize,
    pub train_fraction: f64,
    /// Run repetitions concurrently on the current rayon pool.
    pub parallel: bool,
}

impl ExperimentSpec {
    pub fn new(source: DataSource, cfg: HrtConfig) -> Self {
        ExperimentSpec {
            source,
            cfg,
            repetitions: 10,
            train_fraction: 0.7,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionResult {
    pub seed: u64,
    pub test: RegressionMetrics,
    pub train_rmse: f64,
    pub n_leaves: usize,
    pub depth: usize,
    pub n_splits: usize,
    pub n_fallbacks: usize,
    pub avg_iterations: f64,
    pub fit_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub reps: Vec<RepetitionResult>,
    pub rmse: MeanStd,
    pub mae: MeanStd,
    pub r2: MeanStd,
    pub row: AblationRow,
}

/// Repeats split → fit → score. Repetition `r` uses
/// `derive(derive(seed, REPETITION), r)` as its base; data, split and fit
/// seeds are derived from that, so results do not depend on thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentSummary, EvalError> {
    if spec.repetitions == 0 {
        return Err(EvalError::NoRepetitions);
    }
    spec.cfg.validate().map_err(FitError::from)?;
    let loaded = match &spec.source {
        DataSource::Csv {
            path,
            target,
            header,
        } => Some(datasets::load_csv(path, target, *header)?),
        _ => None,
    };
    let base = seed::derive(spec.cfg.seed, stream::REPETITION);
    let one = |r: usize| -> Result<RepetitionResult, EvalError> {
        let rep_seed = seed::derive(base, r as u64);
        let generated;
        let data = match (&spec.source, &loaded) {
            (_, Some(m)) => m,
            (DataSource::Matrix(m), _) => m,
            (DataSource::Synthetic(s), _) => {
                generated = datasets::generate(&SyntheticSpec {
                    seed: seed::derive(s.seed, seed::derive(rep_seed, stream::DATA)),
                    ..s.clone()
                })?;
                &generated
            }
            (DataSource::Csv { .. }, None) => unreachable!("csv is loaded up front"),
        };
        let (train, test) = datasets::split(
            data,
            &SplitSpec {
                train_fraction: spec.train_fraction,
                seed: seed::derive(rep_seed, stream::SPLIT),
            },
        )?;
        let cfg = spec.cfg.with_seed(seed::derive(rep_seed, stream::FIT));
        let model = fit_with(&train, &cfg, Parallelism::Serial)?;
        let test_metrics = regression_metrics(&model.predict_matrix(&test)?, test.targets())?;
        let train_pred = model.predict_matrix(&train)?;
        let train_rmse = (train_pred
            .iter()
            .zip(train.targets())
            .map(|(p, y)| (y - p) * (y - p))
            .sum::<f64>()
            / train.len() as f64)
            .sqrt();
        let r = &model.report;
        Ok(RepetitionResult {
            seed: rep_seed,
            test: test_metrics,
            train_rmse,
            n_leaves: r.n_leaves,
            depth: r.depth,
            n_splits: r.n_splits,
            n_fallbacks: r.n_fallbacks,
            avg_iterations: r.avg_iterations,
            fit_seconds: r.fit_seconds,
        })
    };
    let reps: Vec<RepetitionResult> = if spec.parallel {
        (0..spec.repetitions)
            .into_par_iter()
            .map(one)
            .collect::<Result<_, _>>()?
    } else {
        (0..spec.repetitions).map(one).collect::<Result<_, _>>()?
    };
    Ok(summarize(spec.cfg.step_policy, reps))
}

fn summarize(step: StepPolicy, reps: Vec<RepetitionResult>) -> ExperimentSummary {
    let col = |f: &dyn Fn(&RepetitionResult) -> f64| reps.iter().map(f).collect::<Vec<f64>>();
    let rmse = MeanStd::of(&col(&|r| r.test.rmse));
    let mae = MeanStd::of(&col(&|r| r.test.mae));
    let r2 = MeanStd::of(&col(&|r| r.test.r2));
    let mean = |f: &dyn Fn(&RepetitionResult) -> f64| MeanStd::of(&col(f)).mean;
    let avg_splits = mean(&|r| r.n_splits as f64);
    let avg_fallbacks = mean(&|r| r.n_fallbacks as f64);
    let row = AblationRow {
        step: step.label(),
        rmse_mean: rmse.mean,
        rmse_std: rmse.std,
        avg_leaves: mean(&|r| r.n_leaves as f64),
        avg_iterations: mean(&|r| r.avg_iterations),
        avg_time_s: mean(&|r| r.fit_seconds),
        avg_fallbacks,
        avg_splits,
        fallback_rate_pct: if avg_splits > 0.0 {
            100.0 * avg_fallbacks / avg_splits
        } else {
            0.0
        },
    };
    ExperimentSummary {
        reps,
        rmse,
        mae,
        r2,
        row,
    }
}

/// One line of a step-size ablation.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub step: String,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub avg_leaves: f64,
    pub avg_iterations: f64,
    pub avg_time_s: f64,
    pub avg_fallbacks: f64,
    pub avg_splits: f64,
    pub fallback_rate_pct: f64,
}

pub const ABLATION_COLUMNS: [&str; 9] = [
    "step",
    "rmse_mean",
    "rmse_std",
    "avg_leaves",
    "avg_iterations",
    "avg_time_s",
    "avg_fallbacks",
    "avg_splits",
    "fallback_rate_pct",
];

/// Runs the same experiment once per step policy.
pub fn ablate(base: &ExperimentSpec, steps: &[StepPolicy]) -> Result<Vec<AblationRow>, EvalError> {
    steps
        .iter()
        .map(|&step| {
            let spec = ExperimentSpec {
                cfg: HrtConfig {
                    step_policy: step,
                    ..base.cfg.clone()
                },
                ..base.clone()
            };
            run_experiment(&spec).map(|s| s.row)
        })
        .collect()
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = ABLATION_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.step,
            r.rmse_mean,
            r.rmse_std,
            r.avg_leaves,
            r.avg_iterations,
            r.avg_time_s,
            r.avg_fallbacks,
            r.avg_splits,
            r.fallback_rate_pct
        );
    }
    out
}

pub fn ablation_table(rows: &[AblationRow]) -> String {
    let mut out = format!(
        "{:>6}  {:>17}  {:>7}  {:>6}  {:>8}  {:>9}  {:>7}  {:>8}\n",
        "step", "test rmse", "leaves", "iters", "time s", "fallbacks", "splits", "fb rate"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>6}  {:>8.5} ± {:>6.4}  {:>7.1}  {:>6.2}  {:>8.3}  {:>9.1}  {:>7.1}  {:>7.2}%",
            r.step,
            r.rmse_mean,
            r.rmse_std,
            r.avg_leaves,
            r.avg_iterations,
            r.avg_time_s,
            r.avg_fallbacks,
            r.avg_splits,
            r.fallback_rate_pct
        );
    }
    out
}
