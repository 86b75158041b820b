use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hrt_core::datasets::{self, CsvTable, FunctionId, SyntheticSpec};
use hrt_core::eval::{
    ablate, ablation_csv, ablation_table, classification_metrics, regression_metrics,
    run_experiment, DataSource, ExperimentSpec,
};
use hrt_core::tree::{self, classify_score, fit_classifier, fit_with, Parallelism};
use hrt_core::{DesignMatrix, HrtConfig, HrtModel};

use crate::args::{AblateArgs, Command, EvalArgs, PredictArgs, Source, SynthArgs, TrainArgs};
use crate::CliError;

pub fn run(command: Command) -> Result<(), CliError> {
    let jobs = match &command {
        Command::Train(a) => a.jobs.jobs,
        Command::Eval(a) => a.jobs.jobs,
        Command::Ablate(a) => a.jobs.jobs,
        Command::Predict(_) | Command::Synth(_) => 1,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(usize::from(jobs))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| match command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
        Command::Ablate(a) => ablate_cmd(a),
    })
}

fn synthetic_spec(function: FunctionId, n: usize, noise: Option<f64>, seed: u64) -> SyntheticSpec {
    SyntheticSpec::new(function, n, noise.unwrap_or(function.default_noise()), seed)
}

/// The source as an experiment input; synthetic data is regenerated per
/// repetition from `seed`.
fn data_source(src: &Source, seed: u64) -> Result<DataSource, CliError> {
    match (src.synth, &src.csv) {
        (Some(f), _) => {
            let spec = synthetic_spec(f, src.n, src.noise, seed);
            spec.validate()?;
            Ok(DataSource::Synthetic(spec))
        }
        (None, Some(path)) => Ok(DataSource::Csv {
            path: path.clone(),
            target: src.target.clone(),
            header: !src.no_header,
        }),
        (None, None) => Err(CliError::Usage(
            "one of --synth or --csv is required".into(),
        )),
    }
}

fn load(src: &Source, seed: u64) -> Result<DesignMatrix, CliError> {
    match data_source(src, seed)? {
        DataSource::Synthetic(spec) => Ok(datasets::generate(&spec)?),
        DataSource::Csv {
            path,
            target,
            header,
        } => Ok(datasets::load_csv(path, &target, header)?),
        DataSource::Matrix(m) => Ok(m),
    }
}

fn load_model(path: &Path) -> Result<HrtModel, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(tree::load(&text)?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Data(format!("cannot write {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn source_lines(src: &Source) -> Vec<String> {
    match (src.synth, &src.csv) {
        (Some(f), _) => vec![
            format!("source=synth:{f}"),
            format!("n={}", src.n),
            format!("noise={}", src.noise.unwrap_or(f.default_noise())),
        ],
        (None, Some(p)) => vec![
            format!("source=csv:{}", p.display()),
            format!("target={}", src.target),
        ],
        (None, None) => Vec::new(),
    }
}

fn config_lines(cfg: &HrtConfig) -> Vec<String> {
    vec![
        format!("max_depth={}", cfg.max_depth),
        format!("min_samples={}", cfg.min_samples),
        format!("rmse_threshold={}", cfg.rmse_threshold),
        format!("ridge={}", cfg.ridge_alpha),
        format!("step={}", cfg.step_policy),
        format!("t_max={}", cfg.t_max),
        format!("epsilon={}", cfg.epsilon),
        format!("seed={}", cfg.seed),
    ]
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let cfg = a.hyper.config();
    cfg.validate()?;
    let data = load(&a.source, cfg.seed)?;
    let model = if a.classify {
        fit_classifier(&data, &cfg)?
    } else {
        let parallelism = if a.jobs.jobs > 1 {
            Parallelism::Subtrees
        } else {
            Parallelism::Serial
        };
        fit_with(&data, &cfg, parallelism)?
    };
    fs::write(&a.out, tree::save(&model))
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", a.out.display())))?;

    let train_rmse = regression_metrics(&model.predict_matrix(&data)?, data.targets())
        .map(|m| m.rmse)
        .unwrap_or(f64::NAN);
    let r = &model.report;
    let mut lines = source_lines(&a.source);
    lines.push(format!("rows={}", data.len()));
    lines.push(format!("dim={}", data.dim()));
    lines.push(format!("task={}", model.task));
    lines.extend(config_lines(&cfg));
    lines.extend([
        format!("leaves={}", r.n_leaves),
        format!("depth={}", r.depth),
        format!("splits={}", r.n_splits),
        format!("fallbacks={}", r.n_fallbacks),
        format!("fallback_rate_pct={}", r.fallback_rate_pct()),
        format!("avg_iterations={}", r.avg_iterations),
        format!("train_rmse={train_rmse}"),
        format!("fit_seconds={}", r.fit_seconds),
        format!("model={}", a.out.display()),
    ]);
    let mut out = output(None)?;
    for line in lines {
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn predict(a: PredictArgs) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let text = fs::read_to_string(&a.csv)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", a.csv.display())))?;
    let features = CsvTable::parse(&text, !a.no_header)?.into_features(a.target.as_ref())?;
    let scores = model.predict_matrix(&features)?;
    let mut out = output(a.out.as_deref())?;
    for s in scores {
        if a.classify {
            let (prob, label) = classify_score(s);
            writeln!(out, "{prob:?},{label}")?;
        } else {
            writeln!(out, "{s:?}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), CliError> {
    let mut out = output(None)?;
    if let Some(path) = &a.model {
        let model = load_model(path)?;
        let data = load(&a.source, a.hyper.seed)?;
        let scores = model.predict_matrix(&data)?;
        for line in source_lines(&a.source) {
            writeln!(out, "{line}")?;
        }
        writeln!(out, "rows={}", data.len())?;
        if a.classify {
            let probs: Vec<f64> = scores.iter().map(|&s| classify_score(s).0).collect();
            let m = classification_metrics(&probs, data.targets())?;
            writeln!(out, "auc={}\naccuracy={}\nf1={}", m.auc, m.accuracy, m.f1)?;
        } else {
            let m = regression_metrics(&scores, data.targets())?;
            writeln!(out, "rmse={}\nmae={}\nr2={}", m.rmse, m.mae, m.r2)?;
        }
    } else {
        let cfg = a.hyper.config();
        cfg.validate()?;
        let spec = ExperimentSpec {
            repetitions: a.reps,
            train_fraction: a.train_fraction,
            parallel: a.jobs.jobs > 1,
            ..ExperimentSpec::new(data_source(&a.source, cfg.seed)?, cfg.clone())
        };
        let s = run_experiment(&spec)?;
        let mut lines = source_lines(&a.source);
        lines.extend(config_lines(&cfg));
        lines.extend([
            format!("reps={}", a.reps),
            format!("train_fraction={}", a.train_fraction),
            format!("rmse_mean={}", s.rmse.mean),
            format!("rmse_std={}", s.rmse.std),
            format!("mae_mean={}", s.mae.mean),
            format!("mae_std={}", s.mae.std),
            format!("r2_mean={}", s.r2.mean),
            format!("r2_std={}", s.r2.std),
            format!("avg_leaves={}", s.row.avg_leaves),
            format!("avg_iterations={}", s.row.avg_iterations),
            format!("avg_fallbacks={}", s.row.avg_fallbacks),
            format!("avg_splits={}", s.row.avg_splits),
            format!("fallback_rate_pct={}", s.row.fallback_rate_pct),
            format!("avg_time_s={}", s.row.avg_time_s),
        ]);
        for line in lines {
            writeln!(out, "{line}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let spec = synthetic_spec(a.function, a.n, a.noise, a.seed);
    spec.validate()?;
    let data = datasets::generate(&spec)?;
    let mut out = output(a.out.as_deref())?;
    datasets::write_csv(&data, &mut out)?;
    out.flush()?;
    Ok(())
}

fn ablate_cmd(a: AblateArgs) -> Result<(), CliError> {
    let cfg = a.hyper.config();
    cfg.validate()?;
    let spec = ExperimentSpec {
        repetitions: a.reps,
        train_fraction: a.train_fraction,
        parallel: a.jobs.jobs > 1,
        ..ExperimentSpec::new(data_source(&a.source, cfg.seed)?, cfg)
    };
    let rows = ablate(&spec, &a.steps)?;
    let csv = ablation_csv(&rows);
    let table = ablation_table(&rows);
    match &a.out {
        Some(path) => {
            fs::write(path, csv)
                .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
            print!("{table}");
        }
        None => {
            print!("{csv}");
            eprint!("{table}");
        }
    }
    Ok(())
}
