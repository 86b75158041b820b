use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hrt_core::datasets::{self, FunctionId, SyntheticSpec};
use hrt_core::tree;
use hrt_core::{HrtConfig, StepPolicy};
use tempfile::TempDir;

fn hrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrt"))
        .args(args)
        .output()
        .expect("spawn hrt")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report_value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in report:\n{report}"))
}

const SINC_TRAIN: [&str; 17] = [
    "train",
    "--synth",
    "sinc",
    "--n",
    "1000",
    "--noise",
    "0.025",
    "--max-depth",
    "6",
    "--ridge",
    "0.001",
    "--step",
    "0.01",
    "--rmse-threshold",
    "0.03",
    "--seed",
    "7",
];

fn train_sinc(dir: &TempDir, name: &str) -> (Output, String) {
    let model = dir.path().join(name);
    let mut args = SINC_TRAIN.to_vec();
    args.extend(["--out", path_str(&model)]);
    let out = hrt(&args);
    (out, fs::read_to_string(&model).unwrap_or_default())
}

#[test]
fn train_writes_model_and_report() {
    let dir = TempDir::new().unwrap();
    let (out, model) = train_sinc(&dir, "m.hrt");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(model.starts_with("HRT v1"));
    let report = stdout(&out);
    for key in [
        "leaves",
        "depth",
        "splits",
        "fallbacks",
        "avg_iterations",
        "fit_seconds",
    ] {
        report_value(&report, key);
    }
    assert_eq!(report_value(&report, "max_depth"), "6");
    assert_eq!(report_value(&report, "ridge"), "0.001");
    assert_eq!(report_value(&report, "step"), "0.01");
    assert_eq!(report_value(&report, "rmse_threshold"), "0.03");
    assert_eq!(report_value(&report, "seed"), "7");
    assert_eq!(report_value(&report, "n"), "1000");
    assert_eq!(report_value(&report, "noise"), "0.025");
    let depth: usize = report_value(&report, "depth").parse().unwrap();
    assert!(depth <= 6);
}

#[test]
fn train_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (_, a) = train_sinc(&dir, "a.hrt");
    let (_, b) = train_sinc(&dir, "b.hrt");
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn cli_prediction_matches_in_memory_fit() {
    let dir = TempDir::new().unwrap();
    let (out, _) = train_sinc(&dir, "m.hrt");
    assert_eq!(out.status.code(), Some(0));

    let cfg = HrtConfig {
        max_depth: 6,
        ridge_alpha: 0.001,
        step_policy: StepPolicy::Fixed { mu: 0.01 },
        rmse_threshold: 0.03,
        seed: 7,
        ..HrtConfig::default()
    };
    let train = datasets::generate(&SyntheticSpec::new(FunctionId::Sinc, 1000, 0.025, 7)).unwrap();
    let model = tree::fit(&train, &cfg).unwrap();

    let test = datasets::generate(&SyntheticSpec::new(FunctionId::Sinc, 50, 0.0, 99)).unwrap();
    let csv = dir.path().join("test.csv");
    let mut buf = Vec::new();
    datasets::write_csv(&test, &mut buf).unwrap();
    fs::write(&csv, buf).unwrap();

    let pred = hrt(&[
        "predict",
        "--model",
        path_str(&dir.path().join("m.hrt")),
        "--csv",
        path_str(&csv),
        "--target",
        "y",
    ]);
    assert_eq!(pred.status.code(), Some(0), "{}", stderr(&pred));
    let got: Vec<f64> = stdout(&pred).lines().map(|l| l.parse().unwrap()).collect();
    let want = model.predict_matrix(&test).unwrap();
    assert_eq!(got, want);
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn depth_zero_is_a_global_fit() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "x,y\n0,1\n1,3\n2,5\n3,7\n");
    let model = dir.path().join("m.hrt");
    let out = hrt(&[
        "train",
        "--csv",
        &data,
        "--target",
        "y",
        "--max-depth",
        "0",
        "--out",
        path_str(&model),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(report_value(&stdout(&out), "leaves"), "1");

    let rows = write(&dir, "r.csv", "x\n10\n-1\n");
    let pred = hrt(&["predict", "--model", path_str(&model), "--csv", &rows]);
    let got: Vec<f64> = stdout(&pred).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(got.len(), 2);
    assert!(
        (got[0] - 21.0).abs() < 1e-9 && (got[1] + 1.0).abs() < 1e-9,
        "{got:?}"
    );
}

#[test]
fn constant_model_repeats_its_value() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "a,b,y\n0,0,1.7\n1,2,1.7\n2,1,1.7\n5,5,1.7\n");
    let model = dir.path().join("m.hrt");
    let out = hrt(&[
        "train",
        "--csv",
        &data,
        "--max-depth",
        "0",
        "--out",
        path_str(&model),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let rows = write(&dir, "r.csv", "a,b\n100,-3\n0.5,0.5\n-7,2\n");
    let pred = hrt(&["predict", "--model", path_str(&model), "--csv", &rows]);
    for line in stdout(&pred).lines() {
        let v: f64 = line.parse().unwrap();
        assert!((v - 1.7).abs() < 1e-9, "{line}");
    }
    assert_eq!(stdout(&pred).lines().count(), 3);

    let pred = hrt(&[
        "predict",
        "--model",
        path_str(&model),
        "--csv",
        &rows,
        "--classify",
    ]);
    assert_eq!(stdout(&pred), "1.0,1\n1.0,1\n1.0,1\n");
}

#[test]
fn missing_out_is_a_usage_error() {
    let out = hrt(&["train", "--synth", "sinc"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Usage"));
}

#[test]
fn unknown_flag_is_rejected() {
    let out = hrt(&["synth", "--fn", "sinc", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_flag_values_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.hrt");
    for step in ["0", "1.5", "fast"] {
        let out = hrt(&[
            "train",
            "--synth",
            "sinc",
            "--step",
            step,
            "--out",
            path_str(&m),
        ]);
        assert_eq!(out.status.code(), Some(2), "step {step}");
    }
    let out = hrt(&[
        "train",
        "--synth",
        "sinc",
        "--ridge",
        "-1",
        "--out",
        path_str(&m),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = hrt(&["synth", "--fn", "sinc", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hrt(&["train", "--synth", "nope", "--out", path_str(&m)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(hrt(&["--help"]).status.code(), Some(0));
    assert_eq!(hrt(&["--version"]).status.code(), Some(0));
    assert_eq!(hrt(&["train", "--help"]).status.code(), Some(0));
}

#[test]
fn synth_zero_noise_matches_formula() {
    let out = hrt(&[
        "synth",
        "--fn",
        "twisted_sigmoid",
        "--n",
        "4",
        "--noise",
        "0",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,y"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 4);
    for (x, y) in rows {
        assert!((-3.0..=3.0).contains(&x));
        assert_eq!(y, 2.0 / (1.0 + (-3.0 * x).exp()) - 0.8 * x);
    }
}

#[test]
fn synth_is_seeded() {
    let a = stdout(&hrt(&["synth", "--fn", "f2", "--n", "20", "--seed", "5"]));
    let b = stdout(&hrt(&["synth", "--fn", "f2", "--n", "20", "--seed", "5"]));
    let c = stdout(&hrt(&["synth", "--fn", "f2", "--n", "20", "--seed", "6"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with("x1,x2,y\n"));
}

#[test]
fn closed_stdout_exits_quietly() {
    use std::io::Read;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_hrt"))
        .args(["synth", "--fn", "f2", "--n", "200000"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut head = [0u8; 16];
    child.stdout.take().unwrap().read_exact(&mut head).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(stderr(&out), "");
}

#[test]
fn dimension_mismatch_exits_three() {
    let dir = TempDir::new().unwrap();
    let (_, _) = train_sinc(&dir, "m.hrt");
    let model = dir.path().join("m.hrt");
    let rows = write(&dir, "r.csv", "a,b\n1,2\n");
    let out = hrt(&["predict", "--model", path_str(&model), "--csv", &rows]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("expected 1"), "{}", stderr(&out));

    let out = hrt(&[
        "eval",
        "--model",
        path_str(&model),
        "--synth",
        "f1",
        "--n",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn data_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.hrt");
    let bad = write(&dir, "bad.csv", "x,y\n1,2\n3,abc\n");
    let out = hrt(&["train", "--csv", &bad, "--out", path_str(&m)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("abc"));

    let out = hrt(&[
        "train",
        "--csv",
        "/nonexistent/data.csv",
        "--out",
        path_str(&m),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let good = write(&dir, "good.csv", "x,y\n1,2\n3,4\n");
    let out = hrt(&[
        "train",
        "--csv",
        &good,
        "--target",
        "z",
        "--out",
        path_str(&m),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let junk = write(&dir, "junk.hrt", "not a model\n");
    let out = hrt(&["predict", "--model", &junk, "--csv", &good]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn non_binary_classification_targets_exit_four() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "x,y\n0,0\n1,1\n2,2\n");
    let m = dir.path().join("m.hrt");
    let out = hrt(&["train", "--csv", &data, "--classify", "--out", path_str(&m)]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn eval_scores_a_model() {
    let dir = TempDir::new().unwrap();
    let (_, _) = train_sinc(&dir, "m.hrt");
    let model = dir.path().join("m.hrt");
    let out = hrt(&[
        "eval",
        "--model",
        path_str(&model),
        "--synth",
        "sinc",
        "--noise",
        "0",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    let rmse: f64 = report_value(&report, "rmse").parse().unwrap();
    let r2: f64 = report_value(&report, "r2").parse().unwrap();
    assert!(rmse < 0.05, "{report}");
    assert!(r2 > 0.95, "{report}");
}

#[test]
fn eval_classification_metrics() {
    let dir = TempDir::new().unwrap();
    let data = write(
        &dir,
        "d.csv",
        "x,y\n-3,0\n-2,0\n-1,0\n-0.5,0\n0.5,1\n1,1\n2,1\n3,1\n",
    );
    let m = dir.path().join("m.hrt");
    let out = hrt(&[
        "train",
        "--csv",
        &data,
        "--classify",
        "--max-depth",
        "0",
        "--out",
        path_str(&m),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = hrt(&[
        "eval",
        "--model",
        path_str(&m),
        "--csv",
        &data,
        "--classify",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(report_value(&report, "auc"), "1");
    assert_eq!(report_value(&report, "accuracy"), "1");
    assert_eq!(report_value(&report, "f1"), "1");
}

#[test]
fn eval_runs_repeated_experiments() {
    let out = hrt(&[
        "eval",
        "--synth",
        "twisted_sigmoid",
        "--n",
        "300",
        "--max-depth",
        "3",
        "--reps",
        "3",
        "--seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(report_value(&report, "reps"), "3");
    let rmse: f64 = report_value(&report, "rmse_mean").parse().unwrap();
    assert!(rmse > 0.0 && rmse < 0.1, "{report}");
}

#[test]
fn ablate_two_steps_orders_fallback_rates() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("ablation.csv");
    let out = hrt(&[
        "ablate",
        "--synth",
        "sinc",
        "--n",
        "1000",
        "--noise",
        "0.025",
        "--max-depth",
        "6",
        "--ridge",
        "0.001",
        "--rmse-threshold",
        "0.03",
        "--steps",
        "0.01,0.5",
        "--reps",
        "10",
        "--jobs",
        "4",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 3, "{}", stdout(&out));

    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("step,rmse_mean,rmse_std,avg_leaves,avg_iterations,avg_time_s,avg_fallbacks,avg_splits,fallback_rate_pct")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "0.01");
    assert_eq!(rows[1][0], "0.5");
    let rate = |r: &Vec<&str>| r[8].parse::<f64>().unwrap();
    assert!(rate(&rows[0]) < rate(&rows[1]), "{text}");
}

#[test]
fn ablate_without_out_keeps_stdout_machine_readable() {
    let out = hrt(&[
        "ablate",
        "--synth",
        "twisted_sigmoid",
        "--n",
        "200",
        "--max-depth",
        "2",
        "--steps",
        "auto,1",
        "--reps",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("step,"));
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("auto,"));
    assert!(stderr(&out).contains("fb rate"));
}

#[test]
fn jobs_do_not_change_results() {
    let serial = stdout(&hrt(&[
        "eval",
        "--synth",
        "sinc",
        "--n",
        "300",
        "--reps",
        "4",
        "--max-depth",
        "3",
        "--jobs",
        "1",
    ]));
    let parallel = stdout(&hrt(&[
        "eval",
        "--synth",
        "sinc",
        "--n",
        "300",
        "--reps",
        "4",
        "--max-depth",
        "3",
        "--jobs",
        "4",
    ]));
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("avg_time_s="))
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&serial), strip(&parallel));
}
