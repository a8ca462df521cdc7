//! End-to-end CLI behavior on miniature inputs: exit codes, seeded
//! determinism, and the train/predict loop.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nrvq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nrvq"))
}

fn run(args: &[&str]) -> Output {
    nrvq().args(args).output().expect("spawn nrvq")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// synth a small clip set once per test dir.
fn synth_into(dir: &Path, frames: usize) -> PathBuf {
    let clips = dir.join("clips");
    let out = run(&[
        "synth",
        "--out",
        clips.to_str().unwrap(),
        "--classes",
        "2",
        "--seed",
        "5",
        "--width",
        "48",
        "--height",
        "48",
        "--frames",
        &frames.to_string(),
    ]);
    assert_code(&out, 0);
    clips
}

#[test]
fn unknown_subcommand_exits_one_with_usage() {
    let out = run(&["frobnicate"]);
    assert_code(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage") || stderr.contains("usage"), "{stderr}");
}

#[test]
fn unknown_eval_experiment_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.csv");
    std::fs::write(&ds, "").unwrap();
    let out = run(&[
        "eval",
        "bogus",
        "--dataset",
        ds.to_str().unwrap(),
        "--out",
        dir.path().join("rep").to_str().unwrap(),
    ]);
    assert_code(&out, 1);
}

#[test]
fn missing_dataset_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "train",
        "--dataset",
        dir.path().join("nope.csv").to_str().unwrap(),
        "--algo",
        "lr",
        "--out",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_code(&out, 2);
}

#[test]
fn bad_hyperparameter_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.csv");
    std::fs::write(&ds, "x").unwrap();
    let out = run(&[
        "train",
        "--dataset",
        ds.to_str().unwrap(),
        "--algo",
        "rt",
        "--out",
        dir.path().join("m.json").to_str().unwrap(),
        "--param",
        "bogus=3",
    ]);
    assert_code(&out, 1);
}

#[test]
fn synth_writes_named_class_clips() {
    let dir = tempfile::tempdir().unwrap();
    let clips = synth_into(dir.path(), 6);
    let mut names: Vec<String> = std::fs::read_dir(&clips)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, vec!["drift.y4m", "grad.y4m"]);
}

#[test]
fn full_pipeline_smoke_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let clips = synth_into(dir.path(), 6);
    let ds1 = dir.path().join("a.csv");
    let ds2 = dir.path().join("b.csv");
    for ds in [&ds1, &ds2] {
        let out = run(&[
            "extract",
            "--clips",
            clips.to_str().unwrap(),
            "--out",
            ds.to_str().unwrap(),
            "--seed",
            "7",
            "--jobs",
            "2",
        ]);
        assert_code(&out, 0);
    }
    // byte-identical dataset across runs
    assert_eq!(std::fs::read(&ds1).unwrap(), std::fs::read(&ds2).unwrap());

    // train + predict on a reference clip: prints one 6-decimal number
    let model = dir.path().join("rt.model.json");
    let out = run(&[
        "train",
        "--dataset",
        ds1.to_str().unwrap(),
        "--algo",
        "rt",
        "--out",
        model.to_str().unwrap(),
        "--seed",
        "1",
    ]);
    assert_code(&out, 0);
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--clip",
        clips.join("grad.y4m").to_str().unwrap(),
        "--loss",
        "0",
        "--bitrate",
        "5120",
    ]);
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let q: f64 = stdout.trim().parse().expect("numeric prediction");
    assert!((0.0..=1.0).contains(&q));
    assert_eq!(stdout.trim().split('.').nth(1).map(|d| d.len()), Some(6));

    // eval cv twice with the same seed: byte-identical report directory
    let rep1 = dir.path().join("rep1");
    let rep2 = dir.path().join("rep2");
    for rep in [&rep1, &rep2] {
        let out = run(&[
            "eval",
            "cv",
            "--dataset",
            ds1.to_str().unwrap(),
            "--algos",
            "lr,rt",
            "--k",
            "4",
            "--out",
            rep.to_str().unwrap(),
            "--seed",
            "3",
        ]);
        assert_code(&out, 0);
    }
    let list = |d: &Path| {
        let mut files: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        files.sort();
        files
    };
    let files = list(&rep1);
    assert_eq!(files, list(&rep2));
    assert!(files.contains(&"report.csv".to_string()));
    assert!(files.contains(&"report.md".to_string()));
    for f in &files {
        assert_eq!(
            std::fs::read(rep1.join(f)).unwrap(),
            std::fs::read(rep2.join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
}

#[test]
fn config_file_preloads_flags_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let clips_cfg = dir.path().join("clips_from_config");
    let config = dir.path().join("nrvq.conf");
    std::fs::write(
        &config,
        format!(
            "out={}\nclasses=2\nseed=5\nwidth=48\nheight=48\nframes=6\n",
            clips_cfg.display()
        ),
    )
    .unwrap();
    let out = run(&["synth", "--config", config.to_str().unwrap()]);
    assert_code(&out, 0);
    assert!(clips_cfg.join("grad.y4m").exists());

    // explicit flag beats the config value
    let override_dir = dir.path().join("override");
    let out = run(&[
        "synth",
        "--config",
        config.to_str().unwrap(),
        "--out",
        override_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    assert!(override_dir.join("grad.y4m").exists());
}
