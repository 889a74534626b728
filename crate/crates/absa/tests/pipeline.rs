//! End-to-end checks of the `absa` binary: every test shells out to the
//! compiled executable and inspects exit codes, console output, and the
//! files left on disk.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{bytes_of, synthetic_corpus, write_twitter_3line, SyntheticSpec};

fn absa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_absa"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn absa");
    assert!(
        out.status.success(),
        "command {:?} failed with {:?}\nstdout: {}\nstderr: {}",
        cmd,
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    out
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Write a small raw corpus and run `prepare` over it with the binary;
/// returns the prepared dataset directory.
fn prepare_small(root: &Path, seed: u64) -> PathBuf {
    let spec = SyntheticSpec {
        train_per_class: 8,
        test_per_class: 3,
        ..SyntheticSpec::default()
    };
    let (train, test) = synthetic_corpus(&spec, seed);
    let raw_train = root.join("train.txt");
    let raw_test = root.join("test.txt");
    write_twitter_3line(&raw_train, &train).unwrap();
    write_twitter_3line(&raw_test, &test).unwrap();
    let out = root.join("prepared");
    run_ok(absa()
        .arg("prepare")
        .arg("--train")
        .arg(&raw_train)
        .arg("--test")
        .arg(&raw_test)
        .args(["--format", "twitter-3line", "--val-fraction", "0.2"])
        .arg("--out")
        .arg(&out));
    out
}

/// Fast hyperparameters for pipeline runs; correctness of the numbers is
/// the acceptance suite's business, this suite only checks plumbing.
fn fast_run_flags(cmd: &mut Command) -> &mut Command {
    cmd.args([
        "--dim", "8", "--k", "2", "--epochs", "2", "--batch", "8", "--patience", "5",
        "--bootstrap", "50", "--epsilon", "0.9",
    ])
}

#[test]
fn prepare_writes_a_complete_dataset_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let prepared = prepare_small(dir.path(), 11);

    for name in ["train.jsonl", "val.jsonl", "test.jsonl", "vocab.txt", "manifest.txt"] {
        assert!(prepared.join(name).is_file(), "prepare should write {name}");
    }
    let manifest = std::fs::read_to_string(prepared.join("manifest.txt")).unwrap();
    assert!(manifest.contains("train:"), "manifest lists class counts");
    assert!(manifest.contains("vocabulary:"), "manifest lists the vocabulary");

    // A second prepare from the same raw files is byte-identical.
    let again = dir.path().join("again");
    std::fs::create_dir_all(&again).unwrap();
    run_ok(absa()
        .arg("prepare")
        .arg("--train")
        .arg(dir.path().join("train.txt"))
        .arg("--test")
        .arg(dir.path().join("test.txt"))
        .args(["--format", "twitter-3line", "--val-fraction", "0.2"])
        .arg("--out")
        .arg(&again));
    for name in ["train.jsonl", "val.jsonl", "test.jsonl", "vocab.txt", "manifest.txt"] {
        assert_eq!(
            bytes_of(&prepared.join(name)),
            bytes_of(&again.join(name)),
            "{name} should not depend on when prepare ran"
        );
    }
}

#[test]
fn run_writes_artifacts_and_its_snapshot_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let prepared = prepare_small(dir.path(), 12);
    let out_a = dir.path().join("a");

    let out = run_ok(fast_run_flags(
        absa()
            .arg("run")
            .arg("--dataset")
            .arg(&prepared)
            .args(["--mode", "pg-as", "--seed", "3"]),
    )
    .arg("--out")
    .arg(&out_a));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("baseline: accuracy"), "stdout was: {stdout}");
    assert!(stdout.contains("pg-as: accuracy"), "stdout was: {stdout}");
    assert!(stdout.contains("bootstrap vs baseline"), "stdout was: {stdout}");
    assert!(stderr_of(&out).contains("training baseline"), "progress goes to stderr");

    let artifacts = [
        "config.txt",
        "baseline.ckpt",
        "baseline-history.tsv",
        "baseline-metrics.txt",
        "mining.jsonl",
        "supervision.jsonl",
        "enhanced.ckpt",
        "enhanced-history.tsv",
        "enhanced-metrics.txt",
    ];
    for name in artifacts {
        assert!(out_a.join(name).is_file(), "run should write {name}");
    }

    // Replaying the emitted snapshot (new --out only) reproduces every
    // artifact byte for byte.
    let out_b = dir.path().join("b");
    run_ok(absa()
        .arg("run")
        .arg("--config")
        .arg(out_a.join("config.txt"))
        .arg("--out")
        .arg(&out_b));
    for name in artifacts {
        if name == "config.txt" {
            continue; // differs in its `out` line by construction
        }
        assert_eq!(
            bytes_of(&out_a.join(name)),
            bytes_of(&out_b.join(name)),
            "{name} should replay identically from the snapshot"
        );
    }
}

#[test]
fn baseline_mode_skips_mining_and_honors_the_out_root_env() {
    let dir = tempfile::tempdir().unwrap();
    let prepared = prepare_small(dir.path(), 13);
    let out_root = dir.path().join("out-root");

    let out = run_ok(fast_run_flags(
        absa()
            .arg("run")
            .arg("--dataset")
            .arg(&prepared)
            .args(["--mode", "baseline", "--seed", "5"])
            .env("ABSA_OUT_ROOT", &out_root),
    ));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("baseline: accuracy"));
    assert!(!stdout.contains("bootstrap"), "no significance test in baseline mode");

    // Default output directory: $ABSA_OUT_ROOT/<dataset>-<mode>-seed<seed>.
    let run_dir = out_root.join("prepared-baseline-seed5");
    assert!(run_dir.is_dir(), "run should land under ABSA_OUT_ROOT");
    assert!(run_dir.join("baseline.ckpt").is_file());
    assert!(run_dir.join("baseline-metrics.txt").is_file());
    for name in ["mining.jsonl", "supervision.jsonl", "enhanced.ckpt"] {
        assert!(
            !run_dir.join(name).exists(),
            "baseline mode should not write {name}"
        );
    }
}

#[test]
fn usage_errors_exit_two_and_runtime_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();

    // No subcommand at all: the argument parser rejects it.
    let out = absa().output().unwrap();
    assert_eq!(out.status.code(), Some(2), "bare invocation is a usage error");

    // Unknown input format.
    let out = absa()
        .arg("prepare")
        .args(["--train", "x", "--test", "y", "--format", "csv"])
        .arg("--out")
        .arg(dir.path().join("p"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("unknown format"));

    // Unknown mode.
    let out = absa()
        .arg("run")
        .arg("--dataset")
        .arg(dir.path())
        .args(["--mode", "turbo"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Unknown key in a config file.
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "dataset = d\nwarp_speed = 9\n").unwrap();
    let out = absa().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("warp_speed"), "names the offending key");

    // A well-formed request against a dataset that does not exist is a
    // runtime failure, not a usage error.
    let out = absa()
        .arg("run")
        .arg("--dataset")
        .arg(dir.path().join("no-such-dataset"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_renders_text_and_selfcontained_html() {
    let dir = tempfile::tempdir().unwrap();
    let prepared = prepare_small(dir.path(), 14);
    let run_dir = dir.path().join("run");
    run_ok(fast_run_flags(
        absa()
            .arg("run")
            .arg("--dataset")
            .arg(&prepared)
            .args(["--mode", "aw-as", "--seed", "2"]),
    )
    .arg("--out")
    .arg(&run_dir));

    let report_dir = dir.path().join("report");
    run_ok(absa()
        .arg("report")
        .arg("--log")
        .arg(run_dir.join("mining.jsonl"))
        .arg("--dataset")
        .arg(&prepared)
        .arg("--checkpoint")
        .arg(run_dir.join("enhanced.ckpt"))
        .arg("--out")
        .arg(&report_dir)
        .args(["--limit", "4"]));

    let text = std::fs::read_to_string(report_dir.join("report.txt")).unwrap();
    assert!(text.contains("instance "), "text report lists instances:\n{text}");
    assert!(text.contains("k="), "text report shows per-iteration rows");

    let html = std::fs::read_to_string(report_dir.join("report.html")).unwrap();
    assert!(html.contains("<table"), "html report renders tables");
    for needle in ["http://", "https://", "src=", "<script"] {
        assert!(
            !html.contains(needle),
            "html report should be self-contained, found {needle:?}"
        );
    }

    // A log whose dataset hash disagrees is rejected as bad data (exit 1).
    let other = prepare_small(&{
        let d = dir.path().join("other");
        std::fs::create_dir_all(&d).unwrap();
        d
    }, 15);
    let out = absa()
        .arg("report")
        .arg("--log")
        .arg(run_dir.join("mining.jsonl"))
        .arg("--dataset")
        .arg(&other)
        .arg("--out")
        .arg(dir.path().join("report2"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "mismatched dataset is a data error");
}
