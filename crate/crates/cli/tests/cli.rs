use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn imwa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imwa"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &[&str] = &[
    "--total-iterations",
    "60",
    "--episodes",
    "3",
    "--head-count",
    "40",
    "--test-per-class",
    "20",
    "--hidden",
    "8",
    "--batch-size",
    "8",
];

fn small_run(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    imwa(dir, &args)
}

#[test]
fn run_writes_the_documented_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_run(tmp.path(), &["--seeds", "0,1", "--name", "demo"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let root = tmp.path().join("runs/demo");
    for f in [
        "config.toml",
        "results/results.jsonl",
        "results/summary.txt",
        "results/series.jsonl",
        "logs/episodes.jsonl",
        "checkpoints/baseline-seed0.theta.imwa",
        "checkpoints/imwa-seed1.theta.imwa",
    ] {
        assert!(root.join(f).is_file(), "missing {f}");
    }
    assert!(!root.join("checkpoints/imwa-seed0.ema.imwa").exists());
    let text = stdout(&out);
    assert!(
        text.lines().any(|l| l.starts_with("baseline: top1")),
        "{text}"
    );
    assert!(text.lines().any(|l| l.starts_with("imwa: top1")), "{text}");
    let results = fs::read_to_string(root.join("results/results.jsonl")).unwrap();
    assert_eq!(results.lines().count(), 2 * 2 + 1);
    assert!(results
        .lines()
        .last()
        .unwrap()
        .contains("\"kind\":\"arm-summary\""));
}

#[test]
fn ema_runs_write_two_checkpoints_per_arm_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_run(tmp.path(), &["--use-ema", "true", "--arms", "imwa"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut names: Vec<String> = fs::read_dir(tmp.path().join("runs/run/checkpoints"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["imwa-seed0.ema.imwa", "imwa-seed0.theta.imwa"]);
}

#[test]
fn existing_output_is_kept_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(small_run(tmp.path(), &[]).status.success());
    let again = small_run(tmp.path(), &[]);
    assert!(!again.status.success());
    assert!(stderr(&again).contains("--force"), "{}", stderr(&again));
    assert!(small_run(tmp.path(), &["--force"]).status.success());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(small_run(tmp.path(), &["--name", "a"]).status.success());
    assert!(small_run(tmp.path(), &["--name", "b"]).status.success());
    let read =
        |n: &str| fs::read(tmp.path().join(format!("runs/{n}/results/results.jsonl"))).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.toml"),
        "name = \"from-file\"\n[schedule]\ntotal_iterations = 40\nepisodes = 2\nnum_models = 3\n\
         [experiment]\narms = [\"imwa\"]\n[dataset]\nhead_count = 30\ntest_per_class = 5\n\
         [model]\nhidden = [4]\n[trainer]\nbatch_size = 4\n",
    )
    .unwrap();
    let out = imwa(tmp.path(), &["run", "-c", "c.toml", "--episodes", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let cfg = fs::read_to_string(tmp.path().join("runs/from-file/config.toml")).unwrap();
    assert!(cfg.contains("num_episodes = 4"), "{cfg}");
    assert!(cfg.contains("num_models = 3"), "{cfg}");
}

#[test]
fn invalid_configs_fail_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    let out = imwa(tmp.path(), &["run", "--num-models", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(
        err.contains("schedule.num_models") && err.contains("M >= 1"),
        "{err}"
    );
    assert!(!err.contains("panicked"));
    assert!(!tmp.path().join("runs").exists());

    fs::write(tmp.path().join("bad.toml"), "[schedule]\nepisodez = 2\n").unwrap();
    let out = imwa(tmp.path(), &["run", "-c", "bad.toml"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("episodez"), "{}", stderr(&out));

    let out = imwa(tmp.path(), &["run", "--learning-rate", "0"]);
    assert!(
        stderr(&out).contains("trainer.learning_rate"),
        "{}",
        stderr(&out)
    );

    let out = imwa(tmp.path(), &["run", "--csv-path", "nope.csv"]);
    assert!(
        stderr(&out).contains("dataset.csv_path"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn inspect_reports_layout_and_zero_self_distance() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(small_run(tmp.path(), &["--arms", "imwa"]).status.success());
    let ck = "runs/run/checkpoints/imwa-seed0.theta.imwa";
    fs::copy(tmp.path().join(ck), tmp.path().join("copy.imwa")).unwrap();
    let out = imwa(tmp.path(), &["inspect", ck, "copy.imwa"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("16->8->10"), "{text}");
    assert!(text.contains("parameters  226"), "{text}");
    let dist = text.lines().last().unwrap();
    assert!(dist.ends_with(" 0.0"), "{text}");
}

#[test]
fn inspect_names_a_corrupt_file() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("junk.imwa"), b"IMWA\x01\x00").unwrap();
    let out = imwa(tmp.path(), &["inspect", "junk.imwa"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("junk.imwa"), "{err}");
    assert!(!err.contains("panicked"), "{err}");
}

#[test]
fn ablations_write_one_row_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["ablate-e", "--values", "1,3", "--name", "e"];
    args.extend_from_slice(SMALL);
    let out = imwa(tmp.path(), &args);
    assert!(out.status.success(), "{}", stderr(&out));
    // header, rule, two rows, location line
    assert_eq!(stdout(&out).lines().count(), 5, "{}", stdout(&out));
    let results = fs::read_to_string(tmp.path().join("runs/e/results/results.jsonl")).unwrap();
    assert!(results
        .lines()
        .last()
        .unwrap()
        .contains("\"kind\":\"ablation-summary\""));

    let mut args = vec!["ablate-gamma", "--values", "1,4", "--name", "g"];
    args.extend_from_slice(SMALL);
    let out = imwa(tmp.path(), &args);
    assert!(out.status.success(), "{}", stderr(&out));
    let results = fs::read_to_string(tmp.path().join("runs/g/results/results.jsonl")).unwrap();
    assert!(results.contains("baseline@gamma=4"));
    assert!(results
        .lines()
        .last()
        .unwrap()
        .contains("\"kind\":\"gamma-summary\""));
}

#[test]
fn exported_csv_feeds_back_into_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = imwa(
        tmp.path(),
        &[
            "export-dataset",
            "--out",
            "data",
            "--head-count",
            "30",
            "--test-per-class",
            "5",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let out = imwa(
        tmp.path(),
        &[
            "run",
            "--csv-path",
            "data/train.csv",
            "--eval-path",
            "data/test.csv",
            "--total-iterations",
            "20",
            "--episodes",
            "2",
            "--batch-size",
            "8",
            "--hidden",
            "4",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
}
