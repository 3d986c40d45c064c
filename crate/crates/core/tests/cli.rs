use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_juggler-mab");

fn juggler(dir: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.current_dir(dir)
        .args(args)
        .env_remove("JUGGLER_MAB_THREADS");
    if let Some(t) = threads {
        cmd.env("JUGGLER_MAB_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Writes a small two-brand generator config and a run config, then
/// generates `data.jsonl`.
fn workspace() -> (tempfile::TempDir, PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_path_buf();
    fs::write(
        dir.join("gen.json"),
        r#"{"seed": 3, "days": 4, "searches_per_day": 50, "items_per_search": 8,
            "reward_gap": 0.1, "label_noise": 0.1,
            "context_effect": {"brand_0": 6, "brand_1": 2}}"#,
    )
    .unwrap();
    fs::write(
        dir.join("run.json"),
        r#"{"dataset": "data.jsonl", "output_dir": "out", "seed": 5}"#,
    )
    .unwrap();
    ok(juggler(
        &dir,
        &["generate", "--config", "gen.json", "--out", "data.jsonl"],
        None,
    ));
    (tmp, dir)
}

#[test]
fn generate_is_reproducible_and_sized() {
    let (_tmp, dir) = workspace();
    ok(juggler(
        &dir,
        &["generate", "--config", "gen.json", "--out", "again.jsonl"],
        None,
    ));
    let a = fs::read(dir.join("data.jsonl")).unwrap();
    assert_eq!(a, fs::read(dir.join("again.jsonl")).unwrap());
    assert_eq!(a.iter().filter(|&&b| b == b'\n').count(), 1 + 4 * 50);

    ok(juggler(
        &dir,
        &[
            "generate",
            "--config",
            "gen.json",
            "--out",
            "other.jsonl",
            "--seed",
            "4",
        ],
        None,
    ));
    assert_ne!(a, fs::read(dir.join("other.jsonl")).unwrap());
}

#[test]
fn simulate_defaults_to_baseline_and_is_stable() {
    let (_tmp, dir) = workspace();
    let stdout = ok(juggler(&dir, &["simulate", "--config", "run.json"], None));
    assert!(stdout.lines().nth(1).unwrap().starts_with("baseline\t"));
    let out = dir.join("out");
    for name in [
        "decisions_baseline.jsonl",
        "snapshot_baseline.json",
        "summary.csv",
        "daily.csv",
    ] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.lines().nth(1).unwrap().starts_with("baseline,"));

    let log = fs::read(out.join("decisions_baseline.jsonl")).unwrap();
    ok(juggler(
        &dir,
        &["simulate", "--config", "run.json"],
        Some("1"),
    ));
    assert_eq!(log, fs::read(out.join("decisions_baseline.jsonl")).unwrap());
}

#[test]
fn outputs_do_not_depend_on_thread_setting() {
    let (_tmp, dir) = workspace();
    let mut logs = Vec::new();
    for (i, threads) in ["1", "3", "0"].into_iter().enumerate() {
        let out = format!("t{i}");
        ok(juggler(
            &dir,
            &[
                "simulate",
                "--config",
                "run.json",
                "--policy",
                "rls_brand",
                "--out",
                &out,
            ],
            Some(threads),
        ));
        let d = dir.join(&out);
        logs.push((
            fs::read(d.join("decisions_rls_brand.jsonl")).unwrap(),
            fs::read(d.join("summary.csv")).unwrap(),
            fs::read(d.join("daily.csv")).unwrap(),
        ));
    }
    assert!(logs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn sweep_then_report() {
    let (_tmp, dir) = workspace();
    let data_before = fs::read(dir.join("data.jsonl")).unwrap();
    let stdout = ok(juggler(&dir, &["sweep", "--config", "run.json"], None));
    assert_eq!(stdout.lines().count(), 12);
    let summary = fs::read_to_string(dir.join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 12);
    assert_eq!(
        summary.lines().next().unwrap(),
        "policy,avg_reward,avg_regret,best_arm_pct"
    );

    let report = ok(juggler(
        &dir,
        &[
            "report",
            "--config",
            "run.json",
            "--out",
            "rep",
            "--baseline",
            "out/decisions_baseline.jsonl",
            "out/decisions_rls_brand.jsonl",
            "out/decisions_epsilon_greedy_0.1.jsonl",
        ],
        None,
    ));
    assert!(report.contains("rls_brand\t+"), "{report}");
    let comparison = fs::read_to_string(dir.join("rep/comparison.csv")).unwrap();
    assert_eq!(comparison.lines().count(), 3);
    assert!(comparison.contains("epsilon_greedy_0.1"));
    let topk = fs::read_to_string(dir.join("rep/topk_delta.csv")).unwrap();
    assert!(topk.contains("margin_pct"));
    assert_eq!(data_before, fs::read(dir.join("data.jsonl")).unwrap());
}

#[test]
fn errors_are_single_line_diagnostics() {
    let (_tmp, dir) = workspace();
    let cases: [&[&str]; 4] = [
        &["simulate", "--config", "missing.json"],
        &["generate", "--config", "run.json", "--out", "x.jsonl"],
        &["simulate", "--config", "run.json", "--policy", "ucb"],
        &["simulate", "--config", "run.json", "--data", "nope.jsonl"],
    ];
    for args in cases {
        let out = juggler(&dir, args, None);
        assert!(!out.status.success(), "{args:?}");
        let stderr = String::from_utf8(out.stderr).unwrap();
        assert!(stderr.starts_with("error: "), "{args:?}: {stderr}");
        assert_eq!(stderr.trim_end().lines().count(), 1, "{args:?}: {stderr}");
    }

    fs::write(
        dir.join("typo.json"),
        r#"{"dataset": "data.jsonl", "seeed": 1}"#,
    )
    .unwrap();
    let stderr =
        String::from_utf8(juggler(&dir, &["simulate", "--config", "typo.json"], None).stderr)
            .unwrap();
    assert!(stderr.contains("seeed"), "{stderr}");

    let bad = juggler(&dir, &["simulate", "--config", "run.json"], Some("many"));
    assert!(!bad.status.success());
    assert!(String::from_utf8(bad.stderr)
        .unwrap()
        .contains("JUGGLER_MAB_THREADS"));
}
