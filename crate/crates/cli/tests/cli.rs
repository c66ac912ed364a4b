use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn strata(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strata"))
        .args(args)
        .current_dir(cwd)
        .env("STRATA_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_pipeline_eval() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&strata(
        &[
            "synth",
            "--count",
            "2",
            "--seed",
            "10",
            "--min-objects",
            "3",
            "--max-objects",
            "4",
            "--out",
            "data",
        ],
        d,
    ));
    assert!(d.join("data/manifest.json").is_file());
    assert!(d.join("data/scene_0010/cloud.ply").is_file());

    ok(&strata(&["pipeline", "data", "--out", "pred", "--dot"], d));
    for f in [
        "primitives.json",
        "patterns.json",
        "assignment.json",
        "hierarchy.json",
        "hierarchy.dot",
        "affinity.csv",
        "mask.png",
        "patterns.dot",
    ] {
        assert!(d.join("pred/scene_0011").join(f).is_file(), "{f}");
    }

    let out = strata(&["eval", "pred", "data", "--out", "report"], d);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("scenes 2 skipped 0"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("report/summary.json")).unwrap()).unwrap();
    assert!(summary["overlap"]["F"].as_f64().unwrap() > 0.9);
    assert!(summary["spectral_section"]["std"].as_f64().unwrap() >= 0.0);
    let csv = fs::read_to_string(d.join("report/eval.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn stages_match_the_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&strata(
        &[
            "synth",
            "--seed",
            "3",
            "--min-objects",
            "3",
            "--max-objects",
            "3",
            "--out",
            "data",
        ],
        d,
    ));
    let scene = "data/scene_0003";
    ok(&strata(
        &["pipeline", scene, "--out", "whole", "--seed", "4", "--heuristic"],
        d,
    ));
    for args in [
        vec!["extract", scene],
        vec!["patterns"],
        vec!["segment"],
        vec!["infer", "--input", scene],
    ] {
        let mut a = args.clone();
        a.extend(["--out", "staged", "--seed", "4", "--heuristic"]);
        ok(&strata(&a, d));
    }
    for f in [
        "primitives.json",
        "patterns.json",
        "assignment.json",
        "hierarchy.json",
        "hierarchy.dot",
        "affinity.csv",
        "mask.png",
    ] {
        assert_eq!(
            fs::read(d.join("whole").join(f)).unwrap(),
            fs::read(d.join("staged").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("empty.ply"),
        "ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
    )
    .unwrap();
    let empty = strata(&["pipeline", "empty.ply"], d);
    assert_eq!(empty.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&empty.stderr).contains("empty input"));
    assert_eq!(strata(&["pipeline", "missing.ply"], d).status.code(), Some(2));
    assert_eq!(strata(&["patterns", "--out", "nowhere"], d).status.code(), Some(2));

    fs::write(d.join("bad.toml"), "tau = 0.1\ndelta = 0.2\n").unwrap();
    assert_eq!(
        strata(&["pipeline", "empty.ply", "--config", "bad.toml"], d)
            .status
            .code(),
        Some(2)
    );
    fs::write(d.join("typo.toml"), "theta_adjj = 0.1\n").unwrap();
    assert_eq!(
        strata(&["pipeline", "empty.ply", "--config", "typo.toml"], d)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        strata(&["pipeline", "empty.ply", "--exact", "--heuristic"], d)
            .status
            .code(),
        Some(2)
    );

    // an exact solve above the cap is a solver error and leaves the instance
    ok(&strata(
        &["synth", "--min-objects", "2", "--max-objects", "2", "--out", "data"],
        d,
    ));
    fs::write(d.join("cap.toml"), "exact_cap = 2\n").unwrap();
    let capped = strata(
        &[
            "pipeline",
            "data/scene_0000",
            "--exact",
            "--config",
            "cap.toml",
            "--out",
            "o",
        ],
        d,
    );
    assert_eq!(capped.status.code(), Some(3));
    assert!(d.join("o/qip_instance.json").is_file());
}
