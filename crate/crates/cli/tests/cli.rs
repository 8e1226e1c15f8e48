use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fmt-effort"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_writes_requested_rows_and_moments() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edu.csv");
    let out = ok(&["synth", "edu", "1000", "--seed", "7", "--out", s(&path)]);
    let csv = fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 1001);
    assert!(String::from_utf8(out.stdout).unwrap().contains("mean="));
}

#[test]
fn synth_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    ok(&["synth", "ind2", "300", "--seed", "3", "--out", s(&a)]);
    ok(&["synth", "ind2", "300", "--seed", "3", "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn unknown_profile_fails_with_message() {
    let out = run(&["synth", "foo", "10"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("unknown profile"));
}

#[test]
fn ucp_worked_example() {
    let out = ok(&["ucp", s(&fixture("worked_example.json"))]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("UCP   35.5215"), "{text}");
    assert!(text.contains("effort 710.43 PH"), "{text}");
}

#[test]
fn train_predict_evaluate_every_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bench.csv");
    ok(&["bench", "60", "--seed", "5", "--out", s(&data)]);
    for kind in ["fmt", "treeboost", "mlr", "ucp"] {
        let model = dir.path().join(format!("{kind}.json"));
        let preds = dir.path().join(format!("{kind}.csv"));
        let report = dir.path().join(format!("{kind}-report.json"));
        ok(&[
            "train",
            s(&data),
            "--model",
            kind,
            "--trees",
            "50",
            "--out",
            s(&model),
        ]);
        let saved: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
        assert_eq!(saved["kind"], kind);
        ok(&["predict", s(&model), s(&data), "--out", s(&preds)]);
        let lines: Vec<String> = fs::read_to_string(&preds)
            .unwrap()
            .lines()
            .map(String::from)
            .collect();
        assert_eq!(lines[0], "id,predicted");
        assert_eq!(lines.len(), 61);
        let out = ok(&["evaluate", s(&preds), s(&data), "--out", s(&report)]);
        assert!(String::from_utf8(out.stdout).unwrap().starts_with("MMRE"));
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        assert!(json["mmre"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn evaluate_names_missing_ids() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bench.csv");
    ok(&["bench", "20", "--out", s(&data)]);
    let preds = dir.path().join("p.csv");
    fs::write(&preds, "id,predicted\nb001,100\nzzz,5\n").unwrap();
    let out = run(&["evaluate", s(&preds), s(&data)]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("b002") && err.contains("zzz"), "{err}");
}

#[test]
fn predict_rejects_malformed_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bench.csv");
    ok(&["bench", "20", "--out", s(&data)]);
    let model = dir.path().join("m.json");
    fs::write(&model, r#"{"kind":"forest","model":{}}"#).unwrap();
    assert!(!run(&["predict", s(&model), s(&data)]).status.success());
}

#[test]
fn invalid_overrides_rejected_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("does-not-exist.csv");
    let out = run(&[
        "train",
        s(&missing),
        "--fuzzifier",
        "1.0",
        "--out",
        s(&dir.path().join("m.json")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("fuzzifier"));
}

#[test]
fn compare_emits_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bench.csv");
    ok(&["bench", "84", "--seed", "2024", "--out", s(&data)]);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&[
        "compare",
        s(&data),
        "--seed",
        "2024",
        "--train-count",
        "59",
        "--out",
        s(&a),
    ]);
    ok(&[
        "compare",
        s(&data),
        "--seed",
        "2024",
        "--train-count",
        "59",
        "--out",
        s(&b),
    ]);
    for file in [
        "metrics.txt",
        "wtl.txt",
        "report.json",
        "wtl.json",
        "residuals.svg",
    ] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let metrics = fs::read_to_string(a.join("metrics.txt")).unwrap();
    for model in ["FMT", "Treeboost", "MLR", "UCP"] {
        assert!(metrics.contains(model));
    }
    let svg = fs::read_to_string(a.join("residuals.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="box""#).count(), 4);
}

#[test]
fn compare_rejects_zero_train_count() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bench.csv");
    ok(&["bench", "30", "--out", s(&data)]);
    let out = run(&[
        "compare",
        s(&data),
        "--train-count",
        "0",
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert!(!out.status.success());
}

#[test]
fn log_output_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bench.csv");
    ok(&["bench", "30", "--out", s(&data)]);
    let model = dir.path().join("m.json");
    let out = bin()
        .env("FMT_LOG", "info")
        .args(["train", s(&data), "--model", "mlr", "--out", s(&model)])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8(out.stderr).unwrap().contains("training"));
}
