use std::path::Path;
use std::process::{Command, Output};

fn doagc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doagc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A small labeled dataset that trains in well under a second.
fn small_dataset(dir: &Path, homophily: &str) {
    let o = doagc(&[
        "synth", "--out", p(dir), "--nodes", "60", "--clusters", "3", "--views", "2",
        "--homophily", homophily, "--edges", "90", "--feature-dim", "8", "--seed", "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

const FAST: [&str; 6] = ["--hidden-dim", "16", "--embed-dim", "8", "--n-init", "2"];

fn train(data: &Path, out: &Path, epochs: &str, extra: &[&str]) -> Output {
    let mut args = vec!["train", "--data", p(data), "--out", p(out), "--epochs", epochs];
    args.extend(FAST);
    args.extend(extra);
    doagc(&args)
}

#[test]
fn synth_prints_exact_homophily() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = doagc(&[
        "synth", "--nodes", "300", "--clusters", "3", "--views", "2", "--homophily", "0.2,0.2",
        "--edges", "1200", "--feature-dim", "50", "--seed", "42", "--out", p(&out),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "homophily: 0.2000 0.2000");
    for f in ["manifest.json", "features.csv", "view_1.txt", "view_2.txt", "labels.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn synth_usage_and_range_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(doagc(&["synth", "--nodes", "30"]).status.code(), Some(2));
    let o = doagc(&["synth", "--out", p(&dir.path().join("x")), "--homophily", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = doagc(&[
        "synth", "--out", p(&dir.path().join("y")), "--nodes", "30", "--homophily", "1.0",
        "--edges", "200",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("maximum feasible edge count is 135"));
}

#[test]
fn single_epoch_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    small_dataset(&data, "0.4");
    let run = dir.path().join("run");
    let o = train(&data, &run, "1", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let trace = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "epoch,loss_rec,loss_nrec,w_1,w_2,acc,nmi,ari,f1");
    assert_eq!(lines.count(), 1);
    let assignments = std::fs::read_to_string(run.join("assignments.csv")).unwrap();
    assert_eq!(assignments.lines().count(), 60);
    let embedding = std::fs::read_to_string(run.join("embedding.csv")).unwrap();
    assert_eq!(embedding.lines().count(), 60);
    assert!(embedding.lines().all(|l| l.split(',').count() == 8));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 42);
    assert_eq!(summary["final_w"].as_array().unwrap().len(), 2);
    assert!(summary["metrics"]["acc"].is_number());
    assert!(summary["homophily"][0]["true_labels"]["a"].is_number());
}

#[test]
fn trace_has_one_row_per_epoch_and_loss_falls() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    small_dataset(&data, "0.5");
    let run = dir.path().join("run");
    assert!(train(&data, &run, "30", &[]).status.success());
    let trace = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    let rows: Vec<Vec<f64>> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 30);
    assert!(rows[29][1] < rows[0][1], "loss_rec {} -> {}", rows[0][1], rows[29][1]);
}

fn strip_clock(summary: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(summary).unwrap();
    v.as_object_mut().unwrap().remove("wall_clock_seconds");
    v
}

#[test]
fn identical_flags_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    small_dataset(&data, "0.3");
    let (r1, r2) = (dir.path().join("r1"), dir.path().join("r2"));
    assert!(train(&data, &r1, "5", &[]).status.success());
    assert!(train(&data, &r2, "5", &[]).status.success());
    for f in ["trace.csv", "embedding.csv", "assignments.csv"] {
        assert_eq!(std::fs::read(r1.join(f)).unwrap(), std::fs::read(r2.join(f)).unwrap(), "{f}");
    }
    let s1 = std::fs::read_to_string(r1.join("summary.json")).unwrap();
    let s2 = std::fs::read_to_string(r2.join("summary.json")).unwrap();
    assert_eq!(strip_clock(&s1), strip_clock(&s2));
}

#[test]
fn train_rejects_empty_reconstruction_and_bad_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    small_dataset(&data, "0.3");
    let o = train(&data, &dir.path().join("r"), "1", &["--no-s", "--no-a"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("r").exists());
    let o = train(&dir.path().join("missing"), &dir.path().join("r"), "1", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("manifest.json"));
}

#[test]
fn unlabeled_data_leaves_metric_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    small_dataset(&data, "0.3");
    let manifest = data.join("manifest.json");
    let text = std::fs::read_to_string(&manifest).unwrap();
    std::fs::write(&manifest, text.replace("\"labels.txt\"", "null")).unwrap();
    let run = dir.path().join("r");
    assert!(train(&data, &run, "2", &[]).status.success());
    let trace = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    assert!(trace.lines().skip(1).all(|l| l.ends_with(",,,,")));
    let o = doagc(&["analyze", "--data", p(&data), "--labels", "true"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_reports_homophily_table() {
    let dir = tempfile::tempdir().unwrap();
    let pure = dir.path().join("pure");
    let o = doagc(&[
        "synth", "--out", p(&pure), "--nodes", "60", "--clusters", "3", "--homophily", "1.0",
        "--edges", "90", "--feature-dim", "4",
    ]);
    assert!(o.status.success());
    let o = doagc(&["analyze", "--data", p(&pure), "--labels", "true"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("1 ") && l.contains("1.0000")), "{text}");

    let data = dir.path().join("d");
    small_dataset(&data, "0.1");
    let run = dir.path().join("r");
    assert!(train(&data, &run, "20", &[]).status.success());
    let o = doagc(&["analyze", "--data", p(&data), "--labels", "true", "--run", p(&run)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("HR(Â)"), "{text}");
    assert_eq!(text.matches('↑').count(), 2, "{text}");
    let o = doagc(&["analyze", "--data", p(&data), "--run", p(&run)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("pseudo-labels"));

    assert_eq!(doagc(&["analyze", "--data", p(&data)]).status.code(), Some(2));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    small_dataset(&data, "0.5");
    let out = dir.path().join("s");
    let mut args = vec![
        "sweep", "--data", p(&data), "--out", p(&out), "--epochs", "3", "--param", "order",
        "--values", "1,3,5",
    ];
    args.extend(FAST);
    let o = doagc(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "value,acc,nmi,ari,f1,w_1,w_2");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,") && lines[3].starts_with("5,"));
}

#[test]
fn sweep_rejects_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d");
    small_dataset(&data, "0.5");
    let out = dir.path().join("s");
    for (param, values) in [("order", ""), ("depth", "1"), ("order", "1.5"), ("w-init", "2")] {
        let o = doagc(&["sweep", "--data", p(&data), "--out", p(&out), "--param", param, "--values", values]);
        assert_eq!(o.status.code(), Some(2), "{param} {values}");
    }
    assert!(!out.exists());
}
