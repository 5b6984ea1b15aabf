use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use doagc::metrics::MetricsBundle;
use doagc::model::{TrainConfig, TrainTrace, ViewHomophily};
use doagc::Tensor;
use serde::{Deserialize, Serialize};

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const EMBEDDING_FILE: &str = "embedding.csv";
pub const ASSIGNMENTS_FILE: &str = "assignments.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub dataset: String,
    pub n: usize,
    pub k: usize,
    pub views: usize,
    pub seed: u64,
    pub config: TrainConfig,
    /// Absent when the dataset has no labels.
    pub metrics: Option<MetricsBundle>,
    pub final_w: Vec<f64>,
    pub homophily: Vec<ViewHomophily>,
    pub wall_clock_seconds: f64,
}

impl RunSummary {
    pub fn read(dir: &Path) -> anyhow::Result<Self> {
        let path = dir.join(SUMMARY_FILE);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn metric_cells(buf: &mut String, m: Option<&MetricsBundle>) {
    match m {
        Some(m) => write!(buf, ",{},{},{},{}", m.acc, m.nmi, m.ari, m.f1).unwrap(),
        None => buf.push_str(",,,,"),
    }
}

fn w_header(buf: &mut String, views: usize) {
    for v in 1..=views {
        write!(buf, ",w_{v}").unwrap();
    }
}

pub fn trace_csv(trace: &TrainTrace, views: usize) -> String {
    let mut buf = String::from("epoch,loss_rec,loss_nrec");
    w_header(&mut buf, views);
    buf.push_str(",acc,nmi,ari,f1\n");
    for r in &trace.records {
        write!(buf, "{},{},{}", r.epoch, r.loss_rec, r.loss_nrec).unwrap();
        for w in &r.w {
            write!(buf, ",{w}").unwrap();
        }
        metric_cells(&mut buf, r.metrics.as_ref());
        buf.push('\n');
    }
    buf
}

pub fn matrix_csv(m: &Tensor) -> String {
    let mut buf = String::new();
    for row in m.row_iter() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                buf.push(',');
            }
            write!(buf, "{v}").unwrap();
        }
        buf.push('\n');
    }
    buf
}

pub fn assignments_csv(a: &[usize]) -> String {
    a.iter().map(|c| format!("{c}\n")).collect()
}

pub fn read_assignments(path: &Path, n: usize) -> anyhow::Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let labels = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .with_context(|| format!("{}:{}: not a cluster id", path.display(), i + 1))
        })
        .collect::<anyhow::Result<Vec<usize>>>()?;
    anyhow::ensure!(
        labels.len() == n,
        "{}: {} assignments for {n} nodes",
        path.display(),
        labels.len()
    );
    Ok(labels)
}

pub struct SweepRow {
    pub value: String,
    pub metrics: Option<MetricsBundle>,
    pub final_w: Vec<f64>,
}

pub fn sweep_csv(rows: &[SweepRow], views: usize) -> String {
    let mut buf = String::from("value,acc,nmi,ari,f1");
    w_header(&mut buf, views);
    buf.push('\n');
    for r in rows {
        buf.push_str(&r.value);
        metric_cells(&mut buf, r.metrics.as_ref());
        for w in &r.final_w {
            write!(buf, ",{w}").unwrap();
        }
        buf.push('\n');
    }
    buf
}
