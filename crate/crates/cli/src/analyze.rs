use std::path::PathBuf;

use anyhow::Context;
use clap::{ArgAction, Args};
use doagc::data::load_dataset;
use doagc::graph::label_homophily;
use doagc::model::HomophilyTriple;

use crate::output::{read_assignments, RunSummary, ASSIGNMENTS_FILE};
use crate::usage;

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Measure against the dataset's ground-truth labels.
    #[arg(long, action = ArgAction::Set, default_value_t = false)]
    pub labels: bool,
    /// Directory of a finished `train` run. Supplies the similarity and
    /// reconstruction graphs, and pseudo-labels when --labels is false.
    #[arg(long)]
    pub run: Option<PathBuf>,
}

fn arrow(a: f64, b: f64) -> &'static str {
    if b > a {
        "↑"
    } else if b < a {
        "↓"
    } else {
        "="
    }
}

pub fn run(a: &AnalyzeArgs) -> anyhow::Result<()> {
    if !a.labels && a.run.is_none() {
        return Err(usage("no label source: pass --labels true or --run DIR"));
    }
    let ds = load_dataset(&a.data).with_context(|| format!("loading dataset {}", a.data.display()))?;
    let g = &ds.graph;

    let labels = if a.labels {
        g.labels
            .clone()
            .ok_or_else(|| usage(format!("{} has no labels file", a.data.display())))?
    } else {
        let dir = a.run.as_ref().expect("checked above");
        read_assignments(&dir.join(ASSIGNMENTS_FILE), g.n())?
    };

    let learned: Option<Vec<HomophilyTriple>> = match &a.run {
        None => None,
        Some(dir) => {
            let s = RunSummary::read(dir)?;
            anyhow::ensure!(
                s.n == g.n() && s.homophily.len() == g.num_views(),
                "run {} was trained on a different dataset shape",
                dir.display()
            );
            let triples = s
                .homophily
                .iter()
                .map(|v| if a.labels { v.true_labels } else { Some(v.pseudo_labels) })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| anyhow::anyhow!("run {} recorded no ground-truth homophily", dir.display()))?;
            Some(triples)
        }
    };

    let source = if a.labels { "true labels" } else { "pseudo-labels" };
    println!("homophily against {source}");
    println!("{:<6}{:>8}{:>8}{:>8}", "view", "HR(A)", "HR(S)", "HR(Â)");
    for (v, adj) in g.views.iter().enumerate() {
        let hr_a = label_homophily(adj.matrix(), &labels);
        match learned.as_ref().map(|t| t[v]) {
            Some(t) => println!(
                "{:<6}{:>8.4}{:>8.4}{:>8.4}  {}",
                v + 1,
                hr_a,
                t.s,
                t.a_hat,
                arrow(hr_a, t.a_hat)
            ),
            None => println!("{:<6}{:>8.4}{:>8}{:>8}", v + 1, hr_a, "-", "-"),
        }
    }
    Ok(())
}
