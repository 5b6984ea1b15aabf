use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use doagc::clustering::to_onehot;
use doagc::data::{generate_synthetic, write_dataset, SynthSpec};
use doagc::graph::edge_homophily;

use crate::usage;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub nodes: usize,
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    /// Number of views; a single --homophily value is repeated for each.
    #[arg(long)]
    pub views: Option<usize>,
    /// Target homophily per view, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.2")]
    pub homophily: Vec<f64>,
    /// Non-self undirected edges per view.
    #[arg(long, default_value_t = 1200)]
    pub edges: usize,
    #[arg(long, default_value_t = 50)]
    pub feature_dim: usize,
    /// Distance between class centers before squashing.
    #[arg(long, default_value_t = 3.0)]
    pub separation: f64,
    /// Per-coordinate standard deviation of feature noise.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Dataset name written to the manifest [default: directory name]
    #[arg(long)]
    pub name: Option<String>,
}

pub fn run(a: &SynthArgs) -> anyhow::Result<()> {
    let homophily = match (a.views, a.homophily.as_slice()) {
        (Some(v), [h]) => vec![*h; v],
        (Some(v), hs) if hs.len() != v => {
            return Err(usage(format!("--views {v} but {} homophily values given", hs.len())));
        }
        (_, hs) => hs.to_vec(),
    };
    if homophily.is_empty() || a.views == Some(0) {
        return Err(usage("at least one view is required"));
    }
    let spec = SynthSpec {
        n: a.nodes,
        k: a.clusters,
        homophily,
        edges: a.edges,
        feature_dim: a.feature_dim,
        center_separation: a.separation,
        feature_noise: a.noise,
        seed: a.seed,
    };
    let graph = generate_synthetic(&spec)?;
    let name = a.name.clone().unwrap_or_else(|| {
        a.out
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "synthetic".into())
    });
    write_dataset(&a.out, &name, spec.k, &graph).with_context(|| format!("writing {}", a.out.display()))?;

    let labels = graph.labels.as_ref().expect("generated graphs are labeled");
    let onehot = to_onehot(labels, spec.k)?;
    let measured = graph
        .views
        .iter()
        .map(|v| edge_homophily(v, &onehot).map(|h| format!("{h:.4}")))
        .collect::<Result<Vec<_>, _>>()?;
    println!("homophily: {}", measured.join(" "));
    Ok(())
}
