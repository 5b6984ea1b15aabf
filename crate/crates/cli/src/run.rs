use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, ValueEnum};
use doagc::data::{load_dataset, Dataset};
use doagc::model::{homophily_report, train as fit, TrainConfig, TrainOutput};

use crate::args::TrainArgs;
use crate::output::{self, RunSummary, SweepRow};
use crate::usage;

#[derive(Debug, Args)]
pub struct TrainCmd {
    #[command(flatten)]
    pub train: TrainArgs,
    /// Output directory for the run artifacts.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    WInit,
    Order,
    Rho,
    MaskRate,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    #[command(flatten)]
    pub train: TrainArgs,
    /// Hyperparameter to vary.
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Comma-separated values of the hyperparameter.
    #[arg(long)]
    pub values: String,
    /// Output directory for sweep.csv.
    #[arg(long)]
    pub out: PathBuf,
}

fn load(args: &TrainArgs) -> anyhow::Result<(Dataset, usize, TrainConfig)> {
    let ds = load_dataset(&args.data).with_context(|| format!("loading dataset {}", args.data.display()))?;
    let k = args.k.unwrap_or(ds.manifest.k);
    if k == 0 || k > ds.graph.n() {
        return Err(usage(format!("--k {k} must lie in [1, {}]", ds.graph.n())));
    }
    let cfg = args.config();
    cfg.validate()?;
    Ok((ds, k, cfg))
}

fn run_one(ds: &Dataset, k: usize, cfg: &TrainConfig) -> anyhow::Result<TrainOutput> {
    Ok(fit(&ds.graph, k, cfg)?)
}

pub fn train(cmd: &TrainCmd) -> anyhow::Result<()> {
    let (ds, k, cfg) = load(&cmd.train)?;
    let start = Instant::now();
    let out = run_one(&ds, k, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();

    let summary = RunSummary {
        dataset: ds.manifest.name.clone(),
        n: ds.graph.n(),
        k,
        views: ds.graph.num_views(),
        seed: cfg.seed,
        config: cfg.clone(),
        metrics: out.metrics,
        final_w: out.final_w.clone(),
        homophily: homophily_report(&ds.graph, &out.views, &out.clusters.assignments),
        wall_clock_seconds: elapsed,
    };
    let dir = &cmd.out;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    output::write(&dir.join(output::TRACE_FILE), &output::trace_csv(&out.trace, ds.graph.num_views()))?;
    output::write(&dir.join(output::EMBEDDING_FILE), &output::matrix_csv(&out.embedding))?;
    output::write(&dir.join(output::ASSIGNMENTS_FILE), &output::assignments_csv(&out.clusters.assignments))?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    output::write(&dir.join(output::SUMMARY_FILE), &json)?;

    let w: Vec<String> = out.final_w.iter().map(|w| format!("{w:.4}")).collect();
    match out.metrics {
        Some(m) => println!(
            "acc {:.4}  nmi {:.4}  ari {:.4}  f1 {:.4}  w {}",
            m.acc,
            m.nmi,
            m.ari,
            m.f1,
            w.join(" ")
        ),
        None => println!("w {}", w.join(" ")),
    }
    Ok(())
}

fn apply(cfg: &mut TrainConfig, param: SweepParam, raw: &str) -> anyhow::Result<()> {
    let real = || raw.parse::<f64>().map_err(|_| usage(format!("`{raw}` is not a number")));
    match param {
        SweepParam::WInit => cfg.w_init = real()?,
        SweepParam::Rho => cfg.rho = real()?,
        SweepParam::MaskRate => cfg.mask_rate = real()?,
        SweepParam::Order => {
            cfg.order = raw
                .parse()
                .map_err(|_| usage(format!("order `{raw}` is not a positive integer")))?
        }
    }
    Ok(cfg.validate()?)
}

pub fn sweep(cmd: &SweepCmd) -> anyhow::Result<()> {
    let values: Vec<&str> = cmd
        .values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(usage("--values needs at least one value"));
    }
    let (ds, k, base) = load(&cmd.train)?;
    let configs = values
        .iter()
        .map(|v| {
            let mut c = base.clone();
            apply(&mut c, cmd.param, v)?;
            Ok(c)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let results = run_all(&configs, |c| run_one(&ds, k, c))?;
    let rows: Vec<SweepRow> = values
        .iter()
        .zip(results)
        .map(|(v, out)| SweepRow {
            value: (*v).to_string(),
            metrics: out.metrics,
            final_w: out.final_w,
        })
        .collect();
    std::fs::create_dir_all(&cmd.out).with_context(|| format!("creating {}", cmd.out.display()))?;
    output::write(&cmd.out.join(output::SWEEP_FILE), &output::sweep_csv(&rows, ds.graph.num_views()))?;
    for r in &rows {
        let w: Vec<String> = r.final_w.iter().map(|w| format!("{w:.4}")).collect();
        match r.metrics {
            Some(m) => println!("{}: acc {:.4}  nmi {:.4}  w {}", r.value, m.acc, m.nmi, w.join(" ")),
            None => println!("{}: w {}", r.value, w.join(" ")),
        }
    }
    Ok(())
}

/// Runs every configuration; results keep the input order.
fn run_all<T: Send>(
    configs: &[TrainConfig],
    f: impl Fn(&TrainConfig) -> anyhow::Result<T> + Sync + Send,
) -> anyhow::Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        configs.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        configs.iter().map(f).collect()
    }
}
