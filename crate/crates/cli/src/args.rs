use std::path::PathBuf;

use clap::Args;
use doagc::metrics::F1Average;
use doagc::model::{LossKind, TrainConfig};

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum LossArg {
    Bce,
    Mse,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum F1Arg {
    Macro,
    Weighted,
}

/// Options shared by `train` and `sweep`. Unset options keep the library
/// defaults.
#[derive(Clone, Debug, Args)]
pub struct TrainArgs {
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Number of clusters [default: k from the manifest]
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Aggregation order.
    #[arg(long)]
    pub order: Option<usize>,
    /// View-weight sharpening exponent.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub mask_rate: Option<f64>,
    /// Initial blend weight of the original graph.
    #[arg(long)]
    pub w_init: Option<f64>,
    /// Weight of the noise-recovery loss.
    #[arg(long)]
    pub lambda_nrec: Option<f64>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub embed_dim: Option<usize>,
    /// Epochs between pseudo-label refreshes.
    #[arg(long)]
    pub kmeans_interval: Option<usize>,
    /// k-means restarts.
    #[arg(long)]
    pub n_init: Option<usize>,
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    /// Keep only the k largest similarities per node.
    #[arg(long)]
    pub topk: Option<usize>,
    /// Measure similarity on uncentered embeddings.
    #[arg(long)]
    pub no_center: bool,
    /// Row-normalize the consensus embedding before k-means.
    #[arg(long)]
    pub normalize_embedding: bool,
    #[arg(long, value_enum)]
    pub f1: Option<F1Arg>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Drop the reconstruction loss.
    #[arg(long)]
    pub no_rec_loss: bool,
    /// Drop the noise-recovery loss.
    #[arg(long)]
    pub no_nrec_loss: bool,
    /// Build the reconstruction graph without the similarity graph.
    #[arg(long)]
    pub no_s: bool,
    /// Build the reconstruction graph without the original adjacency.
    #[arg(long)]
    pub no_a: bool,
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        let mut c = TrainConfig::default();
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set! {
            epochs => c.epochs,
            lr => c.lr,
            order => c.order,
            rho => c.rho,
            mask_rate => c.mask_rate,
            w_init => c.w_init,
            lambda_nrec => c.lambda_nrec,
            hidden_dim => c.hidden_dim,
            embed_dim => c.embed_dim,
            kmeans_interval => c.kmeans_interval,
            n_init => c.kmeans.n_init,
        }
        if let Some(l) = self.loss {
            c.loss_kind = match l {
                LossArg::Bce => LossKind::Bce,
                LossArg::Mse => LossKind::Mse,
            };
        }
        if let Some(f) = self.f1 {
            c.f1_average = match f {
                F1Arg::Macro => F1Average::Macro,
                F1Arg::Weighted => F1Average::Weighted,
            };
        }
        c.topk = self.topk.or(c.topk);
        c.center_embedding = !self.no_center;
        c.normalize_embedding |= self.normalize_embedding;
        c.seed = self.seed;
        c.ablation.use_rec_loss = !self.no_rec_loss;
        c.ablation.use_nrec_loss = !self.no_nrec_loss;
        c.ablation.use_s = !self.no_s;
        c.ablation.use_a = !self.no_a;
        c
    }
}
