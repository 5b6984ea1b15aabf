use serde::{Deserialize, Serialize};

use crate::clustering::KMeansConfig;
use crate::error::{Error, Result};
use crate::metrics::F1Average;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Binary cross-entropy against targets in [0, 1]; predictions pass
    /// through a sigmoid.
    Bce,
    #[default]
    Mse,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bce" => Ok(LossKind::Bce),
            "mse" => Ok(LossKind::Mse),
            other => Err(Error::Config(format!("unknown loss kind `{other}` (expected bce or mse)"))),
        }
    }
}

/// Switches for the loss terms and graph components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ablation {
    pub use_rec_loss: bool,
    pub use_nrec_loss: bool,
    pub use_s: bool,
    pub use_a: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Ablation {
            use_rec_loss: true,
            use_nrec_loss: true,
            use_s: true,
            use_a: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub order: usize,
    pub rho: f64,
    pub mask_rate: f64,
    pub w_init: f64,
    pub lambda_nrec: f64,
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub kmeans_interval: usize,
    pub seed: u64,
    pub loss_kind: LossKind,
    pub ablation: Ablation,
    /// Keep only each row's `topk` largest similarities.
    pub topk: Option<usize>,
    /// Subtract the column mean of Z before measuring cosine similarity.
    pub center_embedding: bool,
    pub kmeans: KMeansConfig,
    /// Row-normalize H before k-means.
    pub normalize_embedding: bool,
    pub f1_average: F1Average,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            lr: 1e-3,
            order: 3,
            rho: 1.0,
            mask_rate: 0.3,
            w_init: 0.5,
            lambda_nrec: 1.0,
            hidden_dim: 256,
            embed_dim: 64,
            kmeans_interval: 1,
            seed: 42,
            loss_kind: LossKind::default(),
            ablation: Ablation::default(),
            topk: None,
            center_embedding: true,
            kmeans: KMeansConfig::default(),
            normalize_embedding: false,
            f1_average: F1Average::Macro,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.order == 0 {
            return bad("order must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.mask_rate) {
            return bad(format!("mask rate {} outside [0, 1)", self.mask_rate));
        }
        if !(0.0..=1.0).contains(&self.w_init) {
            return bad(format!("w_init {} outside [0, 1]", self.w_init));
        }
        if !(self.lambda_nrec >= 0.0 && self.lambda_nrec.is_finite()) {
            return bad(format!("lambda_nrec {} must be finite and non-negative", self.lambda_nrec));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return bad(format!("rho {} must be finite and non-negative", self.rho));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.lr));
        }
        if self.hidden_dim == 0 || self.embed_dim == 0 {
            return bad("hidden and embedding dimensions must be positive".into());
        }
        if self.kmeans_interval == 0 {
            return bad("kmeans interval must be at least 1".into());
        }
        if self.kmeans.n_init == 0 || self.kmeans.max_iter == 0 {
            return bad("kmeans needs at least one restart and one iteration".into());
        }
        if self.topk == Some(0) {
            return bad("topk must be at least 1".into());
        }
        if !self.ablation.use_s && !self.ablation.use_a {
            return bad("disabling both S and A leaves an empty reconstruction graph".into());
        }
        Ok(())
    }
}
