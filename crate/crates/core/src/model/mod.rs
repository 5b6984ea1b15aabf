//! Per-view autoencoders, the reconstruction and noise-recovery losses,
//! view fusion and the training loop.

mod config;
mod fusion;
mod loss;
mod params;
mod report;
mod train;

pub use config::{Ablation, LossKind, TrainConfig};
pub use fusion::{alphas_from_scores, fuse_views};
pub use loss::{mask_features, noise_recovery_loss, reconstruction_loss};
pub use params::{decode, encode, ModelParams, ViewParams, TENSORS_PER_VIEW};
pub use report::{homophily_report, HomophilyTriple, ViewHomophily};
pub use train::{init_params, total_loss, train, view_pass, EpochRecord, TrainOutput, TrainTrace, ViewPass, ViewState};
