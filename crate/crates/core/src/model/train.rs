use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::fusion::fuse_views;
use super::loss::{mask_features, noise_recovery_loss, reconstruction_loss};
use super::params::{decode, encode, ModelParams, ViewParams};
use crate::autodiff::{row_l2_normalize, AdamConfig, Tape};
use crate::clustering::{kmeans, ClusterResult};
use crate::error::{Error, Result};
use crate::graph::{aggregate, cosine_similarity_node, edge_homophily, topk_mask, Adjacency, MultiViewGraph};
use crate::metrics::{evaluate, MetricsBundle};
use crate::tensor::Tensor;

/// Learned state of one view at the last epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewState {
    pub z: Tensor,
    /// Clamped cosine similarity of `z`; all zeros when S is ablated.
    pub s: Tensor,
    pub a_hat: Adjacency,
    /// Blend weight used for `a_hat`.
    pub w: f64,
    pub h: Tensor,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss_rec: f64,
    pub loss_nrec: f64,
    /// Weighted objective actually minimized.
    pub loss: f64,
    /// Blend weight of each view during this epoch.
    pub w: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Present when labels are known and k-means ran this epoch.
    pub metrics: Option<MetricsBundle>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub params: ModelParams,
    pub views: Vec<ViewState>,
    /// Consensus embedding H of the last epoch.
    pub embedding: Tensor,
    pub clusters: ClusterResult,
    /// Blend weights estimated from the final pseudo-labels.
    pub final_w: Vec<f64>,
    pub metrics: Option<MetricsBundle>,
    pub trace: TrainTrace,
}

/// One view's forward and backward pass.
#[derive(Clone, Debug)]
pub struct ViewPass {
    pub loss_rec: f64,
    pub loss_nrec: f64,
    pub loss: f64,
    /// Gradients of `loss`, aligned with [`ViewParams::tensors`].
    pub grads: Vec<Tensor>,
    pub z: Tensor,
    pub s: Tensor,
    pub a_hat: Tensor,
}

/// Builds one view's objective on a fresh tape and differentiates it.
/// `w` is treated as a constant.
pub fn view_pass(
    params: &ViewParams,
    x: &Tensor,
    a: &Adjacency,
    w: f64,
    x_tilde: &Tensor,
    cfg: &TrainConfig,
) -> Result<ViewPass> {
    let mut tape = Tape::new();
    let ids = params.bind(&mut tape);
    let xc = tape.constant(x.clone());
    let z = encode(&mut tape, &ids, xc)?;
    let x_hat = decode(&mut tape, &ids, z, cfg.loss_kind)?;
    let l_rec = reconstruction_loss(&mut tape, x_hat, x, cfg.loss_kind)?;

    let s = if cfg.ablation.use_s {
        let zs = if cfg.center_embedding {
            let n = x.rows();
            let c = 1.0 / n as f64;
            let centering = tape.constant(Tensor::from_fn(n, n, |i, j| if i == j { 1.0 - c } else { -c }));
            tape.matmul(centering, z)?
        } else {
            z
        };
        let s = cosine_similarity_node(&mut tape, zs)?;
        Some(match cfg.topk {
            Some(k) => {
                let mask = tape.constant(topk_mask(tape.value(s), k));
                tape.mul(s, mask)?
            }
            None => s,
        })
    } else {
        None
    };
    let a_term = cfg.ablation.use_a.then(|| tape.constant(a.matrix().scale(w)));
    let a_hat = match (s, a_term) {
        (Some(s), Some(a)) => tape.add(s, a)?,
        (Some(s), None) => s,
        (None, Some(a)) => a,
        (None, None) => return Err(Error::Config("reconstruction graph has no terms".into())),
    };
    let l_nrec = noise_recovery_loss(&mut tape, a_hat, x_tilde, x, cfg.order, cfg.loss_kind)?;

    let rec_w = if cfg.ablation.use_rec_loss { 1.0 } else { 0.0 };
    let nrec_w = if cfg.ablation.use_nrec_loss { cfg.lambda_nrec } else { 0.0 };
    let t1 = tape.scale(l_rec, rec_w);
    let t2 = tape.scale(l_nrec, nrec_w);
    let total = tape.add(t1, t2)?;

    let grads = tape.backward(total)?;
    let grads = ids
        .iter()
        .zip(&params.tensors)
        .map(|(&id, t)| grads.get_or_zeros(id, t.shape()))
        .collect();
    let n = x.rows();
    Ok(ViewPass {
        loss_rec: tape.value(l_rec).item(),
        loss_nrec: tape.value(l_nrec).item(),
        loss: tape.value(total).item(),
        grads,
        z: tape.value(z).clone(),
        s: s.map_or_else(|| Tensor::zeros(n, n), |s| tape.value(s).clone()),
        a_hat: tape.value(a_hat).clone(),
    })
}

fn run_views<T: Send>(v: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..v).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..v).map(f).collect()
    }
}

/// Sum of all views' objectives and per-view gradients for fixed blend
/// weights and masked inputs.
pub fn total_loss(
    params: &ModelParams,
    graph: &MultiViewGraph,
    w: &[f64],
    masked: &[Tensor],
    cfg: &TrainConfig,
) -> Result<(f64, Vec<Vec<Tensor>>)> {
    let passes = run_views(graph.num_views(), |v| {
        view_pass(&params.views[v], &graph.features, &graph.views[v], w[v], &masked[v], cfg)
    })?;
    let loss = passes.iter().map(|p| p.loss).sum();
    Ok((loss, passes.into_iter().map(|p| p.grads).collect()))
}

pub fn init_params(graph: &MultiViewGraph, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> ModelParams {
    let views = (0..graph.num_views())
        .map(|_| ViewParams::init(graph.feature_dim(), cfg.hidden_dim, cfg.embed_dim, rng))
        .collect();
    ModelParams {
        views,
        adam: AdamConfig {
            lr: cfg.lr,
            ..AdamConfig::default()
        },
    }
}

fn cluster(h: &Tensor, k: usize, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<ClusterResult> {
    if cfg.normalize_embedding {
        kmeans(&row_l2_normalize(h), k, &cfg.kmeans, rng)
    } else {
        kmeans(h, k, &cfg.kmeans, rng)
    }
}

/// Runs the full training loop and clusters the final consensus embedding
/// into `k` groups.
///
/// Each epoch every view encodes the features, builds `Â = S + w·A`,
/// aggregates its embedding over `Â`, and the views are fused into `H`.
/// Every `kmeans_interval` epochs k-means on `H` yields pseudo-labels from
/// which each `w` is re-estimated for the following epochs. Parameters take
/// one Adam step per epoch on the reconstruction and noise-recovery losses.
pub fn train(graph: &MultiViewGraph, k: usize, cfg: &TrainConfig) -> Result<TrainOutput> {
    cfg.validate()?;
    graph.validate()?;
    if k == 0 || k > graph.n() {
        return Err(Error::contract(format!("cannot form {k} clusters from {} nodes", graph.n())));
    }
    let nv = graph.num_views();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = init_params(graph, cfg, &mut rng);
    let mut w = vec![cfg.w_init; nv];
    let mut h_prev: Option<Tensor> = None;
    let mut trace = TrainTrace::default();
    let mut last = None;

    for epoch in 1..=cfg.epochs {
        let masked = (0..nv)
            .map(|_| mask_features(&graph.features, cfg.mask_rate, &mut rng).map(|(m, _)| m))
            .collect::<Result<Vec<_>>>()?;
        let passes = run_views(nv, |v| {
            let p = view_pass(&params.views[v], &graph.features, &graph.views[v], w[v], &masked[v], cfg)?;
            let a_hat = Adjacency::new(p.a_hat.clone())?;
            let h = aggregate(&a_hat, &p.z, cfg.order)?;
            Ok((p, a_hat, h))
        })?;

        let loss_rec: f64 = passes.iter().map(|p| p.0.loss_rec).sum();
        let loss_nrec: f64 = passes.iter().map(|p| p.0.loss_nrec).sum();
        let loss: f64 = passes.iter().map(|p| p.0.loss).sum();
        let hs: Vec<Tensor> = passes.iter().map(|p| p.2.clone()).collect();
        if !(loss.is_finite() && hs.iter().all(Tensor::is_finite)) {
            return Err(Error::Divergence { epoch });
        }
        let (h, alpha) = fuse_views(&hs, h_prev.as_ref(), cfg.rho)?;

        let mut metrics = None;
        let mut next_w = w.clone();
        let clustered = if epoch % cfg.kmeans_interval == 0 || epoch == cfg.epochs {
            let c = cluster(&h, k, cfg, &mut rng)?;
            for (v, a) in graph.views.iter().enumerate() {
                next_w[v] = edge_homophily(a, &c.onehot)?;
            }
            if let Some(labels) = &graph.labels {
                metrics = Some(evaluate(&c.assignments, labels, cfg.f1_average)?);
            }
            Some(c)
        } else {
            None
        };
        trace.records.push(EpochRecord {
            epoch,
            loss_rec,
            loss_nrec,
            loss,
            w: w.clone(),
            alpha: alpha.clone(),
            metrics,
        });

        let adam = params.adam;
        for (vp, (p, _, _)) in params.views.iter_mut().zip(&passes) {
            vp.apply(&p.grads, &adam)?;
        }

        if epoch == cfg.epochs {
            let views = passes
                .into_iter()
                .zip(alpha)
                .enumerate()
                .map(|(v, ((p, a_hat, h), alpha))| ViewState {
                    z: p.z,
                    s: p.s,
                    a_hat,
                    w: w[v],
                    h,
                    alpha,
                })
                .collect();
            last = Some((views, h, clustered.expect("final epoch always clusters"), next_w, metrics));
        } else {
            w = next_w;
            h_prev = Some(h);
        }
    }

    let (views, embedding, clusters, final_w, metrics) = last.expect("at least one epoch");
    Ok(TrainOutput {
        params,
        views,
        embedding,
        clusters,
        final_w,
        metrics,
        trace,
    })
}
