use rand::Rng;

use super::config::LossKind;
use crate::autodiff::{NodeId, Tape};
use crate::error::{Error, Result};
use crate::graph::aggregate_node;
use crate::tensor::Tensor;

/// Mean binary cross-entropy or mean squared error of `x_hat` against the
/// constant target `x`.
pub fn reconstruction_loss(tape: &mut Tape, x_hat: NodeId, x: &Tensor, kind: LossKind) -> Result<NodeId> {
    tape.value(x_hat).check_same_shape(x, "reconstruction target")?;
    match kind {
        LossKind::Mse => {
            let target = tape.constant(x.clone());
            let diff = tape.sub(x_hat, target)?;
            let sq = tape.mul(diff, diff)?;
            Ok(tape.mean(sq))
        }
        LossKind::Bce => {
            if let Some(v) = x.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::domain(format!(
                    "binary cross-entropy needs targets in [0, 1], found {v}"
                )));
            }
            let pos = tape.constant(x.clone());
            let neg = tape.constant(x.map(|v| 1.0 - v));
            let log_p = tape.log_safe(x_hat);
            let flipped = tape.scale(x_hat, -1.0);
            let one_minus = tape.add_scalar(flipped, 1.0);
            let log_q = tape.log_safe(one_minus);
            let a = tape.mul(pos, log_p)?;
            let b = tape.mul(neg, log_q)?;
            let ll = tape.add(a, b)?;
            let m = tape.mean(ll);
            Ok(tape.scale(m, -1.0))
        }
    }
}

/// Zeroes each entry independently with probability `rate`. Returns the
/// masked matrix and the 0/1 keep-mask. Exactly one draw is consumed per
/// entry.
pub fn mask_features(x: &Tensor, rate: f64, rng: &mut impl Rng) -> Result<(Tensor, Tensor)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Config(format!("mask rate {rate} outside [0, 1)")));
    }
    let mut masked = x.clone();
    let mut keep = Tensor::ones(x.rows(), x.cols());
    for (v, k) in masked.data_mut().iter_mut().zip(keep.data_mut()) {
        if rng.random::<f64>() < rate {
            *v = 0.0;
            *k = 0.0;
        }
    }
    Ok((masked, keep))
}

/// Loss of recovering `x` from `x_tilde` by `order` rounds of aggregation
/// over the row-normalized `a_hat`. The aggregate passes through a sigmoid
/// for BCE.
pub fn noise_recovery_loss(
    tape: &mut Tape,
    a_hat: NodeId,
    x_tilde: &Tensor,
    x: &Tensor,
    order: usize,
    kind: LossKind,
) -> Result<NodeId> {
    let p = tape.row_sum_normalize(a_hat)?;
    let xt = tape.constant(x_tilde.clone());
    let agg = aggregate_node(tape, p, xt, order)?;
    let pred = match kind {
        LossKind::Bce => tape.sigmoid(agg),
        LossKind::Mse => agg,
    };
    reconstruction_loss(tape, pred, x, kind)
}
