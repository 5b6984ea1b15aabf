use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment buffers, one pair per parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamMoments {
    pub first: Vec<Tensor>,
    pub second: Vec<Tensor>,
}

impl AdamMoments {
    pub fn zeros_like(params: &[Tensor]) -> Self {
        let z: Vec<Tensor> = params
            .iter()
            .map(|p| Tensor::zeros(p.rows(), p.cols()))
            .collect();
        AdamMoments {
            first: z.clone(),
            second: z,
        }
    }
}

/// One bias-corrected Adam update applied in place. `t` is the 1-based step.
pub fn adam_step(
    params: &mut [Tensor],
    grads: &[Tensor],
    moments: &mut AdamMoments,
    cfg: &AdamConfig,
    t: u64,
) -> Result<()> {
    if t == 0 {
        return Err(Error::contract("adam step count starts at 1"));
    }
    if params.len() != grads.len()
        || params.len() != moments.first.len()
        || params.len() != moments.second.len()
    {
        return Err(Error::shape(format!(
            "adam: {} params, {} grads, {} moment buffers",
            params.len(),
            grads.len(),
            moments.first.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        p.check_same_shape(g, &format!("adam param {i}"))?;
        p.check_same_shape(&moments.first[i], &format!("adam moment {i}"))?;
    }

    let bc1 = 1.0 - cfg.beta1.powi(t.min(i32::MAX as u64) as i32);
    let bc2 = 1.0 - cfg.beta2.powi(t.min(i32::MAX as u64) as i32);
    for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = moments.first[i].data_mut();
        let v = moments.second[i].data_mut();
        for (((pv, &gv), mv), vv) in p.data_mut().iter_mut().zip(g.data()).zip(m).zip(v) {
            *mv = cfg.beta1 * *mv + (1.0 - cfg.beta1) * gv;
            *vv = cfg.beta2 * *vv + (1.0 - cfg.beta2) * gv * gv;
            let m_hat = *mv / bc1;
            let v_hat = *vv / bc2;
            *pv -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}
