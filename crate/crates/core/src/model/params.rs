use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::config::LossKind;
use crate::autodiff::{adam_step, AdamConfig, AdamMoments, NodeId, Tape};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Number of tensors per view: weight and bias for two encoder and two
/// decoder layers.
pub const TENSORS_PER_VIEW: usize = 8;

/// One view's autoencoder. Tensors are ordered
/// `[W1, b1, W2, b2, W3, b3, W4, b4]`, the first four forming the encoder
/// `d → hidden → d_Z` and the rest the decoder `d_Z → hidden → d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewParams {
    pub tensors: Vec<Tensor>,
    pub moments: AdamMoments,
    pub step: u64,
}

fn xavier(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    Tensor::from_fn(rows, cols, |_, _| dist.sample(rng))
}

impl ViewParams {
    pub fn init(d: usize, hidden: usize, embed: usize, rng: &mut impl Rng) -> Self {
        let dims = [(d, hidden), (hidden, embed), (embed, hidden), (hidden, d)];
        let mut tensors = Vec::with_capacity(TENSORS_PER_VIEW);
        for (r, c) in dims {
            tensors.push(xavier(r, c, rng));
            tensors.push(Tensor::zeros(1, c));
        }
        Self::from_tensors(tensors).expect("generated shapes are consistent")
    }

    pub fn from_tensors(tensors: Vec<Tensor>) -> Result<Self> {
        if tensors.len() != TENSORS_PER_VIEW {
            return Err(Error::shape(format!(
                "expected {TENSORS_PER_VIEW} parameter tensors, got {}",
                tensors.len()
            )));
        }
        for l in 0..4 {
            let (w, b) = (&tensors[2 * l], &tensors[2 * l + 1]);
            if b.shape() != (1, w.cols()) {
                return Err(Error::shape(format!("layer {} bias {:?} for weight {:?}", l + 1, b.shape(), w.shape())));
            }
            if l > 0 && tensors[2 * l - 2].cols() != w.rows() {
                return Err(Error::shape(format!("layer {} input width {} after {}", l + 1, w.rows(), tensors[2 * l - 2].cols())));
            }
        }
        if tensors[0].rows() != tensors[6].cols() {
            return Err(Error::shape("decoder output width differs from encoder input"));
        }
        let moments = AdamMoments::zeros_like(&tensors);
        Ok(ViewParams { tensors, moments, step: 0 })
    }

    pub fn input_dim(&self) -> usize {
        self.tensors[0].rows()
    }

    pub fn embed_dim(&self) -> usize {
        self.tensors[2].cols()
    }

    /// Places every tensor on the tape as a trainable leaf.
    pub fn bind(&self, tape: &mut Tape) -> Vec<NodeId> {
        self.tensors.iter().map(|t| tape.param(t.clone())).collect()
    }

    /// Encoder output for `x` outside any training tape.
    pub fn embed(&self, x: &Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let ids = self.bind(&mut tape);
        let x = tape.constant(x.clone());
        let z = encode(&mut tape, &ids, x)?;
        Ok(tape.value(z).clone())
    }

    pub fn apply(&mut self, grads: &[Tensor], cfg: &AdamConfig) -> Result<()> {
        self.step += 1;
        adam_step(&mut self.tensors, grads, &mut self.moments, cfg, self.step)
    }
}

/// All views' parameters and the optimizer settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub views: Vec<ViewParams>,
    pub adam: AdamConfig,
}

fn linear(tape: &mut Tape, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
    let xw = tape.matmul(x, w)?;
    tape.add_bias(xw, b)
}

/// `Z = linear(relu(linear(X)))`.
pub fn encode(tape: &mut Tape, params: &[NodeId], x: NodeId) -> Result<NodeId> {
    let h = linear(tape, x, params[0], params[1])?;
    let h = tape.relu(h);
    linear(tape, h, params[2], params[3])
}

/// `X̂ = out(linear(relu(linear(Z))))`, with a sigmoid output for BCE.
pub fn decode(tape: &mut Tape, params: &[NodeId], z: NodeId, kind: LossKind) -> Result<NodeId> {
    let h = linear(tape, z, params[4], params[5])?;
    let h = tape.relu(h);
    let out = linear(tape, h, params[6], params[7])?;
    Ok(match kind {
        LossKind::Bce => tape.sigmoid(out),
        LossKind::Mse => out,
    })
}
