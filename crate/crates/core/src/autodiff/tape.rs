use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Guard used by the row normalizations when a row's norm or sum is zero.
pub const EPS_NORM: f64 = 1e-12;
/// Floor applied inside [`Tape::log_safe`].
pub const EPS_LOG: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(NodeId, NodeId),
    /// `a · bᵀ`
    MatMulNt(NodeId, NodeId),
    Transpose(NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    /// Adds a 1×c row vector to every row.
    AddBias(NodeId, NodeId),
    Scale(NodeId, f64),
    AddScalar(NodeId),
    Relu(NodeId),
    Sigmoid(NodeId),
    LogSafe(NodeId),
    RowL2Normalize(NodeId),
    RowSumNormalize(NodeId),
    Sum(NodeId),
    Mean(NodeId),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Tensor,
    requires_grad: bool,
}

/// Records forward values of primitive operations in topological order so a
/// single reverse sweep can compute adjoints.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Adjoints produced by [`Tape::backward`], retained for leaf nodes only.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Adjoint of `id`, or `None` when the loss does not depend on it.
    pub fn get(&self, id: NodeId) -> Option<&Tensor> {
        self.grads.get(id.0).and_then(Option::as_ref)
    }

    /// Adjoint of `id`, materializing zeros of `shape` when unreachable.
    pub fn get_or_zeros(&self, id: NodeId, shape: (usize, usize)) -> Tensor {
        self.get(id)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(shape.0, shape.1))
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Ids of every recorded node in insertion (topological) order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Leaf, value, true)
    }

    /// Leaf excluded from differentiation.
    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Leaf, value, false)
    }

    fn push(&mut self, op: Op, value: Tensor, requires_grad: bool) -> NodeId {
        self.nodes.push(Node {
            op,
            value,
            requires_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn grad1(&self, a: NodeId) -> bool {
        self.nodes[a.0].requires_grad
    }

    fn grad2(&self, a: NodeId, b: NodeId) -> bool {
        self.grad1(a) || self.grad1(b)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).matmul(self.value(b))?;
        let g = self.grad2(a, b);
        Ok(self.push(Op::MatMul(a, b), v, g))
    }

    /// `a · bᵀ` without materializing the transpose.
    pub fn matmul_nt(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).matmul_nt(self.value(b))?;
        let g = self.grad2(a, b);
        Ok(self.push(Op::MatMulNt(a, b), v, g))
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).transpose();
        let g = self.grad1(a);
        self.push(Op::Transpose(a), v, g)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).add(self.value(b))?;
        let g = self.grad2(a, b);
        Ok(self.push(Op::Add(a, b), v, g))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).sub(self.value(b))?;
        let g = self.grad2(a, b);
        Ok(self.push(Op::Sub(a, b), v, g))
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).hadamard(self.value(b))?;
        let g = self.grad2(a, b);
        Ok(self.push(Op::Mul(a, b), v, g))
    }

    pub fn add_bias(&mut self, a: NodeId, bias: NodeId) -> Result<NodeId> {
        let (x, b) = (self.value(a), self.value(bias));
        if b.rows() != 1 || b.cols() != x.cols() {
            return Err(Error::shape(format!(
                "bias {}x{} does not broadcast over {}x{}",
                b.rows(),
                b.cols(),
                x.rows(),
                x.cols()
            )));
        }
        let mut v = x.clone();
        for i in 0..v.rows() {
            for (o, &bv) in v.row_mut(i).iter_mut().zip(b.data()) {
                *o += bv;
            }
        }
        let g = self.grad2(a, bias);
        Ok(self.push(Op::AddBias(a, bias), v, g))
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let v = self.value(a).scale(c);
        let g = self.grad1(a);
        self.push(Op::Scale(a, c), v, g)
    }

    pub fn add_scalar(&mut self, a: NodeId, c: f64) -> NodeId {
        let v = self.value(a).map(|x| x + c);
        let g = self.grad1(a);
        self.push(Op::AddScalar(a), v, g)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(|x| x.max(0.0));
        let g = self.grad1(a);
        self.push(Op::Relu(a), v, g)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(sigmoid);
        let g = self.grad1(a);
        self.push(Op::Sigmoid(a), v, g)
    }

    /// `log(max(x, EPS_LOG))`.
    pub fn log_safe(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(|x| x.max(EPS_LOG).ln());
        let g = self.grad1(a);
        self.push(Op::LogSafe(a), v, g)
    }

    pub fn row_l2_normalize(&mut self, a: NodeId) -> NodeId {
        let v = row_l2_normalize(self.value(a));
        let g = self.grad1(a);
        self.push(Op::RowL2Normalize(a), v, g)
    }

    /// Divides each row by its sum (`D⁻¹A`). Entries must be nonnegative.
    pub fn row_sum_normalize(&mut self, a: NodeId) -> Result<NodeId> {
        let v = row_sum_normalize(self.value(a))?;
        let g = self.grad1(a);
        Ok(self.push(Op::RowSumNormalize(a), v, g))
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let v = Tensor::scalar(self.value(a).sum());
        let g = self.grad1(a);
        self.push(Op::Sum(a), v, g)
    }

    pub fn mean(&mut self, a: NodeId) -> NodeId {
        let v = Tensor::scalar(self.value(a).mean());
        let g = self.grad1(a);
        self.push(Op::Mean(a), v, g)
    }

    /// Reverse sweep from a scalar `loss`. Forward values are left untouched.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        let lv = self.value(loss);
        if lv.shape() != (1, 1) {
            return Err(Error::contract(format!(
                "backward needs a 1x1 loss, got {}x{}",
                lv.rows(),
                lv.cols()
            )));
        }
        let mut adj: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        adj[loss.0] = Some(Tensor::ones(1, 1));

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if matches!(node.op, Op::Leaf) || !node.requires_grad {
                continue;
            }
            let Some(g) = adj[idx].take() else { continue };
            self.propagate(node, &g, &mut adj)?;
        }
        // Only leaf adjoints survive the sweep.
        Ok(Gradients { grads: adj })
    }

    fn propagate(&self, node: &Node, g: &Tensor, adj: &mut [Option<Tensor>]) -> Result<()> {
        let val = |id: NodeId| &self.nodes[id.0].value;
        let wants = |id: NodeId| self.nodes[id.0].requires_grad;
        match node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if wants(a) {
                    accumulate(adj, a, g.matmul_nt(val(b))?)?;
                }
                if wants(b) {
                    accumulate(adj, b, val(a).matmul_tn(g)?)?;
                }
            }
            Op::MatMulNt(a, b) => {
                // C = A Bᵀ: dA = G B, dB = Gᵀ A
                if wants(a) {
                    accumulate(adj, a, g.matmul(val(b))?)?;
                }
                if wants(b) {
                    accumulate(adj, b, g.matmul_tn(val(a))?)?;
                }
            }
            Op::Transpose(a) => accumulate(adj, a, g.transpose())?,
            Op::Add(a, b) => {
                if wants(a) {
                    accumulate(adj, a, g.clone())?;
                }
                if wants(b) {
                    accumulate(adj, b, g.clone())?;
                }
            }
            Op::Sub(a, b) => {
                if wants(a) {
                    accumulate(adj, a, g.clone())?;
                }
                if wants(b) {
                    accumulate(adj, b, g.scale(-1.0))?;
                }
            }
            Op::Mul(a, b) => {
                if wants(a) {
                    accumulate(adj, a, g.hadamard(val(b))?)?;
                }
                if wants(b) {
                    accumulate(adj, b, g.hadamard(val(a))?)?;
                }
            }
            Op::AddBias(a, bias) => {
                if wants(a) {
                    accumulate(adj, a, g.clone())?;
                }
                if wants(bias) {
                    let mut col = Tensor::zeros(1, g.cols());
                    for r in g.row_iter() {
                        for (c, v) in col.data_mut().iter_mut().zip(r) {
                            *c += v;
                        }
                    }
                    accumulate(adj, bias, col)?;
                }
            }
            Op::Scale(a, c) => accumulate(adj, a, g.scale(c))?,
            Op::AddScalar(a) => accumulate(adj, a, g.clone())?,
            Op::Relu(a) => {
                let d = g.zip_map(val(a), |gv, x| if x > 0.0 { gv } else { 0.0 })?;
                accumulate(adj, a, d)?;
            }
            Op::Sigmoid(a) => {
                let d = g.zip_map(&node.value, |gv, y| gv * y * (1.0 - y))?;
                accumulate(adj, a, d)?;
            }
            Op::LogSafe(a) => {
                let d = g.zip_map(val(a), |gv, x| if x > EPS_LOG { gv / x } else { 0.0 })?;
                accumulate(adj, a, d)?;
            }
            Op::RowL2Normalize(a) => {
                let x = val(a);
                let y = &node.value;
                let mut d = Tensor::zeros(x.rows(), x.cols());
                for i in 0..x.rows() {
                    let norm = x.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                    let (yr, gr) = (y.row(i), g.row(i));
                    let out = d.row_mut(i);
                    if norm > EPS_NORM {
                        let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                        for ((o, &gv), &yv) in out.iter_mut().zip(gr).zip(yr) {
                            *o = (gv - yv * dot) / norm;
                        }
                    } else {
                        for (o, &gv) in out.iter_mut().zip(gr) {
                            *o = gv / EPS_NORM;
                        }
                    }
                }
                accumulate(adj, a, d)?;
            }
            Op::RowSumNormalize(a) => {
                let x = val(a);
                let y = &node.value;
                let mut d = Tensor::zeros(x.rows(), x.cols());
                for i in 0..x.rows() {
                    let s: f64 = x.row(i).iter().sum();
                    let (yr, gr) = (y.row(i), g.row(i));
                    let out = d.row_mut(i);
                    if s > EPS_NORM {
                        let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                        for (o, &gv) in out.iter_mut().zip(gr) {
                            *o = (gv - dot) / s;
                        }
                    } else {
                        for (o, &gv) in out.iter_mut().zip(gr) {
                            *o = gv / EPS_NORM;
                        }
                    }
                }
                accumulate(adj, a, d)?;
            }
            Op::Sum(a) => {
                let (r, c) = val(a).shape();
                accumulate(adj, a, Tensor::filled(r, c, g.item()))?;
            }
            Op::Mean(a) => {
                let (r, c) = val(a).shape();
                let n = (r * c).max(1) as f64;
                accumulate(adj, a, Tensor::filled(r, c, g.item() / n))?;
            }
        }
        Ok(())
    }
}

fn accumulate(adj: &mut [Option<Tensor>], id: NodeId, delta: Tensor) -> Result<()> {
    match &mut adj[id.0] {
        Some(existing) => existing.axpy(1.0, &delta),
        slot @ None => {
            *slot = Some(delta);
            Ok(())
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Each row divided by `max(‖row‖₂, EPS_NORM)`; zero rows stay zero.
pub fn row_l2_normalize(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt().max(EPS_NORM);
        row.iter_mut().for_each(|v| *v /= norm);
    }
    out
}

/// Each row divided by `max(row sum, EPS_NORM)`. Rejects negative entries.
pub fn row_sum_normalize(x: &Tensor) -> Result<Tensor> {
    if let Some(pos) = x.data().iter().position(|&v| v < 0.0 || v.is_nan()) {
        return Err(Error::domain(format!(
            "row_sum_normalize needs nonnegative entries; found {} at ({}, {})",
            x.data()[pos],
            pos / x.cols(),
            pos % x.cols()
        )));
    }
    let mut out = x.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let s = row.iter().sum::<f64>().max(EPS_NORM);
        row.iter_mut().for_each(|v| *v /= s);
    }
    Ok(out)
}
