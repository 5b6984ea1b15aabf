//! Graph containers, homophily measurement, similarity graphs, adaptive
//! blending, and parameter-free neighborhood aggregation.
//!
//! Every function here is pure. The `*_node` variants record the same
//! computation on a [`Tape`] so losses can be differentiated through it.

use crate::autodiff::{row_sum_normalize, NodeId, Tape};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Square, nonnegative adjacency matrix. Original views are binary and
/// symmetric with unit diagonal; reconstructions are real-valued.
#[derive(Clone, Debug, PartialEq)]
pub struct Adjacency(Tensor);

impl Adjacency {
    pub fn new(matrix: Tensor) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::shape(format!(
                "adjacency must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if let Some(v) = matrix.data().iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!("adjacency entry {v} is not a finite nonnegative value")));
        }
        Ok(Adjacency(matrix))
    }

    /// Binary symmetric adjacency over `n` nodes with every self-loop set.
    /// Edges are undirected; duplicates and explicit self-loops are harmless.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = Tensor::identity(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::domain(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            m.set(i, j, 1.0);
            m.set(j, i, 1.0);
        }
        Ok(Adjacency(m))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Tensor {
        &self.0
    }

    pub fn into_matrix(self) -> Tensor {
        self.0
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).all(|i| (i + 1..n).all(|j| (self.0.get(i, j) - self.0.get(j, i)).abs() <= tol))
    }

    /// Undirected off-diagonal edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.0.get(i, j) != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Directed non-self entries, i.e. twice the undirected edge count.
    pub fn non_self_entries(&self) -> usize {
        let n = self.n();
        let mut count = 0;
        for i in 0..n {
            count += self.0.row(i).iter().enumerate().filter(|&(j, v)| j != i && *v != 0.0).count();
        }
        count
    }
}

/// `V` views over `n` shared nodes with one feature matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiViewGraph {
    pub views: Vec<Adjacency>,
    pub features: Tensor,
    pub labels: Option<Vec<usize>>,
}

impl MultiViewGraph {
    pub fn new(views: Vec<Adjacency>, features: Tensor, labels: Option<Vec<usize>>) -> Result<Self> {
        let g = MultiViewGraph {
            views,
            features,
            labels,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_views(&self) -> usize {
        self.views.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.views.is_empty() {
            return Err(Error::contract("a multi-view graph needs at least one view"));
        }
        if !self.features.is_finite() {
            return Err(Error::domain("features contain NaN or infinite values"));
        }
        for (v, a) in self.views.iter().enumerate() {
            if a.n() != n {
                return Err(Error::shape(format!("view {v} has {} nodes, features have {n}", a.n())));
            }
            let m = a.matrix();
            for i in 0..n {
                if m.get(i, i) != 1.0 {
                    return Err(Error::domain(format!("view {v} is missing the self-loop on node {i}")));
                }
            }
            if m.data().iter().any(|&x| x != 0.0 && x != 1.0) {
                return Err(Error::domain(format!("view {v} is not binary")));
            }
            if !a.is_symmetric(0.0) {
                return Err(Error::domain(format!("view {v} is not symmetric")));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(Error::shape(format!("{} labels for {n} nodes", labels.len())));
            }
        }
        Ok(())
    }

    /// Number of distinct classes implied by the labels, if present.
    pub fn num_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| l.iter().max().map_or(0, |m| m + 1))
    }
}

/// Cosine similarity between every pair of rows, negatives clamped to 0.
pub fn cosine_similarity_graph(z: &Tensor) -> Tensor {
    let n = crate::autodiff::row_l2_normalize(z);
    let mut s = n.matmul_nt(&n).expect("row-normalized matrix is conformable with its transpose");
    s.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    s
}

/// Tape version of [`cosine_similarity_graph`].
pub fn cosine_similarity_node(tape: &mut Tape, z: NodeId) -> Result<NodeId> {
    let n = tape.row_l2_normalize(z);
    let s = tape.matmul_nt(n, n)?;
    Ok(tape.relu(s))
}

/// Symmetric 0/1 mask keeping each row's `k` largest entries (and their
/// mirror images). Ties break toward lower column index.
pub fn topk_mask(s: &Tensor, k: usize) -> Tensor {
    let n = s.rows();
    let mut mask = Tensor::zeros(n, s.cols());
    let mut idx: Vec<usize> = Vec::with_capacity(s.cols());
    for i in 0..n {
        idx.clear();
        idx.extend(0..s.cols());
        let row = s.row(i);
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        for &j in idx.iter().take(k) {
            mask.set(i, j, 1.0);
            if j < n {
                mask.set(j, i, 1.0);
            }
        }
    }
    mask
}

fn labels_from_onehot(onehot: &Tensor) -> Result<Vec<usize>> {
    onehot
        .row_iter()
        .enumerate()
        .map(|(i, row)| {
            let mut hot = None;
            for (c, &v) in row.iter().enumerate() {
                if v == 1.0 && hot.is_none() {
                    hot = Some(c);
                } else if v != 0.0 {
                    return Err(Error::domain(format!("label row {i} is not one-hot")));
                }
            }
            hot.ok_or_else(|| Error::domain(format!("label row {i} is not one-hot")))
        })
        .collect()
}

/// Fraction of non-self edges of a binary adjacency whose endpoints share a
/// label, with labels given one-hot. Returns 0 when there are no non-self
/// edges.
pub fn edge_homophily(a: &Adjacency, labels_onehot: &Tensor) -> Result<f64> {
    if labels_onehot.rows() != a.n() {
        return Err(Error::shape(format!(
            "{} label rows for {} nodes",
            labels_onehot.rows(),
            a.n()
        )));
    }
    let labels = labels_from_onehot(labels_onehot)?;
    Ok(label_homophily(a.matrix(), &labels))
}

/// Same-label share of off-diagonal weight in `m`. Equals
/// [`edge_homophily`] for binary graphs and extends it to weighted ones.
pub fn label_homophily(m: &Tensor, labels: &[usize]) -> f64 {
    let n = m.rows();
    let (mut same, mut total) = (0.0, 0.0);
    for i in 0..n {
        for (j, &w) in m.row(i).iter().enumerate() {
            if i == j || w == 0.0 {
                continue;
            }
            total += w;
            if labels[i] == labels[j] {
                same += w;
            }
        }
    }
    if total > 0.0 {
        same / total
    } else {
        0.0
    }
}

/// `Â = S + w·A`.
pub fn reconstruct(s: &Tensor, a: &Adjacency, w: f64) -> Result<Adjacency> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::domain(format!("blend weight {w} outside [0, 1]")));
    }
    s.check_same_shape(a.matrix(), "reconstruct")?;
    let mut out = s.clone();
    out.axpy(w, a.matrix())?;
    Adjacency::new(out)
}

/// `Ā^order · x` with `Ā` the row-normalized `Â`.
pub fn aggregate(a_hat: &Adjacency, x: &Tensor, order: usize) -> Result<Tensor> {
    if order == 0 {
        return Err(Error::contract("aggregation order must be at least 1"));
    }
    let p = row_sum_normalize(a_hat.matrix())?;
    let mut h = p.matmul(x)?;
    for _ in 1..order {
        h = p.matmul(&h)?;
    }
    Ok(h)
}

/// Tape version of [`aggregate`] taking an already row-normalized operator.
pub fn aggregate_node(tape: &mut Tape, normalized: NodeId, x: NodeId, order: usize) -> Result<NodeId> {
    if order == 0 {
        return Err(Error::contract("aggregation order must be at least 1"));
    }
    let mut h = tape.matmul(normalized, x)?;
    for _ in 1..order {
        h = tape.matmul(normalized, h)?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn onehot(labels: &[usize], k: usize) -> Tensor {
        Tensor::from_fn(labels.len(), k, |i, j| if labels[i] == j { 1.0 } else { 0.0 })
    }

    #[test]
    fn cosine_parallel_and_orthogonal_rows() {
        let z = Tensor::from_rows(&[[1.0, 0.0], [2.0, 0.0], [0.0, 3.0]]).unwrap();
        let s = cosine_similarity_graph(&z);
        assert_eq!(s.data(), &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn cosine_single_row_and_clamp() {
        let s = cosine_similarity_graph(&Tensor::from_rows(&[[0.3, -0.7, 2.0]]).unwrap());
        assert!((s.item() - 1.0).abs() < 1e-15);
        let s = cosine_similarity_graph(&Tensor::from_rows(&[[1.0, 0.0], [-1.0, 0.0]]).unwrap());
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.get(1, 0), 0.0);
    }

    #[test]
    fn homophily_hand_enumeration() {
        let a = Adjacency::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let h = edge_homophily(&a, &onehot(&[0, 0, 1], 2)).unwrap();
        assert_eq!(h, 0.5);
        let h = edge_homophily(&a, &onehot(&[1, 1, 1], 2)).unwrap();
        assert_eq!(h, 1.0);
        let id = Adjacency::from_edges(3, []).unwrap();
        assert_eq!(edge_homophily(&id, &onehot(&[0, 1, 0], 2)).unwrap(), 0.0);
    }

    #[test]
    fn homophily_rejects_non_onehot() {
        let a = Adjacency::from_edges(2, [(0, 1)]).unwrap();
        let bad = Tensor::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(edge_homophily(&a, &bad), Err(Error::Domain(_))));
        let empty_row = Tensor::from_rows(&[[0.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(edge_homophily(&a, &empty_row), Err(Error::Domain(_))));
    }

    #[test]
    fn reconstruct_cases() {
        let s = Tensor::from_rows(&[[1.0, 0.5], [0.5, 1.0]]).unwrap();
        let a = Adjacency::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(reconstruct(&s, &a, 0.0).unwrap().matrix(), &s);
        assert_eq!(reconstruct(&Tensor::zeros(2, 2), &a, 1.0).unwrap(), a);
        let r = reconstruct(&s, &a, 0.5).unwrap();
        assert_eq!(r.matrix().data(), &[1.5, 1.0, 1.0, 1.5]);
        assert!(matches!(reconstruct(&Tensor::zeros(3, 3), &a, 0.5), Err(Error::Shape(_))));
    }

    #[test]
    fn aggregate_identity_and_constant_rows() {
        let x = Tensor::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let id = Adjacency::from_edges(3, []).unwrap();
        for order in 1..4 {
            assert_eq!(aggregate(&id, &x, order).unwrap(), x);
        }
        let a = Adjacency::new(Tensor::from_rows(&[[1.0, 0.3, 0.0], [0.3, 2.0, 0.7], [0.0, 0.7, 1.0]]).unwrap()).unwrap();
        let c = Tensor::from_fn(3, 2, |_, j| [0.25, -1.5][j]);
        let out = aggregate(&a, &c, 3).unwrap();
        assert!(out.max_abs_diff(&c) < 1e-14);
    }

    #[test]
    fn aggregate_path_graph_closed_neighborhood_mean() {
        let a = Adjacency::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let out = aggregate(&a, &Tensor::identity(3), 1).unwrap();
        let expect = Tensor::from_rows(&[
            [0.5, 0.5, 0.0],
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            [0.0, 0.5, 0.5],
        ])
        .unwrap();
        assert!(out.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn topk_mask_is_symmetric_and_keeps_largest() {
        let s = Tensor::from_rows(&[[1.0, 0.9, 0.1], [0.9, 1.0, 0.2], [0.1, 0.2, 1.0]]).unwrap();
        let m = topk_mask(&s, 2);
        assert_eq!(m.data(), &[1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
        assert_eq!(m, m.transpose());
    }

    fn random_z(seed: u64, n: usize, d: usize) -> Tensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_cosine_symmetric_and_bounded(seed in any::<u64>(), n in 1usize..12, d in 1usize..6) {
            let s = cosine_similarity_graph(&random_z(seed, n, d));
            prop_assert!(s.max_abs_diff(&s.transpose()) < 1e-12);
            prop_assert!(s.data().iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
        }

        #[test]
        fn prop_homophily_invariant_to_relabeling(
            seed in any::<u64>(),
            n in 2usize..15,
            k in 1usize..5,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
            let edges: Vec<(usize, usize)> = (0..2 * n)
                .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
                .collect();
            let a = Adjacency::from_edges(n, edges).unwrap();
            let mut perm: Vec<usize> = (0..k).collect();
            perm.rotate_left(1);
            let relabeled: Vec<usize> = labels.iter().map(|&l| perm[l]).collect();
            let h1 = edge_homophily(&a, &onehot(&labels, k)).unwrap();
            let h2 = edge_homophily(&a, &onehot(&relabeled, k)).unwrap();
            prop_assert_eq!(h1, h2);
            prop_assert_eq!(h1, label_homophily(a.matrix(), &labels));
        }

        #[test]
        fn prop_aggregate_order_composes(seed in any::<u64>(), n in 1usize..10, order in 1usize..5) {
            let z = random_z(seed, n, 3);
            let a = reconstruct(&cosine_similarity_graph(&z), &Adjacency::from_edges(n, []).unwrap(), 0.4).unwrap();
            let direct = aggregate(&a, &z, order).unwrap();
            let mut step = z.clone();
            for _ in 0..order {
                step = aggregate(&a, &step, 1).unwrap();
            }
            prop_assert!(direct.max_abs_diff(&step) < 1e-10);
        }

        #[test]
        fn prop_reconstruct_monotone_in_w(seed in any::<u64>(), w1 in 0.0f64..1.0, w2 in 0.0f64..1.0) {
            let (lo, hi) = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
            let z = random_z(seed, 6, 3);
            let s = cosine_similarity_graph(&z);
            let a = Adjacency::from_edges(6, [(0, 1), (2, 5), (3, 4)]).unwrap();
            let r_lo = reconstruct(&s, &a, lo).unwrap();
            let r_hi = reconstruct(&s, &a, hi).unwrap();
            prop_assert!(r_lo.matrix().data().iter().zip(r_hi.matrix().data()).all(|(a, b)| a <= b));
            prop_assert!(r_hi.is_symmetric(1e-12));
        }
    }
}
