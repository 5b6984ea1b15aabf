use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::autodiff::sigmoid;
use crate::error::{Error, Result};
use crate::graph::{Adjacency, MultiViewGraph};
use crate::tensor::Tensor;

/// Parameters of a synthetic multi-view graph with exact per-view homophily.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub k: usize,
    /// Target edge homophily, one entry per view.
    pub homophily: Vec<f64>,
    /// Undirected non-self edges per view.
    pub edges: usize,
    pub feature_dim: usize,
    /// Distance between any two class centers before squashing.
    pub center_separation: f64,
    /// Standard deviation of per-coordinate Gaussian noise.
    pub feature_noise: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn views(&self) -> usize {
        self.homophily.len()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let (base, extra) = (self.n / self.k.max(1), self.n % self.k.max(1));
        (0..self.k).map(|c| base + usize::from(c < extra)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k == 0 || self.k > self.n {
            return bad(format!("clusters = {} must lie in [1, nodes = {}]", self.k, self.n));
        }
        if self.homophily.is_empty() {
            return bad("at least one view is required".into());
        }
        if let Some(h) = self.homophily.iter().find(|h| !(0.0..=1.0).contains(*h)) {
            return bad(format!("homophily {h} outside [0, 1]"));
        }
        if self.edges < self.n {
            return bad(format!("edges = {} must be at least nodes = {}", self.edges, self.n));
        }
        if self.feature_dim == 0 {
            return bad("feature dimension must be positive".into());
        }
        if !(self.center_separation > 0.0) {
            return bad(format!("center separation {} must be positive", self.center_separation));
        }
        if !(self.feature_noise >= 0.0) {
            return bad(format!("feature noise {} must be non-negative", self.feature_noise));
        }
        Ok(())
    }

    /// Exact homophily each view will have: `round(h·E) / E`.
    pub fn realized_homophily(&self) -> Vec<f64> {
        self.homophily
            .iter()
            .map(|&h| intra_count(h, self.edges) as f64 / self.edges as f64)
            .collect()
    }
}

fn intra_count(h: f64, edges: usize) -> usize {
    (h * edges as f64).round() as usize
}

/// Enumerates same-class and cross-class node pairs by rank over nodes laid
/// out contiguously by class.
struct PairPools {
    starts: Vec<usize>,
    sizes: Vec<usize>,
    intra_offsets: Vec<usize>,
    inter_blocks: Vec<(usize, usize, usize)>,
    intra_total: usize,
    inter_total: usize,
}

impl PairPools {
    fn new(sizes: &[usize]) -> Self {
        let mut starts = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &s in sizes {
            starts.push(acc);
            acc += s;
        }
        let mut intra_offsets = Vec::with_capacity(sizes.len() + 1);
        let mut total = 0;
        for &s in sizes {
            intra_offsets.push(total);
            total += s * s.saturating_sub(1) / 2;
        }
        intra_offsets.push(total);
        let mut inter_blocks = Vec::new();
        let mut inter_total = 0;
        for a in 0..sizes.len() {
            for b in a + 1..sizes.len() {
                inter_blocks.push((a, b, inter_total));
                inter_total += sizes[a] * sizes[b];
            }
        }
        PairPools {
            starts,
            sizes: sizes.to_vec(),
            intra_offsets,
            inter_blocks,
            intra_total: total,
            inter_total,
        }
    }

    fn intra(&self, rank: usize) -> (usize, usize) {
        let c = self.intra_offsets.partition_point(|&o| o <= rank) - 1;
        let s = self.sizes[c];
        let r = rank - self.intra_offsets[c];
        // Pairs (a, b), a < b, ordered by a: first pair of row a sits at
        // a·(2s − a − 1)/2.
        let row_start = |a: usize| a * (2 * s - a - 1) / 2;
        let (mut lo, mut hi) = (0, s - 1);
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if row_start(mid) <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = lo;
        let b = a + 1 + (r - row_start(a));
        (self.starts[c] + a, self.starts[c] + b)
    }

    fn inter(&self, rank: usize) -> (usize, usize) {
        let idx = self.inter_blocks.partition_point(|&(_, _, o)| o <= rank) - 1;
        let (a, b, off) = self.inter_blocks[idx];
        let r = rank - off;
        let sb = self.sizes[b];
        (self.starts[a] + r / sb, self.starts[b] + r % sb)
    }
}

/// Largest edge count for which homophily `h` is realizable with the given
/// pair pools.
pub fn max_feasible_edges(intra_pool: usize, inter_pool: usize, h: f64) -> usize {
    let feasible = |e: usize| {
        let m = intra_count(h, e);
        m <= intra_pool && e - m <= inter_pool
    };
    let mut upper = intra_pool + inter_pool;
    if h > 0.0 {
        upper = upper.min(((intra_pool as f64 + 0.5) / h).floor() as usize + 1);
    }
    if h < 1.0 {
        upper = upper.min(((inter_pool as f64 + 0.5) / (1.0 - h)).floor() as usize + 1);
    }
    (0..=upper).rev().find(|&e| feasible(e)).unwrap_or(0)
}

/// Centers of a regular simplex with edge length `separation` in a random
/// orientation (Gram–Schmidt on Gaussian draws). When `k > d` the centers
/// are random directions instead.
fn simplex_centers(k: usize, d: usize, separation: f64, rng: &mut ChaCha8Rng) -> Tensor {
    let mut c = Tensor::from_fn(k, d, |_, _| StandardNormal.sample(rng));
    for i in 0..k {
        if i < d {
            for j in 0..i {
                let dot: f64 = c.row(i).iter().zip(c.row(j)).map(|(a, b)| a * b).sum();
                let prev = c.row(j).to_vec();
                for (v, p) in c.row_mut(i).iter_mut().zip(&prev) {
                    *v -= dot * p;
                }
            }
        }
        let norm = c.row(i).iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        c.row_mut(i).iter_mut().for_each(|v| *v /= norm);
    }
    let mean = c.col_means();
    let scale = separation / std::f64::consts::SQRT_2;
    for i in 0..k {
        for (v, m) in c.row_mut(i).iter_mut().zip(&mean) {
            *v = (*v - m) * scale;
        }
    }
    c
}

/// Generates a labeled multi-view graph whose every view has exactly
/// `round(h·E)` same-class edges out of `E`.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<MultiViewGraph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sizes = spec.class_sizes();
    let pools = PairPools::new(&sizes);

    let mut node_at: Vec<usize> = (0..spec.n).collect();
    node_at.shuffle(&mut rng);
    let mut labels = vec![0usize; spec.n];
    for (c, (&start, &size)) in pools.starts.iter().zip(&sizes).enumerate() {
        for pos in start..start + size {
            labels[node_at[pos]] = c;
        }
    }

    let mut views = Vec::with_capacity(spec.views());
    for &h in &spec.homophily {
        let m_intra = intra_count(h, spec.edges);
        let m_inter = spec.edges - m_intra;
        if m_intra > pools.intra_total || m_inter > pools.inter_total {
            return Err(Error::Infeasible {
                reason: format!(
                    "homophily {h} with {} edges needs {m_intra} same-class pairs (of {}) and {m_inter} cross-class pairs (of {})",
                    spec.edges, pools.intra_total, pools.inter_total
                ),
                max_edges: max_feasible_edges(pools.intra_total, pools.inter_total, h),
            });
        }
        let mut edges = Vec::with_capacity(spec.edges);
        for r in index::sample(&mut rng, pools.intra_total, m_intra) {
            let (a, b) = pools.intra(r);
            edges.push((node_at[a], node_at[b]));
        }
        for r in index::sample(&mut rng, pools.inter_total, m_inter) {
            let (a, b) = pools.inter(r);
            edges.push((node_at[a], node_at[b]));
        }
        views.push(Adjacency::from_edges(spec.n, edges)?);
    }

    let centers = simplex_centers(spec.k, spec.feature_dim, spec.center_separation, &mut rng);
    let mut features = Tensor::zeros(spec.n, spec.feature_dim);
    for i in 0..spec.n {
        let c = centers.row(labels[i]).to_vec();
        for (v, cv) in features.row_mut(i).iter_mut().zip(c) {
            let noise: f64 = StandardNormal.sample(&mut rng);
            *v = sigmoid(cv + spec.feature_noise * noise);
        }
    }

    MultiViewGraph::new(views, features, Some(labels))
}
