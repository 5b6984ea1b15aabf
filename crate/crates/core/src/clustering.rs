//! k-means with k-means++ seeding, and one-hot pseudo-labels.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub n_init: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            n_init: 10,
            max_iter: 300,
            tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterResult {
    pub assignments: Vec<usize>,
    pub centers: Tensor,
    pub inertia: f64,
    pub onehot: Tensor,
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the nearest center; ties go to the lower index.
fn nearest(point: &[f64], centers: &Tensor) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.row_iter().enumerate() {
        let d = sq_dist(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_plus_plus(x: &Tensor, k: usize, rng: &mut impl Rng) -> Tensor {
    let n = x.rows();
    let mut centers = Tensor::zeros(k, x.cols());
    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from_slice(x.row(first));
    let mut d2: Vec<f64> = x.row_iter().map(|p| sq_dist(p, centers.row(0))).collect();
    let mut chosen = vec![false; n];
    chosen[first] = true;

    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            // All remaining points coincide with chosen centers.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centers.row_mut(c).copy_from_slice(x.row(pick));
        for (i, p) in x.row_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, centers.row(c)));
        }
    }
    centers
}

/// Lloyd iterations from the given centers. Returns the result together with
/// the inertia measured at every assignment step.
pub fn lloyd(x: &Tensor, init: Tensor, max_iter: usize, tol: f64) -> (ClusterResult, Vec<f64>) {
    let (n, d) = x.shape();
    let k = init.rows();
    let mut centers = init;
    let mut assign = vec![0usize; n];
    let mut history = Vec::new();

    for _ in 0..max_iter.max(1) {
        let mut inertia = 0.0;
        let mut dist = vec![0.0; n];
        for (i, p) in x.row_iter().enumerate() {
            let (c, dd) = nearest(p, &centers);
            assign[i] = c;
            dist[i] = dd;
            inertia += dd;
        }
        history.push(inertia);

        let mut sums = Tensor::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, p) in x.row_iter().enumerate() {
            counts[assign[i]] += 1;
            for (s, v) in sums.row_mut(assign[i]).iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut next = centers.clone();
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (o, s) in next.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *o = s * inv;
                }
            }
        }
        // Empty clusters take the point farthest from its center among
        // clusters that can spare one.
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let donor = (0..n)
                .filter(|&i| counts[assign[i]] > 1)
                .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)));
            if let Some(i) = donor {
                counts[assign[i]] -= 1;
                assign[i] = c;
                counts[c] = 1;
                dist[i] = 0.0;
                next.row_mut(c).copy_from_slice(x.row(i));
            }
        }

        let shift = centers
            .row_iter()
            .zip(next.row_iter())
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centers = next;
        if shift < tol {
            break;
        }
    }

    let mut inertia = 0.0;
    for (i, p) in x.row_iter().enumerate() {
        let (c, dd) = nearest(p, &centers);
        assign[i] = c;
        inertia += dd;
    }
    history.push(inertia);
    let onehot = onehot_unchecked(&assign, k);
    (
        ClusterResult {
            assignments: assign,
            centers,
            inertia,
            onehot,
        },
        history,
    )
}

fn single_run(x: &Tensor, k: usize, cfg: &KMeansConfig, seed: u64) -> ClusterResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = kmeans_plus_plus(x, k, &mut rng);
    lloyd(x, init, cfg.max_iter, cfg.tol).0
}

/// Best-inertia k-means over `cfg.n_init` k-means++ restarts. Restart seeds
/// are drawn from `rng` up front, so the result does not depend on whether
/// restarts run in parallel.
pub fn kmeans(x: &Tensor, k: usize, cfg: &KMeansConfig, rng: &mut impl RngCore) -> Result<ClusterResult> {
    if k == 0 {
        return Err(Error::contract("k-means needs k >= 1"));
    }
    if k > x.rows() {
        return Err(Error::contract(format!("k = {k} exceeds the {} points", x.rows())));
    }
    if cfg.n_init == 0 {
        return Err(Error::contract("k-means needs at least one restart"));
    }
    if !x.is_finite() {
        return Err(Error::domain("k-means input contains non-finite values"));
    }
    let seeds: Vec<u64> = (0..cfg.n_init).map(|_| rng.next_u64()).collect();

    #[cfg(feature = "parallel")]
    let runs: Vec<ClusterResult> = {
        use rayon::prelude::*;
        seeds.par_iter().map(|&s| single_run(x, k, cfg, s)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<ClusterResult> = seeds.iter().map(|&s| single_run(x, k, cfg, s)).collect();

    // min_by keeps the first of equal elements, i.e. the lowest restart index.
    Ok(runs
        .into_iter()
        .min_by(|a, b| a.inertia.total_cmp(&b.inertia))
        .expect("n_init >= 1"))
}

fn onehot_unchecked(assignments: &[usize], k: usize) -> Tensor {
    let mut t = Tensor::zeros(assignments.len(), k);
    for (i, &a) in assignments.iter().enumerate() {
        t.set(i, a, 1.0);
    }
    t
}

pub fn to_onehot(assignments: &[usize], k: usize) -> Result<Tensor> {
    if let Some((i, &a)) = assignments.iter().enumerate().find(|(_, &a)| a >= k) {
        return Err(Error::domain(format!("label {a} at position {i} is outside [0, {k})")));
    }
    Ok(onehot_unchecked(assignments, k))
}
