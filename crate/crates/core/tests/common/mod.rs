#![allow(dead_code)]

use std::collections::HashMap;

use doagc::data::SynthSpec;
use doagc::graph::MultiViewGraph;
use doagc::metrics::F1Average;
use doagc::model::{init_params, mask_features, total_loss, TrainConfig, TENSORS_PER_VIEW};
use doagc::Tensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The shared synthetic fixture: 300 nodes, 3 classes, 2 views with 1200
/// edges each, 50 features. k-means on its raw features reaches ACC ≈ 0.85.
pub fn fixture_spec(h: f64) -> SynthSpec {
    SynthSpec {
        n: 300,
        k: 3,
        homophily: vec![h, h],
        edges: 1200,
        feature_dim: 50,
        center_separation: 3.0,
        feature_noise: 1.0,
        seed: 42,
    }
}

/// Largest per-tensor relative deviation between the analytic gradient of
/// the summed objective and central differences with step `h`.
pub fn gradient_check(graph: &MultiViewGraph, cfg: &TrainConfig, w: &[f64], h: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = init_params(graph, cfg, &mut rng);
    let masked: Vec<Tensor> = (0..graph.num_views())
        .map(|_| mask_features(&graph.features, cfg.mask_rate, &mut rng).unwrap().0)
        .collect();
    let (_, grads) = total_loss(&params, graph, w, &masked, cfg).unwrap();
    let mut worst: f64 = 0.0;
    for v in 0..params.views.len() {
        for t in 0..TENSORS_PER_VIEW {
            let analytic = &grads[v][t];
            let mut numeric = Tensor::zeros(analytic.rows(), analytic.cols());
            for i in 0..numeric.len() {
                let orig = params.views[v].tensors[t].data()[i];
                params.views[v].tensors[t].data_mut()[i] = orig + h;
                let up = total_loss(&params, graph, w, &masked, cfg).unwrap().0;
                params.views[v].tensors[t].data_mut()[i] = orig - h;
                let down = total_loss(&params, graph, w, &masked, cfg).unwrap().0;
                params.views[v].tensors[t].data_mut()[i] = orig;
                numeric.data_mut()[i] = (up - down) / (2.0 * h);
            }
            let scale = numeric.max_abs().max(analytic.max_abs()).max(1e-12);
            worst = worst.max(numeric.max_abs_diff(analytic) / scale);
        }
    }
    worst
}

/// Textbook scores computed from label pairs with exhaustive matching.
pub mod oracle {
    use super::*;

    fn counts(pred: &[usize], truth: &[usize]) -> (HashMap<(usize, usize), f64>, HashMap<usize, f64>, HashMap<usize, f64>) {
        let (mut joint, mut a, mut b) = (HashMap::new(), HashMap::new(), HashMap::new());
        for (&p, &t) in pred.iter().zip(truth) {
            *joint.entry((p, t)).or_insert(0.0) += 1.0;
            *a.entry(p).or_insert(0.0) += 1.0;
            *b.entry(t).or_insert(0.0) += 1.0;
        }
        (joint, a, b)
    }

    fn sorted_keys(m: &HashMap<usize, f64>) -> Vec<usize> {
        let mut k: Vec<usize> = m.keys().copied().collect();
        k.sort_unstable();
        k
    }

    pub fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }

    /// Best assignment of predicted clusters to true classes: most matched
    /// samples, then largest summed pairwise F1 (support-weighted for the
    /// weighted average). Returns (matched count, F1).
    pub fn matched(pred: &[usize], truth: &[usize], average: F1Average) -> (f64, f64) {
        let (joint, a, b) = counts(pred, truth);
        let (ps, ts) = (sorted_keys(&a), sorted_keys(&b));
        let n = pred.len() as f64;
        let k = ps.len().max(ts.len());
        let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for perm in permutations(k) {
            let (mut count, mut score) = (0.0, 0.0);
            for (i, &p) in ps.iter().enumerate() {
                let Some(&t) = ts.get(perm[i]) else { continue };
                let tp = joint.get(&(p, t)).copied().unwrap_or(0.0);
                count += tp;
                let f = 2.0 * tp / (a[&p] + b[&t]);
                score += match average {
                    F1Average::Macro => f,
                    F1Average::Weighted => f * b[&t] / n,
                };
            }
            if (count, score) > best {
                best = (count, score);
            }
        }
        let unmatched = ps.len().saturating_sub(ts.len());
        let f1 = match average {
            F1Average::Macro => best.1 / (ts.len() + unmatched) as f64,
            F1Average::Weighted => best.1,
        };
        (best.0, f1)
    }

    pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
        matched(pred, truth, F1Average::Macro).0 / pred.len() as f64
    }

    pub fn f1(pred: &[usize], truth: &[usize], average: F1Average) -> f64 {
        matched(pred, truth, average).1
    }

    fn entropy(m: &HashMap<usize, f64>, n: f64) -> f64 {
        m.values().map(|&c| -(c / n) * (c / n).ln()).sum()
    }

    pub fn nmi(pred: &[usize], truth: &[usize]) -> f64 {
        let (joint, a, b) = counts(pred, truth);
        if a.len() == 1 && b.len() == 1 {
            return 1.0;
        }
        let n = pred.len() as f64;
        let mi: f64 = joint
            .iter()
            .map(|(&(p, t), &c)| {
                let pij = c / n;
                pij * (pij / ((a[&p] / n) * (b[&t] / n))).ln()
            })
            .sum();
        let denom = (entropy(&a, n) + entropy(&b, n)) / 2.0;
        if denom == 0.0 {
            0.0
        } else {
            mi / denom
        }
    }

    pub fn ari(pred: &[usize], truth: &[usize]) -> f64 {
        let (joint, a, b) = counts(pred, truth);
        let c2 = |x: f64| x * (x - 1.0) / 2.0;
        let index: f64 = joint.values().map(|&c| c2(c)).sum();
        let sa: f64 = a.values().map(|&c| c2(c)).sum();
        let sb: f64 = b.values().map(|&c| c2(c)).sum();
        let expected = sa * sb / c2(pred.len() as f64);
        let max = (sa + sb) / 2.0;
        if max == expected {
            1.0
        } else {
            (index - expected) / (max - expected)
        }
    }

    pub fn assignment_cost(cost: &Tensor) -> f64 {
        permutations(cost.rows())
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }
}
