//! External clustering quality scores: ACC under optimal label matching,
//! NMI (arithmetic-mean normalization), ARI, and F1 after matching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub acc: f64,
    pub nmi: f64,
    pub ari: f64,
    pub f1: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1Average {
    #[default]
    Macro,
    Weighted,
}

/// Minimum-cost perfect matching on a square cost matrix (Kuhn–Munkres with
/// potentials, O(k³)). Returns `perm` with row `i` assigned to column
/// `perm[i]`, and the total cost.
pub fn hungarian(cost: &Tensor) -> Result<(Vec<usize>, f64)> {
    let n = cost.rows();
    if cost.cols() != n {
        return Err(Error::shape(format!(
            "assignment cost matrix must be square, got {}x{}",
            n,
            cost.cols()
        )));
    }
    if !cost.is_finite() {
        return Err(Error::domain("assignment costs must be finite"));
    }
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    // 1-based arrays; column 0 is a virtual start.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    let total = perm.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
    Ok((perm, total))
}

/// Dense contingency table: rows index distinct predicted labels, columns
/// distinct true labels, both in ascending label order.
struct Contingency {
    table: Vec<Vec<usize>>,
    n: usize,
}

impl Contingency {
    fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::shape(format!(
                "{} predictions for {} ground-truth labels",
                pred.len(),
                truth.len()
            )));
        }
        let p = dense_ids(pred);
        let t = dense_ids(truth);
        let rows = p.iter().max().map_or(0, |m| m + 1);
        let cols = t.iter().max().map_or(0, |m| m + 1);
        let mut table = vec![vec![0usize; cols]; rows];
        for (&a, &b) in p.iter().zip(&t) {
            table[a][b] += 1;
        }
        Ok(Contingency {
            table,
            n: pred.len(),
        })
    }

    fn row_sums(&self) -> Vec<usize> {
        self.table.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        let cols = self.table.first().map_or(0, Vec::len);
        (0..cols).map(|j| self.table.iter().map(|r| r[j]).sum()).collect()
    }

    /// F1 of treating predicted cluster `i` as true class `j`.
    fn pair_f1(&self, i: usize, j: usize, rows: &[usize], cols: &[usize]) -> f64 {
        let tp = self.table[i][j] as f64;
        if tp == 0.0 {
            return 0.0;
        }
        2.0 * tp / (rows[i] + cols[j]) as f64
    }

    /// Predicted row → true column maximizing matched counts, ties broken by
    /// the largest total pairwise F1 (support-weighted for
    /// [`F1Average::Weighted`]). Both criteria ignore label ids, which keeps
    /// every derived score invariant under relabeling. Rows left without a
    /// true column map to placeholder ids `>= cols`.
    fn matching(&self, average: F1Average) -> Vec<usize> {
        let rows = self.table.len();
        let (rs, cs) = (self.row_sums(), self.col_sums());
        let cols = cs.len();
        let k = rows.max(cols);
        // Tie-break terms sum to at most k < k + 1, below one count unit.
        let unit = (k + 1) as f64;
        let cost = Tensor::from_fn(k, k, |i, j| {
            if i < rows && j < cols {
                let tie = match average {
                    F1Average::Macro => self.pair_f1(i, j, &rs, &cs),
                    F1Average::Weighted => self.pair_f1(i, j, &rs, &cs) * cs[j] as f64 / self.n as f64,
                };
                -(self.table[i][j] as f64 * unit + tie)
            } else {
                0.0
            }
        });
        let (perm, _) = hungarian(&cost).expect("square finite cost");
        perm.into_iter().take(rows).collect()
    }
}

fn dense_ids(labels: &[usize]) -> Vec<usize> {
    let mut uniq: Vec<usize> = labels.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    labels
        .iter()
        .map(|l| uniq.binary_search(l).expect("label present"))
        .collect()
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = Contingency::new(pred, truth)?;
    if c.n == 0 {
        return Ok(0.0);
    }
    let cols = c.col_sums().len();
    let matched: usize = c
        .matching(F1Average::Macro)
        .iter()
        .enumerate()
        .filter(|&(_, &j)| j < cols)
        .map(|(i, &j)| c.table[i][j])
        .sum();
    Ok(matched as f64 / c.n as f64)
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with arithmetic-mean normalization.
/// Two single-cluster labelings score 1.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = Contingency::new(pred, truth)?;
    if c.n == 0 {
        return Ok(0.0);
    }
    let n = c.n as f64;
    let (a, b) = (c.row_sums(), c.col_sums());
    if a.len() == 1 && b.len() == 1 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (i, row) in c.table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij == 0 {
                continue;
            }
            let nij = nij as f64;
            mi += nij / n * (n * nij / (a[i] as f64 * b[j] as f64)).ln();
        }
    }
    let denom = 0.5 * (entropy(&a, n) + entropy(&b, n));
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((mi / denom).clamp(0.0, 1.0))
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index.
pub fn ari(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let c = Contingency::new(pred, truth)?;
    let sum_ij: f64 = c.table.iter().flatten().map(|&v| comb2(v)).sum();
    let sum_a: f64 = c.row_sums().into_iter().map(comb2).sum();
    let sum_b: f64 = c.col_sums().into_iter().map(comb2).sum();
    let total = comb2(c.n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((sum_ij - expected) / (max - expected))
}

/// F1 after mapping predicted clusters onto true classes with the matching
/// used by [`accuracy`]. Averages over the union of true classes and mapped
/// predicted labels; unmatched clusters score 0.
pub fn f1(pred: &[usize], truth: &[usize], average: F1Average) -> Result<f64> {
    let c = Contingency::new(pred, truth)?;
    if c.n == 0 {
        return Ok(0.0);
    }
    let cols = c.col_sums().len();
    let support = c.col_sums();
    let mapping = c.matching(average);
    let pred_sizes = c.row_sums();
    let mut classes = cols;
    let mut scores = Vec::new();
    let mut weights = Vec::new();
    for (j, &sup) in support.iter().enumerate() {
        let row = mapping.iter().position(|&m| m == j);
        let (tp, predicted) = match row {
            Some(i) => (c.table[i][j] as f64, pred_sizes[i] as f64),
            None => (0.0, 0.0),
        };
        let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let recall = tp / sup as f64;
        let f = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        scores.push(f);
        weights.push(sup as f64);
    }
    for &m in &mapping {
        if m >= cols {
            classes += 1;
            scores.push(0.0);
            weights.push(0.0);
        }
    }
    Ok(match average {
        F1Average::Macro => scores.iter().sum::<f64>() / classes as f64,
        F1Average::Weighted => {
            scores.iter().zip(&weights).map(|(s, w)| s * w).sum::<f64>() / c.n as f64
        }
    })
}

pub fn macro_f1(pred: &[usize], truth: &[usize]) -> Result<f64> {
    f1(pred, truth, F1Average::Macro)
}

pub fn evaluate(pred: &[usize], truth: &[usize], average: F1Average) -> Result<MetricsBundle> {
    Ok(MetricsBundle {
        acc: accuracy(pred, truth)?,
        nmi: nmi(pred, truth)?,
        ari: ari(pred, truth)?,
        f1: f1(pred, truth, average)?,
    })
}
