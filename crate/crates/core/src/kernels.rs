//! Dense row-major matrix kernels.
//!
//! Every kernel computes one output row at a time and accumulates each
//! output entry over the shared dimension in ascending index order. The
//! parallel variants split work by output rows only, so they produce results
//! bit-identical to the sequential variants for any thread count.
//!
//! The `*_auto` entry points dispatch to the parallel kernels when the
//! `parallel` feature is enabled and the problem is large enough to amortize
//! the fork/join overhead.

/// Below this many multiply-adds the sequential kernel is always used.
pub const PARALLEL_THRESHOLD: usize = 1 << 15;

#[inline]
fn matmul_row(a_row: &[f64], b: &[f64], m: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (p, &a) in a_row.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let b_row = &b[p * m..(p + 1) * m];
        for (o, &bv) in out.iter_mut().zip(b_row) {
            *o += a * bv;
        }
    }
}

#[inline]
fn matmul_nt_row(a_row: &[f64], b: &[f64], k: usize, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        let b_row = &b[j * k..(j + 1) * k];
        *o = a_row.iter().zip(b_row).map(|(x, y)| x * y).sum();
    }
}

#[inline]
fn matmul_tn_row(a: &[f64], b: &[f64], rows: usize, n: usize, m: usize, i: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for p in 0..rows {
        let av = a[p * n + i];
        if av == 0.0 {
            continue;
        }
        let b_row = &b[p * m..(p + 1) * m];
        for (o, &bv) in out.iter_mut().zip(b_row) {
            *o += av * bv;
        }
    }
}

pub mod sequential {
    use super::*;

    /// `out (n×m) = a (n×k) · b (k×m)`.
    pub fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize, out: &mut [f64]) {
        if m == 0 {
            return;
        }
        for (i, row) in out.chunks_mut(m).enumerate().take(n) {
            matmul_row(&a[i * k..(i + 1) * k], b, m, row);
        }
    }

    /// `out (n×m) = a (n×k) · bᵀ` where `b` is m×k.
    pub fn matmul_nt(a: &[f64], b: &[f64], n: usize, k: usize, m: usize, out: &mut [f64]) {
        if m == 0 {
            return;
        }
        for (i, row) in out.chunks_mut(m).enumerate().take(n) {
            matmul_nt_row(&a[i * k..(i + 1) * k], b, k, row);
        }
    }

    /// `out (n×m) = aᵀ · b` where `a` is k×n and `b` is k×m.
    pub fn matmul_tn(a: &[f64], b: &[f64], k: usize, n: usize, m: usize, out: &mut [f64]) {
        if m == 0 {
            return;
        }
        for (i, row) in out.chunks_mut(m).enumerate().take(n) {
            matmul_tn_row(a, b, k, n, m, i, row);
        }
    }
}

#[cfg(feature = "parallel")]
pub mod parallel {
    use super::*;
    use rayon::prelude::*;

    pub fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize, out: &mut [f64]) {
        if m == 0 {
            return;
        }
        out.par_chunks_mut(m)
            .take(n)
            .enumerate()
            .for_each(|(i, row)| matmul_row(&a[i * k..(i + 1) * k], b, m, row));
    }

    pub fn matmul_nt(a: &[f64], b: &[f64], n: usize, k: usize, m: usize, out: &mut [f64]) {
        if m == 0 {
            return;
        }
        out.par_chunks_mut(m)
            .take(n)
            .enumerate()
            .for_each(|(i, row)| matmul_nt_row(&a[i * k..(i + 1) * k], b, k, row));
    }

    pub fn matmul_tn(a: &[f64], b: &[f64], k: usize, n: usize, m: usize, out: &mut [f64]) {
        if m == 0 {
            return;
        }
        out.par_chunks_mut(m)
            .take(n)
            .enumerate()
            .for_each(|(i, row)| matmul_tn_row(a, b, k, n, m, i, row));
    }
}

#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
#[inline]
fn use_parallel(work: usize) -> bool {
    cfg!(feature = "parallel") && work >= PARALLEL_THRESHOLD
}

pub fn matmul_auto(a: &[f64], b: &[f64], n: usize, k: usize, m: usize, out: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if use_parallel(n * k * m) {
        return parallel::matmul(a, b, n, k, m, out);
    }
    sequential::matmul(a, b, n, k, m, out)
}

pub fn matmul_nt_auto(a: &[f64], b: &[f64], n: usize, k: usize, m: usize, out: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if use_parallel(n * k * m) {
        return parallel::matmul_nt(a, b, n, k, m, out);
    }
    sequential::matmul_nt(a, b, n, k, m, out)
}

pub fn matmul_tn_auto(a: &[f64], b: &[f64], k: usize, n: usize, m: usize, out: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if use_parallel(n * k * m) {
        return parallel::matmul_tn(a, b, k, n, m, out);
    }
    sequential::matmul_tn(a, b, k, n, m, out)
}
