use crate::autodiff::{row_l2_normalize, EPS_NORM};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Mean over nodes of the cosine between matching rows of `a` and `b`.
fn mean_row_cosine(a: &Tensor, b: &Tensor) -> f64 {
    let (na, nb) = (row_l2_normalize(a), row_l2_normalize(b));
    let total: f64 = na
        .row_iter()
        .zip(nb.row_iter())
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .sum();
    total / a.rows().max(1) as f64
}

/// Weighted sum of view embeddings. Without a previous consensus every view
/// gets weight 1; otherwise a view's score is its mean row cosine to
/// `h_prev` clamped to `[EPS_NORM, 1]`, and its weight is
/// `(score / best score)^rho`.
pub fn fuse_views(hs: &[Tensor], h_prev: Option<&Tensor>, rho: f64) -> Result<(Tensor, Vec<f64>)> {
    let first = hs
        .first()
        .ok_or_else(|| Error::contract("fusion needs at least one view"))?;
    for (v, h) in hs.iter().enumerate() {
        first.check_same_shape(h, &format!("view {} embedding", v + 1))?;
    }
    let alphas = match h_prev {
        None => vec![1.0; hs.len()],
        Some(prev) => {
            first.check_same_shape(prev, "previous consensus")?;
            let eva: Vec<f64> = hs
                .iter()
                .map(|h| mean_row_cosine(h, prev).clamp(EPS_NORM, 1.0))
                .collect();
            alphas_from_scores(&eva, rho)
        }
    };
    let mut out = Tensor::zeros(first.rows(), first.cols());
    for (h, &a) in hs.iter().zip(&alphas) {
        out.axpy(a, h)?;
    }
    Ok((out, alphas))
}

/// `(s / max s)^rho`; the best view gets exactly 1.
pub fn alphas_from_scores(scores: &[f64], rho: f64) -> Vec<f64> {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores
        .iter()
        .map(|&s| if s == best { 1.0 } else { (s / best).powf(rho) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_view_passes_through() {
        let h = Tensor::from_rows(&[[1.0, 2.0], [3.0, -1.0]]).unwrap();
        let prev = Tensor::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let (fused, a) = fuse_views(std::slice::from_ref(&h), Some(&prev), 3.0).unwrap();
        assert_eq!(a, vec![1.0]);
        assert_eq!(fused, h);
    }

    #[test]
    fn sharpening_by_rho() {
        assert_eq!(alphas_from_scores(&[0.5, 1.0], 2.0), vec![0.25, 1.0]);
        assert_eq!(alphas_from_scores(&[0.5, 1.0, 0.1], 0.0), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn first_epoch_sums_views() {
        let a = Tensor::filled(2, 2, 1.0);
        let b = Tensor::filled(2, 2, 2.0);
        let (h, al) = fuse_views(&[a, b], None, 1.0).unwrap();
        assert_eq!(al, vec![1.0, 1.0]);
        assert_eq!(h, Tensor::filled(2, 2, 3.0));
    }

    #[test]
    fn scores_use_row_cosine_to_previous() {
        let prev = Tensor::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let aligned = prev.scale(4.0);
        // Rows at 60 degrees to prev: cosine 0.5.
        let s = 3f64.sqrt() / 2.0;
        let tilted = Tensor::from_rows(&[[0.5, s], [s, 0.5]]).unwrap();
        let (_, al) = fuse_views(&[tilted, aligned], Some(&prev), 1.0).unwrap();
        assert!((al[0] - 0.5).abs() < 1e-12);
        assert_eq!(al[1], 1.0);
    }

    #[test]
    fn anti_aligned_view_is_clamped_positive() {
        let prev = Tensor::from_rows(&[[1.0, 0.0]]).unwrap();
        let (_, al) = fuse_views(&[prev.scale(-1.0), prev.clone()], Some(&prev), 1.0).unwrap();
        assert!(al[0] > 0.0 && al[0] <= 1e-12);
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert!(matches!(fuse_views(&[], None, 1.0), Err(Error::Contract(_))));
        let r = fuse_views(&[Tensor::zeros(2, 2), Tensor::zeros(3, 2)], None, 1.0);
        assert!(matches!(r, Err(Error::Shape(_))));
    }
}
