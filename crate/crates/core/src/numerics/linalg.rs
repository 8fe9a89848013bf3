use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn column_means(x: &DMatrix<f64>) -> DVector<f64> {
    let n = x.nrows() as f64;
    DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / n))
}

pub(crate) fn centered(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for (mut col, m) in out.column_iter_mut().zip(mean.iter()) {
        col.add_scalar_mut(-m);
    }
    out
}

/// Unbiased covariance (or cross-covariance) of already centered inputs.
pub(crate) fn cross_covariance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let denom = (a.nrows() as f64 - 1.0).max(1.0);
    a.tr_mul(b) / denom
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// non-increasing order. Ties keep the solver's order.
pub(crate) fn sorted_symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    (values, vectors)
}

/// Index of the entry with the largest magnitude (first one on ties).
pub(crate) fn argmax_abs<'a>(values: impl Iterator<Item = &'a f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.enumerate() {
        match best {
            Some((_, b)) if v.abs() <= b.abs() => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

pub(crate) fn fix_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        if let Some((_, v)) = argmax_abs(col.iter()) {
            if v < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Pearson correlation of two equally long samples. Returns `None` when
/// either side has zero variance.
pub fn sample_correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_abs_prefers_first_on_ties() {
        assert_eq!(argmax_abs([1.0, -3.0, 3.0].iter()), Some((1, -3.0)));
        assert_eq!(argmax_abs([].iter()), None);
    }

    #[test]
    fn signs_make_largest_entry_positive() {
        let mut m = DMatrix::from_row_slice(2, 2, &[0.2, -0.1, -0.9, 0.05]);
        fix_column_signs(&mut m);
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[-0.2, 0.1, 0.9, -0.05]));
    }

    #[test]
    fn eigen_sorted_descending() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let (vals, vecs) = sorted_symmetric_eigen(m);
        assert_eq!(vals, vec![3.0, 1.0]);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }
}
