use nalgebra::DMatrix;

use super::pca::{pca_transform, PcaModel};
use crate::error::{Error, Result};

/// Residual of a signal with respect to its CCA projection.
///
/// With equal dimensions this is `original − projected`. Otherwise the
/// original is first reduced with `pca` (fit on that same original) to the
/// projection's dimension.
pub fn rcca_residual(
    original: &DMatrix<f64>,
    projected: &DMatrix<f64>,
    pca: Option<&PcaModel>,
) -> Result<DMatrix<f64>> {
    if original.nrows() != projected.nrows() {
        return Err(Error::Dimension(format!(
            "residual inputs have {} and {} rows",
            original.nrows(),
            projected.nrows()
        )));
    }
    let (d, k) = (original.ncols(), projected.ncols());
    if d == k {
        return Ok(original - projected);
    }
    let pca = pca.ok_or(Error::MissingReduction { from: d, to: k })?;
    if pca.dim_in() != d || pca.k() != k {
        return Err(Error::Dimension(format!(
            "residual reduction must map {d} to {k} dimensions, model maps {} to {}",
            pca.dim_in(),
            pca.k()
        )));
    }
    Ok(pca_transform(pca, original)? - projected)
}
