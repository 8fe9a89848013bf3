use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use super::dump::{read_matrix_block, write_matrix_block};
use super::linalg::{centered, column_means, cross_covariance, fix_column_signs, sorted_symmetric_eigen};
use crate::error::{Error, Result};

/// A fitted principal component projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: DVector<f64>,
    /// `dim_in × k`, orthonormal columns.
    components: DMatrix<f64>,
    explained_variance: Vec<f64>,
}

impl PcaModel {
    /// Decomposes the covariance of `x` into all `d` directions.
    ///
    /// When the centered data has rank below `d` the trailing directions
    /// span its null space and carry zero variance.
    pub fn fit_full(x: &DMatrix<f64>) -> Result<Self> {
        if x.nrows() < 2 || x.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "PCA needs at least 2 rows and 1 column, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        let mean = column_means(x);
        let xc = centered(x, &mean);
        let (values, mut components) = sorted_symmetric_eigen(cross_covariance(&xc, &xc));
        fix_column_signs(&mut components);
        let explained_variance = values.into_iter().map(|v| v.max(0.0)).collect();
        Ok(PcaModel {
            mean,
            components,
            explained_variance,
        })
    }

    /// Keeps the leading `k` components.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(Error::Dimension(format!(
                "cannot keep {k} of {} components",
                self.k()
            )));
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            components: self.components.columns(0, k).into_owned(),
            explained_variance: self.explained_variance[..k].to_vec(),
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn dim_in(&self) -> usize {
        self.components.nrows()
    }

    pub fn k(&self) -> usize {
        self.components.ncols()
    }

    pub fn write_text<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "pca {} {}", self.dim_in(), self.k())?;
        write_matrix_block(w, "mean", &DMatrix::from_row_slice(1, self.dim_in(), self.mean.as_slice()))?;
        write_matrix_block(
            w,
            "explained_variance",
            &DMatrix::from_row_slice(1, self.k(), &self.explained_variance),
        )?;
        write_matrix_block(w, "components", &self.components)
    }

    pub fn read_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (lineno, head) = lines.next().ok_or_else(|| Error::EmptyInput("empty PCA dump".into()))?;
        let f: Vec<&str> = head.split_whitespace().collect();
        if f.len() != 3 || f[0] != "pca" {
            return Err(Error::parse(lineno, "expected `pca <dim_in> <k>`"));
        }
        let mean = read_matrix_block(&mut lines, "mean")?;
        let var = read_matrix_block(&mut lines, "explained_variance")?;
        let components = read_matrix_block(&mut lines, "components")?;
        if mean.nrows() != 1 || var.nrows() != 1 || mean.ncols() != components.nrows() || var.ncols() != components.ncols() {
            return Err(Error::Dimension("inconsistent PCA dump shapes".into()));
        }
        Ok(PcaModel {
            mean: DVector::from_iterator(mean.ncols(), mean.iter().copied()),
            components,
            explained_variance: var.iter().copied().collect(),
        })
    }
}

/// Fits the top-`k` principal directions of the column-centered `x`.
/// `k` may exceed the rank of the data (at most `n − 1`); the extra
/// components have zero variance.
pub fn pca_fit(x: &DMatrix<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = x.shape();
    if k == 0 || k > d {
        return Err(Error::Dimension(format!(
            "PCA target dimension {k} outside 1..={d} for a {n}x{d} input"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("PCA input contains non-finite values".into()));
    }
    PcaModel::fit_full(x)?.truncate(k)
}

/// Returns `(x − mean) · components`.
pub fn pca_transform(model: &PcaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != model.dim_in() {
        return Err(Error::Dimension(format!(
            "PCA model expects {} columns, input has {}",
            model.dim_in(),
            x.ncols()
        )));
    }
    Ok(centered(x, &model.mean) * &model.components)
}
