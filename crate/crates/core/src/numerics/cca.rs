use std::io::{self, Write};

use nalgebra::{DMatrix, DVector, SVD};

use super::dump::{read_matrix_block, write_matrix_block};
use super::linalg::{argmax_abs, centered, column_means, cross_covariance, sorted_symmetric_eigen};
use super::Side;
use crate::error::{Error, Result};

/// Diagonal loading added to both covariance matrices unless overridden.
pub const DEFAULT_RIDGE: f64 = 1e-3;

const CORRELATION_SLACK: f64 = 1e-6;
const SINGULAR_RATIO: f64 = 1e-12;

/// Paired linear projections maximizing per-component correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct CcaModel {
    mean_x: DVector<f64>,
    mean_y: DVector<f64>,
    proj_x: DMatrix<f64>,
    proj_y: DMatrix<f64>,
    correlations: Vec<f64>,
    ridge: f64,
}

impl CcaModel {
    pub fn mean(&self, side: Side) -> &DVector<f64> {
        match side {
            Side::Textual => &self.mean_x,
            Side::Visual => &self.mean_y,
        }
    }

    pub fn projection(&self, side: Side) -> &DMatrix<f64> {
        match side {
            Side::Textual => &self.proj_x,
            Side::Visual => &self.proj_y,
        }
    }

    pub fn correlations(&self) -> &[f64] {
        &self.correlations
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn k(&self) -> usize {
        self.correlations.len()
    }

    /// Keeps the leading `k` component pairs.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(Error::Dimension(format!("cannot keep {k} of {} components", self.k())));
        }
        Ok(CcaModel {
            mean_x: self.mean_x.clone(),
            mean_y: self.mean_y.clone(),
            proj_x: self.proj_x.columns(0, k).into_owned(),
            proj_y: self.proj_y.columns(0, k).into_owned(),
            correlations: self.correlations[..k].to_vec(),
            ridge: self.ridge,
        })
    }

    pub fn write_text<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "cca {} {} {} {:e}", self.proj_x.nrows(), self.proj_y.nrows(), self.k(), self.ridge)?;
        let row = |v: &[f64]| DMatrix::from_row_slice(1, v.len(), v);
        write_matrix_block(w, "mean_x", &row(self.mean_x.as_slice()))?;
        write_matrix_block(w, "mean_y", &row(self.mean_y.as_slice()))?;
        write_matrix_block(w, "correlations", &row(&self.correlations))?;
        write_matrix_block(w, "proj_x", &self.proj_x)?;
        write_matrix_block(w, "proj_y", &self.proj_y)
    }

    pub fn read_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (lineno, head) = lines.next().ok_or_else(|| Error::EmptyInput("empty CCA dump".into()))?;
        let f: Vec<&str> = head.split_whitespace().collect();
        if f.len() != 5 || f[0] != "cca" {
            return Err(Error::parse(lineno, "expected `cca <d1> <d2> <k> <ridge>`"));
        }
        let ridge: f64 = f[4].parse().map_err(|_| Error::parse(lineno, "bad ridge"))?;
        let mean_x = read_matrix_block(&mut lines, "mean_x")?;
        let mean_y = read_matrix_block(&mut lines, "mean_y")?;
        let corr = read_matrix_block(&mut lines, "correlations")?;
        let proj_x = read_matrix_block(&mut lines, "proj_x")?;
        let proj_y = read_matrix_block(&mut lines, "proj_y")?;
        let k = corr.ncols();
        if proj_x.ncols() != k || proj_y.ncols() != k || mean_x.ncols() != proj_x.nrows() || mean_y.ncols() != proj_y.nrows() {
            return Err(Error::Dimension("inconsistent CCA dump shapes".into()));
        }
        Ok(CcaModel {
            mean_x: DVector::from_iterator(mean_x.ncols(), mean_x.iter().copied()),
            mean_y: DVector::from_iterator(mean_y.ncols(), mean_y.iter().copied()),
            proj_x,
            proj_y,
            correlations: corr.iter().copied().collect(),
            ridge,
        })
    }
}

/// `(C + ridge·I)^{-1/2}` through an eigen-decomposition.
fn inverse_sqrt(cov: DMatrix<f64>, ridge: f64, which: &str) -> Result<DMatrix<f64>> {
    let d = cov.nrows();
    let loaded = cov + DMatrix::identity(d, d) * ridge;
    let (values, vectors) = sorted_symmetric_eigen(loaded);
    let top = values[0];
    let bottom = values[d - 1];
    if top.is_nan() || top <= 0.0 || bottom <= top * SINGULAR_RATIO {
        return Err(Error::Numerical(format!(
            "{which} covariance is singular (eigenvalues {bottom:e}..{top:e}); use a positive ridge"
        )));
    }
    let scale = DVector::from_iterator(d, values.iter().map(|v| v.powf(-0.5)));
    let scaled = DMatrix::from_fn(d, d, |i, j| vectors[(i, j)] * scale[j]);
    Ok(&scaled * vectors.transpose())
}

/// Regularized CCA.
///
/// Both inputs are whitened with `(C + ridge·I)^{-1/2}`; the singular value
/// decomposition of the whitened cross-covariance gives the canonical
/// correlations and directions.
pub fn cca_fit(x: &DMatrix<f64>, y: &DMatrix<f64>, k: usize, ridge: f64) -> Result<CcaModel> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::Alignment(format!(
            "CCA inputs have {} and {} rows",
            n,
            y.nrows()
        )));
    }
    if n < 3 {
        return Err(Error::Dimension(format!("CCA needs at least 3 rows, got {n}")));
    }
    let max_k = x.ncols().min(y.ncols()).min(n - 1);
    if k == 0 || k > max_k {
        return Err(Error::Dimension(format!(
            "CCA target dimension {k} outside 1..={max_k}"
        )));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Numerical(format!("ridge must be a non-negative number, got {ridge}")));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("CCA input contains non-finite values".into()));
    }

    let mean_x = column_means(x);
    let mean_y = column_means(y);
    let xc = centered(x, &mean_x);
    let yc = centered(y, &mean_y);
    let wx = inverse_sqrt(cross_covariance(&xc, &xc), ridge, "textual-side")?;
    let wy = inverse_sqrt(cross_covariance(&yc, &yc), ridge, "visual-side")?;
    let whitened = &wx * cross_covariance(&xc, &yc) * &wy;

    let svd = SVD::new(whitened, true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD did not return V".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    // Full products then column selection, so a fit at k equals a truncated
    // full fit bit for bit.
    let mut proj_x = (&wx * u.select_columns(order.iter())).columns(0, k).into_owned();
    let mut proj_y = (&wy * v_t.select_rows(order.iter()).transpose()).columns(0, k).into_owned();
    order.truncate(k);
    for j in 0..k {
        let joint = proj_x.column(j).iter().chain(proj_y.column(j).iter()).copied().collect::<Vec<_>>();
        if let Some((_, v)) = argmax_abs(joint.iter()) {
            if v < 0.0 {
                proj_x.column_mut(j).neg_mut();
                proj_y.column_mut(j).neg_mut();
            }
        }
    }

    let correlations = order
        .iter()
        .map(|&i| {
            let s = svd.singular_values[i];
            if s > 1.0 + CORRELATION_SLACK {
                Err(Error::Numerical(format!("canonical correlation {s} exceeds 1")))
            } else {
                Ok(s.clamp(0.0, 1.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CcaModel {
        mean_x,
        mean_y,
        proj_x,
        proj_y,
        correlations,
        ridge,
    })
}

/// Projects `x` with the `side` half of the model: `(x − mean) · proj`.
pub fn cca_transform(model: &CcaModel, x: &DMatrix<f64>, side: Side) -> Result<DMatrix<f64>> {
    let proj = model.projection(side);
    if x.ncols() != proj.nrows() {
        return Err(Error::Dimension(format!(
            "{side}-side CCA projection expects {} columns, input has {}",
            proj.nrows(),
            x.ncols()
        )));
    }
    Ok(centered(x, model.mean(side)) * proj)
}
