use std::collections::HashMap;
use std::hash::Hash;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use super::config::{validate_configuration, Configuration, LayerA, LayerB, LayerC, Output};
use crate::embeddings::{EmbeddingTable, Vocab};
use crate::error::{Error, Result};
use crate::numerics::{cca_fit, cca_transform, pca_transform, rcca_residual, CcaModel, PcaModel, Side};

/// The executable result of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoringModel {
    /// Pair scores are cosines on one table.
    Single(EmbeddingTable),
    /// Pair scores are `alpha·cos(first) + (1 − alpha)·cos(second)`.
    Interpolated {
        first: EmbeddingTable,
        second: EmbeddingTable,
        alpha: f64,
    },
}

impl ScoringModel {
    pub fn vocab(&self) -> &Arc<Vocab> {
        match self {
            ScoringModel::Single(t) => t.vocab(),
            ScoringModel::Interpolated { first, .. } => first.vocab(),
        }
    }

    /// Dimension used for tie-breaking: the table's dimension, or the larger
    /// of the two dimensions for an interpolated pair.
    pub fn output_dim(&self) -> usize {
        match self {
            ScoringModel::Single(t) => t.dim(),
            ScoringModel::Interpolated { first, second, .. } => first.dim().max(second.dim()),
        }
    }
}

type Cell<V> = Arc<OnceLock<Result<Arc<V>>>>;

/// Compute-once memo table: concurrent callers for the same key block until
/// the single computation finishes and then share its result.
pub(crate) struct OnceMap<K, V> {
    cells: Mutex<HashMap<K, Cell<V>>>,
}

impl<K: Eq + Hash + Clone, V> OnceMap<K, V> {
    pub(crate) fn new() -> Self {
        OnceMap {
            cells: Mutex::new(HashMap::new()),
        }
    }

    pub(crate) fn get_or_compute(&self, key: &K, f: impl FnOnce() -> Result<V>) -> Result<Arc<V>> {
        let cell = {
            let mut cells = self.cells.lock().unwrap_or_else(|p| p.into_inner());
            cells.entry(key.clone()).or_default().clone()
        };
        cell.get_or_init(|| f().map(Arc::new)).clone()
    }

    pub(crate) fn retain(&self, mut keep: impl FnMut(&K) -> bool) {
        let mut cells = self.cells.lock().unwrap_or_else(|p| p.into_inner());
        cells.retain(|k, _| keep(k));
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.cells.lock().unwrap().len()
    }
}

type RidgeBits = u64;

/// Applies configurations to one pair of aligned tables, memoizing every
/// fit and intermediate matrix so configurations sharing a prefix share
/// work. Results do not depend on the order or concurrency of calls.
pub struct Composer<'a> {
    textual: &'a EmbeddingTable,
    visual: &'a EmbeddingTable,
    raw_pca: OnceMap<Side, PcaModel>,
    layer_a: OnceMap<(Side, LayerA), DMatrix<f64>>,
    fallback_pca: OnceMap<(Side, LayerA), PcaModel>,
    cca: OnceMap<(LayerA, RidgeBits), CcaModel>,
    projected: OnceMap<(Side, LayerA, usize, RidgeBits), DMatrix<f64>>,
    residual: OnceMap<(Side, LayerA, usize, RidgeBits), DMatrix<f64>>,
}

impl<'a> Composer<'a> {
    /// `textual` and `visual` must share the same ordered vocabulary.
    pub fn new(textual: &'a EmbeddingTable, visual: &'a EmbeddingTable) -> Result<Self> {
        if !Arc::ptr_eq(textual.vocab(), visual.vocab()) && textual.words() != visual.words() {
            return Err(Error::Alignment(
                "textual and visual tables must share an aligned vocabulary".into(),
            ));
        }
        Ok(Composer {
            textual,
            visual,
            raw_pca: OnceMap::new(),
            layer_a: OnceMap::new(),
            fallback_pca: OnceMap::new(),
            cca: OnceMap::new(),
            projected: OnceMap::new(),
            residual: OnceMap::new(),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.textual.dim(), self.visual.dim())
    }

    /// Drops every memoized result that depends on `layer_a`. Later calls
    /// recompute them identically.
    pub fn evict(&self, layer_a: LayerA) {
        self.layer_a.retain(|k| k.1 != layer_a);
        self.fallback_pca.retain(|k| k.1 != layer_a);
        self.cca.retain(|k| k.0 != layer_a);
        self.projected.retain(|k| k.1 != layer_a);
        self.residual.retain(|k| k.1 != layer_a);
    }

    fn table(&self, side: Side) -> &'a EmbeddingTable {
        match side {
            Side::Textual => self.textual,
            Side::Visual => self.visual,
        }
    }

    fn n(&self) -> usize {
        self.textual.len()
    }

    fn check_pca_dim(&self, d: usize, k: usize) -> Result<()> {
        let max_k = d.min(self.n().saturating_sub(1));
        if k == 0 || k > max_k {
            return Err(Error::Dimension(format!(
                "PCA target dimension {k} outside 1..={max_k} for a {}x{d} input",
                self.n()
            )));
        }
        Ok(())
    }

    fn layer_a_output(&self, side: Side, layer_a: LayerA) -> Result<Arc<DMatrix<f64>>> {
        self.layer_a.get_or_compute(&(side, layer_a), || {
            let raw = self.table(side).matrix();
            match layer_a {
                LayerA::None => Ok(raw.clone()),
                LayerA::Pca(k) => {
                    self.check_pca_dim(raw.ncols(), k)?;
                    let full = self
                        .raw_pca
                        .get_or_compute(&side, || PcaModel::fit_full(raw))?;
                    pca_transform(&full.truncate(k)?, raw)
                }
            }
        })
    }

    fn cca_model(&self, layer_a: LayerA, dim: usize, ridge: f64) -> Result<CcaModel> {
        let full = self.cca.get_or_compute(&(layer_a, ridge.to_bits()), || {
            let x = self.layer_a_output(Side::Textual, layer_a)?;
            let y = self.layer_a_output(Side::Visual, layer_a)?;
            let max_k = x.ncols().min(y.ncols()).min(self.n().saturating_sub(1)).max(1);
            cca_fit(&x, &y, max_k, ridge)
        })?;
        full.truncate(dim)
    }

    fn projected(&self, side: Side, layer_a: LayerA, dim: usize, ridge: f64) -> Result<Arc<DMatrix<f64>>> {
        self.projected
            .get_or_compute(&(side, layer_a, dim, ridge.to_bits()), || {
                let model = self.cca_model(layer_a, dim, ridge)?;
                cca_transform(&model, &*self.layer_a_output(side, layer_a)?, side)
            })
    }

    fn residual(&self, side: Side, layer_a: LayerA, dim: usize, ridge: f64) -> Result<Arc<DMatrix<f64>>> {
        self.residual
            .get_or_compute(&(side, layer_a, dim, ridge.to_bits()), || {
                let original = self.layer_a_output(side, layer_a)?;
                let projected = self.projected(side, layer_a, dim, ridge)?;
                if original.ncols() == dim {
                    return rcca_residual(&original, &projected, None);
                }
                self.check_pca_dim(original.ncols(), dim)?;
                let full = self
                    .fallback_pca
                    .get_or_compute(&(side, layer_a), || PcaModel::fit_full(&original))?;
                rcca_residual(&original, &projected, Some(&full.truncate(dim)?))
            })
    }

    fn to_table(&self, label: String, m: &DMatrix<f64>) -> Result<EmbeddingTable> {
        EmbeddingTable::with_vocab(label, self.textual.vocab().clone(), m.clone())
    }

    /// Runs layers a, b and c of `config`.
    pub fn apply(&self, config: &Configuration) -> Result<ScoringModel> {
        let (dim_t, dim_v) = self.dims();
        let violations = validate_configuration(config, dim_t, dim_v);
        if !violations.is_empty() {
            return Err(Error::InvalidConfiguration(violations));
        }
        let la = config.layer_a;
        let ridge = config.ridge;
        let prefix = match la {
            LayerA::None => String::new(),
            LayerA::Pca(k) => format!("pca{k}:"),
        };

        let sides = |o: Output| match o {
            Output::Single(s) => vec![s],
            Output::Both => vec![Side::Textual, Side::Visual],
        };
        let mut tables = Vec::with_capacity(2);
        match config.layer_b {
            LayerB::None(o) => {
                for s in sides(o) {
                    let m = self.layer_a_output(s, la)?;
                    tables.push(self.to_table(format!("{prefix}{s}"), &m)?);
                }
            }
            LayerB::Cca { dim, output } => {
                for s in sides(output) {
                    let m = self.projected(s, la, dim, ridge)?;
                    tables.push(self.to_table(format!("{prefix}cca{dim}:{s}"), &m)?);
                }
            }
            LayerB::Rcca { dim, output } => {
                for s in sides(output) {
                    let m = self.residual(s, la, dim, ridge)?;
                    tables.push(self.to_table(format!("{prefix}rcca{dim}:{s}"), &m)?);
                }
            }
            LayerB::CcaPlusRcca {
                dim,
                cca_side,
                rcca_side,
            } => {
                let c = self.to_table(
                    format!("{prefix}cca{dim}:{cca_side}"),
                    &*self.projected(cca_side, la, dim, ridge)?,
                )?;
                let r = self.to_table(
                    format!("{prefix}rcca{dim}:{rcca_side}"),
                    &*self.residual(rcca_side, la, dim, ridge)?,
                )?;
                // The textual-derived table comes first; with equal sides
                // the CCA projection does.
                if cca_side == rcca_side || cca_side == Side::Textual {
                    tables.extend([c, r]);
                } else {
                    tables.extend([r, c]);
                }
            }
        }

        match config.layer_c {
            LayerC::None => Ok(ScoringModel::Single(tables.remove(0))),
            LayerC::Concat => {
                let (a, b) = (&tables[0], &tables[1]);
                let (left, right) = if config.normalize_concat {
                    (row_normalized(a.matrix()), row_normalized(b.matrix()))
                } else {
                    (a.matrix().clone(), b.matrix().clone())
                };
                let n = left.nrows();
                let mut m = DMatrix::zeros(n, left.ncols() + right.ncols());
                m.columns_mut(0, left.ncols()).copy_from(&left);
                m.columns_mut(left.ncols(), right.ncols()).copy_from(&right);
                Ok(ScoringModel::Single(
                    self.to_table(format!("{}+{}", a.name(), b.name()), &m)?,
                ))
            }
            LayerC::Li(alpha) => {
                let second = tables.pop().expect("two tables");
                let first = tables.pop().expect("two tables");
                Ok(ScoringModel::Interpolated {
                    first,
                    second,
                    alpha,
                })
            }
        }
    }
}

fn row_normalized(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

/// Validates and applies one configuration without sharing any cache.
pub fn apply_configuration(
    config: &Configuration,
    textual: &EmbeddingTable,
    visual: &EmbeddingTable,
) -> Result<ScoringModel> {
    Composer::new(textual, visual)?.apply(config)
}
