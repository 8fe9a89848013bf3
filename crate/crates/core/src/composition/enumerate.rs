use std::collections::BTreeSet;

use super::config::{validate_configuration, Configuration, LayerA, LayerB, LayerC, Motif, Output};
use crate::error::{Error, Result};
use crate::numerics::{Side, DEFAULT_RIDGE};

/// Parameter grid for the configuration search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dim_step: usize,
    pub dim_min: usize,
    pub alpha_step: f64,
    pub ridge: f64,
    /// When set, only configurations whose motifs are a non-empty subset
    /// of this set are emitted.
    pub motifs: Option<BTreeSet<Motif>>,
    pub normalize_concat: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            dim_step: 50,
            dim_min: 50,
            alpha_step: 0.1,
            ridge: DEFAULT_RIDGE,
            motifs: None,
            normalize_concat: false,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim_step == 0 {
            return Err(Error::Grid("dimension step must be at least 1".into()));
        }
        if self.dim_min == 0 {
            return Err(Error::Grid("minimum dimension must be at least 1".into()));
        }
        if !(self.alpha_step > 0.0 && self.alpha_step <= 1.0) {
            return Err(Error::Grid(format!(
                "alpha step must be in (0, 1], got {}",
                self.alpha_step
            )));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Grid(format!("ridge must be non-negative, got {}", self.ridge)));
        }
        if matches!(&self.motifs, Some(m) if m.is_empty()) {
            return Err(Error::Grid("motif filter is empty".into()));
        }
        Ok(())
    }

    /// `dim_min, dim_min + step, …` up to and including `max`.
    pub fn dims_up_to(&self, max: usize) -> Vec<usize> {
        (self.dim_min..=max).step_by(self.dim_step.max(1)).collect()
    }

    /// `0, step, 2·step, …` up to 1, rounded to 9 decimals so values print
    /// cleanly.
    pub fn alphas(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u32;
        loop {
            let a = (f64::from(i) * self.alpha_step * 1e9).round() / 1e9;
            if a > 1.0 {
                break;
            }
            out.push(a);
            i += 1;
        }
        out
    }

    pub fn admits(&self, config: &Configuration) -> bool {
        match &self.motifs {
            None => true,
            Some(allowed) => {
                let used = config.motifs();
                !used.is_empty() && used.iter().all(|m| allowed.contains(m))
            }
        }
    }
}

/// Every valid configuration for inputs of dimensions `dim_t` and `dim_v`,
/// in canonical order. Depends only on the dimensions and the grid.
pub fn enumerate_configurations(dim_t: usize, dim_v: usize, grid: &GridSpec) -> Result<Vec<Configuration>> {
    grid.validate()?;
    let alphas = grid.alphas();
    let mut combos: Vec<LayerC> = vec![LayerC::Concat];
    combos.extend(alphas.iter().map(|&a| LayerC::Li(a)));

    let mut layer_as = vec![(LayerA::None, dim_t, dim_v)];
    layer_as.extend(
        grid.dims_up_to(dim_t.min(dim_v))
            .into_iter()
            .map(|k| (LayerA::Pca(k), k, k)),
    );

    let outputs = [
        Output::Single(Side::Textual),
        Output::Single(Side::Visual),
        Output::Both,
    ];
    let mut out = Vec::new();
    let mut push = |layer_a, layer_b, layer_c: LayerC| {
        let mut c = Configuration::new(layer_a, layer_b, layer_c).with_ridge(grid.ridge);
        c.normalize_concat = grid.normalize_concat && layer_c == LayerC::Concat;
        if grid.admits(&c) && validate_configuration(&c, dim_t, dim_v).is_empty() {
            out.push(c);
        }
    };

    for (layer_a, eff_t, eff_v) in layer_as {
        let mut fusions: Vec<Box<dyn Fn(Output) -> LayerB>> = vec![Box::new(LayerB::None)];
        if eff_t == eff_v {
            for dim in grid.dims_up_to(eff_t) {
                fusions.push(Box::new(move |output| LayerB::Cca { dim, output }));
            }
            for dim in grid.dims_up_to(eff_t) {
                fusions.push(Box::new(move |output| LayerB::Rcca { dim, output }));
            }
        }
        for make in &fusions {
            for o in outputs {
                match o {
                    Output::Single(_) => push(layer_a, make(o), LayerC::None),
                    Output::Both => {
                        for &c in &combos {
                            push(layer_a, make(o), c);
                        }
                    }
                }
            }
        }
        if eff_t != eff_v {
            continue;
        }
        for dim in grid.dims_up_to(eff_t) {
            for cca_side in [Side::Textual, Side::Visual] {
                for rcca_side in [Side::Textual, Side::Visual] {
                    let b = LayerB::CcaPlusRcca {
                        dim,
                        cca_side,
                        rcca_side,
                    };
                    for &c in &combos {
                        push(layer_a, b, c);
                    }
                }
            }
        }
    }
    Ok(out)
}
