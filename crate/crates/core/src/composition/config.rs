use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{Side, DEFAULT_RIDGE};

/// Layer a: what the fusion layer receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayerA {
    /// Original vectors.
    None,
    /// Both modalities reduced with PCA to the same dimension.
    Pca(usize),
}

/// Which modality tables leave a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    Single(Side),
    /// Textual and visual, in that order.
    Both,
}

impl Output {
    fn rank(self) -> u8 {
        match self {
            Output::Single(Side::Textual) => 0,
            Output::Single(Side::Visual) => 1,
            Output::Both => 2,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Output::Single(Side::Textual) => "T",
            Output::Single(Side::Visual) => "V",
            Output::Both => "TV",
        }
    }

    fn parse(s: &str) -> std::result::Result<Self, String> {
        match s {
            "TV" => Ok(Output::Both),
            other => other.parse().map(Output::Single),
        }
    }
}

/// Layer b: fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerB {
    /// No fusion; the layer-a tables pass through.
    None(Output),
    Cca { dim: usize, output: Output },
    Rcca { dim: usize, output: Output },
    /// One CCA projection and one residual, always consumed by layer c.
    CcaPlusRcca {
        dim: usize,
        cca_side: Side,
        rcca_side: Side,
    },
}

impl LayerB {
    fn rank(&self) -> u8 {
        match self {
            LayerB::None(_) => 0,
            LayerB::Cca { .. } => 1,
            LayerB::Rcca { .. } => 2,
            LayerB::CcaPlusRcca { .. } => 3,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match *self {
            LayerB::None(_) => None,
            LayerB::Cca { dim, .. } | LayerB::Rcca { dim, .. } | LayerB::CcaPlusRcca { dim, .. } => {
                Some(dim)
            }
        }
    }

    fn side_rank(&self) -> u8 {
        match *self {
            LayerB::None(o) | LayerB::Cca { output: o, .. } | LayerB::Rcca { output: o, .. } => {
                o.rank()
            }
            LayerB::CcaPlusRcca {
                cca_side,
                rcca_side,
                ..
            } => 2 * (cca_side as u8) + rcca_side as u8,
        }
    }

    /// Number of tables handed to layer c.
    pub fn n_outputs(&self) -> usize {
        match *self {
            LayerB::None(o) | LayerB::Cca { output: o, .. } | LayerB::Rcca { output: o, .. } => {
                match o {
                    Output::Single(_) => 1,
                    Output::Both => 2,
                }
            }
            LayerB::CcaPlusRcca { .. } => 2,
        }
    }
}

/// Layer c: combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerC {
    None,
    Concat,
    /// Score interpolation; `alpha` weights the first (textual-derived) table.
    Li(f64),
}

impl LayerC {
    fn rank(&self) -> u8 {
        match self {
            LayerC::None => 0,
            LayerC::Concat => 1,
            LayerC::Li(_) => 2,
        }
    }
}

/// Individual modeling motifs, used to restrict a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Motif {
    Pca,
    Cca,
    Rcca,
    Concat,
    Li,
}

impl FromStr for Motif {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pca" => Ok(Motif::Pca),
            "cca" => Ok(Motif::Cca),
            "rcca" | "r-cca" => Ok(Motif::Rcca),
            "concat" | "concatenation" => Ok(Motif::Concat),
            "li" => Ok(Motif::Li),
            other => Err(format!("unknown motif `{other}`")),
        }
    }
}

impl fmt::Display for Motif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Motif::Pca => "pca",
            Motif::Cca => "cca",
            Motif::Rcca => "rcca",
            Motif::Concat => "concat",
            Motif::Li => "li",
        })
    }
}

/// One choice per composition layer plus numeric parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub layer_a: LayerA,
    pub layer_b: LayerB,
    pub layer_c: LayerC,
    pub ridge: f64,
    /// L2-normalize each block's rows before concatenation.
    pub normalize_concat: bool,
}

impl Configuration {
    pub fn new(layer_a: LayerA, layer_b: LayerB, layer_c: LayerC) -> Self {
        Configuration {
            layer_a,
            layer_b,
            layer_c,
            ridge: DEFAULT_RIDGE,
            normalize_concat: false,
        }
    }

    /// The unimodal baseline: one modality's original vectors.
    pub fn identity(side: Side) -> Self {
        Self::new(LayerA::None, LayerB::None(Output::Single(side)), LayerC::None)
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn motifs(&self) -> Vec<Motif> {
        let mut out = Vec::new();
        if let LayerA::Pca(_) = self.layer_a {
            out.push(Motif::Pca);
        }
        match self.layer_b {
            LayerB::None(_) => {}
            LayerB::Cca { .. } => out.push(Motif::Cca),
            LayerB::Rcca { .. } => out.push(Motif::Rcca),
            LayerB::CcaPlusRcca { .. } => {
                out.push(Motif::Cca);
                out.push(Motif::Rcca);
            }
        }
        match self.layer_c {
            LayerC::None => {}
            LayerC::Concat => out.push(Motif::Concat),
            LayerC::Li(_) => out.push(Motif::Li),
        }
        out
    }

    /// Total order matching the enumeration order: layer-a dimension
    /// (none first), layer-b variant, layer-b dimension, sides, layer-c
    /// variant, alpha, then ridge and the normalization flag.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        let a_key = |c: &Self| match c.layer_a {
            LayerA::None => None,
            LayerA::Pca(k) => Some(k),
        };
        let alpha = |c: &Self| match c.layer_c {
            LayerC::Li(a) => a,
            _ => 0.0,
        };
        a_key(self)
            .cmp(&a_key(other))
            .then(self.layer_b.rank().cmp(&other.layer_b.rank()))
            .then(self.layer_b.dim().cmp(&other.layer_b.dim()))
            .then(self.layer_b.side_rank().cmp(&other.layer_b.side_rank()))
            .then(self.layer_c.rank().cmp(&other.layer_c.rank()))
            .then(alpha(self).total_cmp(&alpha(other)))
            .then(self.ridge.total_cmp(&other.ridge))
            .then(self.normalize_concat.cmp(&other.normalize_concat))
    }

    /// Single-line form of the flat serialization (keys separated by spaces).
    pub fn to_line(&self) -> String {
        self.to_string().trim_end().replace('\n', " ")
    }

    /// Table-style summary such as `PCA (200) / CCA (V,200) + R-CCA (T,200) / LI (0.4)`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let LayerA::Pca(k) = self.layer_a {
            parts.push(format!("PCA ({k})"));
        }
        let sides = |o: Output| match o {
            Output::Single(s) => format!("{s},"),
            Output::Both => String::new(),
        };
        match self.layer_b {
            LayerB::None(Output::Single(s)) => parts.push(format!("input ({s})")),
            LayerB::None(Output::Both) => {
                if parts.is_empty() {
                    parts.push("input (T+V)".into());
                }
            }
            LayerB::Cca { dim, output } => parts.push(format!("CCA ({}{dim})", sides(output))),
            LayerB::Rcca { dim, output } => parts.push(format!("R-CCA ({}{dim})", sides(output))),
            LayerB::CcaPlusRcca {
                dim,
                cca_side,
                rcca_side,
            } => parts.push(format!("CCA ({cca_side},{dim}) + R-CCA ({rcca_side},{dim})")),
        }
        match self.layer_c {
            LayerC::None => {}
            LayerC::Concat => parts.push(if self.normalize_concat {
                "Concat (norm)".into()
            } else {
                "Concat".into()
            }),
            LayerC::Li(a) => parts.push(format!("LI ({a})")),
        }
        parts.join(" / ")
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layer_a {
            LayerA::None => writeln!(f, "layer_a=none")?,
            LayerA::Pca(k) => writeln!(f, "layer_a=pca:{k}")?,
        }
        match self.layer_b {
            LayerB::None(o) => writeln!(f, "layer_b=none:{}", o.token())?,
            LayerB::Cca { dim, output } => writeln!(f, "layer_b=cca:{dim}:{}", output.token())?,
            LayerB::Rcca { dim, output } => writeln!(f, "layer_b=rcca:{dim}:{}", output.token())?,
            LayerB::CcaPlusRcca {
                dim,
                cca_side,
                rcca_side,
            } => writeln!(f, "layer_b=cca_plus_rcca:{dim}:cca={cca_side}:rcca={rcca_side}")?,
        }
        match self.layer_c {
            LayerC::None => writeln!(f, "layer_c=none")?,
            LayerC::Concat => writeln!(f, "layer_c=concat")?,
            LayerC::Li(a) => writeln!(f, "layer_c=li:{a}")?,
        }
        writeln!(f, "ridge={}", self.ridge)?;
        if self.normalize_concat {
            writeln!(f, "normalize=true")?;
        }
        Ok(())
    }
}

fn parse_dim(s: &str, line: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid dimension `{s}`")))
}

fn parse_layer_b(v: &str, line: usize) -> Result<LayerB> {
    let parts: Vec<&str> = v.split(':').collect();
    let bad = |m: String| Error::parse(line, m);
    let output = |s: &str| Output::parse(s).map_err(bad);
    match parts.as_slice() {
        ["none", o] => Ok(LayerB::None(output(o)?)),
        ["cca", d, o] => Ok(LayerB::Cca {
            dim: parse_dim(d, line)?,
            output: output(o)?,
        }),
        ["rcca", d, o] => Ok(LayerB::Rcca {
            dim: parse_dim(d, line)?,
            output: output(o)?,
        }),
        ["cca_plus_rcca", d, c, r] => {
            let side = |s: &str, key: &str| -> Result<Side> {
                let v = s
                    .strip_prefix(key)
                    .and_then(|s| s.strip_prefix('='))
                    .ok_or_else(|| bad(format!("expected `{key}=T|V`, found `{s}`")))?;
                v.parse().map_err(bad)
            };
            Ok(LayerB::CcaPlusRcca {
                dim: parse_dim(d, line)?,
                cca_side: side(c, "cca")?,
                rcca_side: side(r, "rcca")?,
            })
        }
        _ => Err(bad(format!("unrecognized layer_b value `{v}`"))),
    }
}

impl FromStr for Configuration {
    type Err = Error;

    /// Parses `key=value` pairs separated by newlines or whitespace. Blank
    /// lines and `#` comments are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut layer_a = None;
        let mut layer_b = None;
        let mut layer_c = None;
        let mut ridge = None;
        let mut normalize = false;
        for (i, raw) in s.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("");
            for token in text.split_whitespace() {
                let (key, value) = token
                    .split_once('=')
                    .ok_or_else(|| Error::parse(line, format!("expected key=value, found `{token}`")))?;
                match key {
                    "layer_a" => {
                        layer_a = Some(match value {
                            "none" => LayerA::None,
                            v => match v.strip_prefix("pca:") {
                                Some(d) => LayerA::Pca(parse_dim(d, line)?),
                                None => {
                                    return Err(Error::parse(
                                        line,
                                        format!("unrecognized layer_a value `{v}`"),
                                    ))
                                }
                            },
                        })
                    }
                    "layer_b" => layer_b = Some(parse_layer_b(value, line)?),
                    "layer_c" => {
                        layer_c = Some(match value {
                            "none" => LayerC::None,
                            "concat" => LayerC::Concat,
                            v => match v.strip_prefix("li:") {
                                Some(a) => LayerC::Li(a.parse().map_err(|_| {
                                    Error::parse(line, format!("invalid alpha `{a}`"))
                                })?),
                                None => {
                                    return Err(Error::parse(
                                        line,
                                        format!("unrecognized layer_c value `{v}`"),
                                    ))
                                }
                            },
                        })
                    }
                    "ridge" => {
                        ridge = Some(value.parse::<f64>().map_err(|_| {
                            Error::parse(line, format!("invalid ridge `{value}`"))
                        })?)
                    }
                    "normalize" => {
                        normalize = value.parse::<bool>().map_err(|_| {
                            Error::parse(line, format!("invalid normalize flag `{value}`"))
                        })?
                    }
                    other => return Err(Error::parse(line, format!("unknown key `{other}`"))),
                }
            }
        }
        let missing = |k: &str| Error::parse(0, format!("missing `{k}`"));
        Ok(Configuration {
            layer_a: layer_a.ok_or_else(|| missing("layer_a"))?,
            layer_b: layer_b.ok_or_else(|| missing("layer_b"))?,
            layer_c: layer_c.ok_or_else(|| missing("layer_c"))?,
            ridge: ridge.unwrap_or(DEFAULT_RIDGE),
            normalize_concat: normalize,
        })
    }
}

/// Lists every composition constraint `config` violates for inputs of the
/// given dimensions. An empty list means the configuration is valid.
pub fn validate_configuration(config: &Configuration, dim_t: usize, dim_v: usize) -> Vec<String> {
    let mut v = Vec::new();
    if !(config.ridge >= 0.0 && config.ridge.is_finite()) {
        v.push(format!("ridge must be a non-negative number, got {}", config.ridge));
    }

    let uses = |side: Side| match config.layer_b {
        LayerB::None(Output::Single(s)) => s == side,
        _ => true,
    };
    let (eff_t, eff_v) = match config.layer_a {
        LayerA::None => (dim_t, dim_v),
        LayerA::Pca(k) => {
            if k == 0 {
                v.push("layer a: PCA dimension must be positive".to_string());
            }
            for (side, d) in [(Side::Textual, dim_t), (Side::Visual, dim_v)] {
                if uses(side) && k > d {
                    v.push(format!(
                        "layer a: PCA dimension {k} exceeds the {} input dimension {d}",
                        side_name(side)
                    ));
                }
            }
            (k, k)
        }
    };

    if let Some(dim) = config.layer_b.dim() {
        if eff_t != eff_v {
            v.push(format!(
                "layer b: CCA/R-CCA require inputs of the same dimensionality, got textual {eff_t} and visual {eff_v}"
            ));
        }
        if dim == 0 {
            v.push("layer b: fusion dimension must be positive".to_string());
        } else if dim > eff_t.min(eff_v) {
            v.push(format!(
                "layer b: fusion dimension {dim} exceeds the input dimensionality {}",
                eff_t.min(eff_v)
            ));
        }
    }

    let n_out = config.layer_b.n_outputs();
    match config.layer_c {
        LayerC::None => {
            if let LayerB::CcaPlusRcca { .. } = config.layer_b {
                v.push("layer c: mixed CCA + R-CCA fusion must be consumed by concat or LI".to_string());
            } else if n_out != 1 {
                v.push("layer c: none requires a single output side (T or V), layer b emits two tables".to_string());
            }
        }
        LayerC::Concat | LayerC::Li(_) => {
            if n_out != 2 {
                v.push(format!(
                    "layer c: {} requires two input tables, layer b emits one",
                    if config.layer_c == LayerC::Concat { "concat" } else { "LI" }
                ));
            }
        }
    }
    if let LayerC::Li(a) = config.layer_c {
        if !(0.0..=1.0).contains(&a) {
            v.push(format!("layer c: LI weight {a} outside [0, 1]"));
        }
    }
    if config.normalize_concat && config.layer_c != LayerC::Concat {
        v.push("normalize applies only to concatenation".to_string());
    }
    v
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Textual => "textual",
        Side::Visual => "visual",
    }
}
