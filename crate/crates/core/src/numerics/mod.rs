//! Matrix-level motifs: PCA, CCA and residual CCA.
//!
//! All fits are deterministic. Component signs are fixed so that the
//! largest-magnitude entry of each direction is positive.

mod cca;
mod dump;
mod linalg;
mod pca;
mod residual;

pub use cca::{cca_fit, cca_transform, CcaModel, DEFAULT_RIDGE};
pub use dump::{read_matrix_block, write_matrix_block};
pub use linalg::{column_means, sample_correlation};
pub use pca::{pca_fit, pca_transform, PcaModel};
pub use residual::rcca_residual;

use std::fmt;
use std::str::FromStr;

/// Which modality a projection or output refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Textual,
    Visual,
}

impl Side {
    pub fn letter(self) -> char {
        match self {
            Side::Textual => 'T',
            Side::Visual => 'V',
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Textual => Side::Visual,
            Side::Visual => Side::Textual,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "T" | "t" | "textual" => Ok(Side::Textual),
            "V" | "v" | "visual" => Ok(Side::Visual),
            _ => Err(format!("unknown side `{s}` (expected T or V)")),
        }
    }
}
