//! Layered configurations (data → fusion → combination) and their
//! application to a pair of aligned embedding tables.

mod apply;
mod config;
mod enumerate;

pub use apply::{apply_configuration, Composer, ScoringModel};
pub use config::{validate_configuration, Configuration, LayerA, LayerB, LayerC, Motif, Output};
pub use enumerate::{enumerate_configurations, GridSpec};
