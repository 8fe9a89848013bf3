//! Multimodal word-embedding fusion by motif composition.
//!
//! Textual and visual embedding tables are combined through a three-layer
//! pipeline: an optional PCA reduction ([`composition::LayerA`]), an
//! optional fusion step with CCA or residual CCA ([`composition::LayerB`]),
//! and an optional combination by concatenation or score interpolation
//! ([`composition::LayerC`]). [`search::grid_search`] evaluates every valid
//! configuration against a word-similarity benchmark with Spearman's rho and
//! picks the best one, preferring lower output dimensions on ties.
//!
//! ```
//! use motif_core::composition::{apply_configuration, Configuration};
//! use motif_core::embeddings::{align_vocabularies, EmbeddingTable};
//! use motif_core::evaluation::{evaluate, Benchmark, WordPair};
//!
//! let text = EmbeddingTable::from_rows("textual", [
//!     ("cat", vec![1.0, 0.1]), ("dog", vec![0.9, 0.2]), ("car", vec![0.0, 1.0]),
//! ]).unwrap();
//! let image = EmbeddingTable::from_rows("visual", [
//!     ("cat", vec![0.5, 0.5]), ("dog", vec![0.4, 0.6]), ("car", vec![1.0, 0.0]),
//! ]).unwrap();
//! let (text, image) = align_vocabularies(&text, &image).unwrap();
//!
//! let bench = Benchmark::new("toy", vec![
//!     WordPair { first: "cat".into(), second: "dog".into(), gold: 9.0 },
//!     WordPair { first: "cat".into(), second: "car".into(), gold: 1.0 },
//!     WordPair { first: "dog".into(), second: "car".into(), gold: 2.0 },
//! ]).unwrap();
//!
//! let config: Configuration = "layer_a=none\nlayer_b=none:TV\nlayer_c=li:0.5\n".parse().unwrap();
//! let model = apply_configuration(&config, &text, &image).unwrap();
//! let result = evaluate(&model, &bench).unwrap();
//! assert_eq!(result.n_evaluated, 3);
//! ```

pub mod composition;
pub mod embeddings;
pub mod error;
pub mod evaluation;
pub mod numerics;
pub mod search;

pub use error::{Error, Result};
