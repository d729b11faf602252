//! Ensembles of parallel genetic-programming populations for symbolic
//! regression, with semantic pruning of redundant populations.
//!
//! Every ensemble slot evolves either a syntax-tree population ([`stgp`]) or a
//! geometric semantic population ([`gsgp`]) on its own bootstrap sample of the
//! global training set. After each generation the [`ensemble`] compares the
//! best individuals of all alive slots with one of the [`similarity`] criteria
//! and removes the worse of every similar pair, handing its weight over to the
//! survivor. The [`experiment`] module drives the comparative protocol and
//! [`stats`] turns the per-run results into one-tailed Mann-Whitney p-values.

pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod gsgp;
pub mod rng;
pub mod similarity;
pub mod stats;
pub mod stgp;
pub mod tree;

pub use dataset::{Dataset, SplitSpec};
pub use ensemble::{Engine, Ensemble, EnsembleConfig, PruneStrategy, RemovalEvent};
pub use error::{Error, Result};
pub use similarity::{SimilarityConfig, SimilarityVerdict};
pub use tree::{Node, SyntaxTree};
