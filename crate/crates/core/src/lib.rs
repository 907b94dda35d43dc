//! Core library of the hyperrec recommender: dataset handling, weighted
//! hypergraph construction, hyperedge-aware random walks, skip-gram
//! embedding training, diversified ranking, and fold-based evaluation.

pub mod binio;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod fingerprint;
pub mod hypergraph;
pub mod parallel;
pub mod pipeline;
pub mod ranker;
pub mod rng;
pub mod sampling;
pub mod synthetic;
pub mod walker;

pub use error::{Error, Result};
