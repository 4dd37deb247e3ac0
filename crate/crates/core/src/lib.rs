//! Corpus pipeline and evaluation harness for statute article retrieval.
//!
//! The crate turns a hierarchically organized law code into per-article
//! training sets, builds test query sets, and scores prediction matrices
//! under single-label and multi-label protocols. A TF-IDF nearest-centroid
//! classifier is included so the pipeline runs end to end without any
//! external model.

pub mod attributes;
pub mod baseline;
pub mod clustering;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod ids;
pub mod io;
pub mod labeling;
pub mod querygen;
pub mod sparse;
pub mod vocab;

pub use error::{Error, Result};
pub use ids::{ArticleId, Scope};
