//! Polytree Bayesian-network thesaurus for automatic query expansion.
//!
//! The pipeline indexes a SMART-format collection, learns a polytree over
//! its terms from co-occurrence statistics, expands queries by exact
//! propagation of query-term evidence, and evaluates retrieval with and
//! without expansion under raw term-frequency (`nnn`) weighting.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod expansion;
pub mod inference;
pub mod learner;
pub mod retrieval;

pub use error::{Error, Result};

/// Tool name and version followed by a free-form description, used in
/// output file header comments.
pub fn provenance(what: &str) -> String {
    format!("polyqe {} {what}", env!("CARGO_PKG_VERSION"))
}
