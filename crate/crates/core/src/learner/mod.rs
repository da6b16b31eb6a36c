//! Polytree structure learning from term co-occurrence.
//!
//! [`learn`] composes the stages: all-pairs marginal dependency with the
//! one-degree-of-freedom independence gate feeding a maximum-weight spanning
//! forest, head-to-head orientation with the two-degree gate, and smoothed
//! parameter estimation.

pub mod chi2;
pub mod dep;
pub mod network;
pub mod orient;
pub mod params;
pub mod skeleton;

pub use chi2::{chi_square_quantile, independence_test, Confidence, DegreesOfFreedom};
pub use dep::{conditional_dep, marginal_dep, DepScore};
pub use network::BayesNet;
pub use orient::{orient_edges, Orientation};
pub use params::{estimate_parameters, DEFAULT_MAX_PARENTS};
pub use skeleton::{build_skeleton, EdgeWeights, Skeleton, WeightedGraph};

use crate::corpus::{CorpusIndex, InvertedFile, PresenceBits, TermId};
use crate::error::Result;

/// Marginal dependency between every pair of terms, computed on demand.
/// Only pairs that the spanning-forest search proposes are put through the
/// independence test.
pub struct DependenceGraph {
    bits: PresenceBits,
    confidence: Confidence,
}

impl DependenceGraph {
    pub fn new(inv: &InvertedFile, confidence: Confidence) -> Self {
        DependenceGraph {
            bits: PresenceBits::new(inv),
            confidence,
        }
    }
}

impl EdgeWeights for DependenceGraph {
    fn node_count(&self) -> usize {
        self.bits.n_terms()
    }

    fn weight(&self, a: TermId, b: TermId) -> f64 {
        dep::mutual_information(&self.bits.pair_counts(a, b))
            .expect("non-empty collection")
            .max(0.0)
    }

    fn admits(&self, _a: TermId, _b: TermId, weight: f64) -> bool {
        let score = DepScore {
            value: weight,
            sample_size: self.bits.n_docs(),
        };
        !independence_test(&score, DegreesOfFreedom::One, self.confidence)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearnOptions {
    pub confidence: Confidence,
    pub max_parents: usize,
}

impl LearnOptions {
    pub fn new(confidence: Confidence) -> Self {
        LearnOptions {
            confidence,
            max_parents: DEFAULT_MAX_PARENTS,
        }
    }
}

/// Intermediate products of a learning run, kept for inspection.
#[derive(Debug, Clone)]
pub struct Learned {
    pub skeleton: Skeleton,
    pub orientation: Orientation,
    pub net: BayesNet,
}

pub fn learn_detailed(index: &CorpusIndex, options: LearnOptions) -> Result<Learned> {
    let inv = &index.inverted;
    log::info!(
        "learning polytree over {} terms, {} documents, confidence {}",
        inv.n_terms(),
        inv.n_docs(),
        options.confidence
    );
    let graph = DependenceGraph::new(inv, options.confidence);
    let skeleton = build_skeleton(&graph);
    let orientation = orient_edges(&skeleton, inv, options.confidence)?;
    let net = estimate_parameters(
        &index.vocab,
        orientation.parents(skeleton.n),
        inv,
        Some(options.confidence),
        options.max_parents,
    )?;
    Ok(Learned {
        skeleton,
        orientation,
        net,
    })
}

pub fn learn(index: &CorpusIndex, options: LearnOptions) -> Result<BayesNet> {
    learn_detailed(index, options).map(|l| l.net)
}
