use crate::corpus::{InvertedFile, PresenceBits, TermId, Vocabulary};
use crate::error::{Error, Result};
use crate::learner::chi2::Confidence;
use crate::learner::network::BayesNet;

pub const DEFAULT_MAX_PARENTS: usize = 12;

/// Laplace-smoothed estimate of a binary outcome.
#[inline]
pub fn smoothed(successes: u64, trials: u64) -> f64 {
    (successes as f64 + 1.0) / (trials as f64 + 2.0)
}

/// Fill in priors and conditional tables for a fixed structure by counting
/// document presence patterns. `parents[v]` must describe a polytree.
pub fn estimate_parameters(
    vocab: &Vocabulary,
    parents: Vec<Vec<TermId>>,
    inv: &InvertedFile,
    confidence: Option<Confidence>,
    max_parents: usize,
) -> Result<BayesNet> {
    let bits = PresenceBits::new(inv);
    let n_docs = inv.n_docs();
    // Documents without any term have every parent absent (row 0) and the
    // child absent.
    let empty_docs = n_docs - bits.n_dense() as u64;

    let mut tables = Vec::with_capacity(parents.len());
    for (node, ps) in parents.iter().enumerate() {
        let mut ps = ps.clone();
        ps.sort_unstable();
        if ps.len() > max_parents {
            return Err(Error::TooManyParents {
                node,
                term: vocab.term(node).to_string(),
                parents: ps.len(),
                cap: max_parents,
            });
        }
        if ps.is_empty() {
            tables.push(vec![smoothed(inv.df(node), n_docs)]);
            continue;
        }
        let rows = 1usize << ps.len();
        let mut trials = vec![0u64; rows];
        let mut hits = vec![0u64; rows];
        trials[0] += empty_docs;
        for doc in 0..bits.n_dense() {
            let row = ps
                .iter()
                .fold(0usize, |acc, &p| (acc << 1) | usize::from(bits.contains(p, doc)));
            trials[row] += 1;
            if bits.contains(node, doc) {
                hits[row] += 1;
            }
        }
        tables.push(hits.iter().zip(&trials).map(|(&h, &t)| smoothed(h, t)).collect());
    }
    BayesNet::new(vocab.terms().to_vec(), parents, tables, confidence)
}
