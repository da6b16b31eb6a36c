//! Edge orientation of a learned skeleton.
//!
//! First every pair of adjacent edges `α − γ − β` is tested for a
//! head-to-head pattern: both edges point at `γ` when conditioning on `γ`
//! raises the dependency of `α` and `β` and that conditional dependency is
//! significant (chi-square, two degrees of freedom). The remaining edges
//! are then directed away from nodes that already have a parent, and any
//! still-unconstrained fragment is rooted at its smallest node.

use std::collections::{BTreeSet, VecDeque};

use crate::corpus::{pair_counts, triple_counts, InvertedFile, TermId};
use crate::error::Result;
use crate::learner::chi2::{independence_test, Confidence, DegreesOfFreedom};
use crate::learner::dep::{conditional_dep, marginal_dep};
use crate::learner::skeleton::Skeleton;

#[derive(Debug, Clone, PartialEq)]
pub struct Orientation {
    /// `(parent, child)` pairs, sorted.
    pub edges: Vec<(TermId, TermId)>,
    /// Nodes at which the head-to-head rule fired.
    pub colliders: BTreeSet<TermId>,
    /// Head-to-head demands that lost to an earlier orientation.
    pub conflicts: Vec<String>,
    /// Edges that propagation wanted in both directions.
    pub warnings: Vec<String>,
}

impl Orientation {
    pub fn parents(&self, n: usize) -> Vec<Vec<TermId>> {
        let mut parents = vec![Vec::new(); n];
        for &(p, c) in &self.edges {
            parents[c].push(p);
        }
        for list in &mut parents {
            list.sort_unstable();
        }
        parents
    }

    /// Nodes with two or more parents where the head-to-head rule never
    /// fired. Empty unless propagation had to break a contradiction.
    pub fn unexplained_colliders(&self, n: usize) -> Vec<TermId> {
        self.parents(n)
            .iter()
            .enumerate()
            .filter(|(node, parents)| parents.len() >= 2 && !self.colliders.contains(node))
            .map(|(node, _)| node)
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    Undirected,
    /// From the smaller to the larger endpoint.
    Forward,
    Backward,
}

struct EdgeState {
    adj: Vec<Vec<(TermId, usize)>>,
    ends: Vec<(TermId, TermId)>,
    dir: Vec<Dir>,
}

impl EdgeState {
    fn new(sk: &Skeleton) -> Self {
        let mut ends: Vec<(TermId, TermId)> = sk.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        ends.sort_unstable();
        let mut adj = vec![Vec::new(); sk.n];
        for (e, &(a, b)) in ends.iter().enumerate() {
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        EdgeState {
            adj,
            dir: vec![Dir::Undirected; ends.len()],
            ends,
        }
    }

    fn head(&self, e: usize) -> Option<TermId> {
        match self.dir[e] {
            Dir::Undirected => None,
            Dir::Forward => Some(self.ends[e].1),
            Dir::Backward => Some(self.ends[e].0),
        }
    }

    fn point_at(&mut self, e: usize, head: TermId) {
        self.dir[e] = if head == self.ends[e].1 { Dir::Forward } else { Dir::Backward };
    }

    fn has_parent(&self, node: TermId) -> bool {
        self.adj[node].iter().any(|&(_, e)| self.head(e) == Some(node))
    }
}

pub fn orient_edges(sk: &Skeleton, inv: &InvertedFile, confidence: Confidence) -> Result<Orientation> {
    let mut state = EdgeState::new(sk);
    let mut colliders = BTreeSet::new();
    let mut conflicts = Vec::new();
    let mut warnings = Vec::new();

    // Head-to-head detection, triplets in ascending (γ, min, max) order.
    for gamma in 0..sk.n {
        let neighbours = state.adj[gamma].clone();
        for (i, &(alpha, e_alpha)) in neighbours.iter().enumerate() {
            for &(beta, e_beta) in &neighbours[i + 1..] {
                let marginal = marginal_dep(&pair_counts(inv, alpha, beta)?)?;
                let conditional = conditional_dep(&triple_counts(inv, alpha, beta, gamma)?)?;
                let fires = marginal.value < conditional.value
                    && !independence_test(&conditional, DegreesOfFreedom::Two, confidence);
                if !fires {
                    continue;
                }
                colliders.insert(gamma);
                for (tail, e) in [(alpha, e_alpha), (beta, e_beta)] {
                    match state.head(e) {
                        None => state.point_at(e, gamma),
                        Some(h) if h == gamma => {}
                        Some(_) => {
                            let msg = format!(
                                "head-to-head {alpha}->{gamma}<-{beta}: edge {gamma}->{tail} already directed, kept"
                            );
                            log::debug!("{msg}");
                            conflicts.push(msg);
                        }
                    }
                }
            }
        }
    }
    let fired = state.dir.iter().filter(|d| **d != Dir::Undirected).count();
    log::info!("orientation: {} head-to-head nodes, {fired} edges directed toward them", colliders.len());

    // Propagate away from nodes that already have a parent.
    let seeds: Vec<TermId> = (0..sk.n).filter(|&v| state.has_parent(v)).collect();
    propagate_from(&mut state, seeds, &mut warnings);

    // Root each remaining undirected fragment at its smallest node.
    for root in 0..sk.n {
        if state.adj[root].iter().any(|&(_, e)| state.dir[e] == Dir::Undirected) {
            propagate_from(&mut state, vec![root], &mut warnings);
        }
    }

    let mut edges: Vec<(TermId, TermId)> = (0..state.ends.len())
        .map(|e| {
            let head = state.head(e).expect("every edge is directed");
            let (a, b) = state.ends[e];
            (if head == a { b } else { a }, head)
        })
        .collect();
    edges.sort_unstable();
    let orientation = Orientation {
        edges,
        colliders,
        conflicts,
        warnings,
    };
    let unexplained = orientation.unexplained_colliders(sk.n);
    if !unexplained.is_empty() {
        log::warn!("head-to-head nodes not produced by the collider rule: {unexplained:?}");
    }
    Ok(orientation)
}

/// Breadth-first: every undirected edge at a node in the queue is directed
/// away from it. An edge whose far end already has a parent is wanted in
/// both directions; it is directed from the lower to the higher id.
fn propagate_from(state: &mut EdgeState, seeds: Vec<TermId>, warnings: &mut Vec<String>) {
    let mut queue: VecDeque<TermId> = seeds.into();
    while let Some(node) = queue.pop_front() {
        for i in 0..state.adj[node].len() {
            let (other, e) = state.adj[node][i];
            if state.dir[e] != Dir::Undirected {
                continue;
            }
            if state.has_parent(other) && state.has_parent(node) {
                let (lo, hi) = state.ends[e];
                let msg = format!("edge {lo}-{hi} is constrained in both directions; directed {lo}->{hi}");
                log::warn!("{msg}");
                warnings.push(msg);
                state.point_at(e, hi);
                queue.push_back(hi);
            } else {
                state.point_at(e, other);
                queue.push_back(other);
            }
        }
    }
}
