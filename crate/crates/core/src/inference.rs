//! Exact posterior marginals on a polytree under positive evidence.
//!
//! Each connected component is rooted at its smallest node. A collect pass
//! sends messages from the leaves toward the root, a distribute pass sends
//! them back, and every node then combines its causal (π) and diagnostic
//! (λ) support. Messages are two-state vectors over the state of the parent
//! end of their edge and are renormalized as they are produced.

use std::collections::BTreeSet;
use std::io::Write;

use crate::corpus::TermId;
use crate::error::{Error, Result};
use crate::learner::network::{parent_state, BayesNet};

/// Nodes instantiated to "relevant".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence(BTreeSet<TermId>);

impl Evidence {
    pub fn new() -> Self {
        Evidence::default()
    }

    pub fn insert(&mut self, node: TermId) -> bool {
        self.0.insert(node)
    }

    pub fn contains(&self, node: TermId) -> bool {
        self.0.contains(&node)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = TermId> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<TermId> for Evidence {
    fn from_iter<I: IntoIterator<Item = TermId>>(iter: I) -> Self {
        Evidence(iter.into_iter().collect())
    }
}

/// `p(node = 1 | evidence)` for every node.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorVector(pub Vec<f64>);

impl PosteriorVector {
    pub fn get(&self, node: TermId) -> f64 {
        self.0[node]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `term<TAB>posterior` per node, in node order.
    pub fn write_debug<W: Write>(&self, net: &BayesNet, mut out: W) -> Result<()> {
        for (node, p) in self.0.iter().enumerate() {
            writeln!(out, "{}\t{p}", net.term(node))?;
        }
        Ok(())
    }
}

fn check_evidence(net: &BayesNet, ev: &Evidence) -> Result<()> {
    match ev.iter().find(|&v| v >= net.len()) {
        Some(v) => Err(Error::InvalidArgument(format!("evidence node {v} is not in the network"))),
        None => Ok(()),
    }
}

fn normalize(v: [f64; 2]) -> Result<[f64; 2]> {
    let s = v[0] + v[1];
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::ImpossibleEvidence);
    }
    Ok([v[0] / s, v[1] / s])
}

/// Message storage: `pi[e]` flows parent → child, `lambda[e]` child →
/// parent; both are indexed by the parent's state.
struct Messages<'a> {
    net: &'a BayesNet,
    /// Edge ids of each node's parents, aligned with `net.parents(v)`.
    parent_edges: Vec<Vec<usize>>,
    /// Edge ids of each node's children, aligned with `net.children(v)`.
    child_edges: Vec<Vec<usize>>,
    pi: Vec<[f64; 2]>,
    lambda: Vec<[f64; 2]>,
    evidence: Vec<bool>,
}

impl<'a> Messages<'a> {
    fn new(net: &'a BayesNet, ev: &Evidence) -> Self {
        let n = net.len();
        let mut parent_edges = vec![Vec::new(); n];
        let mut child_edges = vec![Vec::new(); n];
        let mut e = 0;
        for child in 0..n {
            for _ in net.parents(child) {
                parent_edges[child].push(e);
                e += 1;
            }
        }
        for p in 0..n {
            for &c in net.children(p) {
                let i = net.parents(c).binary_search(&p).expect("child lists its parent");
                child_edges[p].push(parent_edges[c][i]);
            }
        }
        let mut evidence = vec![false; n];
        for v in ev.iter() {
            evidence[v] = true;
        }
        Messages {
            net,
            parent_edges,
            child_edges,
            pi: vec![[1.0, 1.0]; e],
            lambda: vec![[1.0, 1.0]; e],
            evidence,
        }
    }

    /// Evidence indicator times the λ messages of all children except the
    /// one on edge `skip`.
    fn diagnostic(&self, v: TermId, skip: Option<usize>) -> [f64; 2] {
        let mut lam = if self.evidence[v] { [0.0, 1.0] } else { [1.0, 1.0] };
        for &e in &self.child_edges[v] {
            if Some(e) != skip {
                lam[0] *= self.lambda[e][0];
                lam[1] *= self.lambda[e][1];
            }
        }
        lam
    }

    /// Causal support `π(x) = Σ_u p(x | u) Π_i π_i(u_i)`.
    fn causal(&self, v: TermId) -> [f64; 2] {
        let table = self.net.table(v);
        let edges = &self.parent_edges[v];
        let k = edges.len();
        let mut p1 = 0.0;
        let mut p0 = 0.0;
        for (row, &p) in table.iter().enumerate() {
            let w: f64 = (0..k).map(|i| self.pi[edges[i]][parent_state(row, i, k)]).product();
            p1 += w * p;
            p0 += w * (1.0 - p);
        }
        [p0, p1]
    }

    fn send_to_child(&mut self, v: TermId, edge: usize) -> Result<()> {
        let lam = self.diagnostic(v, Some(edge));
        let pi = self.causal(v);
        self.pi[edge] = normalize([lam[0] * pi[0], lam[1] * pi[1]])?;
        Ok(())
    }

    fn send_to_parent(&mut self, v: TermId, parent_index: usize) -> Result<()> {
        let lam = self.diagnostic(v, None);
        let table = self.net.table(v);
        let edges = &self.parent_edges[v];
        let k = edges.len();
        let mut msg = [0.0; 2];
        for (row, &p) in table.iter().enumerate() {
            let w: f64 = (0..k)
                .filter(|&i| i != parent_index)
                .map(|i| self.pi[edges[i]][parent_state(row, i, k)])
                .product();
            msg[parent_state(row, parent_index, k)] += w * (lam[1] * p + lam[0] * (1.0 - p));
        }
        let edge = edges[parent_index];
        self.lambda[edge] = normalize(msg)?;
        Ok(())
    }

    fn belief(&self, v: TermId) -> Result<f64> {
        let lam = self.diagnostic(v, None);
        let pi = self.causal(v);
        let bel = normalize([lam[0] * pi[0], lam[1] * pi[1]])?;
        Ok(bel[1].clamp(0.0, 1.0))
    }
}

/// How a node reaches its tree parent in the rooted traversal.
#[derive(Clone, Copy)]
enum Up {
    /// The tree parent is one of the node's parents in the network
    /// (the index into `net.parents(v)`).
    ToParent(usize),
    /// The tree parent is a child in the network; the edge id.
    ToChild(usize),
}

pub fn propagate(net: &BayesNet, ev: &Evidence) -> Result<PosteriorVector> {
    check_evidence(net, ev)?;
    for v in 0..net.len() {
        if net.table(v).len() != 1 << net.parents(v).len() {
            return Err(Error::MalformedNetwork(format!("node {v} has an incomplete table")));
        }
    }
    let n = net.len();
    let mut msgs = Messages::new(net, ev);
    let mut visited = vec![false; n];
    let mut up: Vec<Option<Up>> = vec![None; n];

    for root in 0..n {
        if visited[root] {
            continue;
        }
        // Breadth-first order of this component.
        let mut order = vec![root];
        visited[root] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for (i, &p) in net.parents(v).iter().enumerate() {
                if !visited[p] {
                    visited[p] = true;
                    up[p] = Some(Up::ToChild(msgs.parent_edges[v][i]));
                    order.push(p);
                }
            }
            for (j, &c) in net.children(v).iter().enumerate() {
                if !visited[c] {
                    visited[c] = true;
                    let e = msgs.child_edges[v][j];
                    let i = msgs.parent_edges[c].iter().position(|&x| x == e).expect("edge is shared");
                    up[c] = Some(Up::ToParent(i));
                    order.push(c);
                }
            }
        }

        // Collect toward the root.
        for &v in order.iter().rev() {
            match up[v] {
                Some(Up::ToParent(i)) => msgs.send_to_parent(v, i)?,
                Some(Up::ToChild(e)) => msgs.send_to_child(v, e)?,
                None => {}
            }
        }
        // Distribute away from the root.
        for &v in &order {
            for i in 0..net.parents(v).len() {
                let p = net.parents(v)[i];
                if matches!(up[p], Some(Up::ToChild(e)) if e == msgs.parent_edges[v][i]) {
                    msgs.send_to_parent(v, i)?;
                }
            }
            for j in 0..net.children(v).len() {
                let c = net.children(v)[j];
                let e = msgs.child_edges[v][j];
                if matches!(up[c], Some(Up::ToParent(i)) if msgs.parent_edges[c][i] == e) {
                    msgs.send_to_child(v, e)?;
                }
            }
        }
    }

    let posteriors = (0..n).map(|v| msgs.belief(v)).collect::<Result<Vec<_>>>()?;
    Ok(PosteriorVector(posteriors))
}

pub const BRUTE_FORCE_LIMIT: usize = 25;

/// Posterior marginals by enumerating every joint configuration.
pub fn brute_force_posteriors(net: &BayesNet, ev: &Evidence) -> Result<PosteriorVector> {
    check_evidence(net, ev)?;
    let n = net.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            nodes: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let evidence_mask: u64 = ev.iter().fold(0, |m, v| m | 1 << v);
    let mut mass = 0.0;
    let mut marginals = vec![0.0; n];
    for config in 0u64..1 << n {
        if config & evidence_mask != evidence_mask {
            continue;
        }
        let state = |v: usize| (config >> v & 1) as usize;
        let mut weight = 1.0;
        for v in 0..n {
            let parents = net.parents(v);
            let row = parents.iter().fold(0, |acc, &p| (acc << 1) | state(p));
            let p1 = net.table(v)[row];
            weight *= if state(v) == 1 { p1 } else { 1.0 - p1 };
        }
        mass += weight;
        for (v, m) in marginals.iter_mut().enumerate() {
            if state(v) == 1 {
                *m += weight;
            }
        }
    }
    if !(mass > 0.0) {
        return Err(Error::ImpossibleEvidence);
    }
    Ok(PosteriorVector(marginals.into_iter().map(|m| (m / mass).clamp(0.0, 1.0)).collect()))
}
