//! Maximum-weight spanning forest by Prim's algorithm on a dense graph.

use rayon::prelude::*;

use crate::corpus::TermId;

/// Edge weights of a complete graph over `0..node_count()`.
///
/// `admits` decides whether a selected maximum edge may join the forest.
/// It must be monotone in the weight for a fixed graph: if an edge of
/// weight `w` is rejected then so is every edge of weight `≤ w`.
pub trait EdgeWeights: Sync {
    fn node_count(&self) -> usize;

    fn weight(&self, a: TermId, b: TermId) -> f64;

    fn admits(&self, _a: TermId, _b: TermId, weight: f64) -> bool {
        weight > 0.0
    }
}

/// Dense symmetric weight matrix. Weight 0 marks a pair that passed the
/// independence test and can never be an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        WeightedGraph {
            n,
            weights: vec![0.0; n * n],
        }
    }

    /// Set the weight of the unordered pair `{a, b}`. Negative weights are
    /// stored as 0; self-loops are ignored.
    pub fn set(&mut self, a: TermId, b: TermId, weight: f64) {
        if a == b {
            return;
        }
        let w = weight.max(0.0);
        self.weights[a * self.n + b] = w;
        self.weights[b * self.n + a] = w;
    }

    pub fn get(&self, a: TermId, b: TermId) -> f64 {
        self.weights[a * self.n + b]
    }
}

impl EdgeWeights for WeightedGraph {
    fn node_count(&self) -> usize {
        self.n
    }

    fn weight(&self, a: TermId, b: TermId) -> f64 {
        self.get(a, b)
    }
}

/// Undirected forest. Edges are stored as `(min, max)` in the order they
/// were adjoined.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub n: usize,
    pub edges: Vec<(TermId, TermId)>,
    pub weights: Vec<f64>,
}

impl Skeleton {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn adjacency(&self) -> Vec<Vec<TermId>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn component_count(&self) -> usize {
        component_count(self.n, &self.edges)
    }

    pub fn is_forest(&self) -> bool {
        self.edges.len() + self.component_count() == self.n
    }
}

/// Connected components of an undirected graph given as an edge list.
pub fn component_count(n: usize, edges: &[(TermId, TermId)]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components
}

fn ordered(a: TermId, b: TermId) -> (TermId, TermId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

const NO_LINK: usize = usize::MAX;
const PARALLEL_ROW_MIN: usize = 256;

/// Grow trees from node 0, always adjoining the heaviest admissible edge
/// across the cut (ties go to the smallest `(min, max)` pair). When the best
/// crossing edge is not admissible the tree is closed and growth restarts at
/// the smallest unvisited node, so the result is a spanning forest.
pub fn build_skeleton<W: EdgeWeights + ?Sized>(graph: &W) -> Skeleton {
    let n = graph.node_count();
    let mut skeleton = Skeleton {
        n,
        edges: Vec::new(),
        weights: Vec::new(),
    };
    let mut key = vec![f64::NEG_INFINITY; n];
    let mut link = vec![NO_LINK; n];
    // Unvisited nodes, kept ascending.
    let mut outside: Vec<TermId> = (0..n).collect();
    let total_pairs = n * n.saturating_sub(1) / 2;
    let mut evaluated = 0usize;
    let mut next_report = total_pairs / 10;
    let mut row = Vec::with_capacity(n);

    while let Some(&start) = outside.first() {
        outside.remove(0);
        for &v in &outside {
            key[v] = f64::NEG_INFINITY;
            link[v] = NO_LINK;
        }
        let mut current = start;
        loop {
            // Relax keys against the node just added.
            row.clear();
            if outside.len() >= PARALLEL_ROW_MIN {
                outside
                    .par_iter()
                    .map(|&v| graph.weight(current, v))
                    .collect_into_vec(&mut row);
            } else {
                row.extend(outside.iter().map(|&v| graph.weight(current, v)));
            }
            for (&v, &w) in outside.iter().zip(&row) {
                let better = w > key[v]
                    || (w == key[v] && link[v] != NO_LINK && ordered(current, v) < ordered(link[v], v));
                if better {
                    key[v] = w;
                    link[v] = current;
                }
            }
            evaluated += outside.len();
            if total_pairs >= 1_000_000 && evaluated >= next_report {
                log::info!("dependency sweep: {evaluated}/{total_pairs} pairs");
                next_report += total_pairs / 10;
            }

            let best = outside
                .iter()
                .enumerate()
                .filter(|(_, &v)| link[v] != NO_LINK)
                .max_by(|(_, &x), (_, &y)| {
                    key[x]
                        .total_cmp(&key[y])
                        .then_with(|| ordered(link[y], y).cmp(&ordered(link[x], x)))
                });
            let Some((pos, &v)) = best else { break };
            let (u, w) = (link[v], key[v]);
            if !(w > 0.0) || !graph.admits(u, v, w) {
                break;
            }
            skeleton.edges.push(ordered(u, v));
            skeleton.weights.push(w);
            outside.remove(pos);
            current = v;
        }
    }
    log::info!(
        "skeleton: {} edges adjoined over {} nodes ({} components)",
        skeleton.edges.len(),
        n,
        n - skeleton.edges.len()
    );
    skeleton
}
