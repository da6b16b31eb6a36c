//! The learned thesaurus: a polytree over terms with a prior for each root
//! and a conditional probability table for every other node.
//!
//! Table rows enumerate parent configurations in binary order with the
//! parents sorted by ascending id and the first parent as the most
//! significant bit. Every entry is `p(node = 1 | configuration)`; a root's
//! table has the single row holding its prior.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::corpus::index::{check_header, LineReader};
use crate::corpus::TermId;
use crate::error::{Error, Result};
use crate::learner::chi2::Confidence;
use crate::learner::skeleton::component_count;

pub const NETWORK_MAGIC: &str = "PQENET";
pub const NETWORK_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    confidence: Option<Confidence>,
    terms: Vec<String>,
    parents: Vec<Vec<TermId>>,
    children: Vec<Vec<TermId>>,
    tables: Vec<Vec<f64>>,
    by_term: HashMap<String, TermId>,
}

/// State (0/1) of the `i`-th of `k` parents in configuration `row`.
#[inline]
pub fn parent_state(row: usize, i: usize, k: usize) -> usize {
    (row >> (k - 1 - i)) & 1
}

impl BayesNet {
    /// Build and validate a network. `parents[v]` lists the parents of node
    /// `v`; `tables[v]` has `2^|parents[v]|` entries.
    pub fn new(
        terms: Vec<String>,
        mut parents: Vec<Vec<TermId>>,
        tables: Vec<Vec<f64>>,
        confidence: Option<Confidence>,
    ) -> Result<Self> {
        let n = terms.len();
        if parents.len() != n || tables.len() != n {
            return Err(Error::MalformedNetwork(format!(
                "{n} nodes but {} parent lists and {} tables",
                parents.len(),
                tables.len()
            )));
        }
        let mut by_term = HashMap::with_capacity(n);
        for (id, term) in terms.iter().enumerate() {
            if term.is_empty() || term.contains(char::is_whitespace) {
                return Err(Error::MalformedNetwork(format!("node {id} has an invalid term {term:?}")));
            }
            if by_term.insert(term.clone(), id).is_some() {
                return Err(Error::MalformedNetwork(format!("term {term:?} appears twice")));
            }
        }
        let mut children = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for (child, list) in parents.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::MalformedNetwork(format!("node {child} lists a parent twice")));
            }
            for &p in list.iter() {
                if p >= n || p == child {
                    return Err(Error::MalformedNetwork(format!("node {child} has invalid parent {p}")));
                }
                children[p].push(child);
                edges.push((p, child));
            }
        }
        // A polytree's skeleton is a forest: no undirected cycles (this
        // also rules out directed cycles and antiparallel pairs).
        if edges.len() + component_count(n, &edges) != n {
            return Err(Error::MalformedNetwork("underlying undirected graph has a cycle".into()));
        }
        for (v, table) in tables.iter().enumerate() {
            let k = parents[v].len();
            if k >= usize::BITS as usize - 1 || table.len() != 1 << k {
                return Err(Error::MalformedNetwork(format!(
                    "node {v} has {} table rows, expected 2^{k}",
                    table.len()
                )));
            }
            if let Some(p) = table.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::MalformedNetwork(format!("node {v} has probability {p} outside [0, 1]")));
            }
        }
        Ok(BayesNet {
            confidence,
            terms,
            parents,
            children,
            tables,
            by_term,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn confidence(&self) -> Option<Confidence> {
        self.confidence
    }

    pub fn term(&self, node: TermId) -> &str {
        &self.terms[node]
    }

    pub fn node(&self, term: &str) -> Option<TermId> {
        self.by_term.get(term).copied()
    }

    pub fn parents(&self, node: TermId) -> &[TermId] {
        &self.parents[node]
    }

    pub fn children(&self, node: TermId) -> &[TermId] {
        &self.children[node]
    }

    /// `p(node = 1 | configuration row)`.
    pub fn table(&self, node: TermId) -> &[f64] {
        &self.tables[node]
    }

    /// Stored prior of a root node.
    pub fn prior(&self, node: TermId) -> Option<f64> {
        self.parents[node].is_empty().then(|| self.tables[node][0])
    }

    /// `(parent, child)` pairs ordered by parent, then child.
    pub fn edges(&self) -> Vec<(TermId, TermId)> {
        let mut edges: Vec<_> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect();
        edges.sort_unstable();
        edges
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn max_parents(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Line-oriented format:
    ///
    /// ```text
    /// PQENET 1 <confidence|none>
    /// NODE <id> <term> PRIOR <p>     (roots)
    /// NODE <id> <term> CPT           (nodes with parents)
    /// EDGE <parent_id> <child_id>
    /// CPT <id> <row> <p(node=1)>
    /// ```
    ///
    /// Probabilities are written in shortest round-trip form.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let confidence = self.confidence.map_or_else(|| "none".to_string(), |c| c.to_string());
        writeln!(out, "{NETWORK_MAGIC} {NETWORK_VERSION} {confidence}")?;
        writeln!(
            out,
            "# {} nodes={} edges={}",
            crate::provenance("network"),
            self.len(),
            self.edge_count()
        )?;
        for (id, term) in self.terms.iter().enumerate() {
            match self.prior(id) {
                Some(p) => writeln!(out, "NODE {id} {term} PRIOR {p}")?,
                None => writeln!(out, "NODE {id} {term} CPT")?,
            }
        }
        for (p, c) in self.edges() {
            writeln!(out, "EDGE {p} {c}")?;
        }
        for (id, table) in self.tables.iter().enumerate() {
            if self.parents[id].is_empty() {
                continue;
            }
            for (row, p) in table.iter().enumerate() {
                writeln!(out, "CPT {id} {row} {p}")?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = LineReader::new(reader);
        let (_, header) = lines.next_content()?.ok_or_else(|| Error::format("empty network file"))?;
        check_header(&header, NETWORK_MAGIC, NETWORK_VERSION)?;
        let confidence = match header.split_whitespace().nth(2) {
            None | Some("none") => None,
            Some(c) => Some(c.parse()?),
        };

        let mut terms = Vec::new();
        let mut priors: Vec<Option<f64>> = Vec::new();
        let mut parents: Vec<Vec<TermId>> = Vec::new();
        let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
        let mut cpt_entries = Vec::new();

        while let Some((line, text)) = lines.next_content()? {
            let fields: Vec<&str> = text.split_whitespace().collect();
            let bad = |msg: &str| Error::parse(line, msg.to_string());
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad("expected an integer"));
            let prob = |s: &str| s.parse::<f64>().map_err(|_| bad("expected a probability"));
            match fields.as_slice() {
                ["NODE", id, term, "PRIOR", p] => {
                    if num(id)? != terms.len() {
                        return Err(bad("node ids must be consecutive from 0"));
                    }
                    terms.push(term.to_string());
                    priors.push(Some(prob(p)?));
                    parents.push(Vec::new());
                }
                ["NODE", id, term, "CPT"] => {
                    if num(id)? != terms.len() {
                        return Err(bad("node ids must be consecutive from 0"));
                    }
                    terms.push(term.to_string());
                    priors.push(None);
                    parents.push(Vec::new());
                }
                ["EDGE", p, c] => {
                    let (p, c) = (num(p)?, num(c)?);
                    if c >= parents.len() || p >= parents.len() {
                        return Err(bad("edge references an undeclared node"));
                    }
                    parents[c].push(p);
                }
                ["CPT", id, row, p] => cpt_entries.push((line, num(id)?, num(row)?, prob(p)?)),
                _ => return Err(bad("unrecognised network line")),
            }
        }

        for (id, ps) in parents.iter().enumerate() {
            let k = ps.len();
            if k > 0 && priors[id].is_some() {
                return Err(Error::MalformedNetwork(format!("node {id} has parents but a PRIOR")));
            }
            if k == 0 && priors[id].is_none() {
                return Err(Error::MalformedNetwork(format!("root node {id} has no PRIOR")));
            }
            if k >= 31 {
                return Err(Error::MalformedNetwork(format!("node {id} has {k} parents")));
            }
            rows.push(if k == 0 { vec![priors[id]] } else { vec![None; 1 << k] });
        }
        for (line, id, row, p) in cpt_entries {
            let slot = rows
                .get_mut(id)
                .filter(|_| !parents[id].is_empty())
                .and_then(|r| r.get_mut(row))
                .ok_or_else(|| Error::parse(line, format!("CPT row {row} does not exist for node {id}")))?;
            if slot.replace(p).is_some() {
                return Err(Error::parse(line, format!("CPT row {row} of node {id} given twice")));
            }
        }
        let tables = rows
            .into_iter()
            .enumerate()
            .map(|(id, r)| {
                let expected = r.len();
                r.into_iter().collect::<Option<Vec<f64>>>().ok_or_else(|| {
                    Error::MalformedNetwork(format!("node {id} is missing CPT rows (expected {expected})"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        BayesNet::new(terms, parents, tables, confidence)
    }
}
