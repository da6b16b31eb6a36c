//! Query expansion: instantiate the query's terms in the thesaurus,
//! propagate, and append every other term whose posterior exceeds the
//! threshold, weighted by that posterior.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::corpus::index::check_header;
use crate::corpus::smart::{DocId, Document};
use crate::error::{Error, Result};
use crate::inference::{propagate, Evidence, PosteriorVector};
use crate::learner::{BayesNet, Confidence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Original,
    Added,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Original => "original",
            Origin::Added => "added",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryTerm {
    pub term: String,
    pub weight: f64,
    pub origin: Origin,
}

/// Sparse query vector. Original terms carry raw term frequencies; added
/// terms carry their posterior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryVector {
    pub id: DocId,
    pub terms: Vec<QueryTerm>,
}

impl QueryVector {
    /// Term frequencies in order of first appearance.
    pub fn from_tokens<S: AsRef<str>>(id: DocId, tokens: &[S]) -> Self {
        let mut position: HashMap<&str, usize> = HashMap::new();
        let mut terms: Vec<QueryTerm> = Vec::new();
        for tok in tokens {
            let tok = tok.as_ref();
            match position.get(tok) {
                Some(&i) => terms[i].weight += 1.0,
                None => {
                    position.insert(tok, terms.len());
                    terms.push(QueryTerm {
                        term: tok.to_string(),
                        weight: 1.0,
                        origin: Origin::Original,
                    });
                }
            }
        }
        QueryVector { id, terms }
    }

    pub fn from_document(doc: &Document) -> Self {
        QueryVector::from_tokens(doc.id, &doc.tokens)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weight(&self, term: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.term == term).map(|t| t.weight)
    }

    pub fn added(&self) -> impl Iterator<Item = &QueryTerm> {
        self.terms.iter().filter(|t| t.origin == Origin::Added)
    }
}

/// Query terms present in the network become evidence; the rest are
/// returned by name.
pub fn query_evidence(q: &QueryVector, net: &BayesNet) -> (Evidence, Vec<String>) {
    let mut evidence = Evidence::new();
    let mut missing = Vec::new();
    for t in &q.terms {
        match net.node(&t.term) {
            Some(node) => {
                evidence.insert(node);
            }
            None => missing.push(t.term.clone()),
        }
    }
    (evidence, missing)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("threshold {threshold} is not in (0, 1)")))
    }
}

/// Expanded query together with the posteriors that produced it.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub query: QueryVector,
    pub evidence: Evidence,
    pub posteriors: Option<PosteriorVector>,
}

pub fn expand_query_detailed(q: &QueryVector, net: &BayesNet, threshold: f64) -> Result<Expansion> {
    check_threshold(threshold)?;
    if q.is_empty() {
        return Err(Error::InvalidArgument(format!("query {} has no terms", q.id)));
    }
    let (evidence, missing) = query_evidence(q, net);
    if !missing.is_empty() {
        log::debug!("query {}: terms not in the network: {}", q.id, missing.join(" "));
    }
    if evidence.is_empty() {
        log::warn!("query {}: no term is in the network, left unexpanded", q.id);
        return Ok(Expansion {
            query: q.clone(),
            evidence,
            posteriors: None,
        });
    }
    let posteriors = propagate(net, &evidence)?;
    let mut added: Vec<(usize, f64)> = (0..net.len())
        .filter(|&v| !evidence.contains(v))
        .map(|v| (v, posteriors.get(v)))
        .filter(|&(_, p)| p > threshold)
        .collect();
    added.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut query = q.clone();
    for (v, p) in added {
        let term = net.term(v);
        // Terms already in the query are evidence, so never re-added.
        debug_assert!(q.weight(term).is_none());
        query.terms.push(QueryTerm {
            term: term.to_string(),
            weight: p,
            origin: Origin::Added,
        });
    }
    Ok(Expansion {
        query,
        evidence,
        posteriors: Some(posteriors),
    })
}

pub fn expand_query(q: &QueryVector, net: &BayesNet, threshold: f64) -> Result<QueryVector> {
    expand_query_detailed(q, net, threshold).map(|e| e.query)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionStats {
    pub queries: usize,
    pub added_terms: usize,
}

impl ExpansionStats {
    pub fn mean_added(&self) -> f64 {
        if self.queries == 0 {
            0.0
        } else {
            self.added_terms as f64 / self.queries as f64
        }
    }
}

/// Expand every query in parallel. Queries without any indexable term are
/// passed through unchanged.
pub fn expand_queries(
    queries: &[QueryVector],
    net: &BayesNet,
    threshold: f64,
) -> Result<(Vec<QueryVector>, ExpansionStats)> {
    check_threshold(threshold)?;
    let expanded = queries
        .par_iter()
        .map(|q| {
            if q.is_empty() {
                log::warn!("query {} has no indexable terms, left unexpanded", q.id);
                Ok(q.clone())
            } else {
                expand_query(q, net, threshold)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = ExpansionStats {
        queries: expanded.len(),
        added_terms: expanded.iter().map(|q| q.added().count()).sum(),
    };
    log::info!(
        "expanded {} queries at threshold {threshold}: {:.2} added terms per query",
        stats.queries,
        stats.mean_added()
    );
    Ok((expanded, stats))
}

/// Header comment for expanded-query files.
pub fn query_file_header(confidence: Option<Confidence>, threshold: f64) -> String {
    let confidence = confidence.map_or_else(|| "none".to_string(), |c| c.to_string());
    crate::provenance(&format!("expand confidence={confidence} threshold={threshold}"))
}

pub const QUERY_MAGIC: &str = "PQEQRY";
pub const QUERY_VERSION: u32 = 1;

/// Writes a `PQEQRY 1` line, then `.I <id>` records each followed by
/// `term<TAB>weight<TAB>origin` lines.
pub fn write_query_file<W: Write>(queries: &[QueryVector], header: &str, mut out: W) -> Result<()> {
    writeln!(out, "{QUERY_MAGIC} {QUERY_VERSION}")?;
    writeln!(out, "# {header}")?;
    for q in queries {
        writeln!(out, ".I {}", q.id)?;
        for t in &q.terms {
            writeln!(out, "{}\t{}\t{}", t.term, t.weight, t.origin)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// True when `first_line` starts an expanded-query file rather than a
/// SMART query collection.
pub fn is_query_file(first_line: &str) -> bool {
    first_line.split_whitespace().next() == Some(QUERY_MAGIC)
}

pub fn read_query_file<R: BufRead>(reader: R) -> Result<Vec<QueryVector>> {
    let mut queries: Vec<QueryVector> = Vec::new();
    let mut seen_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            check_header(line, QUERY_MAGIC, QUERY_VERSION).map_err(|e| match e {
                Error::Format(m) => Error::parse(line_no, m),
                other => other,
            })?;
            seen_header = true;
            continue;
        }
        if let Some(id) = line.strip_prefix(".I") {
            let id = id
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad query id in {line:?}")))?;
            if queries.iter().any(|q| q.id == id) {
                return Err(Error::parse(line_no, format!("duplicate query id {id}")));
            }
            queries.push(QueryVector { id, terms: Vec::new() });
            continue;
        }
        let q = queries
            .last_mut()
            .ok_or_else(|| Error::parse(line_no, "term line before any .I record"))?;
        let fields: Vec<&str> = line.split('\t').collect();
        let [term, weight, origin] = fields.as_slice() else {
            return Err(Error::parse(line_no, "expected term<TAB>weight<TAB>original|added"));
        };
        let weight: f64 = weight
            .parse()
            .ok()
            .filter(|w: &f64| w.is_finite() && *w >= 0.0)
            .ok_or_else(|| Error::parse(line_no, format!("bad weight {weight:?}")))?;
        let origin = match *origin {
            "original" => Origin::Original,
            "added" => Origin::Added,
            other => return Err(Error::parse(line_no, format!("bad origin {other:?}"))),
        };
        q.terms.push(QueryTerm {
            term: term.to_string(),
            weight,
            origin,
        });
    }
    Ok(queries)
}
