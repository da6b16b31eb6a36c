//! Vector-space retrieval under `nnn` weighting: raw term frequencies on
//! both sides, no collection weighting, no length normalization, matched by
//! inner product.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::corpus::smart::DocId;
use crate::corpus::CorpusIndex;
use crate::error::{Error, Result};
use crate::expansion::QueryVector;

pub const DEFAULT_K: usize = 15;

/// Header comment for run files.
pub fn run_header() -> String {
    crate::provenance("search weighting=nnn")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    pub id: DocId,
    pub tf: BTreeMap<String, u32>,
}

/// Inner product, accumulated in query-term order.
pub fn score(d: &DocVector, q: &QueryVector) -> f64 {
    let mut total = 0.0;
    for t in &q.terms {
        if let Some(&tf) = d.tf.get(&t.term) {
            total += tf as f64 * t.weight;
        }
    }
    total
}

/// Document vectors rebuilt from the inverted file, ascending by id.
pub fn doc_vectors(index: &CorpusIndex) -> Vec<DocVector> {
    let mut docs: BTreeMap<DocId, BTreeMap<String, u32>> = BTreeMap::new();
    for (term, name) in index.vocab.terms().iter().enumerate() {
        for p in index.inverted.postings(term) {
            docs.entry(p.doc).or_default().insert(name.clone(), p.tf);
        }
    }
    docs.into_iter().map(|(id, tf)| DocVector { id, tf }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredDoc {
    pub doc: DocId,
    pub score: f64,
}

/// Order by descending score, then ascending document id.
fn rank(hits: &mut [ScoredDoc]) {
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.doc.cmp(&b.doc)));
}

/// Term-at-a-time scorer over an index.
pub struct Searcher<'a> {
    index: &'a CorpusIndex,
    doc_ids: Vec<DocId>,
    /// Postings with documents renumbered densely.
    postings: Vec<Vec<(u32, u32)>>,
}

impl<'a> Searcher<'a> {
    pub fn new(index: &'a CorpusIndex) -> Self {
        let doc_ids = index.inverted.doc_ids();
        let postings = (0..index.inverted.n_terms())
            .map(|t| {
                index
                    .inverted
                    .postings(t)
                    .iter()
                    .map(|p| (doc_ids.binary_search(&p.doc).expect("indexed doc") as u32, p.tf))
                    .collect()
            })
            .collect();
        Searcher {
            index,
            doc_ids,
            postings,
        }
    }

    /// Documents with a positive score, best first, at most `k`.
    pub fn search(&self, q: &QueryVector, k: usize) -> Vec<ScoredDoc> {
        let mut acc = vec![0.0f64; self.doc_ids.len()];
        let mut touched = vec![false; self.doc_ids.len()];
        for t in &q.terms {
            let Some(term) = self.index.vocab.id(&t.term) else { continue };
            for &(d, tf) in &self.postings[term] {
                acc[d as usize] += tf as f64 * t.weight;
                touched[d as usize] = true;
            }
        }
        let mut hits: Vec<ScoredDoc> = touched
            .iter()
            .enumerate()
            .filter(|&(d, &hit)| hit && acc[d] > 0.0)
            .map(|(d, _)| ScoredDoc {
                doc: self.doc_ids[d],
                score: acc[d],
            })
            .collect();
        rank(&mut hits);
        hits.truncate(k);
        hits
    }
}

pub fn search(index: &CorpusIndex, q: &QueryVector, k: usize) -> Vec<ScoredDoc> {
    Searcher::new(index).search(q, k)
}

/// Reference scorer: every document, one at a time.
pub fn search_exhaustive(docs: &[DocVector], q: &QueryVector, k: usize) -> Vec<ScoredDoc> {
    let mut hits: Vec<ScoredDoc> = docs
        .iter()
        .map(|d| ScoredDoc {
            doc: d.id,
            score: score(d, q),
        })
        .filter(|h| h.score > 0.0)
        .collect();
    rank(&mut hits);
    hits.truncate(k);
    hits
}

/// Ranked lists per query id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankedRun {
    pub lists: BTreeMap<DocId, Vec<ScoredDoc>>,
}

impl RankedRun {
    pub fn get(&self, query: DocId) -> &[ScoredDoc] {
        self.lists.get(&query).map_or(&[], Vec::as_slice)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = DocId> + '_ {
        self.lists.keys().copied()
    }

    pub fn truncated(&self, k: usize) -> RankedRun {
        RankedRun {
            lists: self
                .lists
                .iter()
                .map(|(&q, l)| (q, l.iter().take(k).copied().collect()))
                .collect(),
        }
    }

    /// Lines `query_id<TAB>rank<TAB>doc_id<TAB>score`, ranks from 1.
    pub fn write<W: Write>(&self, header: &str, mut out: W) -> Result<()> {
        writeln!(out, "# {header}")?;
        for (q, list) in &self.lists {
            for (i, hit) in list.iter().enumerate() {
                writeln!(out, "{q}\t{}\t{}\t{}", i + 1, hit.doc, hit.score)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lists: BTreeMap<DocId, Vec<(usize, ScoredDoc)>> = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let parsed = match fields.as_slice() {
                [q, r, d, s] => (|| Some((q.parse().ok()?, r.parse().ok()?, d.parse().ok()?, s.parse().ok()?)))(),
                _ => None,
            };
            let (q, r, doc, score): (DocId, usize, DocId, f64) =
                parsed.ok_or_else(|| Error::parse(line_no, "expected query_id<TAB>rank<TAB>doc_id<TAB>score"))?;
            lists.entry(q).or_default().push((r, ScoredDoc { doc, score }));
        }
        let mut out = RankedRun::default();
        for (q, mut list) in lists {
            list.sort_by_key(|&(r, _)| r);
            if list.iter().enumerate().any(|(i, &(r, _))| r != i + 1) {
                return Err(Error::format(format!("query {q}: ranks are not 1..n")));
            }
            let list: Vec<ScoredDoc> = list.into_iter().map(|(_, h)| h).collect();
            let mut seen = std::collections::HashSet::new();
            if !list.iter().all(|h| seen.insert(h.doc)) {
                return Err(Error::format(format!("query {q}: duplicate document in ranking")));
            }
            out.lists.insert(q, list);
        }
        Ok(out)
    }
}

/// Rank every query (in parallel). Queries that retrieve nothing get an
/// empty list.
pub fn search_all(index: &CorpusIndex, queries: &[QueryVector], k: usize) -> RankedRun {
    let searcher = Searcher::new(index);
    let lists: Vec<(DocId, Vec<ScoredDoc>)> = queries.par_iter().map(|q| (q.id, searcher.search(q, k))).collect();
    RankedRun {
        lists: lists.into_iter().collect(),
    }
}
