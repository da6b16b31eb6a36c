use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use crate::corpus::smart::DocId;
use crate::error::{Error, Result};
use crate::retrieval::ScoredDoc;

/// Standard recall levels 0.1, 0.2, ..., 1.0.
pub const RECALL_LEVELS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Relevance judgments: query id to relevant document ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QrelSet {
    pub relevant: BTreeMap<DocId, BTreeSet<DocId>>,
}

impl QrelSet {
    /// Whitespace-separated `query_id doc_id` lines; further columns are
    /// ignored.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut relevant: BTreeMap<DocId, BTreeSet<DocId>> = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(first) = fields.next() else { continue };
            if first.starts_with('#') {
                continue;
            }
            let parsed = (|| Some((first.parse().ok()?, fields.next()?.parse().ok()?)))();
            let (q, d): (DocId, DocId) =
                parsed.ok_or_else(|| Error::parse(idx + 1, "expected query_id doc_id"))?;
            relevant.entry(q).or_default().insert(d);
        }
        Ok(QrelSet { relevant })
    }

    pub fn get(&self, query: DocId) -> Option<&BTreeSet<DocId>> {
        self.relevant.get(&query).filter(|s| !s.is_empty())
    }

    /// Queries with at least one relevant document.
    pub fn query_ids(&self) -> Vec<DocId> {
        self.relevant
            .iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(&q, _)| q)
            .collect()
    }

    /// Judged documents that are not in `docs`.
    pub fn unknown_documents(&self, docs: &BTreeSet<DocId>) -> Vec<(DocId, DocId)> {
        self.relevant
            .iter()
            .flat_map(|(&q, s)| s.iter().map(move |&d| (q, d)))
            .filter(|(_, d)| !docs.contains(d))
            .collect()
    }
}

/// Precision at the ten standard recall levels: for level `r`, the best
/// precision at any rank whose recall is at least `r`, or 0 when the ranking
/// never reaches `r`.
pub fn interpolated_precision(ranking: &[ScoredDoc], relevant: &BTreeSet<DocId>) -> Result<[f64; 10]> {
    if relevant.is_empty() {
        return Err(Error::InvalidArgument("no relevant documents".into()));
    }
    let total = relevant.len();
    let mut levels = [0.0f64; 10];
    let mut hits = 0usize;
    for (i, hit) in ranking.iter().enumerate() {
        if !relevant.contains(&hit.doc) {
            continue;
        }
        hits += 1;
        let precision = hits as f64 / (i + 1) as f64;
        // Levels l/10 with l/10 <= hits/total, in exact integer arithmetic.
        for (l, level) in levels.iter_mut().enumerate() {
            if (l + 1) * total <= hits * 10 {
                *level = level.max(precision);
            }
        }
    }
    // Interpolation: precision at a level is the max over all higher levels.
    for l in (0..9).rev() {
        levels[l] = levels[l].max(levels[l + 1]);
    }
    Ok(levels)
}

/// Recall and precision of a (truncated) ranking; 0/0 counts as 0.
pub fn fixed_k_metrics(ranking: &[ScoredDoc], relevant: &BTreeSet<DocId>) -> (f64, f64) {
    let found = ranking.iter().filter(|h| relevant.contains(&h.doc)).count() as f64;
    let ratio = |den: usize| if den == 0 { 0.0 } else { found / den as f64 };
    (ratio(relevant.len()), ratio(ranking.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranking(docs: &[DocId]) -> Vec<ScoredDoc> {
        docs.iter()
            .enumerate()
            .map(|(i, &doc)| ScoredDoc {
                doc,
                score: (docs.len() - i) as f64,
            })
            .collect()
    }

    fn set(docs: &[DocId]) -> BTreeSet<DocId> {
        docs.iter().copied().collect()
    }

    #[test]
    fn perfect_ranking() {
        let p = interpolated_precision(&ranking(&[3, 1, 2, 9]), &set(&[1, 2, 3])).unwrap();
        assert_eq!(p, [1.0; 10]);
    }

    #[test]
    fn nothing_relevant_retrieved() {
        let p = interpolated_precision(&ranking(&[4, 5]), &set(&[1, 2])).unwrap();
        assert_eq!(p, [0.0; 10]);
        assert_eq!(interpolated_precision(&[], &set(&[1])).unwrap(), [0.0; 10]);
    }

    #[test]
    fn rank_by_rank() {
        let p = interpolated_precision(&ranking(&[1, 7, 2]), &set(&[1, 2])).unwrap();
        for (l, v) in p.iter().enumerate() {
            let expected = if l < 5 { 1.0 } else { 2.0 / 3.0 };
            assert!((v - expected).abs() < 1e-15, "level {l}: {v}");
        }
    }

    #[test]
    fn unreachable_levels_are_zero() {
        // 1 of 4 relevant retrieved at rank 2: recall 0.25.
        let p = interpolated_precision(&ranking(&[9, 1]), &set(&[1, 2, 3, 4])).unwrap();
        assert_eq!(p[0], 0.5);
        assert_eq!(p[1], 0.5);
        assert_eq!(p[2], 0.0);
        assert_eq!(p[9], 0.0);
    }

    #[test]
    fn empty_relevant_set() {
        assert!(interpolated_precision(&ranking(&[1]), &set(&[])).is_err());
    }

    #[test]
    fn fixed_k() {
        let rel: Vec<DocId> = (1..=15).collect();
        assert_eq!(fixed_k_metrics(&ranking(&rel), &set(&rel)), (1.0, 1.0));
        assert_eq!(fixed_k_metrics(&ranking(&[20, 21]), &set(&[1])), (0.0, 0.0));
        assert_eq!(fixed_k_metrics(&[], &set(&[1])), (0.0, 0.0));
        let mut run: Vec<DocId> = vec![1, 2, 3];
        run.extend(100..112);
        let rel: Vec<DocId> = (1..=10).collect();
        let (r, p) = fixed_k_metrics(&ranking(&run), &set(&rel));
        assert!((r - 0.3).abs() < 1e-15 && (p - 0.2).abs() < 1e-15);
    }

    #[test]
    fn qrels_parsing() {
        let q = QrelSet::read("1 17 0 0.000\n1 20\n\n2   5\n".as_bytes()).unwrap();
        assert_eq!(q.query_ids(), vec![1, 2]);
        assert_eq!(q.get(1).unwrap(), &set(&[17, 20]));
        assert!(QrelSet::read("1\n".as_bytes()).is_err());
        assert_eq!(q.unknown_documents(&set(&[5, 17])), vec![(1, 20)]);
    }
}
