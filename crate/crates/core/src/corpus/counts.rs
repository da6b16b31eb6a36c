//! Co-occurrence contingency tables over binary term presence.
//!
//! Cells are indexed `[α][β]` (and `[α][β][γ]`) with 1 = term present.

use crate::corpus::index::{InvertedFile, Posting, TermId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contingency2 {
    pub cells: [[u64; 2]; 2],
    pub n: u64,
}

impl Contingency2 {
    /// Build from the joint count and the two marginals.
    pub fn from_marginals(n11: u64, df_a: u64, df_b: u64, n: u64) -> Result<Self> {
        let n10 = df_a.checked_sub(n11);
        let n01 = df_b.checked_sub(n11);
        let n00 = (n + n11).checked_sub(df_a + df_b);
        match (n10, n01, n00) {
            (Some(n10), Some(n01), Some(n00)) => Ok(Contingency2 {
                cells: [[n00, n01], [n10, n11]],
                n,
            }),
            _ => Err(Error::InvalidArgument(format!(
                "inconsistent counts: n11={n11} df_a={df_a} df_b={df_b} N={n}"
            ))),
        }
    }

    pub fn n11(&self) -> u64 {
        self.cells[1][1]
    }
    pub fn n10(&self) -> u64 {
        self.cells[1][0]
    }
    pub fn n01(&self) -> u64 {
        self.cells[0][1]
    }
    pub fn n00(&self) -> u64 {
        self.cells[0][0]
    }

    /// Marginal count of the first variable in state `i`.
    pub fn row(&self, i: usize) -> u64 {
        self.cells[i][0] + self.cells[i][1]
    }

    /// Marginal count of the second variable in state `j`.
    pub fn col(&self, j: usize) -> u64 {
        self.cells[0][j] + self.cells[1][j]
    }

    pub fn transpose(&self) -> Self {
        let c = &self.cells;
        Contingency2 {
            cells: [[c[0][0], c[1][0]], [c[0][1], c[1][1]]],
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contingency3 {
    pub cells: [[[u64; 2]; 2]; 2],
    pub n: u64,
}

/// Which variable of a triple to sum out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    First,
    Second,
    Third,
}

impl Contingency3 {
    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().flatten().sum()
    }

    /// Sum out one variable; the remaining two keep their order.
    pub fn marginalize(&self, axis: Axis) -> Contingency2 {
        let mut cells = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let v = self.cells[i][j][k];
                    match axis {
                        Axis::First => cells[j][k] += v,
                        Axis::Second => cells[i][k] += v,
                        Axis::Third => cells[i][j] += v,
                    }
                }
            }
        }
        Contingency2 { cells, n: self.n }
    }
}

/// Size of the intersection of two ascending postings lists.
pub fn intersection_len(a: &[Posting], b: &[Posting]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].doc.cmp(&b[j].doc) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn intersection(a: &[Posting], b: &[Posting]) -> Vec<Posting> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].doc.cmp(&b[j].doc) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn check_term(inv: &InvertedFile, t: TermId) -> Result<()> {
    if t >= inv.n_terms() {
        return Err(Error::InvalidArgument(format!("term id {t} out of range")));
    }
    Ok(())
}

pub fn pair_counts(inv: &InvertedFile, a: TermId, b: TermId) -> Result<Contingency2> {
    check_term(inv, a)?;
    check_term(inv, b)?;
    if a == b {
        return Err(Error::InvalidArgument(format!("pair counts of term {a} with itself")));
    }
    let n11 = intersection_len(inv.postings(a), inv.postings(b));
    Contingency2::from_marginals(n11, inv.df(a), inv.df(b), inv.n_docs())
}

pub fn triple_counts(inv: &InvertedFile, a: TermId, b: TermId, c: TermId) -> Result<Contingency3> {
    for t in [a, b, c] {
        check_term(inv, t)?;
    }
    if a == b || a == c || b == c {
        return Err(Error::InvalidArgument(format!("triple counts need distinct terms, got ({a}, {b}, {c})")));
    }
    let (pa, pb, pc) = (inv.postings(a), inv.postings(b), inv.postings(c));
    let ab = intersection(pa, pb);
    let abc = intersection_len(&ab, pc) as i64;
    let ab = ab.len() as i64;
    let ac = intersection_len(pa, pc) as i64;
    let bc = intersection_len(pb, pc) as i64;
    let (da, db, dc) = (pa.len() as i64, pb.len() as i64, pc.len() as i64);
    let n = inv.n_docs() as i64;

    let signed = [
        [
            [n - da - db - dc + ab + ac + bc - abc, dc - ac - bc + abc],
            [db - ab - bc + abc, bc - abc],
        ],
        [[da - ab - ac + abc, ac - abc], [ab - abc, abc]],
    ];
    let mut cells = [[[0u64; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                cells[i][j][k] = u64::try_from(signed[i][j][k])
                    .map_err(|_| Error::InvalidArgument("inconsistent postings for triple counts".into()))?;
            }
        }
    }
    Ok(Contingency3 {
        cells,
        n: inv.n_docs(),
    })
}

/// Per-term document-presence bitsets, used for the all-pairs sweep and for
/// scanning parent configurations. Documents are renumbered densely in
/// ascending id order; documents without terms are not represented but are
/// still part of `n_docs`.
#[derive(Debug, Clone)]
pub struct PresenceBits {
    words: usize,
    bits: Vec<u64>,
    df: Vec<u64>,
    n_docs: u64,
    n_dense: usize,
}

impl PresenceBits {
    pub fn new(inv: &InvertedFile) -> Self {
        let doc_ids = inv.doc_ids();
        let n_dense = doc_ids.len();
        let words = n_dense.div_ceil(64).max(1);
        let mut bits = vec![0u64; words * inv.n_terms()];
        for t in 0..inv.n_terms() {
            let row = &mut bits[t * words..(t + 1) * words];
            for p in inv.postings(t) {
                let d = doc_ids.binary_search(&p.doc).expect("posting doc is in doc_ids");
                row[d / 64] |= 1 << (d % 64);
            }
        }
        PresenceBits {
            words,
            bits,
            df: (0..inv.n_terms()).map(|t| inv.df(t)).collect(),
            n_docs: inv.n_docs(),
            n_dense,
        }
    }

    pub fn n_terms(&self) -> usize {
        self.df.len()
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    /// Number of documents represented densely.
    pub fn n_dense(&self) -> usize {
        self.n_dense
    }

    fn row(&self, t: TermId) -> &[u64] {
        &self.bits[t * self.words..(t + 1) * self.words]
    }

    pub fn contains(&self, t: TermId, dense_doc: usize) -> bool {
        self.row(t)[dense_doc / 64] >> (dense_doc % 64) & 1 == 1
    }

    pub fn co_occurrences(&self, a: TermId, b: TermId) -> u64 {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .map(|(x, y)| u64::from((x & y).count_ones()))
            .sum()
    }

    pub fn pair_counts(&self, a: TermId, b: TermId) -> Contingency2 {
        Contingency2::from_marginals(self.co_occurrences(a, b), self.df[a], self.df[b], self.n_docs)
            .expect("bitset counts are consistent")
    }
}
