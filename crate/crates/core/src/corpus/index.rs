use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use crate::corpus::smart::{DocId, Document};
use crate::corpus::tokenize::TokenizerConfig;
use crate::error::{Error, Result};

pub type TermId = usize;

pub const INDEX_MAGIC: &str = "PQEIDX";
pub const INDEX_VERSION: u32 = 1;

/// Bijection between term strings and dense ids, ordered lexicographically.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    ids: HashMap<String, TermId>,
}

impl Vocabulary {
    /// Build from any term collection; duplicates collapse and ids follow
    /// lexicographic order.
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut terms: Vec<String> = terms.into_iter().map(Into::into).collect();
        terms.sort();
        terms.dedup();
        let ids = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { terms, ids }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: DocId,
    pub tf: u32,
}

/// Term-to-postings map. Postings are strictly ascending by document id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedFile {
    n_docs: u64,
    postings: Vec<Vec<Posting>>,
}

impl InvertedFile {
    /// Validates the postings invariants.
    pub fn new(n_docs: u64, postings: Vec<Vec<Posting>>) -> Result<Self> {
        for (term, list) in postings.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::format(format!("term {term} has no postings")));
            }
            if list.len() as u64 > n_docs {
                return Err(Error::format(format!(
                    "term {term} occurs in {} documents but N = {n_docs}",
                    list.len()
                )));
            }
            if list.windows(2).any(|w| w[0].doc >= w[1].doc) {
                return Err(Error::format(format!("postings of term {term} are not strictly ascending")));
            }
            if list.iter().any(|p| p.tf == 0) {
                return Err(Error::format(format!("term {term} has a zero term frequency")));
            }
        }
        Ok(InvertedFile { n_docs, postings })
    }

    /// Total number of documents, including those without indexable terms.
    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn n_terms(&self) -> usize {
        self.postings.len()
    }

    pub fn postings(&self, term: TermId) -> &[Posting] {
        &self.postings[term]
    }

    pub fn df(&self, term: TermId) -> u64 {
        self.postings[term].len() as u64
    }

    pub fn tf(&self, term: TermId, doc: DocId) -> u32 {
        let list = &self.postings[term];
        list.binary_search_by_key(&doc, |p| p.doc).map_or(0, |i| list[i].tf)
    }

    /// Ids of documents holding at least one term, ascending.
    pub fn doc_ids(&self) -> Vec<DocId> {
        let mut ids: Vec<DocId> = self.postings.iter().flatten().map(|p| p.doc).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Vocabulary, inverted file and the tokenizer settings that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusIndex {
    pub vocab: Vocabulary,
    pub inverted: InvertedFile,
    pub tokenizer: TokenizerConfig,
}

pub fn build_inverted_file(documents: &[Document]) -> Result<(Vocabulary, InvertedFile)> {
    if documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts: BTreeMap<&str, BTreeMap<DocId, u32>> = BTreeMap::new();
    let mut seen = std::collections::HashSet::new();
    for doc in documents {
        if !seen.insert(doc.id) {
            return Err(Error::DuplicateId(doc.id));
        }
        for token in &doc.tokens {
            *counts.entry(token).or_default().entry(doc.id).or_default() += 1;
        }
    }
    let vocab = Vocabulary::from_terms(counts.keys().copied());
    let postings = counts
        .into_values()
        .map(|per_doc| per_doc.into_iter().map(|(doc, tf)| Posting { doc, tf }).collect())
        .collect();
    let inverted = InvertedFile::new(documents.len() as u64, postings)?;
    Ok((vocab, inverted))
}

impl CorpusIndex {
    pub fn build(documents: &[Document], tokenizer: TokenizerConfig) -> Result<Self> {
        let (vocab, inverted) = build_inverted_file(documents)?;
        log::info!(
            "indexed {} documents, {} terms",
            inverted.n_docs(),
            vocab.len()
        );
        Ok(CorpusIndex {
            vocab,
            inverted,
            tokenizer,
        })
    }

    /// Writes the line-oriented index format:
    ///
    /// ```text
    /// PQEIDX 1
    /// # <free comment>
    /// CONFIG stem=on min_len=2 stoplist=builtin
    /// N <documents>
    /// VOCAB <terms>
    /// <term_id>\t<term>            (one per term)
    /// POSTINGS <terms>
    /// <term_id>\t<doc>:<tf>,...    (one per term)
    /// ```
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{INDEX_MAGIC} {INDEX_VERSION}")?;
        writeln!(out, "# {}", crate::provenance("index"))?;
        writeln!(out, "CONFIG {}", self.tokenizer.describe())?;
        writeln!(out, "N {}", self.inverted.n_docs())?;
        writeln!(out, "VOCAB {}", self.vocab.len())?;
        for (id, term) in self.vocab.terms().iter().enumerate() {
            writeln!(out, "{id}\t{term}")?;
        }
        writeln!(out, "POSTINGS {}", self.inverted.n_terms())?;
        for id in 0..self.inverted.n_terms() {
            write!(out, "{id}\t")?;
            for (i, p) in self.inverted.postings(id).iter().enumerate() {
                if i > 0 {
                    out.write_all(b",")?;
                }
                write!(out, "{}:{}", p.doc, p.tf)?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = LineReader::new(reader);
        let header = lines.next_content()?.ok_or_else(|| Error::format("empty index file"))?;
        check_header(&header.1, INDEX_MAGIC, INDEX_VERSION)?;

        let (line, text) = lines.expect("CONFIG")?;
        let tokenizer = TokenizerConfig::from_description(text.trim_start_matches("CONFIG").trim())
            .map_err(|e| Error::parse(line, e.to_string()))?;
        let n_docs: u64 = lines.expect_count("N")?;
        let n_terms: usize = lines.expect_count("VOCAB")?;

        let mut terms = Vec::with_capacity(n_terms);
        for expected in 0..n_terms {
            let (line, text) = lines.require()?;
            let (id, term) = text
                .split_once('\t')
                .ok_or_else(|| Error::parse(line, "expected term_id<TAB>term"))?;
            if id.parse::<usize>().ok() != Some(expected) {
                return Err(Error::parse(line, format!("expected term id {expected}")));
            }
            terms.push(term.to_string());
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::format("vocabulary is not in strictly ascending order"));
        }
        let vocab = Vocabulary::from_terms(terms);

        let n_postings: usize = lines.expect_count("POSTINGS")?;
        if n_postings != n_terms {
            return Err(Error::format(format!("{n_postings} postings lists for {n_terms} terms")));
        }
        let mut postings = Vec::with_capacity(n_terms);
        for expected in 0..n_terms {
            let (line, text) = lines.require()?;
            let (id, list) = text
                .split_once('\t')
                .ok_or_else(|| Error::parse(line, "expected term_id<TAB>postings"))?;
            if id.parse::<usize>().ok() != Some(expected) {
                return Err(Error::parse(line, format!("expected term id {expected}")));
            }
            let list = list
                .split(',')
                .map(|entry| {
                    let (doc, tf) = entry.split_once(':')?;
                    Some(Posting {
                        doc: doc.parse().ok()?,
                        tf: tf.parse().ok()?,
                    })
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::parse(line, "malformed postings entry"))?;
            postings.push(list);
        }
        if let Some((line, _)) = lines.next_content()? {
            return Err(Error::parse(line, "trailing content after postings block"));
        }
        let inverted = InvertedFile::new(n_docs, postings)?;
        Ok(CorpusIndex {
            vocab,
            inverted,
            tokenizer,
        })
    }
}

pub(crate) fn check_header(text: &str, magic: &str, version: u32) -> Result<()> {
    let mut parts = text.split_whitespace();
    if parts.next() != Some(magic) {
        return Err(Error::format(format!("not a {magic} file (header {text:?})")));
    }
    match parts.next().and_then(|v| v.parse::<u32>().ok()) {
        Some(v) if v == version => Ok(()),
        Some(v) => Err(Error::format(format!("{magic} version {v} is not supported (expected {version})"))),
        None => Err(Error::format(format!("{magic} header without version"))),
    }
}

/// Numbered line reader that skips `#` comments and blank lines.
pub(crate) struct LineReader<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> LineReader<R> {
    pub(crate) fn new(reader: R) -> Self {
        LineReader {
            inner: reader.lines(),
            line: 0,
        }
    }

    pub(crate) fn next_content(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            self.line += 1;
            let line = line?;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok(Some((self.line, trimmed.to_string())));
        }
        Ok(None)
    }

    pub(crate) fn require(&mut self) -> Result<(usize, String)> {
        self.next_content()?
            .ok_or_else(|| Error::format(format!("truncated file after line {}", self.line)))
    }

    fn expect(&mut self, keyword: &str) -> Result<(usize, String)> {
        let (line, text) = self.require()?;
        if text.split_whitespace().next() != Some(keyword) {
            return Err(Error::parse(line, format!("expected {keyword} line")));
        }
        Ok((line, text))
    }

    fn expect_count<T: std::str::FromStr>(&mut self, keyword: &str) -> Result<T> {
        let (line, text) = self.expect(keyword)?;
        text.split_whitespace()
            .nth(1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(line, format!("expected a count after {keyword}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: DocId, tokens: &[&str]) -> Document {
        let mut d = Document::new(id);
        d.tokens = tokens.iter().map(|s| s.to_string()).collect();
        d
    }

    #[test]
    fn counts_tf_and_df() {
        let (vocab, inv) = build_inverted_file(&[doc(1, &["a", "b", "a"]), doc(2, &["b"])]).unwrap();
        let (a, b) = (vocab.id("a").unwrap(), vocab.id("b").unwrap());
        assert_eq!(inv.df(a), 1);
        assert_eq!(inv.df(b), 2);
        assert_eq!(inv.tf(a, 1), 2);
        assert_eq!(inv.tf(a, 2), 0);
        assert_eq!(inv.n_docs(), 2);
    }

    #[test]
    fn single_doc_single_token() {
        let (vocab, inv) = build_inverted_file(&[doc(5, &["x"])]).unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(inv.n_docs(), 1);
        assert_eq!(inv.df(0), 1);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(matches!(build_inverted_file(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn empty_documents_still_count() {
        let (_, inv) = build_inverted_file(&[doc(1, &["x"]), doc(2, &[]), doc(3, &[])]).unwrap();
        assert_eq!(inv.n_docs(), 3);
        assert_eq!(inv.doc_ids(), vec![1]);
    }

    #[test]
    fn vocabulary_is_lexicographic() {
        let (vocab, _) = build_inverted_file(&[doc(1, &["zeta", "alpha", "mid"])]).unwrap();
        assert_eq!(vocab.terms(), ["alpha", "mid", "zeta"]);
        assert_eq!(vocab.id("mid"), Some(1));
        assert_eq!(vocab.term(2), "zeta");
    }

    #[test]
    fn rejects_bad_postings() {
        let p = |doc, tf| Posting { doc, tf };
        assert!(InvertedFile::new(2, vec![vec![p(2, 1), p(1, 1)]]).is_err());
        assert!(InvertedFile::new(2, vec![vec![p(1, 0)]]).is_err());
        assert!(InvertedFile::new(1, vec![vec![p(1, 1), p(2, 1)]]).is_err());
        assert!(InvertedFile::new(1, vec![vec![]]).is_err());
    }

    fn sample_index() -> CorpusIndex {
        let docs = [doc(1, &["b", "a", "a"]), doc(4, &["c", "a"]), doc(9, &[])];
        CorpusIndex::build(&docs, TokenizerConfig::default()).unwrap()
    }

    #[test]
    fn index_file_round_trip() {
        let index = sample_index();
        let mut buf = Vec::new();
        index.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("PQEIDX 1\n"));
        assert!(text.contains("\nN 3\n"));
        assert!(text.contains("\n0\t1:2,4:1\n"));
        let back = CorpusIndex::read(buf.as_slice()).unwrap();
        assert_eq!(back, index);
    }

    #[test]
    fn index_file_errors() {
        let mut buf = Vec::new();
        sample_index().write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        let wrong_version = text.replacen("PQEIDX 1", "PQEIDX 2", 1);
        assert!(CorpusIndex::read(wrong_version.as_bytes()).unwrap_err().to_string().contains("version 2"));

        let truncated: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(CorpusIndex::read(truncated.as_bytes()).unwrap_err().to_string().contains("truncated"));

        assert!(CorpusIndex::read("PQENET 1 0.95\n".as_bytes()).is_err());
    }
}
