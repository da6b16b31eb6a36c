use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use polyqe::corpus::{parse_and_tokenize, CorpusIndex, StoplistSource, Tokenizer, TokenizerConfig};
use polyqe::evaluation::{self, BatteryConfig, EvalReport, QrelSet, Summary};
use polyqe::expansion::{self, Origin, QueryVector};
use polyqe::inference::{self, Evidence};
use polyqe::learner::{self, BayesNet, Confidence, LearnOptions, DEFAULT_MAX_PARENTS};
use polyqe::retrieval::{ScoredDoc, Searcher};

fn to_py(err: polyqe::Error) -> PyErr {
    let io = match &err {
        polyqe::Error::Io(_) => true,
        polyqe::Error::File { source, .. } => matches!(**source, polyqe::Error::Io(_)),
        _ => false,
    };
    if io {
        PyIOError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn open(path: &PathBuf) -> PyResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))
}

fn create(path: &PathBuf) -> PyResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))
}

fn tokenizer_config(stoplist: &str, stem: bool, min_len: usize) -> TokenizerConfig {
    TokenizerConfig {
        stoplist: StoplistSource::parse(stoplist),
        stem,
        min_len,
    }
}

fn confidence(value: f64) -> PyResult<Confidence> {
    Confidence::from_f64(value).map_err(to_py)
}

/// Lowercase, split, drop digits, short words and stopwords, then stem.
#[pyfunction]
#[pyo3(signature = (text, stoplist = "builtin", stem = true, min_len = 2))]
fn tokenize(text: &str, stoplist: &str, stem: bool, min_len: usize) -> PyResult<Vec<String>> {
    let tokenizer = Tokenizer::new(tokenizer_config(stoplist, stem, min_len)).map_err(to_py)?;
    Ok(tokenizer.tokenize(text))
}

/// Inverted file over a SMART document collection.
#[pyclass(frozen, module = "polyqe")]
struct Index {
    inner: CorpusIndex,
}

#[pymethods]
impl Index {
    /// Index SMART-format document text.
    #[staticmethod]
    #[pyo3(signature = (text, stoplist = "builtin", stem = true, min_len = 2))]
    fn from_smart(text: &str, stoplist: &str, stem: bool, min_len: usize) -> PyResult<Self> {
        let config = tokenizer_config(stoplist, stem, min_len);
        let tokenizer = Tokenizer::new(config.clone()).map_err(to_py)?;
        let docs = parse_and_tokenize(text.as_bytes(), &tokenizer).map_err(to_py)?;
        let inner = CorpusIndex::build(&docs, config).map_err(to_py)?;
        Ok(Index { inner })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let inner = CorpusIndex::read(open(&path)?).map_err(|e| to_py(e.in_file(&path)))?;
        Ok(Index { inner })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write(create(&path)?).map_err(|e| to_py(e.in_file(&path)))
    }

    #[getter]
    fn n_docs(&self) -> u64 {
        self.inner.inverted.n_docs()
    }

    #[getter]
    fn n_terms(&self) -> usize {
        self.inner.vocab.len()
    }

    fn terms(&self) -> Vec<String> {
        self.inner.vocab.terms().to_vec()
    }

    /// Document frequency; 0 for unknown terms.
    fn df(&self, term: &str) -> u64 {
        self.inner.vocab.id(term).map_or(0, |t| self.inner.inverted.df(t))
    }

    /// `(doc_id, tf)` pairs in ascending document order.
    fn postings(&self, term: &str) -> Vec<(u32, u32)> {
        self.inner.vocab.id(term).map_or_else(Vec::new, |t| {
            self.inner.inverted.postings(t).iter().map(|p| (p.doc, p.tf)).collect()
        })
    }

    /// Tokenize query text with this index's settings.
    #[pyo3(signature = (text, id = 0))]
    fn query(&self, text: &str, id: u32) -> PyResult<Query> {
        let tokenizer = Tokenizer::new(self.inner.tokenizer.clone()).map_err(to_py)?;
        Ok(Query {
            inner: QueryVector::from_tokens(id, &tokenizer.tokenize(text)),
        })
    }

    /// Queries from a SMART query collection, tokenized like the index.
    fn queries_from_smart(&self, text: &str) -> PyResult<Vec<Query>> {
        let tokenizer = Tokenizer::new(self.inner.tokenizer.clone()).map_err(to_py)?;
        let docs = parse_and_tokenize(text.as_bytes(), &tokenizer).map_err(to_py)?;
        Ok(docs
            .iter()
            .map(|d| Query {
                inner: QueryVector::from_document(d),
            })
            .collect())
    }

    /// Top `k` documents (all scoring documents when `k` is None) as
    /// `(doc_id, score)` pairs.
    #[pyo3(signature = (query, k = None))]
    fn search(&self, py: Python<'_>, query: &Query, k: Option<usize>) -> Vec<(u32, f64)> {
        let k = k.unwrap_or(self.inner.inverted.n_docs() as usize);
        let hits = py.detach(|| Searcher::new(&self.inner).search(&query.inner, k));
        hits.into_iter().map(|h| (h.doc, h.score)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Index(n_docs={}, n_terms={})", self.n_docs(), self.n_terms())
    }
}

/// Weighted query: original terms carry term frequencies, added terms
/// their posterior probabilities.
#[pyclass(frozen, module = "polyqe")]
struct Query {
    inner: QueryVector,
}

#[pymethods]
impl Query {
    #[new]
    #[pyo3(signature = (terms, id = 0))]
    fn new(terms: Vec<String>, id: u32) -> Self {
        Query {
            inner: QueryVector::from_tokens(id, &terms),
        }
    }

    #[getter]
    fn id(&self) -> u32 {
        self.inner.id
    }

    /// `(term, weight, origin)` triples, origin being "original" or "added".
    #[getter]
    fn terms(&self) -> Vec<(String, f64, String)> {
        self.inner
            .terms
            .iter()
            .map(|t| (t.term.clone(), t.weight, t.origin.to_string()))
            .collect()
    }

    fn added(&self) -> Vec<(String, f64)> {
        self.inner
            .terms
            .iter()
            .filter(|t| t.origin == Origin::Added)
            .map(|t| (t.term.clone(), t.weight))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.terms.len()
    }

    fn __repr__(&self) -> String {
        format!("Query(id={}, terms={})", self.inner.id, self.inner.terms.len())
    }
}

/// Polytree thesaurus over index terms.
#[pyclass(frozen, module = "polyqe")]
struct Network {
    inner: BayesNet,
}

#[pymethods]
impl Network {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let inner = BayesNet::read(open(&path)?).map_err(|e| to_py(e.in_file(&path)))?;
        Ok(Network { inner })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write(create(&path)?).map_err(|e| to_py(e.in_file(&path)))
    }

    #[getter]
    fn confidence(&self) -> Option<f64> {
        self.inner.confidence().map(Confidence::value)
    }

    fn terms(&self) -> Vec<String> {
        (0..self.inner.len()).map(|v| self.inner.term(v).to_string()).collect()
    }

    /// `(parent, child)` term pairs.
    fn edges(&self) -> Vec<(String, String)> {
        self.inner
            .edges()
            .into_iter()
            .map(|(p, c)| (self.inner.term(p).to_string(), self.inner.term(c).to_string()))
            .collect()
    }

    fn parents(&self, term: &str) -> PyResult<Vec<String>> {
        let v = self.node(term)?;
        Ok(self.inner.parents(v).iter().map(|&p| self.inner.term(p).to_string()).collect())
    }

    /// Conditional probabilities of presence, one per parent configuration
    /// (first parent most significant).
    fn table(&self, term: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.table(self.node(term)?).to_vec())
    }

    /// Posterior presence probability of every term given that the evidence
    /// terms are present. Unknown evidence terms are ignored.
    #[pyo3(signature = (evidence = Vec::new()))]
    fn posteriors(&self, py: Python<'_>, evidence: Vec<String>) -> PyResult<Vec<(String, f64)>> {
        let ev: Evidence = evidence.iter().filter_map(|t| self.inner.node(t)).collect();
        let post = py.detach(|| inference::propagate(&self.inner, &ev)).map_err(to_py)?;
        Ok((0..self.inner.len())
            .map(|v| (self.inner.term(v).to_string(), post.get(v)))
            .collect())
    }

    /// Add every term whose posterior exceeds `threshold`.
    fn expand(&self, query: &Query, threshold: f64) -> PyResult<Query> {
        let inner = expansion::expand_query(&query.inner, &self.inner, threshold).map_err(to_py)?;
        Ok(Query { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Network(nodes={}, edges={})", self.inner.len(), self.inner.edge_count())
    }
}

impl Network {
    fn node(&self, term: &str) -> PyResult<usize> {
        self.inner
            .node(term)
            .ok_or_else(|| PyValueError::new_err(format!("term {term:?} is not in the network")))
    }
}

/// Learn a polytree thesaurus; `confidence` is one of 0.9, 0.95, 0.975,
/// 0.99, 0.995.
#[pyfunction]
#[pyo3(signature = (index, confidence = 0.95, max_parents = DEFAULT_MAX_PARENTS))]
fn learn(py: Python<'_>, index: &Index, confidence: f64, max_parents: usize) -> PyResult<Network> {
    let options = LearnOptions {
        confidence: self::confidence(confidence)?,
        max_parents,
    };
    let inner = py.detach(|| learner::learn(&index.inner, options)).map_err(to_py)?;
    Ok(Network { inner })
}

fn scored(ranking: &[u32]) -> Vec<ScoredDoc> {
    ranking
        .iter()
        .enumerate()
        .map(|(i, &doc)| ScoredDoc {
            doc,
            score: -(i as f64),
        })
        .collect()
}

/// Precision at recall 0.1, ..., 1.0 for a full ranking of document ids.
#[pyfunction]
fn interpolated_precision(ranking: Vec<u32>, relevant: BTreeSet<u32>) -> PyResult<Vec<f64>> {
    let levels = evaluation::interpolated_precision(&scored(&ranking), &relevant).map_err(to_py)?;
    Ok(levels.to_vec())
}

/// `(recall, precision)` of a ranking already cut to the wanted depth.
#[pyfunction]
fn fixed_k_metrics(ranking: Vec<u32>, relevant: BTreeSet<u32>) -> (f64, f64) {
    evaluation::fixed_k_metrics(&scored(&ranking), &relevant)
}

/// Per-level percent changes and their mean from averaged precision
/// columns; None where the baseline is 0.
#[pyfunction]
fn percent_changes(baseline: [f64; 10], experiment: [f64; 10]) -> PyResult<(Vec<Option<f64>>, Option<f64>)> {
    let report =
        EvalReport::compare(Summary::from_levels(experiment, 0.0, 0.0, 1), Summary::from_levels(baseline, 0.0, 0.0, 1))
            .map_err(to_py)?;
    let changes = report.changes.expect("comparison has changes");
    Ok((changes.levels.to_vec(), changes.average))
}

/// Run the confidence by threshold battery on SMART documents, queries and
/// `q d` judgments, writing every artifact to `out`. Returns
/// `(confidence, threshold, average precision, average % change)` per cell;
/// failed cells have None values.
#[pyfunction]
#[pyo3(signature = (docs, queries, qrels, out, confidences = None, thresholds = None, k = 15))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn experiment(
    py: Python<'_>,
    docs: &str,
    queries: &str,
    qrels: &str,
    out: PathBuf,
    confidences: Option<Vec<f64>>,
    thresholds: Option<Vec<f64>>,
    k: usize,
) -> PyResult<Vec<(f64, f64, Option<f64>, Option<f64>)>> {
    let mut config = BatteryConfig {
        k,
        ..BatteryConfig::default()
    };
    if let Some(cs) = confidences {
        config.confidences = cs.into_iter().map(confidence).collect::<PyResult<_>>()?;
    }
    if let Some(ts) = thresholds {
        config.thresholds = ts;
    }
    let index = Index::from_smart(docs, "builtin", true, 2)?;
    let queries = index.queries_from_smart(queries)?;
    let queries: Vec<QueryVector> = queries.into_iter().map(|q| q.inner).collect();
    let qrels = QrelSet::read(qrels.as_bytes()).map_err(to_py)?;
    let battery = py
        .detach(|| {
            let b = evaluation::run_battery(&index.inner, &queries, &qrels, &config)?;
            b.write_dir(&index.inner, &out)?;
            Ok::<_, polyqe::Error>(b)
        })
        .map_err(to_py)?;
    Ok(battery
        .cells
        .iter()
        .map(|c| (c.confidence.value(), c.threshold, c.average_precision(), c.average_change()))
        .collect())
}

#[pymodule]
#[pyo3(name = "polyqe")]
fn polyqe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Index>()?;
    m.add_class::<Query>()?;
    m.add_class::<Network>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(interpolated_precision, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_k_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(percent_changes, m)?)?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    Ok(())
}
