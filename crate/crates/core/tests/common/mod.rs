//! Deterministic fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use polyqe::corpus::{CorpusIndex, InvertedFile, Posting, TokenizerConfig, Vocabulary};
use polyqe::learner::BayesNet;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A test collection as SMART document and query text plus `q d` judgments.
pub struct Collection {
    pub docs: String,
    pub queries: String,
    pub qrels: String,
}

pub struct CollectionFiles {
    pub docs: PathBuf,
    pub queries: PathBuf,
    pub qrels: PathBuf,
}

impl Collection {
    pub fn write_to(&self, dir: &Path) -> CollectionFiles {
        let files = CollectionFiles {
            docs: dir.join("docs.all"),
            queries: dir.join("queries.qry"),
            qrels: dir.join("qrels.rel"),
        };
        std::fs::write(&files.docs, &self.docs).unwrap();
        std::fs::write(&files.queries, &self.queries).unwrap();
        std::fs::write(&files.qrels, &self.qrels).unwrap();
        files
    }
}

/// Consonant-vowel pseudo-words of two or three syllables. Vowels exclude
/// `e` and `y` so that stemming leaves them distinct.
fn pseudo_words(rng: &mut ChaCha8Rng, count: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    const C: &[u8] = b"bdfgklmnprstvz";
    const V: &[u8] = b"aiou";
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(*C.choose(rng).unwrap() as char);
            w.push(*V.choose(rng).unwrap() as char);
        }
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn zipf(n: usize, offset: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((0..n).map(|r| 1.0 / (r as f64 + offset))).unwrap()
}

/// Collection shaped like Adi: 82 short documents, 35 queries, a few
/// relevant documents per query. Documents are drawn from topical word
/// clusters over Zipfian background noise, so topic words co-occur.
pub fn adi_like(seed: u64) -> Collection {
    const DOCS: usize = 82;
    const QUERIES: usize = 35;
    const TOPICS: usize = 16;
    const TOPIC_WORDS: usize = 10;
    let mut rng = rng(seed);
    let mut taken = BTreeSet::new();
    // Topics share part of their vocabulary, as subject areas do.
    let shared = pseudo_words(&mut rng, 24, &mut taken);
    let topics: Vec<Vec<String>> = (0..TOPICS)
        .map(|_| {
            let mut words = pseudo_words(&mut rng, TOPIC_WORDS - 4, &mut taken);
            words.extend(shared.choose_multiple(&mut rng, 4).cloned());
            words
        })
        .collect();
    let background = pseudo_words(&mut rng, 300, &mut taken);
    let names = pseudo_words(&mut rng, 40, &mut taken);
    let bg = zipf(background.len(), 5.0);
    let in_topic = zipf(TOPIC_WORDS, 2.0);

    let draw = |rng: &mut ChaCha8Rng, topic: usize, p_topic: f64| -> String {
        if rng.random_bool(p_topic) {
            topics[topic][in_topic.sample(rng)].clone()
        } else {
            background[bg.sample(rng)].clone()
        }
    };

    let mut docs = String::new();
    let mut doc_topics = Vec::with_capacity(DOCS);
    for id in 1..=DOCS {
        let primary = (id - 1) % TOPICS;
        let secondary = rng.random_bool(0.2).then(|| rng.random_range(0..TOPICS));
        doc_topics.push((primary, secondary));
        let title: Vec<String> = (0..rng.random_range(4..=7)).map(|_| draw(&mut rng, primary, 0.45)).collect();
        let body: Vec<String> = (0..rng.random_range(20..=40))
            .map(|_| {
                let topic = match secondary {
                    Some(s) if rng.random_bool(0.3) => s,
                    _ => primary,
                };
                draw(&mut rng, topic, 0.25)
            })
            .collect();
        let author = format!("{} {}", names.choose(&mut rng).unwrap(), names.choose(&mut rng).unwrap());
        writeln!(docs, ".I {id}\n.T\n{}\n.A\n{author}\n.W\n{}", title.join(" "), body.join(" ")).unwrap();
    }

    let mut queries = String::new();
    let mut qrels = String::new();
    for q in 1..=QUERIES {
        let topic = (q * 7) % TOPICS;
        let words: Vec<String> = (0..rng.random_range(4..=8)).map(|_| draw(&mut rng, topic, 0.3)).collect();
        writeln!(queries, ".I {q}\n.W\n{}", words.join(" ")).unwrap();
        for (d, &(primary, secondary)) in doc_topics.iter().enumerate() {
            // Judgments follow topics only loosely.
            let relevant = (primary == topic && rng.random_bool(0.6))
                || (secondary == Some(topic) && rng.random_bool(0.5))
                || rng.random_bool(0.015);
            if relevant {
                writeln!(qrels, "{q} {} 0 0", d + 1).unwrap();
            }
        }
    }
    Collection { docs, queries, qrels }
}

/// The real Adi files when `POLYQE_ADI_DIR` names a directory holding
/// `ADI.ALL`, `ADI.QRY` and `ADI.REL`; the synthetic stand-in otherwise.
pub fn adi_collection() -> (Collection, &'static str) {
    if let Some(dir) = std::env::var_os("POLYQE_ADI_DIR") {
        let dir = PathBuf::from(dir);
        let read = |name: &str| std::fs::read_to_string(dir.join(name)).ok();
        if let (Some(docs), Some(queries), Some(qrels)) = (read("ADI.ALL"), read("ADI.QRY"), read("ADI.REL")) {
            return (Collection { docs, queries, qrels }, "real Adi");
        }
    }
    (adi_like(0xAD1), "synthetic Adi-shaped")
}

/// Build an index from sets of present terms (tf 1), one set per document.
pub fn index_from_presence(n_terms: usize, docs: &[Vec<usize>]) -> CorpusIndex {
    let mut postings: Vec<Vec<Posting>> = vec![Vec::new(); n_terms];
    for (d, terms) in docs.iter().enumerate() {
        let unique: BTreeSet<usize> = terms.iter().copied().collect();
        for t in unique {
            postings[t].push(Posting {
                doc: d as u32 + 1,
                tf: 1,
            });
        }
    }
    let names: Vec<String> = (0..n_terms).map(|t| format!("t{t:05}")).collect();
    CorpusIndex {
        vocab: Vocabulary::from_terms(names),
        inverted: InvertedFile::new(docs.len() as u64, postings).unwrap(),
        tokenizer: TokenizerConfig::default(),
    }
}

/// Presence sets shaped like Medlars: `n_docs` abstracts over `n_terms`
/// terms, Zipfian term use inside topical clusters, every term present at
/// least once.
pub fn medlars_shaped(seed: u64, n_terms: usize, n_docs: usize) -> Vec<Vec<usize>> {
    const TOPICS: usize = 60;
    let mut rng = rng(seed);
    let global = zipf(n_terms, 20.0);
    let per_topic = n_terms / TOPICS;
    let local = zipf(per_topic, 3.0);
    let mut docs: Vec<Vec<usize>> = (0..n_docs)
        .map(|_| {
            let topic = rng.random_range(0..TOPICS);
            let len = rng.random_range(40..=90);
            (0..len)
                .map(|_| {
                    if rng.random_bool(0.4) {
                        topic * per_topic + local.sample(&mut rng)
                    } else {
                        global.sample(&mut rng)
                    }
                })
                .collect()
        })
        .collect();
    let mut seen = vec![false; n_terms];
    for d in &docs {
        for &t in d {
            seen[t] = true;
        }
    }
    for (t, s) in seen.iter().enumerate() {
        if !s {
            let d = rng.random_range(0..n_docs);
            docs[d].push(t);
        }
    }
    docs
}

/// Random polytree on `n` nodes: each node after the first attaches to an
/// earlier node with a random edge direction. Parents are listed ascending
/// and CPT entries are smoothed frequencies `(h+1)/(t+2)`.
pub fn random_polytree(rng: &mut ChaCha8Rng, n: usize) -> BayesNet {
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 1..n {
        let u = rng.random_range(0..v);
        if rng.random_bool(0.5) {
            parents[v].push(u);
        } else {
            parents[u].push(v);
        }
    }
    for p in &mut parents {
        p.sort_unstable();
    }
    let tables = parents
        .iter()
        .map(|p| {
            (0..1usize << p.len())
                .map(|_| {
                    let t = rng.random_range(0..50u32);
                    let h = rng.random_range(0..=t);
                    (h as f64 + 1.0) / (t as f64 + 2.0)
                })
                .collect()
        })
        .collect();
    let terms = (0..n).map(|v| format!("n{v}")).collect();
    BayesNet::new(terms, parents, tables, None).unwrap()
}

/// Forward-sample `count` documents from `net`; each document is the set of
/// nodes in state 1.
pub fn sample_presence(net: &BayesNet, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let order = topological_order(net);
    (0..count)
        .map(|_| {
            let mut state = vec![false; net.len()];
            for &v in &order {
                let ps = net.parents(v);
                let row = ps.iter().fold(0usize, |r, &p| (r << 1) | state[p] as usize);
                state[v] = rng.random::<f64>() < net.table(v)[row];
            }
            (0..net.len()).filter(|&v| state[v]).collect()
        })
        .collect()
}

pub fn topological_order(net: &BayesNet) -> Vec<usize> {
    let mut pending: Vec<usize> = (0..net.len()).map(|v| net.parents(v).len()).collect();
    let mut ready: Vec<usize> = (0..net.len()).filter(|&v| pending[v] == 0).collect();
    let mut order = Vec::with_capacity(net.len());
    while let Some(v) = ready.pop() {
        order.push(v);
        for &c in net.children(v) {
            pending[c] -= 1;
            if pending[c] == 0 {
                ready.push(c);
            }
        }
    }
    assert_eq!(order.len(), net.len());
    order
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_polyqe")
}

/// Run the command-line tool, panicking with its stderr on failure.
pub fn polyqe(args: &[&str]) -> std::process::Output {
    let out = std::process::Command::new(bin())
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn polyqe");
    assert!(
        out.status.success(),
        "polyqe {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Byte contents of every file in `dir`, keyed by file name.
pub fn dir_contents(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}
