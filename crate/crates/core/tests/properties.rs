mod common;

use std::collections::BTreeSet;

use polyqe::corpus::{pair_counts, triple_counts, PresenceBits};
use polyqe::evaluation::{interpolated_precision, report, QrelSet};
use polyqe::expansion::{expand_query, read_query_file, write_query_file, QueryVector};
use polyqe::inference::{propagate, Evidence};
use polyqe::learner::dep::mutual_information;
use polyqe::learner::{build_skeleton, learn, BayesNet, Confidence, LearnOptions, WeightedGraph};
use polyqe::retrieval::{doc_vectors, search_all, search_exhaustive, RankedRun, ScoredDoc, Searcher};
use proptest::prelude::*;

use common::*;

/// Presence matrix: `docs[d]` lists the terms of document `d`; every term
/// occurs somewhere.
fn presence(max_terms: usize, max_docs: usize) -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (3..=max_terms, 1..=max_docs).prop_flat_map(|(t, d)| {
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), t), d).prop_map(move |rows| {
            let mut docs: Vec<Vec<usize>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect())
                .collect();
            for term in 0..t {
                if !docs.iter().any(|d| d.contains(&term)) {
                    let d = term % docs.len();
                    docs[d].push(term);
                }
            }
            (t, docs)
        })
    })
}

/// Posterior marginals by direct enumeration of the joint distribution,
/// with parent configurations indexed first parent most significant.
fn enumerate_posteriors(net: &BayesNet, ev: &Evidence) -> Vec<f64> {
    let n = net.len();
    let mut marg = vec![0.0; n];
    let mut total = 0.0;
    for config in 0usize..1 << n {
        let on = |v: usize| config & (1 << v) != 0;
        if ev.iter().any(|v| !on(v)) {
            continue;
        }
        let mut p = 1.0;
        for v in 0..n {
            let ps = net.parents(v);
            let mut row = 0;
            for (i, &u) in ps.iter().enumerate() {
                if on(u) {
                    row += 1 << (ps.len() - 1 - i);
                }
            }
            let p1 = net.table(v)[row];
            p *= if on(v) { p1 } else { 1.0 - p1 };
        }
        total += p;
        for (v, m) in marg.iter_mut().enumerate() {
            if on(v) {
                *m += p;
            }
        }
    }
    marg.iter().map(|m| m / total).collect()
}

fn ranking(docs: &[u32]) -> Vec<ScoredDoc> {
    docs.iter()
        .enumerate()
        .map(|(i, &doc)| ScoredDoc {
            doc,
            score: (docs.len() - i) as f64,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_match_a_document_scan((t, docs) in presence(6, 40), seed in any::<u64>()) {
        let index = index_from_presence(t, &docs);
        let inv = &index.inverted;
        let bits = PresenceBits::new(inv);
        let mut r = rng(seed);
        use rand::seq::SliceRandom;
        let mut ids: Vec<usize> = (0..t).collect();
        ids.shuffle(&mut r);
        let (a, b, c) = (ids[0], ids[1], ids[2]);
        let mut cells2 = [[0u64; 2]; 2];
        let mut cells3 = [[[0u64; 2]; 2]; 2];
        for d in &docs {
            let (x, y, z) = (d.contains(&a) as usize, d.contains(&b) as usize, d.contains(&c) as usize);
            cells2[x][y] += 1;
            cells3[x][y][z] += 1;
        }
        let pc = pair_counts(inv, a, b).unwrap();
        prop_assert_eq!(pc.cells, cells2);
        prop_assert_eq!(pc.n, docs.len() as u64);
        prop_assert_eq!(bits.pair_counts(a, b), pc);
        prop_assert_eq!(triple_counts(inv, a, b, c).unwrap().cells, cells3);
    }

    #[test]
    fn mutual_information_is_symmetric_and_non_negative(cells in proptest::array::uniform4(0u64..1000)) {
        let n: u64 = cells.iter().sum();
        prop_assume!(n > 0);
        let ct = polyqe::corpus::Contingency2 { cells: [[cells[0], cells[1]], [cells[2], cells[3]]], n };
        let mi = mutual_information(&ct).unwrap();
        prop_assert_eq!(mi, mutual_information(&ct.transpose()).unwrap());
        prop_assert!(mi >= -1e-12);
    }

    #[test]
    fn skeleton_is_a_maximal_forest(n in 1usize..30, weights in proptest::collection::vec(0u8..6, 435)) {
        let mut g = WeightedGraph::new(n);
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                g.set(a, b, weights[k] as f64);
                k += 1;
            }
        }
        let s = build_skeleton(&g);
        prop_assert!(s.is_forest());
        prop_assert!(s.edges.iter().all(|&(a, b)| a < b && g.get(a, b) > 0.0));
        // Maximal: no positive edge joins two different components.
        let mut comp: Vec<usize> = (0..n).collect();
        for _ in 0..n {
            for &(a, b) in &s.edges {
                let m = comp[a].min(comp[b]);
                comp[a] = m;
                comp[b] = m;
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                prop_assert!(g.get(a, b) == 0.0 || comp[a] == comp[b]);
            }
        }
    }

    #[test]
    fn propagation_matches_enumeration(seed in any::<u64>(), n in 1usize..9, mask in any::<u16>()) {
        let mut r = rng(seed);
        let net = random_polytree(&mut r, n);
        let ev: Evidence = (0..n).filter(|v| mask & (1 << v) != 0).collect();
        let fast = propagate(&net, &ev).unwrap();
        let slow = enumerate_posteriors(&net, &ev);
        for v in 0..n {
            prop_assert!((fast.get(v) - slow[v]).abs() < 1e-9, "node {} {} vs {}", v, fast.get(v), slow[v]);
            if ev.contains(v) {
                prop_assert_eq!(fast.get(v), 1.0);
            }
        }
    }

    #[test]
    fn added_terms_shrink_as_the_threshold_rises(seed in any::<u64>(), n in 2usize..10, mask in 1u16..512) {
        let mut r = rng(seed);
        let net = random_polytree(&mut r, n);
        let tokens: Vec<String> = (0..n).filter(|v| mask & (1 << v) != 0).map(|v| net.term(v).to_string()).collect();
        prop_assume!(!tokens.is_empty());
        let q = QueryVector::from_tokens(1, &tokens);
        let mut previous: Option<BTreeSet<String>> = None;
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let e = expand_query(&q, &net, t).unwrap();
            let added: BTreeSet<String> = e.added().map(|a| a.term.clone()).collect();
            prop_assert!(e.added().all(|a| a.weight > t && a.weight <= 1.0));
            if let Some(p) = &previous {
                prop_assert!(added.is_subset(p));
            }
            previous = Some(added);
        }
    }

    #[test]
    fn interpolated_precision_is_monotone(order in Just((1u32..=30).collect::<Vec<_>>()).prop_shuffle(), rel in proptest::collection::btree_set(1u32..=40, 1..10), cut in 0usize..=30) {
        let p = interpolated_precision(&ranking(&order[..cut]), &rel).unwrap();
        prop_assert!(p.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn self_comparison_shows_no_change(order in Just((1u32..=20).collect::<Vec<_>>()).prop_shuffle(), rel in proptest::collection::btree_set(1u32..=20, 1..8)) {
        let mut run = RankedRun::default();
        run.lists.insert(1, ranking(&order));
        let qrels = QrelSet { relevant: [(1, rel)].into_iter().collect() };
        let rep = report(&run, &qrels, Some(&run), 15).unwrap();
        let changes = rep.changes.unwrap();
        for (l, c) in changes.levels.iter().enumerate() {
            prop_assert!(rep.experiment.levels[l] == 0.0 || *c == Some(0.0));
        }
    }

    #[test]
    fn inverted_search_equals_exhaustive_scoring((t, docs) in presence(8, 30), picks in proptest::collection::vec(0usize..8, 1..5), k in 1usize..40) {
        let index = index_from_presence(t, &docs);
        let tokens: Vec<String> = picks.iter().map(|p| index.vocab.term(p % t).to_string()).collect();
        let q = QueryVector::from_tokens(1, &tokens);
        let fast = Searcher::new(&index).search(&q, k);
        let slow = search_exhaustive(&doc_vectors(&index), &q, k);
        prop_assert_eq!(&fast, &slow);
        prop_assert!(fast.iter().all(|h| h.score > 0.0));
        prop_assert!(fast.windows(2).all(|w| w[0].score > w[1].score || (w[0].score == w[1].score && w[0].doc < w[1].doc)));
    }

    #[test]
    fn files_round_trip((t, docs) in presence(8, 30), threshold in 0.05f64..0.95) {
        let index = index_from_presence(t, &docs);
        let mut buf = Vec::new();
        index.write(&mut buf).unwrap();
        let back = polyqe::corpus::CorpusIndex::read(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &index);

        let net = learn(&index, LearnOptions::new(Confidence::P90)).unwrap();
        let mut buf = Vec::new();
        net.write(&mut buf).unwrap();
        prop_assert_eq!(&BayesNet::read(buf.as_slice()).unwrap(), &net);

        let queries: Vec<QueryVector> = (0..t.min(4))
            .map(|i| QueryVector::from_tokens(i as u32 + 1, &[index.vocab.term(i)]))
            .map(|q| expand_query(&q, &net, threshold).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_query_file(&queries, "test", &mut buf).unwrap();
        prop_assert_eq!(&read_query_file(buf.as_slice()).unwrap(), &queries);

        let run = search_all(&index, &queries, usize::MAX);
        let mut buf = Vec::new();
        run.write("test", &mut buf).unwrap();
        prop_assert_eq!(&RankedRun::read(buf.as_slice()).unwrap(), &run);
    }
}
