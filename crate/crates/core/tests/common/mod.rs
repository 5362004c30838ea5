//! Shared fixtures and independent oracles for the acceptance suite.
//!
//! Everything here recomputes expected results from first principles using
//! only the crate's public read API, so a regression in the library cannot
//! hide behind a matching regression in the checks.

use std::collections::{BTreeMap, BTreeSet};

use wfforge_core::model::{Platform, Provenance, Vertex, Workflow};
use wfforge_core::patterns::PatternOccurrence;
use wfforge_core::simulator::ExecutionTrace;
use wfforge_core::typehash::{hash_set_digest, Digest, TypeHashes};

pub fn wf(name: &str, vertices: Vec<Vertex>, edges: Vec<(&str, &str)>) -> Workflow {
    let edges = edges
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    Workflow::new(name, Provenance::RealTrace, vertices, edges).unwrap()
}

/// Splitmix64; self-contained so the fixtures do not depend on the library's
/// own randomness.
pub struct TestRng {
    state: u64,
}

impl TestRng {
    pub fn new(seed: u64) -> TestRng {
        TestRng { state: seed.wrapping_add(0x9e3779b97f4a7c15) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, permille: u64) -> bool {
        self.next_u64() % 1000 < permille
    }

    /// A positive multiple of 0.25; sums of a few thousand of these are
    /// exact in f64 regardless of addition order.
    pub fn dyadic_runtime(&mut self) -> f64 {
        (self.below(16) + 1) as f64 * 0.25
    }
}

/// Random typed DAG with `min_v..=max_v` vertices. Edges only go from lower
/// to higher index, so the result is acyclic by construction; every vertex
/// carries a runtime.
pub fn random_dag(seed: u64, min_v: usize, max_v: usize, types: &[&str]) -> Workflow {
    let mut rng = TestRng::new(seed);
    let n = min_v + rng.below(max_v - min_v + 1);
    let mut vertices = Vec::with_capacity(n);
    for i in 0..n {
        let vtype = types[rng.below(types.len())];
        let runtime = rng.dyadic_runtime();
        vertices.push(Vertex::task(format!("v{i:02}"), vtype).with_runtime(runtime));
    }
    let mut edges = Vec::new();
    for j in 1..n {
        for i in 0..j {
            if rng.chance(350) {
                edges.push((format!("v{i:02}"), format!("v{j:02}")));
            }
        }
    }
    Workflow::new(format!("random-{seed}"), Provenance::RealTrace, vertices, edges).unwrap()
}

/// Random DAG with exactly `n` vertices over the same kind of edge model;
/// the structural control for the self-consistency experiment.
pub fn uniform_random_dag(seed: u64, n: usize, types: &[&str]) -> Workflow {
    let mut rng = TestRng::new(seed ^ 0x00c0_ffee);
    let mut vertices = Vec::with_capacity(n);
    for i in 0..n {
        let vtype = types[rng.below(types.len())];
        vertices.push(Vertex::task(format!("u{i:04}"), vtype).with_runtime(1.0));
    }
    let mut edges = Vec::new();
    for j in 1..n {
        // Keep degree roughly constant as n grows.
        for _ in 0..2 {
            let i = rng.below(j);
            edges.push((format!("u{i:04}"), format!("u{j:04}")));
        }
    }
    Workflow::new(format!("control-{seed}"), Provenance::RealTrace, vertices, edges).unwrap()
}

/// Four-vertex fence: one root, two structurally identical middles, one
/// join. Small enough to derive every hash by hand.
pub fn fence_fixture() -> Workflow {
    wf(
        "fence",
        vec![
            Vertex::task("b1", "B").with_runtime(1.0),
            Vertex::task("b2", "B").with_runtime(1.0),
            Vertex::task("c", "C").with_runtime(1.0),
            Vertex::task("r", "A").with_runtime(1.0),
        ],
        vec![("r", "b1"), ("r", "b2"), ("b1", "c"), ("b2", "c")],
    )
}

/// Two repeated arms under one root, one arm with an extra twin; yields
/// exactly six occurrences in two pattern groups.
pub fn six_po_fixture() -> Workflow {
    let p = |id: &str, t: &str| Vertex::task(id, t).with_runtime(1.0);
    wf(
        "six-po",
        vec![
            p("00_root", "R"),
            p("01_lb", "blue"),
            p("02_lm", "mid"),
            p("03_lp", "P"),
            p("04_lq", "P"),
            p("05_lx", "X"),
            p("06_rb", "blue"),
            p("07_rm", "mid"),
            p("08_rp", "P"),
            p("09_rq", "P"),
            p("10_rs", "P"),
            p("11_rx", "X"),
            p("12_zz", "S"),
        ],
        vec![
            ("00_root", "01_lb"),
            ("00_root", "06_rb"),
            ("01_lb", "02_lm"),
            ("02_lm", "03_lp"),
            ("02_lm", "04_lq"),
            ("03_lp", "05_lx"),
            ("04_lq", "05_lx"),
            ("05_lx", "12_zz"),
            ("06_rb", "07_rm"),
            ("07_rm", "08_rp"),
            ("07_rm", "09_rq"),
            ("07_rm", "10_rs"),
            ("08_rp", "11_rx"),
            ("09_rq", "11_rx"),
            ("10_rs", "11_rx"),
            ("11_rx", "12_zz"),
        ],
    )
}

/// One family instance: `k` two-task chains and `l` four-task fans strung
/// between a shared source and sink. Size is `2 + 2k + 4l`.
pub fn patterned_instance(name: &str, k: usize, l: usize) -> Workflow {
    let mut vertices = vec![
        Vertex::task("a_in", "stage_in").with_runtime(0.5),
        Vertex::task("z_out", "stage_out").with_runtime(0.5),
    ];
    let mut edges = Vec::new();
    for i in 0..k {
        let a = format!("c{i:03}a");
        let b = format!("c{i:03}b");
        vertices.push(Vertex::task(a.clone(), "prep").with_runtime(1.0));
        vertices.push(Vertex::task(b.clone(), "work").with_runtime(2.0));
        edges.push(("a_in".to_string(), a.clone()));
        edges.push((a, b.clone()));
        edges.push((b, "z_out".to_string()));
    }
    for i in 0..l {
        let s = format!("f{i:03}s");
        let p = format!("f{i:03}p");
        let q = format!("f{i:03}q");
        let j = format!("f{i:03}j");
        vertices.push(Vertex::task(s.clone(), "split").with_runtime(0.75));
        vertices.push(Vertex::task(p.clone(), "leaf_a").with_runtime(1.5));
        vertices.push(Vertex::task(q.clone(), "leaf_b").with_runtime(1.5));
        vertices.push(Vertex::task(j.clone(), "join").with_runtime(1.25));
        edges.push(("a_in".to_string(), s.clone()));
        edges.push((s.clone(), p.clone()));
        edges.push((s, q.clone()));
        edges.push((p, j.clone()));
        edges.push((q, j.clone()));
        edges.push((j, "z_out".to_string()));
    }
    let edges = edges.iter().map(|(a, b)| (a.clone(), b.clone())).collect();
    Workflow::new(name, Provenance::RealTrace, vertices, edges).unwrap()
}

/// Check every reported occurrence and every reported pair against the
/// definition, recomputed directly from the workflow.
pub fn check_po_reports(w: &Workflow, hashes: &TypeHashes, pos: &[PatternOccurrence]) {
    assert_eq!(pos.len() % 2, 0, "occurrences are accepted in pairs");

    for po in pos {
        assert!(!po.vertices.is_empty());
        for id in &po.vertices {
            assert!(w.contains(id), "occurrence names unknown vertex {id}");
        }

        let inside = &po.vertices;
        let entries: BTreeSet<String> = inside
            .iter()
            .filter(|id| w.parents_of(id).all(|p| !inside.contains(p)))
            .cloned()
            .collect();
        let exits: BTreeSet<String> = inside
            .iter()
            .filter(|id| w.children_of(id).all(|c| !inside.contains(c)))
            .cloned()
            .collect();
        assert_eq!(entries, po.entries, "entry set mismatch");
        assert_eq!(exits, po.exits, "exit set mismatch");

        let unique: BTreeSet<Digest> =
            inside.iter().map(|id| hashes.th(id).expect("hashed")).collect();
        assert_eq!(hash_set_digest(unique), po.pattern_hash, "pattern hash mismatch");

        // Weak connectivity over member-internal edges.
        let mut seen = BTreeSet::new();
        let first = inside.iter().next().unwrap().clone();
        let mut frontier = vec![first.clone()];
        seen.insert(first);
        while let Some(id) = frontier.pop() {
            let neighbors = w
                .children_of(&id)
                .chain(w.parents_of(&id))
                .filter(|n| inside.contains(*n))
                .map(String::from)
                .collect::<Vec<_>>();
            for n in neighbors {
                if seen.insert(n.clone()) {
                    frontier.push(n);
                }
            }
        }
        assert_eq!(seen.len(), inside.len(), "occurrence is not weakly connected");
    }

    for pair in pos.chunks(2) {
        let (first, second) = (&pair[0], &pair[1]);
        assert_eq!(first.pattern_hash, second.pattern_hash, "pair crosses patterns");
        assert!(
            first.vertices.is_disjoint(&second.vertices),
            "paired occurrences overlap"
        );

        let outside_parents = |id: &str| -> BTreeSet<String> {
            w.parents_of(id)
                .filter(|p| !first.vertices.contains(*p) && !second.vertices.contains(*p))
                .map(String::from)
                .collect()
        };
        let outside_children = |id: &str| -> BTreeSet<String> {
            w.children_of(id)
                .filter(|c| !first.vertices.contains(*c) && !second.vertices.contains(*c))
                .map(String::from)
                .collect()
        };
        for e1 in &first.entries {
            for e2 in &second.entries {
                if hashes.th(e1) == hashes.th(e2) {
                    assert_eq!(
                        outside_parents(e1),
                        outside_parents(e2),
                        "entries {e1}/{e2} disagree on outside parents"
                    );
                }
            }
        }
        for x1 in &first.exits {
            for x2 in &second.exits {
                if hashes.th(x1) == hashes.th(x2) {
                    assert_eq!(
                        outside_children(x1),
                        outside_children(x2),
                        "exits {x1}/{x2} disagree on outside children"
                    );
                }
            }
        }
    }

    // Occurrences of one pattern never share vertices, across all pairs.
    let mut claimed: BTreeMap<Digest, BTreeSet<&String>> = BTreeMap::new();
    for po in pos {
        let slot = claimed.entry(po.pattern_hash).or_default();
        for id in &po.vertices {
            assert!(slot.insert(id), "vertex {id} claimed twice by one pattern");
        }
    }
}

/// Exact typed graph edit distance by exhaustive search over same-type
/// injective matchings. Feasible up to about 8 vertices a side.
pub fn exact_ged(a: &Workflow, b: &Workflow) -> usize {
    let a_types: Vec<&str> = a.vertices().iter().map(|v| v.vtype.as_str()).collect();
    let b_types: Vec<&str> = b.vertices().iter().map(|v| v.vtype.as_str()).collect();
    let index_of = |w: &Workflow, id: &str| {
        w.vertices().iter().position(|v| v.id == id).expect("edge endpoint exists")
    };
    let a_edges: Vec<(usize, usize)> = a
        .edges()
        .iter()
        .map(|(f, t)| (index_of(a, f), index_of(a, t)))
        .collect();
    let b_edges: BTreeSet<(usize, usize)> = b
        .edges()
        .iter()
        .map(|(f, t)| (index_of(b, f), index_of(b, t)))
        .collect();

    let mut mapping: Vec<Option<usize>> = vec![None; a_types.len()];
    let mut used = vec![false; b_types.len()];
    let mut best = usize::MAX;

    fn go(
        i: usize,
        a_types: &[&str],
        b_types: &[&str],
        a_edges: &[(usize, usize)],
        b_edges: &BTreeSet<(usize, usize)>,
        mapping: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut usize,
    ) {
        if i == a_types.len() {
            let matched = mapping.iter().filter(|m| m.is_some()).count();
            let hits = a_edges
                .iter()
                .filter(|(u, v)| match (mapping[*u], mapping[*v]) {
                    (Some(x), Some(y)) => b_edges.contains(&(x, y)),
                    _ => false,
                })
                .count();
            let cost = (a_types.len() - matched)
                + (b_types.len() - matched)
                + (a_edges.len() - hits)
                + (b_edges.len() - hits);
            *best = (*best).min(cost);
            return;
        }
        for j in 0..b_types.len() {
            if !used[j] && a_types[i] == b_types[j] {
                used[j] = true;
                mapping[i] = Some(j);
                go(i + 1, a_types, b_types, a_edges, b_edges, mapping, used, best);
                used[j] = false;
                mapping[i] = None;
            }
        }
        go(i + 1, a_types, b_types, a_edges, b_edges, mapping, used, best);
    }

    go(0, &a_types, &b_types, &a_edges, &b_edges, &mut mapping, &mut used, &mut best);
    best
}

pub fn total_work(w: &Workflow) -> f64 {
    w.vertices().iter().map(|v| v.runtime.unwrap_or(0.0)).sum()
}

/// Longest runtime-weighted path, computed by memoized descent.
pub fn critical_path(w: &Workflow) -> f64 {
    fn longest(w: &Workflow, id: &str, memo: &mut BTreeMap<String, f64>) -> f64 {
        if let Some(&v) = memo.get(id) {
            return v;
        }
        let runtime = w.vertex(id).unwrap().runtime.unwrap_or(0.0);
        let children: Vec<String> = w.children_of(id).map(String::from).collect();
        let tail = children
            .iter()
            .map(|c| longest(w, c, memo))
            .fold(0.0, f64::max);
        let value = runtime + tail;
        memo.insert(id.to_string(), value);
        value
    }
    let mut memo = BTreeMap::new();
    w.vertices()
        .iter()
        .map(|v| longest(w, &v.id, &mut memo))
        .fold(0.0, f64::max)
}

/// Assert that `t` is a legal schedule of `w` on `platform`: every task
/// placed once on a real core, runtimes respected, dependencies respected,
/// no core running two tasks at once, makespan equal to the last finish.
pub fn validate_schedule(w: &Workflow, platform: Platform, t: &ExecutionTrace) {
    assert_eq!(t.records.len(), w.len(), "record per task");
    let mut by_id = BTreeMap::new();
    for r in &t.records {
        assert!(by_id.insert(r.id.as_str(), r).is_none(), "task {} scheduled twice", r.id);
    }

    for v in w.vertices() {
        let r = by_id.get(v.id.as_str()).unwrap_or_else(|| panic!("task {} missing", v.id));
        assert_eq!(r.vtype, v.vtype);
        let runtime = v.runtime.unwrap_or(0.0);
        assert!((r.finish - r.start - runtime).abs() < 1e-9, "task {} duration", v.id);
        assert!(r.start >= 0.0);
        assert!(r.node < platform.num_nodes(), "task {} on missing node", v.id);
        assert!(r.core < platform.cores_per_node(), "task {} on missing core", v.id);
        for p in w.parents_of(&v.id) {
            assert!(
                r.start >= by_id[p].finish - 1e-9,
                "task {} starts before parent {p} finishes",
                v.id
            );
        }
    }

    let mut by_core: BTreeMap<(usize, usize), Vec<(f64, f64)>> = BTreeMap::new();
    for r in &t.records {
        by_core.entry((r.node, r.core)).or_default().push((r.start, r.finish));
    }
    for ((node, core), mut spans) in by_core {
        spans.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in spans.windows(2) {
            assert!(
                pair[1].0 >= pair[0].1 - 1e-9,
                "core {node}/{core} overlaps: {pair:?}"
            );
        }
    }

    let last_finish = t.records.iter().map(|r| r.finish).fold(0.0, f64::max);
    assert!((t.makespan - last_finish).abs() < 1e-9, "makespan is not the last finish");
}
