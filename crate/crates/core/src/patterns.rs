//! Detection of pattern occurrences: disjoint sub-DAGs that repeat inside
//! one workflow.
//!
//! The detector walks vertices in ascending id order, pairs each unvisited
//! vertex with the first unvisited vertex that shares its type hash, brackets
//! the pair between their closest common ancestors and descendants, and cuts
//! out the two sub-DAGs between those frontiers. A candidate pair is kept
//! only if the two sub-DAGs are disjoint, share a pattern hash, agree on
//! their boundary wiring, and do not collide with an earlier accepted
//! occurrence of the same pattern. Occurrences of *different* patterns may
//! nest: a small repeated motif inside a larger repeated wing is reported
//! alongside it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::{BitSet, GraphIndex};
use crate::model::Workflow;
use crate::typehash::{hash_set_digest, Digest, TypeHashes};

/// One repeated sub-DAG, identified by the set of its vertices in the host
/// workflow and the digest of its unique type hashes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternOccurrence {
    /// Name of the workflow the occurrence was detected in.
    pub workflow: String,
    /// Digest over the unique type hashes of the members.
    pub pattern_hash: Digest,
    /// Member vertex ids.
    pub vertices: BTreeSet<String>,
    /// Members with no predecessor inside the occurrence.
    pub entries: BTreeSet<String>,
    /// Members with no successor inside the occurrence.
    pub exits: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternError {
    UnknownVertex(String),
    /// Hash annotation does not cover this workflow's vertices.
    HashMismatch(String),
    /// The focus vertex is not on any path from the ancestors to the
    /// descendants.
    NotBetween { vertex: String },
    EmptyFrontier,
}

impl fmt::Display for PatternError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternError::UnknownVertex(id) => write!(f, "unknown vertex {id:?}"),
            PatternError::HashMismatch(id) => {
                write!(f, "type hashes do not cover vertex {id:?}")
            }
            PatternError::NotBetween { vertex } => {
                write!(f, "vertex {vertex:?} lies on no path between the given frontiers")
            }
            PatternError::EmptyFrontier => write!(f, "ancestor or descendant frontier is empty"),
        }
    }
}

impl core::error::Error for PatternError {}

/// Closest common ancestors of `v` and `v2`.
///
/// A common ancestor is kept unless another common ancestor screens it off
/// from both targets, i.e. lies on every path to `v` and on every path to
/// `v2`. The survivors form the frontier nearest the pair.
pub fn closest_common_ancestors(
    w: &Workflow,
    v: &str,
    v2: &str,
) -> Result<Vec<String>, PatternError> {
    let g = GraphIndex::new(w);
    let anc = g.ancestor_sets();
    let (a, b) = lookup_pair(&g, v, v2)?;
    Ok(frontier(&g, &anc, Direction::Up, a, b).into_iter().map(|i| String::from(g.id(i))).collect())
}

/// Closest common descendants of `v` and `v2`; the mirror of
/// [`closest_common_ancestors`].
pub fn closest_common_descendants(
    w: &Workflow,
    v: &str,
    v2: &str,
) -> Result<Vec<String>, PatternError> {
    let g = GraphIndex::new(w);
    let desc = g.descendant_sets();
    let (a, b) = lookup_pair(&g, v, v2)?;
    Ok(frontier(&g, &desc, Direction::Down, a, b)
        .into_iter()
        .map(|i| String::from(g.id(i)))
        .collect())
}

fn lookup_pair(g: &GraphIndex<'_>, v: &str, v2: &str) -> Result<(u32, u32), PatternError> {
    let a = g.index(v).ok_or_else(|| PatternError::UnknownVertex(String::from(v)))?;
    let b = g.index(v2).ok_or_else(|| PatternError::UnknownVertex(String::from(v2)))?;
    Ok((a, b))
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    /// Frontier among common ancestors; screening runs along forward edges.
    Up,
    /// Frontier among common descendants; screening runs along reverse edges.
    Down,
}

/// Shared frontier computation. `relation[x]` holds the strict ancestors of
/// x (Up) or strict descendants of x (Down).
fn frontier(
    g: &GraphIndex<'_>,
    relation: &[BitSet],
    dir: Direction,
    v: u32,
    v2: u32,
) -> Vec<u32> {
    let common = relation[v as usize].intersection(&relation[v2 as usize]);
    let mut kept = Vec::new();
    'members: for &a in &common {
        for &c in &common {
            if c == a {
                continue;
            }
            // c can only screen a if it sits between a and both targets.
            let between = match dir {
                Direction::Up => relation[c as usize].contains(a),
                Direction::Down => relation[a as usize].contains(c),
            };
            if !between {
                continue;
            }
            let screens = match dir {
                Direction::Up => {
                    !g.reaches_avoiding(a, v, c) && !g.reaches_avoiding(a, v2, c)
                }
                Direction::Down => {
                    !reaches_avoiding_rev(g, a, v, c) && !reaches_avoiding_rev(g, a, v2, c)
                }
            };
            if screens {
                continue 'members;
            }
        }
        kept.push(a);
    }
    kept
}

/// Can `from` be reached from `to` along forward edges avoiding `avoid`?
/// Equivalently: reachability from `from` to `to` over reversed edges.
fn reaches_avoiding_rev(g: &GraphIndex<'_>, from: u32, to: u32, avoid: u32) -> bool {
    if from == avoid || to == avoid {
        return false;
    }
    if from == to {
        return true;
    }
    let mut seen = vec![false; g.len()];
    seen[from as usize] = true;
    seen[avoid as usize] = true;
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for &p in g.parents(v) {
            if p == to {
                return true;
            }
            if !seen[p as usize] {
                seen[p as usize] = true;
                stack.push(p);
            }
        }
    }
    false
}

/// Cut out the sub-DAG around `v` strictly between the `ancestors` and
/// `descendants` frontiers: vertices on some frontier-to-frontier path,
/// restricted to the weakly connected region containing `v`.
pub fn sub_dag(
    w: &Workflow,
    hashes: &TypeHashes,
    v: &str,
    ancestors: &[String],
    descendants: &[String],
) -> Result<PatternOccurrence, PatternError> {
    let g = GraphIndex::new(w);
    let desc = g.descendant_sets();
    let anc = g.ancestor_sets();
    let focus = g.index(v).ok_or_else(|| PatternError::UnknownVertex(String::from(v)))?;
    if ancestors.is_empty() || descendants.is_empty() {
        return Err(PatternError::EmptyFrontier);
    }
    let mut a_idx = Vec::with_capacity(ancestors.len());
    for id in ancestors {
        a_idx.push(g.index(id).ok_or_else(|| PatternError::UnknownVertex(id.clone()))?);
    }
    let mut d_idx = Vec::with_capacity(descendants.len());
    for id in descendants {
        d_idx.push(g.index(id).ok_or_else(|| PatternError::UnknownVertex(id.clone()))?);
    }
    build_sub_dag(&g, hashes, &desc, &anc, focus, &a_idx, &d_idx)
        .ok_or(PatternError::NotBetween { vertex: String::from(v) })
}

/// Core of [`sub_dag`] over precomputed reachability; `None` when the focus
/// vertex is outside the bracketed region.
fn build_sub_dag(
    g: &GraphIndex<'_>,
    hashes: &TypeHashes,
    desc: &[BitSet],
    anc: &[BitSet],
    focus: u32,
    ancestors: &[u32],
    descendants: &[u32],
) -> Option<PatternOccurrence> {
    let n = g.len();
    // Reachable from some frontier ancestor AND reaching some frontier
    // descendant, with the frontiers themselves excluded.
    let mut below = BitSet::new(n);
    for &a in ancestors {
        below.union_with(&desc[a as usize]);
    }
    let mut above = BitSet::new(n);
    for &d in descendants {
        above.union_with(&anc[d as usize]);
    }
    let mut region = BitSet::new(n);
    for i in 0..n as u32 {
        if below.contains(i) && above.contains(i) {
            region.insert(i);
        }
    }
    // Frontier members sit outside the cut by definition.
    for &x in ancestors.iter().chain(descendants) {
        region.remove(x);
    }
    if !region.contains(focus) {
        return None;
    }

    // Weakly connected component of the focus within the region.
    let mut member = BitSet::new(n);
    member.insert(focus);
    let mut stack = vec![focus];
    while let Some(v) = stack.pop() {
        for &u in g.children(v).iter().chain(g.parents(v)) {
            if region.contains(u) && !member.contains(u) {
                member.insert(u);
                stack.push(u);
            }
        }
    }

    let members = member.ones();
    let mut vertices = BTreeSet::new();
    let mut entries = BTreeSet::new();
    let mut exits = BTreeSet::new();
    let mut ths = Vec::with_capacity(members.len());
    for &m in &members {
        let id = g.id(m);
        vertices.insert(String::from(id));
        ths.push(hashes.th(id).expect("hashes cover the workflow"));
        if !g.parents(m).iter().any(|p| member.contains(*p)) {
            entries.insert(String::from(id));
        }
        if !g.children(m).iter().any(|c| member.contains(*c)) {
            exits.insert(String::from(id));
        }
    }
    Some(PatternOccurrence {
        workflow: g.workflow().name.clone(),
        pattern_hash: hash_set_digest(ths),
        vertices,
        entries,
        exits,
    })
}

/// Detect pattern occurrences over the whole workflow.
///
/// Deterministic: the visit order, the partner choice, and the
/// first-come-first-served overlap rule are all fixed by ascending id order.
pub fn detect_pattern_occurrences(
    w: &Workflow,
    hashes: &TypeHashes,
) -> Result<Vec<PatternOccurrence>, PatternError> {
    let g = GraphIndex::new(w);
    let n = g.len();
    for v in w.vertices() {
        if hashes.get(&v.id).is_none() {
            return Err(PatternError::HashMismatch(v.id.clone()));
        }
    }
    let th_by_index: Vec<Digest> =
        (0..n as u32).map(|i| hashes.th(g.id(i)).expect("checked above")).collect();
    let desc = g.descendant_sets();
    let anc = g.ancestor_sets();

    // Vertex sets already claimed, per pattern hash.
    let mut claimed: BTreeMap<Digest, BTreeSet<u32>> = BTreeMap::new();
    let mut accepted: Vec<PatternOccurrence> = Vec::new();
    let mut visited = vec![false; n];

    for v in 0..n as u32 {
        if visited[v as usize] {
            continue;
        }
        visited[v as usize] = true;
        let Some(partner) = (v + 1..n as u32)
            .find(|&u| !visited[u as usize] && th_by_index[u as usize] == th_by_index[v as usize])
        else {
            continue;
        };
        visited[partner as usize] = true;

        let a = frontier(&g, &anc, Direction::Up, v, partner);
        if a.is_empty() {
            continue;
        }
        let d = frontier(&g, &desc, Direction::Down, v, partner);
        if d.is_empty() {
            continue;
        }

        let Some(first) = build_sub_dag(&g, hashes, &desc, &anc, v, &a, &d) else {
            continue;
        };
        let Some(second) = build_sub_dag(&g, hashes, &desc, &anc, partner, &a, &d) else {
            continue;
        };

        // Definition filter: the pair must be disjoint, share a pattern
        // hash, and agree on boundary wiring.
        if first.pattern_hash != second.pattern_hash {
            continue;
        }
        if !first.vertices.is_disjoint(&second.vertices) {
            continue;
        }
        if !boundary_matches(w, hashes, &first, &second) {
            continue;
        }
        // First come, first served against earlier same-pattern claims.
        let slot = claimed.entry(first.pattern_hash).or_default();
        let collides = |po: &PatternOccurrence| {
            po.vertices.iter().any(|id| slot.contains(&g.index(id).expect("member of w")))
        };
        if collides(&first) || collides(&second) {
            continue;
        }
        for po in [&first, &second] {
            for id in &po.vertices {
                slot.insert(g.index(id).expect("member of w"));
            }
        }
        accepted.push(first);
        accepted.push(second);
    }
    Ok(accepted)
}

/// Definition's boundary condition for one candidate pair: entry vertices
/// with equal type hash must have identical parents outside both
/// occurrences; exit vertices symmetric over children.
fn boundary_matches(
    w: &Workflow,
    hashes: &TypeHashes,
    first: &PatternOccurrence,
    second: &PatternOccurrence,
) -> bool {
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
            if hashes.th(e1) == hashes.th(e2) && outside_parents(e1) != outside_parents(e2) {
                return false;
            }
        }
    }
    for x1 in &first.exits {
        for x2 in &second.exits {
            if hashes.th(x1) == hashes.th(x2) && outside_children(x1) != outside_children(x2) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Provenance, Vertex};
    use crate::typehash::compute_type_hashes;

    fn wf(vertices: Vec<(&str, &str)>, edges: Vec<(&str, &str)>) -> Workflow {
        Workflow::new(
            "t",
            Provenance::RealTrace,
            vertices.into_iter().map(|(id, ty)| Vertex::task(id, ty)).collect(),
            edges.into_iter().map(|(a, b)| (a.into(), b.into())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn frontier_keeps_only_the_screening_survivors() {
        // a -> m -> {b, c}; every path to b and c passes m, so m screens a.
        let funnel = wf(
            vec![("a", "t"), ("b", "u"), ("c", "u"), ("m", "v")],
            vec![("a", "m"), ("m", "b"), ("m", "c")],
        );
        assert_eq!(closest_common_ancestors(&funnel, "b", "c").unwrap(), vec!["m"]);

        // With a direct a -> b shortcut, m no longer dominates b: both stay.
        let shortcut = wf(
            vec![("a", "t"), ("b", "u"), ("c", "u"), ("m", "v")],
            vec![("a", "m"), ("m", "b"), ("m", "c"), ("a", "b")],
        );
        assert_eq!(closest_common_ancestors(&shortcut, "b", "c").unwrap(), vec!["a", "m"]);
    }

    #[test]
    fn diamond_frontiers() {
        let w = wf(
            vec![("a", "r"), ("b", "m"), ("c", "m"), ("d", "s")],
            vec![("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")],
        );
        assert_eq!(closest_common_ancestors(&w, "b", "c").unwrap(), vec!["a"]);
        assert_eq!(closest_common_descendants(&w, "b", "c").unwrap(), vec!["d"]);
    }

    #[test]
    fn sub_dag_cuts_the_connected_region() {
        let w = wf(
            vec![("a", "r"), ("b", "m"), ("c", "m"), ("d", "s")],
            vec![("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")],
        );
        let h = compute_type_hashes(&w);
        let po =
            sub_dag(&w, &h, "b", &["a".into()], &["d".into()]).unwrap();
        // b and c are both strictly between a and d but not connected to
        // each other once a and d are removed.
        assert_eq!(po.vertices.iter().collect::<Vec<_>>(), vec!["b"]);
        assert_eq!(po.entries, po.vertices);
        assert_eq!(po.exits, po.vertices);

        let chain = wf(
            vec![("a", "r"), ("x", "m"), ("y", "n"), ("d", "s")],
            vec![("a", "x"), ("x", "y"), ("y", "d")],
        );
        let hc = compute_type_hashes(&chain);
        let po = sub_dag(&chain, &hc, "x", &["a".into()], &["d".into()]).unwrap();
        assert_eq!(po.vertices.iter().collect::<Vec<_>>(), vec!["x", "y"]);
        assert_eq!(po.entries.iter().collect::<Vec<_>>(), vec!["x"]);
        assert_eq!(po.exits.iter().collect::<Vec<_>>(), vec!["y"]);
    }

    #[test]
    fn detect_finds_the_diamond_pair() {
        let w = wf(
            vec![("a", "r"), ("b", "m"), ("c", "m"), ("d", "s")],
            vec![("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")],
        );
        let h = compute_type_hashes(&w);
        let pos = detect_pattern_occurrences(&w, &h).unwrap();
        assert_eq!(pos.len(), 2);
        assert_eq!(pos[0].pattern_hash, pos[1].pattern_hash);
        assert_eq!(pos[0].vertices.iter().collect::<Vec<_>>(), vec!["b"]);
        assert_eq!(pos[1].vertices.iter().collect::<Vec<_>>(), vec!["c"]);
    }

    #[test]
    fn no_common_ancestor_means_no_occurrence() {
        // Two same-hash vertices under different roots share no ancestor.
        let w = wf(
            vec![("r1", "r"), ("r2", "r"), ("x", "m"), ("y", "m")],
            vec![("r1", "x"), ("r2", "y")],
        );
        let h = compute_type_hashes(&w);
        // x and y do share a type hash...
        assert_eq!(h.th("x"), h.th("y"));
        // ...but without a common ancestor no occurrence is reported.
        assert!(detect_pattern_occurrences(&w, &h).unwrap().is_empty());
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let w = wf(vec![("a", "t")], vec![]);
        assert!(matches!(
            closest_common_ancestors(&w, "a", "ghost"),
            Err(PatternError::UnknownVertex(id)) if id == "ghost"
        ));
    }
}
