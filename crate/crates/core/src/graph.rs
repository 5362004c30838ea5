//! Dense adjacency view over a [`Workflow`](crate::model::Workflow).
//!
//! Vertex index = position in the workflow's id-sorted vertex slice, so index
//! order and ascending-id order coincide and every downstream iteration in
//! index order is deterministic.

use alloc::vec::Vec;

use crate::model::Workflow;

pub(crate) struct GraphIndex<'w> {
    w: &'w Workflow,
    fwd: Vec<Vec<u32>>,
    rev: Vec<Vec<u32>>,
}

impl<'w> GraphIndex<'w> {
    pub fn new(w: &'w Workflow) -> GraphIndex<'w> {
        let n = w.len();
        let mut fwd = vec![Vec::new(); n];
        let mut rev = vec![Vec::new(); n];
        for (from, to) in w.edges() {
            let f = index_of(w, from);
            let t = index_of(w, to);
            fwd[f as usize].push(t);
            rev[t as usize].push(f);
        }
        for adj in fwd.iter_mut().chain(rev.iter_mut()) {
            adj.sort_unstable();
        }
        GraphIndex { w, fwd, rev }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn workflow(&self) -> &'w Workflow {
        self.w
    }

    pub fn id(&self, v: u32) -> &'w str {
        self.w.vertices()[v as usize].id.as_str()
    }

    pub fn index(&self, id: &str) -> Option<u32> {
        self.w
            .vertices()
            .binary_search_by(|vx| vx.id.as_str().cmp(id))
            .ok()
            .map(|i| i as u32)
    }

    pub fn children(&self, v: u32) -> &[u32] {
        &self.fwd[v as usize]
    }

    pub fn parents(&self, v: u32) -> &[u32] {
        &self.rev[v as usize]
    }

    /// Topological order, sources first; ties broken by ascending index.
    pub fn topo_order(&self) -> Vec<u32> {
        let n = self.len();
        let mut indegree: Vec<u32> = self.rev.iter().map(|p| p.len() as u32).collect();
        let mut heap: alloc::collections::BinaryHeap<core::cmp::Reverse<u32>> = (0..n as u32)
            .filter(|&v| indegree[v as usize] == 0)
            .map(core::cmp::Reverse)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(core::cmp::Reverse(v)) = heap.pop() {
            order.push(v);
            for &c in self.children(v) {
                indegree[c as usize] -= 1;
                if indegree[c as usize] == 0 {
                    heap.push(core::cmp::Reverse(c));
                }
            }
        }
        debug_assert_eq!(order.len(), n, "workflow is acyclic by construction");
        order
    }

    /// Per-vertex descendant bitsets (strict: v not in its own set).
    pub fn descendant_sets(&self) -> Vec<BitSet> {
        let n = self.len();
        let mut sets = vec![BitSet::new(n); n];
        let order = self.topo_order();
        for &v in order.iter().rev() {
            let mut acc = BitSet::new(n);
            for &c in self.children(v) {
                acc.insert(c);
                acc.union_with(&sets[c as usize]);
            }
            sets[v as usize] = acc;
        }
        sets
    }

    /// Per-vertex ancestor bitsets (strict).
    pub fn ancestor_sets(&self) -> Vec<BitSet> {
        let n = self.len();
        let mut sets = vec![BitSet::new(n); n];
        for &v in self.topo_order().iter() {
            let mut acc = BitSet::new(n);
            for &p in self.parents(v) {
                acc.insert(p);
                acc.union_with(&sets[p as usize]);
            }
            sets[v as usize] = acc;
        }
        sets
    }

    /// Can `from` reach `to` without passing through `avoid`?
    /// `from == to` counts as reachable (the empty path avoids everything).
    pub fn reaches_avoiding(&self, from: u32, to: u32, avoid: u32) -> bool {
        if from == avoid || to == avoid {
            return false;
        }
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.len()];
        seen[from as usize] = true;
        seen[avoid as usize] = true;
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            for &c in self.children(v) {
                if c == to {
                    return true;
                }
                if !seen[c as usize] {
                    seen[c as usize] = true;
                    stack.push(c);
                }
            }
        }
        false
    }
}

fn index_of(w: &Workflow, id: &str) -> u32 {
    w.vertices()
        .binary_search_by(|vx| vx.id.as_str().cmp(id))
        .expect("edge endpoints validated") as u32
}

/// Fixed-capacity bitset over vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> BitSet {
        BitSet { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn insert(&mut self, i: u32) {
        self.words[i as usize / 64] |= 1u64 << (i as usize % 64);
    }

    pub fn remove(&mut self, i: u32) {
        self.words[i as usize / 64] &= !(1u64 << (i as usize % 64));
    }

    pub fn contains(&self, i: u32) -> bool {
        self.words[i as usize / 64] >> (i as usize % 64) & 1 == 1
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    /// Members of `self & other`, ascending.
    pub fn intersection(&self, other: &BitSet) -> Vec<u32> {
        let mut out = Vec::new();
        for (wi, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let mut bits = a & b;
            while bits != 0 {
                let bit = bits.trailing_zeros();
                out.push(wi as u32 * 64 + bit);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Set members, ascending.
    pub fn ones(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (wi, a) in self.words.iter().enumerate() {
            let mut bits = *a;
            while bits != 0 {
                let bit = bits.trailing_zeros();
                out.push(wi as u32 * 64 + bit);
                bits &= bits - 1;
            }
        }
        out
    }
}
