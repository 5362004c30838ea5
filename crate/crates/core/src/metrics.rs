//! Structural realism metrics over pairs of workflows.
//!
//! Two measures: the root-mean-square error between type-hash frequency
//! vectors, and an approximate typed edit distance. Both ignore dummy
//! vertices. The edit distance is an upper bound on the exact typed graph
//! edit distance: it greedily matches vertices (equal type hash first, equal
//! vtype second) and counts every leftover vertex and every edge that the
//! induced mapping fails to carry over.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::Workflow;
use crate::typehash::{compute_type_hashes, workflow_type_hash, Digest, WorkflowTypeHash};

#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    /// The named workflow has no non-dummy vertices to compare.
    EmptyWorkflow(String),
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::EmptyWorkflow(name) => {
                write!(f, "workflow '{name}' has no non-dummy vertices to compare")
            }
        }
    }
}

impl core::error::Error for MetricError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    HashFrequencyRmse,
    ApproxEditDistance,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::HashFrequencyRmse => "thf",
            Metric::ApproxEditDistance => "aed",
        }
    }
}

/// One row of a frequency comparison: the hash and its share on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct HashResidual {
    pub hash: Digest,
    pub left: f64,
    pub right: f64,
}

/// Edit breakdown behind an approximate edit distance value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EditCounts {
    pub matched_vertices: usize,
    pub removed_vertices: usize,
    pub added_vertices: usize,
    pub removed_edges: usize,
    pub added_edges: usize,
}

impl EditCounts {
    pub fn total(self) -> usize {
        self.removed_vertices + self.added_vertices + self.removed_edges + self.added_edges
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricDetails {
    HashResiduals(Vec<HashResidual>),
    Edits(EditCounts),
}

/// A computed metric value plus the breakdown it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub metric: Metric,
    pub value: f64,
    pub pair: (String, String),
    pub details: MetricDetails,
}

/// RMSE between two hash-frequency summaries over the union of their hash
/// sets. `None` when either side is empty.
pub fn frequency_rmse(a: &WorkflowTypeHash, b: &WorkflowTypeHash) -> Option<f64> {
    if a.hashes.is_empty() || b.hashes.is_empty() {
        return None;
    }
    let union: BTreeSet<Digest> = a.hashes.union(&b.hashes).copied().collect();
    let sum: f64 = union
        .iter()
        .map(|h| {
            let fa = a.frequencies.get(h).copied().unwrap_or(0.0);
            let fb = b.frequencies.get(h).copied().unwrap_or(0.0);
            (fa - fb) * (fa - fb)
        })
        .sum();
    Some(libm::sqrt(sum / union.len() as f64))
}

/// Type-hash frequency RMSE between two workflows.
pub fn thf(w: &Workflow, x: &Workflow) -> Result<f64, MetricError> {
    Ok(thf_report(w, x)?.value)
}

pub fn thf_report(w: &Workflow, x: &Workflow) -> Result<MetricReport, MetricError> {
    let a = workflow_type_hash(w, &compute_type_hashes(w));
    let b = workflow_type_hash(x, &compute_type_hashes(x));
    let value = frequency_rmse(&a, &b).ok_or_else(|| {
        let empty = if a.hashes.is_empty() { &w.name } else { &x.name };
        MetricError::EmptyWorkflow(empty.clone())
    })?;
    let union: BTreeSet<Digest> = a.hashes.union(&b.hashes).copied().collect();
    let residuals = union
        .into_iter()
        .map(|hash| HashResidual {
            hash,
            left: a.frequencies.get(&hash).copied().unwrap_or(0.0),
            right: b.frequencies.get(&hash).copied().unwrap_or(0.0),
        })
        .collect();
    Ok(MetricReport {
        metric: Metric::HashFrequencyRmse,
        value,
        pair: (w.name.clone(), x.name.clone()),
        details: MetricDetails::HashResiduals(residuals),
    })
}

/// Approximate typed edit distance, normalized by the non-dummy size of the
/// first (reference) workflow.
pub fn aed(w: &Workflow, x: &Workflow) -> Result<f64, MetricError> {
    Ok(aed_report(w, x)?.value)
}

pub fn aed_report(w: &Workflow, x: &Workflow) -> Result<MetricReport, MetricError> {
    let denom = w.vertices().iter().filter(|v| !v.is_dummy).count();
    if denom == 0 {
        return Err(MetricError::EmptyWorkflow(w.name.clone()));
    }
    let counts = approx_edits(w, x);
    Ok(MetricReport {
        metric: Metric::ApproxEditDistance,
        value: counts.total() as f64 / denom as f64,
        pair: (w.name.clone(), x.name.clone()),
        details: MetricDetails::Edits(counts),
    })
}

/// Greedy vertex matching plus the edge edits the mapping leaves behind.
///
/// Hashes are computed on the full graphs so dummies still shape structure,
/// but dummies themselves and their incident edges take no part in the
/// count. Matched pairs always share a vtype (equal type hash implies it),
/// so the counts describe a valid edit script and bound the exact distance
/// from above.
fn approx_edits(w: &Workflow, x: &Workflow) -> EditCounts {
    let hw = compute_type_hashes(w);
    let hx = compute_type_hashes(x);

    let live = |wf: &Workflow| -> Vec<String> {
        wf.vertices().iter().filter(|v| !v.is_dummy).map(|v| v.id.clone()).collect()
    };
    let left = live(w);
    let right = live(x);

    let by_hash = |ids: &[String], hs: &crate::typehash::TypeHashes| {
        let mut groups: BTreeMap<Digest, Vec<String>> = BTreeMap::new();
        for id in ids {
            groups.entry(hs.th(id).expect("hash for every vertex")).or_default().push(id.clone());
        }
        groups
    };
    let mut mapping: BTreeMap<String, String> = BTreeMap::new();
    let mut left_over: Vec<String> = Vec::new();
    let mut right_used: BTreeSet<String> = BTreeSet::new();

    let left_groups = by_hash(&left, &hw);
    let mut right_groups = by_hash(&right, &hx);
    for (hash, ls) in &left_groups {
        let rs = right_groups.remove(hash).unwrap_or_default();
        for (i, l) in ls.iter().enumerate() {
            match rs.get(i) {
                Some(r) => {
                    mapping.insert(l.clone(), r.clone());
                    right_used.insert(r.clone());
                }
                None => left_over.push(l.clone()),
            }
        }
    }

    // Second pass over the leftovers: same vtype is still a free rename.
    let vtype_of = |wf: &Workflow, id: &str| wf.vertex(id).expect("known id").vtype.clone();
    let mut left_rest: BTreeMap<String, Vec<String>> = BTreeMap::new();
    left_over.sort();
    for id in &left_over {
        left_rest.entry(vtype_of(w, id)).or_default().push(id.clone());
    }
    let mut right_rest: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for id in &right {
        if !right_used.contains(id) {
            right_rest.entry(vtype_of(x, id)).or_default().push(id.clone());
        }
    }
    for (vtype, ls) in &left_rest {
        let rs = right_rest.get(vtype).cloned().unwrap_or_default();
        for (i, l) in ls.iter().enumerate() {
            if let Some(r) = rs.get(i) {
                mapping.insert(l.clone(), r.clone());
                right_used.insert(r.clone());
            }
        }
    }

    let matched = mapping.len();
    let unmatched_left = left.len() - matched;
    let unmatched_right = right.len() - matched;

    let live_edges = |wf: &Workflow| -> BTreeSet<(String, String)> {
        wf.edges()
            .iter()
            .filter(|(f, t)| {
                !wf.vertex(f).expect("endpoint").is_dummy && !wf.vertex(t).expect("endpoint").is_dummy
            })
            .cloned()
            .collect()
    };
    let e1 = live_edges(w);
    let e2 = live_edges(x);
    let hits = e1
        .iter()
        .filter(|(f, t)| match (mapping.get(f), mapping.get(t)) {
            (Some(mf), Some(mt)) => e2.contains(&(mf.clone(), mt.clone())),
            _ => false,
        })
        .count();

    EditCounts {
        matched_vertices: matched,
        removed_vertices: unmatched_left,
        added_vertices: unmatched_right,
        removed_edges: e1.len() - hits,
        added_edges: e2.len() - hits,
    }
}
