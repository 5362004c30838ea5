//! Greedy list-scheduling simulator and execution-trace comparison metrics.
//!
//! The platform is a homogeneous cluster addressed as a flat list of cores.
//! Ready tasks start in ascending id order on the lowest-index free core;
//! time advances to the earliest finish and every task finishing at that
//! instant completes together. Dummy vertices run for zero seconds.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::GraphIndex;
use crate::model::{Platform, Workflow, DUMMY_ENTRY_TYPE, DUMMY_EXIT_TYPE};

#[derive(Debug, Clone, PartialEq)]
pub enum SimulateError {
    /// A non-dummy task has no runtime to schedule with.
    MissingRuntime(String),
}

impl fmt::Display for SimulateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimulateError::MissingRuntime(id) => {
                write!(f, "task '{id}' has no runtime")
            }
        }
    }
}

impl core::error::Error for SimulateError {}

#[derive(Debug, Clone, PartialEq)]
pub enum CompareError {
    /// The reference trace has makespan zero, so a relative difference is
    /// undefined.
    ZeroReferenceMakespan,
    /// No start-date pairs survive alignment (after dummy and zero-start
    /// exclusion).
    NoAlignablePairs,
}

impl fmt::Display for CompareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompareError::ZeroReferenceMakespan => {
                f.write_str("reference trace has zero makespan")
            }
            CompareError::NoAlignablePairs => {
                f.write_str("no start-date pairs to align between the traces")
            }
        }
    }
}

impl core::error::Error for CompareError {}

/// One scheduled task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub id: String,
    pub vtype: String,
    pub start: f64,
    pub finish: f64,
    pub node: usize,
    pub core: usize,
}

/// A complete simulated schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    /// Records in ascending task-id order.
    pub records: Vec<TaskRecord>,
    pub makespan: f64,
}

/// Schedule `w` on `platform` and return the resulting trace.
pub fn simulate(w: &Workflow, platform: Platform) -> Result<ExecutionTrace, SimulateError> {
    let g = GraphIndex::new(w);
    let n = g.len() as u32;
    let mut runtimes = Vec::with_capacity(n as usize);
    for i in 0..n {
        let v = &w.vertices()[i as usize];
        if v.is_dummy {
            runtimes.push(0.0);
        } else {
            match v.runtime {
                Some(r) => runtimes.push(r),
                None => return Err(SimulateError::MissingRuntime(v.id.clone())),
            }
        }
    }

    let mut indegree: Vec<usize> = (0..n).map(|i| g.parents(i).len()).collect();
    let mut ready: BTreeSet<u32> = (0..n).filter(|&i| indegree[i as usize] == 0).collect();
    let mut free: BTreeSet<usize> = (0..platform.total_cores()).collect();
    let mut running: Vec<(f64, u32, usize)> = Vec::new();
    let mut records: Vec<Option<TaskRecord>> = (0..n).map(|_| None).collect();
    let mut now = 0.0;
    let mut completed = 0u32;

    while completed < n {
        while let (Some(&idx), Some(&core)) = (ready.first(), free.first()) {
            ready.remove(&idx);
            free.remove(&core);
            let v = &w.vertices()[idx as usize];
            let finish = now + runtimes[idx as usize];
            records[idx as usize] = Some(TaskRecord {
                id: v.id.clone(),
                vtype: v.vtype.clone(),
                start: now,
                finish,
                node: core / platform.cores_per_node(),
                core: core % platform.cores_per_node(),
            });
            running.push((finish, idx, core));
        }
        if running.is_empty() {
            break;
        }
        let next = running.iter().map(|&(f, _, _)| f).fold(f64::INFINITY, f64::min);
        now = next;
        let mut i = 0;
        while i < running.len() {
            if running[i].0 == next {
                let (_, idx, core) = running.swap_remove(i);
                free.insert(core);
                completed += 1;
                for &child in g.children(idx) {
                    indegree[child as usize] -= 1;
                    if indegree[child as usize] == 0 {
                        ready.insert(child);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let records: Vec<TaskRecord> =
        records.into_iter().map(|r| r.expect("acyclic graph schedules fully")).collect();
    let makespan = records.iter().map(|r| r.finish).fold(0.0, f64::max);
    Ok(ExecutionTrace { records, makespan })
}

/// |real − synthetic| / real over the two makespans.
pub fn makespan_rel_diff(
    real: &ExecutionTrace,
    synthetic: &ExecutionTrace,
) -> Result<f64, CompareError> {
    if real.makespan == 0.0 {
        return Err(CompareError::ZeroReferenceMakespan);
    }
    Ok(libm::fabs(real.makespan - synthetic.makespan) / real.makespan)
}

/// Root-mean-square percentage error of task start dates.
///
/// Start dates are grouped per vtype, sorted, and paired rank by rank; the
/// longer list is truncated. Dummy records and pairs whose reference start
/// is zero are excluded.
pub fn rmspe_start_dates(
    real: &ExecutionTrace,
    synthetic: &ExecutionTrace,
) -> Result<f64, CompareError> {
    let starts_by_type = |trace: &ExecutionTrace| -> BTreeMap<String, Vec<f64>> {
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for record in &trace.records {
            if record.vtype == DUMMY_ENTRY_TYPE || record.vtype == DUMMY_EXIT_TYPE {
                continue;
            }
            groups.entry(record.vtype.clone()).or_default().push(record.start);
        }
        for list in groups.values_mut() {
            list.sort_by(|a, b| a.partial_cmp(b).expect("finite start dates"));
        }
        groups
    };

    let left = starts_by_type(real);
    let right = starts_by_type(synthetic);
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (vtype, rs) in &left {
        let Some(ss) = right.get(vtype) else { continue };
        for (r, s) in rs.iter().zip(ss.iter()) {
            if *r == 0.0 {
                continue;
            }
            let ratio = (r - s) / r;
            sum += ratio * ratio;
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(CompareError::NoAlignablePairs);
    }
    Ok(100.0 * libm::sqrt(sum / pairs as f64))
}
