//! The workflow DAG: vertices with task attributes, a directed edge set,
//! structural validation, and entry/exit normalization.
//!
//! A [`Workflow`] is immutable-by-construction: [`Workflow::new`] sorts
//! vertices by id, deduplicates edges, and refuses anything that is not a
//! well-formed DAG. Every iteration order downstream (hashing, detection,
//! scheduling) derives from the ascending-id order established here.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Reserved vtype for the synthetic entry vertex added by normalization.
pub const DUMMY_ENTRY_TYPE: &str = "__entry__";
/// Reserved vtype for the synthetic exit vertex added by normalization.
pub const DUMMY_EXIT_TYPE: &str = "__exit__";

/// Where a workflow came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Parsed from an execution trace.
    RealTrace,
    /// Produced by the generator.
    Synthetic,
    /// A real trace with dummy entry/exit vertices added.
    Normalized,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::RealTrace => "real-trace",
            Provenance::Synthetic => "synthetic",
            Provenance::Normalized => "normalized",
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        match s {
            "real-trace" => Some(Provenance::RealTrace),
            "synthetic" => Some(Provenance::Synthetic),
            "normalized" => Some(Provenance::Normalized),
            _ => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One task in a workflow.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    /// Unique identifier; sort key for every deterministic iteration.
    pub id: String,
    /// Task type (executable name); hashing groups vertices by this.
    pub vtype: String,
    /// Measured or assigned runtime in seconds, nonnegative.
    pub runtime: Option<f64>,
    pub input_bytes: Option<u64>,
    pub output_bytes: Option<u64>,
    /// Structural scaffolding inserted by normalization; carries a reserved
    /// vtype and zero runtime, excluded from frequencies and metrics.
    pub is_dummy: bool,
}

impl Vertex {
    /// A plain task vertex with no attributes yet.
    pub fn task(id: impl Into<String>, vtype: impl Into<String>) -> Vertex {
        Vertex {
            id: id.into(),
            vtype: vtype.into(),
            runtime: None,
            input_bytes: None,
            output_bytes: None,
            is_dummy: false,
        }
    }

    pub fn with_runtime(mut self, runtime: f64) -> Vertex {
        self.runtime = Some(runtime);
        self
    }

    fn dummy(id: String, vtype: &str) -> Vertex {
        Vertex {
            id,
            vtype: String::from(vtype),
            runtime: Some(0.0),
            input_bytes: None,
            output_bytes: None,
            is_dummy: true,
        }
    }
}

/// A structural defect found by validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateVertexId(String),
    UnknownEdgeEndpoint { from: String, to: String, missing: String },
    SelfLoop(String),
    InvalidRuntime { id: String, runtime: f64 },
    DummyTypeMismatch { id: String, vtype: String },
    DummyNonzeroRuntime { id: String, runtime: f64 },
    ReservedTypeOnTask { id: String, vtype: String },
    /// One concrete cycle, in edge order; the last vertex loops back to the first.
    Cycle(Vec<String>),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVertexId(id) => write!(f, "duplicate vertex id {id:?}"),
            Violation::UnknownEdgeEndpoint { from, to, missing } => {
                write!(f, "edge {from:?} -> {to:?} references unknown vertex {missing:?}")
            }
            Violation::SelfLoop(id) => write!(f, "self-loop on vertex {id:?}"),
            Violation::InvalidRuntime { id, runtime } => {
                write!(f, "vertex {id:?} has invalid runtime {runtime}")
            }
            Violation::DummyTypeMismatch { id, vtype } => {
                write!(f, "dummy vertex {id:?} has non-reserved vtype {vtype:?}")
            }
            Violation::DummyNonzeroRuntime { id, runtime } => {
                write!(f, "dummy vertex {id:?} has nonzero runtime {runtime}")
            }
            Violation::ReservedTypeOnTask { id, vtype } => {
                write!(f, "non-dummy vertex {id:?} uses reserved vtype {vtype:?}")
            }
            Violation::Cycle(path) => {
                write!(f, "cycle: ")?;
                for id in path {
                    write!(f, "{id} -> ")?;
                }
                match path.first() {
                    Some(first) => write!(f, "{first}"),
                    None => Ok(()),
                }
            }
        }
    }
}

/// Every violation found in one pass over the graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut sep = "";
        for v in &self.violations {
            write!(f, "{sep}{v}")?;
            sep = "; ";
        }
        Ok(())
    }
}

/// Validate raw parts before they are folded into a [`Workflow`].
///
/// Duplicate edges are treated as one edge (the edge list has set semantics);
/// everything else that breaks the DAG contract is reported.
pub fn validate_parts(vertices: &[Vertex], edges: &[(String, String)]) -> ValidationReport {
    let mut violations = Vec::new();

    let mut ids: Vec<&str> = vertices.iter().map(|v| v.id.as_str()).collect();
    ids.sort_unstable();
    for pair in ids.windows(2) {
        if pair[0] == pair[1] {
            // Report each duplicated id once.
            if !violations
                .iter()
                .any(|v| matches!(v, Violation::DuplicateVertexId(d) if d == pair[0]))
            {
                violations.push(Violation::DuplicateVertexId(String::from(pair[0])));
            }
        }
    }
    ids.dedup();

    for v in vertices {
        if let Some(r) = v.runtime {
            if !r.is_finite() || r < 0.0 {
                violations.push(Violation::InvalidRuntime { id: v.id.clone(), runtime: r });
            } else if v.is_dummy && r != 0.0 {
                violations.push(Violation::DummyNonzeroRuntime { id: v.id.clone(), runtime: r });
            }
        }
        let reserved = v.vtype == DUMMY_ENTRY_TYPE || v.vtype == DUMMY_EXIT_TYPE;
        if v.is_dummy && !reserved {
            violations.push(Violation::DummyTypeMismatch { id: v.id.clone(), vtype: v.vtype.clone() });
        }
        if !v.is_dummy && reserved {
            violations.push(Violation::ReservedTypeOnTask { id: v.id.clone(), vtype: v.vtype.clone() });
        }
    }

    let mut usable: BTreeSet<(&str, &str)> = BTreeSet::new();
    for (from, to) in edges {
        let mut ok = true;
        for end in [from, to] {
            if ids.binary_search(&end.as_str()).is_err() {
                violations.push(Violation::UnknownEdgeEndpoint {
                    from: from.clone(),
                    to: to.clone(),
                    missing: end.clone(),
                });
                ok = false;
            }
        }
        if from == to {
            violations.push(Violation::SelfLoop(from.clone()));
            ok = false;
        }
        if ok {
            usable.insert((from.as_str(), to.as_str()));
        }
    }

    if let Some(cycle) = find_cycle(&ids, &usable) {
        violations.push(Violation::Cycle(cycle));
    }

    ValidationReport { violations }
}

/// Depth-first search over well-formed edges; returns one cycle if any exists.
fn find_cycle(ids: &[&str], edges: &BTreeSet<(&str, &str)>) -> Option<Vec<String>> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;

    let index_of = |id: &str| ids.binary_search(&id).expect("endpoint checked");
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (from, to) in edges {
        succ[index_of(from)].push(index_of(to));
    }

    let mut color = vec![WHITE; ids.len()];
    for start in 0..ids.len() {
        if color[start] != WHITE {
            continue;
        }
        // Stack of (vertex, next-child-offset); the gray chain on the stack is
        // the current path, so a gray target closes a cycle.
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        color[start] = GRAY;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < succ[v].len() {
                let child = succ[v][*next];
                *next += 1;
                match color[child] {
                    WHITE => {
                        color[child] = GRAY;
                        stack.push((child, 0));
                    }
                    GRAY => {
                        let from = stack.iter().position(|&(u, _)| u == child).expect("gray on stack");
                        return Some(
                            stack[from..].iter().map(|&(u, _)| String::from(ids[u])).collect(),
                        );
                    }
                    _ => {}
                }
            } else {
                color[v] = BLACK;
                stack.pop();
            }
        }
    }
    None
}

/// A validated workflow DAG.
///
/// Vertices are held sorted by id and edges sorted by (from, to); both are
/// duplicate-free. All read accessors expose that canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Workflow {
    pub name: String,
    pub provenance: Provenance,
    vertices: Vec<Vertex>,
    edges: Vec<(String, String)>,
}

impl Workflow {
    /// Canonicalize and validate; any violation rejects the whole graph.
    pub fn new(
        name: impl Into<String>,
        provenance: Provenance,
        mut vertices: Vec<Vertex>,
        mut edges: Vec<(String, String)>,
    ) -> Result<Workflow, ValidationReport> {
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort();
        edges.dedup();
        let report = validate_parts(&vertices, &edges);
        if !report.is_empty() {
            return Err(report);
        }
        Ok(Workflow { name: name.into(), provenance, vertices, edges })
    }

    /// Re-run the structural checks; empty for every constructed workflow.
    pub fn validate(&self) -> ValidationReport {
        validate_parts(&self.vertices, &self.edges)
    }

    /// Vertices in ascending id order.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Edges in ascending (from, to) order.
    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    /// Number of vertices, dummies included.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, id: &str) -> Option<&Vertex> {
        self.vertices
            .binary_search_by(|v| v.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.vertices[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vertex(id).is_some()
    }

    /// Mutable access for attribute assignment; ids must stay untouched.
    pub(crate) fn vertices_mut(&mut self) -> &mut [Vertex] {
        &mut self.vertices
    }

    /// Children of `id` in ascending order.
    pub fn children_of<'a>(&'a self, id: &str) -> impl Iterator<Item = &'a str> {
        let lo = self.edges.partition_point(|(f, _)| f.as_str() < id);
        let hi = self.edges.partition_point(|(f, _)| f.as_str() <= id);
        self.edges[lo..hi].iter().map(|(_, t)| t.as_str())
    }

    /// Parents of `id` in ascending order (full edge scan).
    pub fn parents_of<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges.iter().filter(move |(_, t)| t == id).map(|(f, _)| f.as_str())
    }

    /// Ids with in-degree 0, ascending.
    pub fn entry_ids(&self) -> Vec<&str> {
        let targets: BTreeSet<&str> = self.edges.iter().map(|(_, t)| t.as_str()).collect();
        self.vertices
            .iter()
            .map(|v| v.id.as_str())
            .filter(|id| !targets.contains(id))
            .collect()
    }

    /// Ids with out-degree 0, ascending.
    pub fn exit_ids(&self) -> Vec<&str> {
        let sources: BTreeSet<&str> = self.edges.iter().map(|(f, _)| f.as_str()).collect();
        self.vertices
            .iter()
            .map(|v| v.id.as_str())
            .filter(|id| !sources.contains(id))
            .collect()
    }
}

/// Give the workflow a single entry and a single exit.
///
/// When more than one vertex has in-degree 0, a dummy entry vertex is wired
/// above all of them; symmetrically for exits. A workflow that already has a
/// single entry and exit (or is empty) is returned unchanged, which makes the
/// operation idempotent.
pub fn normalize_entries_exits(w: &Workflow) -> Workflow {
    if w.is_empty() {
        return w.clone();
    }
    let entries: Vec<String> = w.entry_ids().iter().map(|s| String::from(*s)).collect();
    let exits: Vec<String> = w.exit_ids().iter().map(|s| String::from(*s)).collect();
    if entries.len() <= 1 && exits.len() <= 1 {
        return w.clone();
    }

    let mut vertices = w.vertices.clone();
    let mut edges = w.edges.clone();
    if entries.len() > 1 {
        let id = fresh_id(w, DUMMY_ENTRY_TYPE);
        for e in &entries {
            edges.push((id.clone(), e.clone()));
        }
        vertices.push(Vertex::dummy(id, DUMMY_ENTRY_TYPE));
    }
    if exits.len() > 1 {
        let id = fresh_id(w, DUMMY_EXIT_TYPE);
        for x in &exits {
            edges.push((x.clone(), id.clone()));
        }
        vertices.push(Vertex::dummy(id, DUMMY_EXIT_TYPE));
    }

    Workflow::new(w.name.clone(), Provenance::Normalized, vertices, edges)
        .expect("normalization preserves validity")
}

/// First id of the form `base`, `base1`, `base2`, ... not present in `w`.
fn fresh_id(w: &Workflow, base: &str) -> String {
    if !w.contains(base) {
        return String::from(base);
    }
    let mut n = 1u64;
    loop {
        let candidate = alloc::format!("{base}{n}");
        if !w.contains(&candidate) {
            return candidate;
        }
        n += 1;
    }
}

/// Homogeneous execution platform: `num_nodes` nodes of `cores_per_node`
/// identical cores each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Platform {
    num_nodes: usize,
    cores_per_node: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlatformError {
    pub num_nodes: usize,
    pub cores_per_node: usize,
}

impl fmt::Display for PlatformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "platform must have at least one node and one core per node, got {}x{}",
            self.num_nodes, self.cores_per_node
        )
    }
}

impl core::error::Error for PlatformError {}

impl Platform {
    pub fn new(num_nodes: usize, cores_per_node: usize) -> Result<Platform, PlatformError> {
        if num_nodes == 0 || cores_per_node == 0 {
            return Err(PlatformError { num_nodes, cores_per_node });
        }
        Ok(Platform { num_nodes, cores_per_node })
    }

    /// 4 nodes of 48 cores.
    pub fn default_cluster() -> Platform {
        Platform { num_nodes: 4, cores_per_node: 48 }
    }

    pub fn num_nodes(self) -> usize {
        self.num_nodes
    }

    pub fn cores_per_node(self) -> usize {
        self.cores_per_node
    }

    pub fn total_cores(self) -> usize {
        self.num_nodes * self.cores_per_node
    }
}
