//! Recursive structural fingerprints for workflow vertices.
//!
//! A vertex's top-down hash digests the set of its children's top-down
//! hashes plus its own type; the bottom-up hash mirrors that over parents.
//! Their combination, the type hash, pins the vertex's position in the whole
//! DAG: two vertices share a type hash exactly when everything above and
//! below them looks the same, type-wise.
//!
//! Child hashes are *deduplicated* before sorting, so structural twins
//! collapse: a vertex with five identical children hashes the same as one
//! with a single such child. That collapse is what keeps hash sets stable
//! while patterns are replicated.
//!
//! Encodings are length-framed before digesting (`["ab","c"]` and
//! `["a","bc"]` must not collide) and every construction is domain-tagged.
//! Digest equality stands in for canonical-string equality; the canonical
//! strings themselves are available from [`debug_strings`] for small-graph
//! inspection.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest as _, Sha256};

use crate::graph::GraphIndex;
use crate::model::Workflow;

/// Version identifier for the digest construction; bump on any change to
/// tags, framing, or the underlying hash function.
pub const DIGEST_VERSION: &str = "v1";

const TAG_TD: u8 = 0x01;
const TAG_BU: u8 = 0x02;
const TAG_TH: u8 = 0x03;
const TAG_SET: u8 = 0x04;

/// 256-bit digest; ordering is lexicographic over the raw bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub fn to_hex(self) -> String {
        let mut s = String::with_capacity(64);
        for b in self.0 {
            use core::fmt::Write;
            let _ = write!(s, "{b:02x}");
        }
        s
    }

    pub fn from_hex(s: &str) -> Result<Digest, HexError> {
        let bytes = s.as_bytes();
        if bytes.len() != 64 {
            return Err(HexError { input_len: bytes.len() });
        }
        let nibble = |c: u8| -> Result<u8, HexError> {
            match c {
                b'0'..=b'9' => Ok(c - b'0'),
                b'a'..=b'f' => Ok(c - b'a' + 10),
                b'A'..=b'F' => Ok(c - b'A' + 10),
                _ => Err(HexError { input_len: bytes.len() }),
            }
        };
        let mut out = [0u8; 32];
        for (i, pair) in bytes.chunks_exact(2).enumerate() {
            out[i] = nibble(pair[0])? << 4 | nibble(pair[1])?;
        }
        Ok(Digest(out))
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HexError {
    pub input_len: usize,
}

impl fmt::Display for HexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected 64 hex characters, got {} bytes", self.input_len)
    }
}

impl core::error::Error for HexError {}

/// The three digests attached to one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexHashes {
    pub td: Digest,
    pub bu: Digest,
    pub th: Digest,
}

/// Per-vertex hash annotation for a whole workflow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeHashes {
    map: BTreeMap<String, VertexHashes>,
}

impl TypeHashes {
    pub fn get(&self, id: &str) -> Option<&VertexHashes> {
        self.map.get(id)
    }

    pub fn th(&self, id: &str) -> Option<Digest> {
        self.map.get(id).map(|h| h.th)
    }

    /// (id, hashes) in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &VertexHashes)> {
        self.map.iter().map(|(id, h)| (id.as_str(), h))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn digest_over_set(tag: u8, mut members: Vec<Digest>, suffix: Option<&str>) -> Digest {
    members.sort_unstable();
    members.dedup();
    let mut h = Sha256::new();
    h.update([tag]);
    h.update((members.len() as u32).to_le_bytes());
    for d in &members {
        h.update(d.0);
    }
    if let Some(s) = suffix {
        h.update((s.len() as u32).to_le_bytes());
        h.update(s.as_bytes());
    }
    Digest(h.finalize().into())
}

/// Compute top-down, bottom-up, and combined hashes for every vertex.
pub fn compute_type_hashes(w: &Workflow) -> TypeHashes {
    let g = GraphIndex::new(w);
    let n = g.len();
    let order = g.topo_order();

    let mut td: Vec<Option<Digest>> = vec![None; n];
    for &v in order.iter().rev() {
        let children: Vec<Digest> = g
            .children(v)
            .iter()
            .map(|&c| td[c as usize].expect("children hashed before parents"))
            .collect();
        let vtype = &w.vertices()[v as usize].vtype;
        td[v as usize] = Some(digest_over_set(TAG_TD, children, Some(vtype)));
    }

    let mut bu: Vec<Option<Digest>> = vec![None; n];
    for &v in order.iter() {
        let parents: Vec<Digest> = g
            .parents(v)
            .iter()
            .map(|&p| bu[p as usize].expect("parents hashed before children"))
            .collect();
        let vtype = &w.vertices()[v as usize].vtype;
        bu[v as usize] = Some(digest_over_set(TAG_BU, parents, Some(vtype)));
    }

    let mut map = BTreeMap::new();
    for v in 0..n as u32 {
        let td = td[v as usize].expect("all vertices hashed");
        let bu = bu[v as usize].expect("all vertices hashed");
        let mut h = Sha256::new();
        h.update([TAG_TH]);
        h.update(td.0);
        h.update(bu.0);
        let th = Digest(h.finalize().into());
        map.insert(String::from(g.id(v)), VertexHashes { td, bu, th });
    }
    TypeHashes { map }
}

/// Digest of a set of type hashes; the pattern identity of a sub-DAG.
pub fn hash_set_digest(hashes: impl IntoIterator<Item = Digest>) -> Digest {
    digest_over_set(TAG_SET, hashes.into_iter().collect(), None)
}

/// The hash-level summary of a workflow: its unique non-dummy type hashes
/// and their relative frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowTypeHash {
    /// Unique type hashes over non-dummy vertices.
    pub hashes: BTreeSet<Digest>,
    /// Type hash -> occurrence count / number of non-dummy vertices.
    pub frequencies: BTreeMap<Digest, f64>,
}

/// Summarize a workflow's hash distribution. Dummy vertices shape their
/// neighbors' hashes but are excluded from the set and the frequencies.
pub fn workflow_type_hash(w: &Workflow, hashes: &TypeHashes) -> WorkflowTypeHash {
    let mut counts: BTreeMap<Digest, u64> = BTreeMap::new();
    let mut total = 0u64;
    for v in w.vertices() {
        if v.is_dummy {
            continue;
        }
        let th = hashes.th(&v.id).expect("hashes computed for this workflow");
        *counts.entry(th).or_insert(0) += 1;
        total += 1;
    }
    let frequencies: BTreeMap<Digest, f64> =
        counts.iter().map(|(&h, &c)| (h, c as f64 / total as f64)).collect();
    WorkflowTypeHash { hashes: counts.into_keys().collect(), frequencies }
}

/// The three canonical strings for one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexHashStrings {
    pub td: String,
    pub bu: String,
    pub th: String,
}

/// Canonical-string forms of every vertex hash, for debugging small graphs.
///
/// Grammar: `td = "[" child-td ("+" child-td)* "]" type` with children
/// sorted and deduplicated as strings, `bu` symmetric over parents, and
/// `th = "{" td "|" bu "}"`. Structural characters inside type names are
/// backslash-escaped, so distinct structures read back distinctly.
pub fn debug_strings(w: &Workflow) -> BTreeMap<String, VertexHashStrings> {
    let g = GraphIndex::new(w);
    let n = g.len();
    let order = g.topo_order();

    let build = |members: Vec<String>, vtype: &str| -> String {
        let mut members = members;
        members.sort_unstable();
        members.dedup();
        let mut s = String::from("[");
        for (i, m) in members.iter().enumerate() {
            if i > 0 {
                s.push('+');
            }
            s.push_str(m);
        }
        s.push(']');
        s.push_str(&escape(vtype));
        s
    };

    let mut td: Vec<Option<String>> = vec![None; n];
    for &v in order.iter().rev() {
        let children: Vec<String> = g
            .children(v)
            .iter()
            .map(|&c| td[c as usize].clone().expect("children first"))
            .collect();
        td[v as usize] = Some(build(children, &w.vertices()[v as usize].vtype));
    }
    let mut bu: Vec<Option<String>> = vec![None; n];
    for &v in order.iter() {
        let parents: Vec<String> = g
            .parents(v)
            .iter()
            .map(|&p| bu[p as usize].clone().expect("parents first"))
            .collect();
        bu[v as usize] = Some(build(parents, &w.vertices()[v as usize].vtype));
    }

    let mut out = BTreeMap::new();
    for v in 0..n as u32 {
        let td = td[v as usize].take().expect("all vertices visited");
        let bu = bu[v as usize].take().expect("all vertices visited");
        let th = alloc::format!("{{{td}|{bu}}}");
        out.insert(String::from(g.id(v)), VertexHashStrings { td, bu, th });
    }
    out
}

fn escape(vtype: &str) -> String {
    let mut s = String::with_capacity(vtype.len());
    for c in vtype.chars() {
        if matches!(c, '[' | ']' | '+' | '{' | '}' | '|' | '\\') {
            s.push('\\');
        }
        s.push(c);
    }
    s
}
