//! Structural analysis and synthesis of scientific-workflow DAGs.
//!
//! The crate learns which sub-structures repeat inside a family of workflow
//! traces and uses that knowledge to grow realistic synthetic instances of
//! arbitrary size. It is organised as a pipeline of pure modules:
//!
//! - [`model`]: the workflow DAG itself. Vertices, edges, validation,
//!   entry/exit normalization, and the execution platform description.
//! - [`typehash`]: recursive type hashes, a 256-bit fingerprint per vertex
//!   that captures the shape of everything above and below it.
//! - [`patterns`]: detection of pattern occurrences, disjoint sub-DAGs that
//!   repeat within one workflow, found by pairing vertices of equal hash.
//! - [`recipe`]: training. Pattern occurrences plus a cross-instance error
//!   matrix distilled from a family of traces.
//! - [`generator`]: synthesis. Replicate patterns onto a base instance until
//!   a requested size is reached, then draw task attributes from the recipe.
//! - [`metrics`]: realism measures between two workflows (type-hash
//!   frequency distance, approximate edit distance).
//! - [`simulator`]: a greedy list scheduler over a homogeneous platform and
//!   the schedule-level comparison metrics built on it.
//!
//! Everything here is `no_std` + `alloc`; file formats and the command-line
//! interface live in the companion crate.
//!
//! Determinism is part of every contract: all iteration is in ascending
//! vertex-id order, and every random decision flows from a caller-supplied
//! seed through keyed ChaCha streams.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

#[macro_use]
extern crate alloc;

pub mod generator;
pub mod metrics;
pub mod model;
pub mod patterns;
pub mod recipe;
pub mod simulator;
pub mod typehash;

mod graph;
mod seeding;
