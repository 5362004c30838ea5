//! Recipe construction: the training half of the pipeline.
//!
//! A recipe bundles, for every training instance, its normalized workflow,
//! hash-frequency summary, detected pattern occurrences, and per-vtype
//! attribute samples, plus an error matrix that scores how well each smaller
//! instance regrows into each larger one. Building is deterministic for a
//! given seed; every error cell draws from its own keyed RNG stream so cells
//! can be evaluated in any order (or in parallel) with identical results.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha12Rng;

use crate::generator::{replicate_pos, GrowthError};
use crate::metrics::frequency_rmse;
use crate::model::{normalize_entries_exits, Workflow};
use crate::patterns::{detect_pattern_occurrences, PatternError, PatternOccurrence};
use crate::seeding::{reservoir_push, stream};
use crate::typehash::{compute_type_hashes, workflow_type_hash, WorkflowTypeHash};

/// Serialized-document schema version.
pub const RECIPE_SCHEMA_VERSION: u32 = 1;

/// Upper bound on stored attribute samples per (instance, vtype, field).
pub const SAMPLE_CAP: usize = 10_000;

/// Empirical attribute values observed for one vtype. An empty list means
/// the field was never present in the source trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AttributeSamples {
    pub runtime: Vec<f64>,
    pub input_bytes: Vec<u64>,
    pub output_bytes: Vec<u64>,
}

impl AttributeSamples {
    pub fn is_empty(&self) -> bool {
        self.runtime.is_empty() && self.input_bytes.is_empty() && self.output_bytes.is_empty()
    }

    fn extend_from(&mut self, other: &AttributeSamples) {
        self.runtime.extend_from_slice(&other.runtime);
        self.input_bytes.extend_from_slice(&other.input_bytes);
        self.output_bytes.extend_from_slice(&other.output_bytes);
    }
}

/// One training instance, normalized and summarized.
#[derive(Debug, Clone, PartialEq)]
pub struct RecipeInstance {
    pub name: String,
    /// Vertex count of the normalized workflow, dummies included.
    pub size: usize,
    pub summary: WorkflowTypeHash,
    pub samples: BTreeMap<String, AttributeSamples>,
    pub workflow: Workflow,
}

/// The complete training artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    /// Instances in ascending name order.
    pub instances: Vec<RecipeInstance>,
    /// Detected occurrences per instance name.
    pub pos: BTreeMap<String, Vec<PatternOccurrence>>,
    /// errors[base][target]: how poorly `base` regrows into `target`'s
    /// shape, as a hash-frequency RMSE. Defined exactly when
    /// |base| < |target|.
    pub errors: BTreeMap<String, BTreeMap<String, f64>>,
}

impl Recipe {
    pub fn instance(&self, name: &str) -> Option<&RecipeInstance> {
        self.instances.iter().find(|i| i.name == name)
    }

    /// Samples for `vtype` pooled across all instances, in instance order.
    pub fn pooled_samples(&self, vtype: &str) -> AttributeSamples {
        let mut pooled = AttributeSamples::default();
        for instance in &self.instances {
            if let Some(s) = instance.samples.get(vtype) {
                pooled.extend_from(s);
            }
        }
        pooled
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecipeError {
    NoInstances,
    DuplicateName(String),
    /// The named instance has no non-dummy vertices, so its frequency
    /// summary is undefined.
    EmptyInstance(String),
    Pattern(PatternError),
}

impl fmt::Display for RecipeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecipeError::NoInstances => f.write_str("no training workflows given"),
            RecipeError::DuplicateName(name) => {
                write!(f, "duplicate workflow name {name:?}")
            }
            RecipeError::EmptyInstance(name) => {
                write!(f, "workflow {name:?} has no non-dummy vertices")
            }
            RecipeError::Pattern(e) => write!(f, "pattern detection failed: {e}"),
        }
    }
}

impl core::error::Error for RecipeError {}

impl From<PatternError> for RecipeError {
    fn from(e: PatternError) -> RecipeError {
        RecipeError::Pattern(e)
    }
}

/// Everything except the error matrix: instances prepared, occurrences
/// detected, samples collected. Splitting the build here lets callers farm
/// the matrix cells out to worker threads.
#[derive(Debug, Clone)]
pub struct RecipeDraft {
    instances: Vec<RecipeInstance>,
    pos: BTreeMap<String, Vec<PatternOccurrence>>,
}

impl RecipeDraft {
    pub fn prepare(workflows: Vec<Workflow>, seed: u64) -> Result<RecipeDraft, RecipeError> {
        if workflows.is_empty() {
            return Err(RecipeError::NoInstances);
        }
        let mut seen = BTreeSet::new();
        for w in &workflows {
            if !seen.insert(w.name.clone()) {
                return Err(RecipeError::DuplicateName(w.name.clone()));
            }
        }
        let mut instances = Vec::with_capacity(workflows.len());
        let mut pos = BTreeMap::new();
        for w in &workflows {
            let normalized = normalize_entries_exits(w);
            let hashes = compute_type_hashes(&normalized);
            let summary = workflow_type_hash(&normalized, &hashes);
            if summary.hashes.is_empty() {
                return Err(RecipeError::EmptyInstance(normalized.name.clone()));
            }
            let occurrences = detect_pattern_occurrences(&normalized, &hashes)?;
            let samples = collect_samples(&normalized, seed);
            pos.insert(normalized.name.clone(), occurrences);
            instances.push(RecipeInstance {
                name: normalized.name.clone(),
                size: normalized.len(),
                summary,
                samples,
                workflow: normalized,
            });
        }
        instances.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(RecipeDraft { instances, pos })
    }

    pub fn instances(&self) -> &[RecipeInstance] {
        &self.instances
    }

    /// Every (base index, target index) cell of the error matrix, i.e. the
    /// ordered pairs with strictly smaller base.
    pub fn error_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.instances.len();
        let mut pairs = Vec::new();
        for b in 0..n {
            for t in 0..n {
                if b != t && self.instances[b].size < self.instances[t].size {
                    pairs.push((b, t));
                }
            }
        }
        pairs
    }

    /// Score one matrix cell: regrow `base` to the target's size and
    /// measure the hash-frequency RMSE against the target, averaged over
    /// `samples` independent draws. A base with nothing to replicate is
    /// scored as-is against the target.
    pub fn evaluate_pair(&self, base: usize, target: usize, seed: u64, samples: u32) -> f64 {
        let base = &self.instances[base];
        let target = &self.instances[target];
        let base_pos = &self.pos[&base.name];
        let target_pos = &self.pos[&target.name];
        let samples = samples.max(1);
        let mut sum = 0.0;
        for j in 0..samples {
            let mut rng = error_cell_rng(seed, &base.name, &target.name, j);
            let summary = match replicate_pos(
                target.size,
                &base.workflow,
                base_pos,
                target_pos,
                &mut rng,
            ) {
                Ok(grown) => workflow_type_hash(&grown, &compute_type_hashes(&grown)),
                Err(GrowthError::NotScalable) => base.summary.clone(),
            };
            // Both sides hold at least one non-dummy vertex: the target was
            // checked in prepare and the grown graph contains the base.
            sum += frequency_rmse(&target.summary, &summary).expect("non-empty summaries");
        }
        sum / samples as f64
    }

    /// Assemble the recipe from evaluated cells.
    pub fn finish(self, cells: impl IntoIterator<Item = ((usize, usize), f64)>) -> Recipe {
        let mut errors: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for ((b, t), value) in cells {
            errors
                .entry(self.instances[b].name.clone())
                .or_default()
                .insert(self.instances[t].name.clone(), value);
        }
        Recipe { instances: self.instances, pos: self.pos, errors }
    }
}

/// The RNG stream for one error-matrix sample, keyed so evaluation order
/// cannot matter.
fn error_cell_rng(seed: u64, base: &str, target: &str, sample: u32) -> ChaCha12Rng {
    stream(seed, "errors", &[base, target], sample as u64)
}

/// Build a recipe in one call, evaluating the matrix sequentially.
pub fn build_recipe(
    workflows: Vec<Workflow>,
    seed: u64,
    samples: u32,
) -> Result<Recipe, RecipeError> {
    let draft = RecipeDraft::prepare(workflows, seed)?;
    let cells: Vec<((usize, usize), f64)> = draft
        .error_pairs()
        .into_iter()
        .map(|(b, t)| ((b, t), draft.evaluate_pair(b, t, seed, samples)))
        .collect();
    Ok(draft.finish(cells))
}

/// Reservoir-sample attribute values per vtype over the non-dummy vertices,
/// in ascending id order, one keyed stream per instance.
fn collect_samples(w: &Workflow, seed: u64) -> BTreeMap<String, AttributeSamples> {
    #[derive(Default)]
    struct Seen {
        runtime: u64,
        input: u64,
        output: u64,
    }
    let mut rng = stream(seed, "samples", &[&w.name], 0);
    let mut samples: BTreeMap<String, AttributeSamples> = BTreeMap::new();
    let mut counters: BTreeMap<String, Seen> = BTreeMap::new();
    for v in w.vertices() {
        if v.is_dummy {
            continue;
        }
        let entry = samples.entry(v.vtype.clone()).or_default();
        let seen = counters.entry(v.vtype.clone()).or_default();
        if let Some(r) = v.runtime {
            seen.runtime += 1;
            reservoir_push(&mut entry.runtime, SAMPLE_CAP, seen.runtime, r, &mut rng);
        }
        if let Some(b) = v.input_bytes {
            seen.input += 1;
            reservoir_push(&mut entry.input_bytes, SAMPLE_CAP, seen.input, b, &mut rng);
        }
        if let Some(b) = v.output_bytes {
            seen.output += 1;
            reservoir_push(&mut entry.output_bytes, SAMPLE_CAP, seen.output, b, &mut rng);
        }
    }
    samples
}
