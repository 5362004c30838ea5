//! JSON recipe documents.
//!
//! A recipe file is `{"version": 1, "instances": [...], "pos": {...},
//! "errors": {...}}`. Digests travel as lowercase hex; each instance embeds
//! its normalized workflow in the regular trace shape. Saving then loading
//! reproduces the recipe field for field.

use std::collections::{BTreeMap, BTreeSet};
use std::error::Error;
use std::fmt;

use serde::Serialize;
use serde_json::Value;
use wfforge_core::patterns::PatternOccurrence;
use wfforge_core::recipe::{AttributeSamples, Recipe, RecipeInstance, RECIPE_SCHEMA_VERSION};
use wfforge_core::typehash::{Digest, WorkflowTypeHash};

use crate::trace::{self, TraceError};

#[derive(Debug)]
pub enum RecipeFileError {
    Json(serde_json::Error),
    Shape { path: String, expected: &'static str },
    Version { found: u64 },
    Hex { path: String },
    Trace(TraceError),
}

impl fmt::Display for RecipeFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecipeFileError::Json(e) => write!(f, "{e}"),
            RecipeFileError::Shape { path, expected } => write!(f, "{path}: expected {expected}"),
            RecipeFileError::Version { found } => {
                write!(f, "unsupported recipe version {found} (expected {RECIPE_SCHEMA_VERSION})")
            }
            RecipeFileError::Hex { path } => write!(f, "{path}: expected 64-char hex digest"),
            RecipeFileError::Trace(e) => write!(f, "{e}"),
        }
    }
}

impl Error for RecipeFileError {}

impl From<serde_json::Error> for RecipeFileError {
    fn from(e: serde_json::Error) -> RecipeFileError {
        RecipeFileError::Json(e)
    }
}

impl From<TraceError> for RecipeFileError {
    fn from(e: TraceError) -> RecipeFileError {
        RecipeFileError::Trace(e)
    }
}

fn shape(path: impl Into<String>, expected: &'static str) -> RecipeFileError {
    RecipeFileError::Shape { path: path.into(), expected }
}

#[derive(Serialize)]
struct RecipeDoc<'a> {
    version: u32,
    instances: Vec<InstanceDoc<'a>>,
    pos: BTreeMap<&'a str, Vec<PoDoc<'a>>>,
    errors: &'a BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Serialize)]
struct InstanceDoc<'a> {
    name: &'a str,
    size: usize,
    type_hash: TypeHashDoc,
    samples: BTreeMap<&'a str, SamplesDoc<'a>>,
    workflow: trace::TraceDoc<'a>,
}

#[derive(Serialize)]
struct TypeHashDoc {
    hashes: Vec<String>,
    frequencies: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct SamplesDoc<'a> {
    runtime: &'a [f64],
    input_bytes: &'a [u64],
    output_bytes: &'a [u64],
}

#[derive(Serialize)]
struct PoDoc<'a> {
    pattern_hash: String,
    vertices: Vec<&'a str>,
    entries: Vec<&'a str>,
    exits: Vec<&'a str>,
}

pub fn save_recipe(recipe: &Recipe) -> String {
    let instances = recipe
        .instances
        .iter()
        .map(|i| InstanceDoc {
            name: &i.name,
            size: i.size,
            type_hash: TypeHashDoc {
                hashes: i.summary.hashes.iter().map(|d| d.to_hex()).collect(),
                frequencies: i
                    .summary
                    .frequencies
                    .iter()
                    .map(|(d, f)| (d.to_hex(), *f))
                    .collect(),
            },
            samples: i
                .samples
                .iter()
                .map(|(vtype, s)| {
                    (
                        vtype.as_str(),
                        SamplesDoc {
                            runtime: &s.runtime,
                            input_bytes: &s.input_bytes,
                            output_bytes: &s.output_bytes,
                        },
                    )
                })
                .collect(),
            workflow: trace::trace_doc(&i.workflow),
        })
        .collect();
    let pos = recipe
        .pos
        .iter()
        .map(|(name, occurrences)| {
            let docs = occurrences
                .iter()
                .map(|po| PoDoc {
                    pattern_hash: po.pattern_hash.to_hex(),
                    vertices: po.vertices.iter().map(String::as_str).collect(),
                    entries: po.entries.iter().map(String::as_str).collect(),
                    exits: po.exits.iter().map(String::as_str).collect(),
                })
                .collect();
            (name.as_str(), docs)
        })
        .collect();
    let doc = RecipeDoc {
        version: RECIPE_SCHEMA_VERSION,
        instances,
        pos,
        errors: &recipe.errors,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("recipe serializes");
    text.push('\n');
    text
}

fn parse_digest(value: &Value, path: &str) -> Result<Digest, RecipeFileError> {
    let s = value.as_str().ok_or_else(|| shape(path.to_string(), "string"))?;
    Digest::from_hex(s).map_err(|_| RecipeFileError::Hex { path: path.to_string() })
}

fn parse_f64_array(value: &Value, path: &str) -> Result<Vec<f64>, RecipeFileError> {
    let items = value.as_array().ok_or_else(|| shape(path.to_string(), "array"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| v.as_f64().ok_or_else(|| shape(format!("{path}[{i}]"), "number")))
        .collect()
}

fn parse_u64_array(value: &Value, path: &str) -> Result<Vec<u64>, RecipeFileError> {
    let items = value.as_array().ok_or_else(|| shape(path.to_string(), "array"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_u64().ok_or_else(|| shape(format!("{path}[{i}]"), "nonnegative integer"))
        })
        .collect()
}

fn parse_id_set(value: &Value, path: &str) -> Result<BTreeSet<String>, RecipeFileError> {
    let items = value.as_array().ok_or_else(|| shape(path.to_string(), "array"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_str()
                .map(String::from)
                .ok_or_else(|| shape(format!("{path}[{i}]"), "string"))
        })
        .collect()
}

pub fn load_recipe(text: &str) -> Result<Recipe, RecipeFileError> {
    let value: Value = serde_json::from_str(text)?;
    let root = value.as_object().ok_or_else(|| shape("$", "object"))?;

    let version = root
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| shape("version", "integer"))?;
    if version != u64::from(RECIPE_SCHEMA_VERSION) {
        return Err(RecipeFileError::Version { found: version });
    }

    let mut instances = Vec::new();
    let entries = root
        .get("instances")
        .and_then(Value::as_array)
        .ok_or_else(|| shape("instances", "array"))?;
    for (i, entry) in entries.iter().enumerate() {
        let at = |key: &str| format!("instances[{i}].{key}");
        let obj = entry
            .as_object()
            .ok_or_else(|| shape(format!("instances[{i}]"), "object"))?;

        let name = obj
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| shape(at("name"), "string"))?;
        let size = obj
            .get("size")
            .and_then(Value::as_u64)
            .ok_or_else(|| shape(at("size"), "integer"))? as usize;

        let type_hash = obj
            .get("type_hash")
            .and_then(Value::as_object)
            .ok_or_else(|| shape(at("type_hash"), "object"))?;
        let hashes = type_hash
            .get("hashes")
            .and_then(Value::as_array)
            .ok_or_else(|| shape(at("type_hash.hashes"), "array"))?
            .iter()
            .enumerate()
            .map(|(j, v)| parse_digest(v, &at(&format!("type_hash.hashes[{j}]"))))
            .collect::<Result<BTreeSet<Digest>, _>>()?;
        let mut frequencies = BTreeMap::new();
        let freq_obj = type_hash
            .get("frequencies")
            .and_then(Value::as_object)
            .ok_or_else(|| shape(at("type_hash.frequencies"), "object"))?;
        for (hex, v) in freq_obj {
            let path = at(&format!("type_hash.frequencies.{hex}"));
            let digest = Digest::from_hex(hex)
                .map_err(|_| RecipeFileError::Hex { path: path.clone() })?;
            let f = v.as_f64().ok_or_else(|| shape(path, "number"))?;
            frequencies.insert(digest, f);
        }

        let mut samples = BTreeMap::new();
        let samples_obj = obj
            .get("samples")
            .and_then(Value::as_object)
            .ok_or_else(|| shape(at("samples"), "object"))?;
        for (vtype, v) in samples_obj {
            let base = at(&format!("samples.{vtype}"));
            let fields = v.as_object().ok_or_else(|| shape(base.clone(), "object"))?;
            let field = |key: &str| -> Result<&Value, RecipeFileError> {
                fields.get(key).ok_or_else(|| shape(format!("{base}.{key}"), "array"))
            };
            samples.insert(
                vtype.clone(),
                AttributeSamples {
                    runtime: parse_f64_array(field("runtime")?, &format!("{base}.runtime"))?,
                    input_bytes: parse_u64_array(
                        field("input_bytes")?,
                        &format!("{base}.input_bytes"),
                    )?,
                    output_bytes: parse_u64_array(
                        field("output_bytes")?,
                        &format!("{base}.output_bytes"),
                    )?,
                },
            );
        }

        let workflow_value = obj
            .get("workflow")
            .ok_or_else(|| shape(at("workflow"), "object"))?;
        let workflow = trace::parse_trace_value(workflow_value, &at("workflow"))?;

        instances.push(RecipeInstance {
            name: name.to_string(),
            size,
            summary: WorkflowTypeHash { hashes, frequencies },
            samples,
            workflow,
        });
    }

    let mut pos = BTreeMap::new();
    let pos_obj = root
        .get("pos")
        .and_then(Value::as_object)
        .ok_or_else(|| shape("pos", "object"))?;
    for (name, v) in pos_obj {
        let list = v
            .as_array()
            .ok_or_else(|| shape(format!("pos.{name}"), "array"))?;
        let mut occurrences = Vec::new();
        for (i, entry) in list.iter().enumerate() {
            let base = format!("pos.{name}[{i}]");
            let obj = entry.as_object().ok_or_else(|| shape(base.clone(), "object"))?;
            let field = |key: &str| -> Result<&Value, RecipeFileError> {
                obj.get(key).ok_or_else(|| shape(format!("{base}.{key}"), "value"))
            };
            occurrences.push(PatternOccurrence {
                workflow: name.clone(),
                pattern_hash: parse_digest(field("pattern_hash")?, &format!("{base}.pattern_hash"))?,
                vertices: parse_id_set(field("vertices")?, &format!("{base}.vertices"))?,
                entries: parse_id_set(field("entries")?, &format!("{base}.entries"))?,
                exits: parse_id_set(field("exits")?, &format!("{base}.exits"))?,
            });
        }
        pos.insert(name.clone(), occurrences);
    }

    let mut errors: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let errors_obj = root
        .get("errors")
        .and_then(Value::as_object)
        .ok_or_else(|| shape("errors", "object"))?;
    for (base, v) in errors_obj {
        let row = v
            .as_object()
            .ok_or_else(|| shape(format!("errors.{base}"), "object"))?;
        let mut cells = BTreeMap::new();
        for (target, cell) in row {
            let cell = cell
                .as_f64()
                .ok_or_else(|| shape(format!("errors.{base}.{target}"), "number"))?;
            cells.insert(target.clone(), cell);
        }
        errors.insert(base.clone(), cells);
    }

    Ok(Recipe { instances, pos, errors })
}
