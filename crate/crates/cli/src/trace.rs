//! JSON trace documents.
//!
//! A trace is `{"name": ..., "workflow": {"tasks": [...]}}` where each task
//! carries a unique `name`, a `type`, optional `runtime` / `bytesRead` /
//! `bytesWritten`, and the list of `parents` it depends on. Unknown fields
//! are ignored on read and never written back. Dummy entry and exit tasks
//! round-trip through a `"dummy": true` marker.

use std::error::Error;
use std::fmt;

use serde::Serialize;
use serde_json::Value;
use wfforge_core::model::{Provenance, ValidationReport, Vertex, Workflow};

#[derive(Debug)]
pub enum TraceError {
    /// The text is not JSON at all.
    Json(serde_json::Error),
    /// The JSON is well formed but the wrong shape at `path`.
    Shape { path: String, expected: &'static str },
    /// The graph parsed but fails workflow validation.
    Invalid(ValidationReport),
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::Json(e) => write!(f, "{e}"),
            TraceError::Shape { path, expected } => {
                let at = if path.is_empty() { "$" } else { path.as_str() };
                write!(f, "{at}: expected {expected}")
            }
            TraceError::Invalid(report) => write!(f, "{report}"),
        }
    }
}

impl Error for TraceError {}

impl From<serde_json::Error> for TraceError {
    fn from(e: serde_json::Error) -> TraceError {
        TraceError::Json(e)
    }
}

fn shape(path: impl Into<String>, expected: &'static str) -> TraceError {
    TraceError::Shape { path: path.into(), expected }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

pub fn parse_trace(text: &str) -> Result<Workflow, TraceError> {
    let value: Value = serde_json::from_str(text)?;
    parse_trace_value(&value, "")
}

/// Parses a trace already decoded to JSON; `prefix` seeds error paths so
/// embedded documents report their true location.
pub fn parse_trace_value(value: &Value, prefix: &str) -> Result<Workflow, TraceError> {
    let root = value.as_object().ok_or_else(|| shape(prefix, "object"))?;

    let name = root
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| shape(join(prefix, "name"), "string"))?;

    let provenance = match root.get("provenance") {
        None => Provenance::RealTrace,
        Some(v) => {
            let s = v
                .as_str()
                .ok_or_else(|| shape(join(prefix, "provenance"), "string"))?;
            Provenance::parse(s).ok_or_else(|| {
                shape(join(prefix, "provenance"), "one of real-trace, synthetic, normalized")
            })?
        }
    };

    let tasks = root
        .get("workflow")
        .and_then(Value::as_object)
        .ok_or_else(|| shape(join(prefix, "workflow"), "object"))?
        .get("tasks")
        .and_then(Value::as_array)
        .ok_or_else(|| shape(join(prefix, "workflow.tasks"), "array"))?;

    let mut vertices = Vec::with_capacity(tasks.len());
    let mut edges = Vec::new();
    for (i, task) in tasks.iter().enumerate() {
        let at = |key: &str| join(prefix, &format!("workflow.tasks[{i}].{key}"));
        let obj = task
            .as_object()
            .ok_or_else(|| shape(join(prefix, &format!("workflow.tasks[{i}]")), "object"))?;

        let id = obj
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| shape(at("name"), "string"))?;
        let vtype = obj
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| shape(at("type"), "string"))?;
        let runtime = match obj.get("runtime") {
            None => None,
            Some(v) => Some(v.as_f64().ok_or_else(|| shape(at("runtime"), "number"))?),
        };
        let input_bytes = match obj.get("bytesRead") {
            None => None,
            Some(v) => {
                Some(v.as_u64().ok_or_else(|| shape(at("bytesRead"), "nonnegative integer"))?)
            }
        };
        let output_bytes = match obj.get("bytesWritten") {
            None => None,
            Some(v) => {
                Some(v.as_u64().ok_or_else(|| shape(at("bytesWritten"), "nonnegative integer"))?)
            }
        };
        let is_dummy = match obj.get("dummy") {
            None => false,
            Some(v) => v.as_bool().ok_or_else(|| shape(at("dummy"), "boolean"))?,
        };
        let parents = obj
            .get("parents")
            .and_then(Value::as_array)
            .ok_or_else(|| shape(at("parents"), "array"))?;
        for (j, parent) in parents.iter().enumerate() {
            let parent = parent
                .as_str()
                .ok_or_else(|| shape(at(&format!("parents[{j}]")), "string"))?;
            edges.push((parent.to_string(), id.to_string()));
        }

        vertices.push(Vertex {
            id: id.to_string(),
            vtype: vtype.to_string(),
            runtime,
            input_bytes,
            output_bytes,
            is_dummy,
        });
    }

    Workflow::new(name, provenance, vertices, edges).map_err(TraceError::Invalid)
}

#[derive(Serialize)]
pub(crate) struct TraceDoc<'a> {
    name: &'a str,
    provenance: &'static str,
    workflow: TaskListDoc<'a>,
}

#[derive(Serialize)]
struct TaskListDoc<'a> {
    tasks: Vec<TaskDoc<'a>>,
}

#[derive(Serialize)]
struct TaskDoc<'a> {
    name: &'a str,
    #[serde(rename = "type")]
    vtype: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime: Option<f64>,
    #[serde(rename = "bytesRead", skip_serializing_if = "Option::is_none")]
    bytes_read: Option<u64>,
    #[serde(rename = "bytesWritten", skip_serializing_if = "Option::is_none")]
    bytes_written: Option<u64>,
    parents: Vec<&'a str>,
    #[serde(skip_serializing_if = "is_false")]
    dummy: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

pub(crate) fn trace_doc(w: &Workflow) -> TraceDoc<'_> {
    let tasks = w
        .vertices()
        .iter()
        .map(|v| TaskDoc {
            name: &v.id,
            vtype: &v.vtype,
            runtime: v.runtime,
            bytes_read: v.input_bytes,
            bytes_written: v.output_bytes,
            parents: w.parents_of(&v.id).collect(),
            dummy: v.is_dummy,
        })
        .collect();
    TraceDoc {
        name: &w.name,
        provenance: w.provenance.as_str(),
        workflow: TaskListDoc { tasks },
    }
}

pub fn write_trace(w: &Workflow) -> String {
    // Only failure mode would be a non-finite float; validation bars those.
    let mut text = serde_json::to_string_pretty(&trace_doc(w)).expect("trace serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_reads_the_documented_fields() {
        let text = r#"{
            "name": "demo",
            "workflow": {"tasks": [
                {"name": "a", "type": "prep", "runtime": 2.5, "bytesRead": 7, "parents": []},
                {"name": "b", "type": "work", "bytesWritten": 9, "parents": ["a"], "extra": 1}
            ]},
            "trailer": true
        }"#;
        let w = parse_trace(text).unwrap();
        assert_eq!(w.name, "demo");
        assert_eq!(w.provenance, Provenance::RealTrace);
        assert_eq!(w.len(), 2);
        assert_eq!(w.vertex("a").unwrap().runtime, Some(2.5));
        assert_eq!(w.vertex("a").unwrap().input_bytes, Some(7));
        assert_eq!(w.vertex("b").unwrap().output_bytes, Some(9));
        assert_eq!(w.edges(), &[("a".to_string(), "b".to_string())]);
    }

    #[test]
    fn shape_errors_name_the_offending_path() {
        let text = r#"{"name": "x", "workflow": {"tasks": [
            {"name": "a", "type": "t", "runtime": "fast", "parents": []}
        ]}}"#;
        let err = parse_trace(text).unwrap_err();
        assert_eq!(err.to_string(), "workflow.tasks[0].runtime: expected number");

        let err = parse_trace(r#"{"name": "x"}"#).unwrap_err();
        assert_eq!(err.to_string(), "workflow: expected object");

        let err = parse_trace("[1, 2]").unwrap_err();
        assert_eq!(err.to_string(), "$: expected object");
    }

    #[test]
    fn negative_bytes_are_rejected() {
        let text = r#"{"name": "x", "workflow": {"tasks": [
            {"name": "a", "type": "t", "bytesRead": -4, "parents": []}
        ]}}"#;
        let err = parse_trace(text).unwrap_err();
        assert_eq!(
            err.to_string(),
            "workflow.tasks[0].bytesRead: expected nonnegative integer"
        );
    }

    #[test]
    fn write_then_parse_is_identity() {
        let vertices = vec![
            Vertex::task("a", "prep").with_runtime(1.0),
            Vertex {
                id: "b".to_string(),
                vtype: "work".to_string(),
                runtime: None,
                input_bytes: Some(3),
                output_bytes: Some(4),
                is_dummy: false,
            },
        ];
        let edges = vec![("a".to_string(), "b".to_string())];
        let w = Workflow::new("demo", Provenance::Synthetic, vertices, edges).unwrap();
        let text = write_trace(&w);
        assert!(text.contains("\"provenance\": \"synthetic\""));
        let back = parse_trace(&text).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn dummies_round_trip_through_the_marker() {
        let w = Workflow::new(
            "demo",
            Provenance::RealTrace,
            vec![Vertex::task("a", "t"), Vertex::task("b", "t")],
            Vec::new(),
        )
        .unwrap();
        let w = wfforge_core::model::normalize_entries_exits(&w);
        let text = write_trace(&w);
        assert!(text.contains("\"dummy\": true"));
        let back = parse_trace(&text).unwrap();
        assert_eq!(back, w);
        assert_eq!(back.vertices().iter().filter(|v| v.is_dummy).count(), 2);
    }
}
