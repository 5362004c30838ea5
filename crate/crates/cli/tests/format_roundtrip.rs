//! Round-trip properties of the three file formats, plus the parse error
//! paths the formats promise.

use proptest::prelude::*;
use wfforge::recipe_file::{load_recipe, save_recipe};
use wfforge::sim_csv::{read_schedule, write_schedule};
use wfforge::trace::{parse_trace, write_trace};
use wfforge_core::model::{Provenance, Vertex, Workflow};
use wfforge_core::recipe::build_recipe;
use wfforge_core::simulator::{ExecutionTrace, TaskRecord};

const TYPES: [&str; 4] = ["align", "filter", "sort", "archive"];

#[derive(Debug, Clone)]
struct VertexSpec {
    vtype: u8,
    runtime: Option<u16>,
    input: Option<u32>,
    output: Option<u32>,
}

fn arb_vertex() -> impl Strategy<Value = VertexSpec> {
    (
        0u8..TYPES.len() as u8,
        proptest::option::of(0u16..400),
        proptest::option::of(any::<u32>()),
        proptest::option::of(any::<u32>()),
    )
        .prop_map(|(vtype, runtime, input, output)| VertexSpec { vtype, runtime, input, output })
}

fn arb_workflow() -> impl Strategy<Value = Workflow> {
    (proptest::collection::vec(arb_vertex(), 1..10), any::<u64>(), 0u8..3).prop_map(
        |(specs, edge_bits, provenance)| {
            let n = specs.len();
            let vertices = specs
                .iter()
                .enumerate()
                .map(|(i, s)| Vertex {
                    id: format!("v{i:02}"),
                    vtype: TYPES[s.vtype as usize].to_string(),
                    runtime: s.runtime.map(|r| r as f64 * 0.25),
                    input_bytes: s.input.map(u64::from),
                    output_bytes: s.output.map(u64::from),
                    is_dummy: false,
                })
                .collect();
            let mut edges = Vec::new();
            let mut bit = 0;
            for j in 1..n {
                for i in 0..j {
                    if edge_bits >> (bit % 64) & 1 == 1 {
                        edges.push((format!("v{i:02}"), format!("v{j:02}")));
                    }
                    bit += 1;
                }
            }
            let provenance = match provenance {
                0 => Provenance::RealTrace,
                1 => Provenance::Synthetic,
                _ => Provenance::Normalized,
            };
            Workflow::new("prop", provenance, vertices, edges).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn trace_write_then_parse_is_identity(w in arb_workflow()) {
        let text = write_trace(&w);
        let back = parse_trace(&text).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn schedule_write_then_read_is_identity(
        starts in proptest::collection::vec((0u32..100_000, 1u32..10_000), 1..20)
    ) {
        // Multiples of 2^-6 stay exact through the six-decimal format.
        let records: Vec<TaskRecord> = starts
            .iter()
            .enumerate()
            .map(|(i, (start, len))| {
                let start = *start as f64 * 0.015625;
                TaskRecord {
                    id: format!("t{i:02}"),
                    vtype: TYPES[i % TYPES.len()].to_string(),
                    start,
                    finish: start + *len as f64 * 0.015625,
                    node: i % 3,
                    core: i % 5,
                }
            })
            .collect();
        let makespan = records.iter().map(|r| r.finish).fold(0.0, f64::max);
        let trace = ExecutionTrace { records, makespan };
        let back = read_schedule(&write_schedule(&trace)).unwrap();
        prop_assert_eq!(back, trace);
    }
}

#[test]
fn unknown_fields_vanish_on_rewrite() {
    let text = r#"{
        "name": "demo",
        "schemaVersion": "1.4",
        "author": {"who": "someone"},
        "workflow": {
            "tasks": [
                {"name": "a", "type": "align", "parents": [], "cores": 4, "files": [1, 2]},
                {"name": "b", "type": "sort", "parents": ["a"], "priority": null}
            ],
            "machines": []
        }
    }"#;
    let w = parse_trace(text).unwrap();
    let rewritten = write_trace(&w);
    for leaked in ["schemaVersion", "author", "cores", "files", "priority", "machines"] {
        assert!(!rewritten.contains(leaked), "{leaked} survived the rewrite");
    }
    assert_eq!(parse_trace(&rewritten).unwrap(), w);
}

#[test]
fn parse_errors_name_the_exact_path() {
    let cases = [
        (r#"[]"#, "$: expected object"),
        (r#"{"workflow": {"tasks": []}}"#, "name: expected string"),
        (r#"{"name": "x", "workflow": 3}"#, "workflow: expected object"),
        (
            r#"{"name": "x", "workflow": {"tasks": [{"type": "t", "parents": []}]}}"#,
            "workflow.tasks[0].name: expected string",
        ),
        (
            r#"{"name": "x", "workflow": {"tasks": [{"name": "a", "type": "t"}]}}"#,
            "workflow.tasks[0].parents: expected array",
        ),
        (
            r#"{"name": "x", "workflow": {"tasks": [
                {"name": "a", "type": "t", "parents": []},
                {"name": "b", "type": "t", "parents": [null]}
            ]}}"#,
            "workflow.tasks[1].parents[0]: expected string",
        ),
        (
            r#"{"name": "x", "provenance": "guessed", "workflow": {"tasks": []}}"#,
            "provenance: expected one of real-trace, synthetic, normalized",
        ),
    ];
    for (doc, expected) in cases {
        let err = parse_trace(doc).unwrap_err();
        assert_eq!(err.to_string(), expected);
    }
}

/// Attribute-free tasks produce empty sample lists; the recipe document must
/// carry them through unchanged.
#[test]
fn recipe_with_empty_samples_round_trips() {
    let instance = |name: &str, mids: usize| {
        let mut vertices = vec![Vertex::task("src", "prep")];
        let mut edges = Vec::new();
        for i in 0..mids {
            let id = format!("m{i}");
            vertices.push(Vertex::task(id.clone(), "work"));
            edges.push(("src".to_string(), id.clone()));
            edges.push((id, "dst".to_string()));
        }
        vertices.push(Vertex::task("dst", "merge"));
        Workflow::new(name, Provenance::RealTrace, vertices, edges).unwrap()
    };
    let recipe = build_recipe(vec![instance("lean-4", 2), instance("lean-6", 4)], 3, 1).unwrap();
    assert!(recipe
        .instances
        .iter()
        .all(|i| i.samples.values().all(|s| s.runtime.is_empty())));

    let text = save_recipe(&recipe);
    let back = load_recipe(&text).unwrap();
    assert_eq!(back, recipe);
    assert_eq!(save_recipe(&back), text);
}
