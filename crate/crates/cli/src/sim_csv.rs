//! Schedule CSVs.
//!
//! One row per task (`id,type,start,finish,node,core`), a header up front, a
//! trailing `makespan,<seconds>` row, times printed with six decimals.

use std::error::Error;
use std::fmt;

use wfforge_core::simulator::{ExecutionTrace, TaskRecord};

#[derive(Debug)]
pub enum ScheduleCsvError {
    Csv(csv::Error),
    /// A row that is neither a task row nor the makespan row; `line` is
    /// 1-based and counts the header.
    Row { line: usize, expected: &'static str },
    MissingMakespan,
}

impl fmt::Display for ScheduleCsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleCsvError::Csv(e) => write!(f, "{e}"),
            ScheduleCsvError::Row { line, expected } => {
                write!(f, "line {line}: expected {expected}")
            }
            ScheduleCsvError::MissingMakespan => write!(f, "missing trailing makespan row"),
        }
    }
}

impl Error for ScheduleCsvError {}

impl From<csv::Error> for ScheduleCsvError {
    fn from(e: csv::Error) -> ScheduleCsvError {
        ScheduleCsvError::Csv(e)
    }
}

const HEADER: [&str; 6] = ["id", "type", "start", "finish", "node", "core"];

pub fn write_schedule(trace: &ExecutionTrace) -> String {
    let mut out = String::new();
    out.push_str(&HEADER.join(","));
    out.push('\n');
    for r in &trace.records {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{},{}\n",
            r.id, r.vtype, r.start, r.finish, r.node, r.core
        ));
    }
    out.push_str(&format!("makespan,{:.6}\n", trace.makespan));
    out
}

pub fn read_schedule(text: &str) -> Result<ExecutionTrace, ScheduleCsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    let mut makespan = None;
    for (i, row) in reader.records().enumerate() {
        let line = i + 1;
        let row = row?;
        if line == 1 {
            if row.iter().ne(HEADER) {
                return Err(ScheduleCsvError::Row { line, expected: "id,type,start,finish,node,core header" });
            }
            continue;
        }
        if makespan.is_some() {
            return Err(ScheduleCsvError::Row { line, expected: "no rows after makespan" });
        }
        if row.len() == 2 && &row[0] == "makespan" {
            let value = row[1]
                .parse::<f64>()
                .map_err(|_| ScheduleCsvError::Row { line, expected: "number" })?;
            makespan = Some(value);
            continue;
        }
        if row.len() != 6 {
            return Err(ScheduleCsvError::Row { line, expected: "6 fields" });
        }
        let number = |field: &str| -> Result<f64, ScheduleCsvError> {
            field.parse().map_err(|_| ScheduleCsvError::Row { line, expected: "number" })
        };
        let index = |field: &str| -> Result<usize, ScheduleCsvError> {
            field.parse().map_err(|_| ScheduleCsvError::Row { line, expected: "integer" })
        };
        records.push(TaskRecord {
            id: row[0].to_string(),
            vtype: row[1].to_string(),
            start: number(&row[2])?,
            finish: number(&row[3])?,
            node: index(&row[4])?,
            core: index(&row[5])?,
        });
    }

    match makespan {
        Some(makespan) => Ok(ExecutionTrace { records, makespan }),
        None => Err(ScheduleCsvError::MissingMakespan),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, start: f64, finish: f64) -> TaskRecord {
        TaskRecord {
            id: id.to_string(),
            vtype: "work".to_string(),
            start,
            finish,
            node: 0,
            core: 1,
        }
    }

    #[test]
    fn write_then_read_preserves_every_row() {
        let trace = ExecutionTrace {
            records: vec![record("a", 0.0, 1.5), record("b", 1.5, 4.0)],
            makespan: 4.0,
        };
        let text = write_schedule(&trace);
        assert_eq!(
            text,
            "id,type,start,finish,node,core\n\
             a,work,0.000000,1.500000,0,1\n\
             b,work,1.500000,4.000000,0,1\n\
             makespan,4.000000\n"
        );
        let back = read_schedule(&text).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn missing_makespan_is_an_error() {
        let err = read_schedule("id,type,start,finish,node,core\na,work,0,1,0,0\n").unwrap_err();
        assert!(matches!(err, ScheduleCsvError::MissingMakespan));
    }

    #[test]
    fn malformed_rows_report_their_line() {
        let err = read_schedule(
            "id,type,start,finish,node,core\na,work,zero,1,0,0\nmakespan,1\n",
        )
        .unwrap_err();
        match err {
            ScheduleCsvError::Row { line: 2, expected: "number" } => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
