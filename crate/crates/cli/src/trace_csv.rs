//! CSV trace format: a header row `t,v_source,v_load,i_total,n_flex_on`,
//! optionally followed by `shift_0 .. shift_{N-1}`, then one row per step.
//! Floats use Rust's shortest round-trip rendering, so a trace read back
//! reproduces the recorded values exactly.

use std::io::{Read, Write};

use reflexgrid::Trace;
use thiserror::Error;

pub const HEADER: [&str; 5] = ["t", "v_source", "v_load", "i_total", "n_flex_on"];

#[derive(Debug, Error)]
pub enum TraceCsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header must start with {expected}, got {got}")]
    BadHeader { expected: String, got: String },
    #[error("row {row}: {msg}")]
    BadRow { row: usize, msg: String },
    #[error("trace has no rows")]
    Empty,
}

pub fn write_trace<W: Write>(trace: &Trace, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let shifts = trace.has_shifts();
    let mut header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
    if shifts {
        header.extend((0..trace.n_agents()).map(|i| format!("shift_{i}")));
    }
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for (t, s) in trace.steps().iter().enumerate() {
        row.clear();
        row.push(t.to_string());
        row.push(s.v_source.to_string());
        row.push(s.v_load.to_string());
        row.push(s.i_total.to_string());
        row.push(s.n_flex_on.to_string());
        if let Some(sh) = trace.shifts_at(t) {
            row.extend(sh.iter().map(|x| x.to_string()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed CSV row; shift columns are checked but not kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub v_source: f64,
    pub v_load: f64,
    pub i_total: f64,
    pub n_flex_on: usize,
}

/// Reads a trace, checking the header, the step numbering and every value.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<Row>, TraceCsvError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let n_shifts = header.len().saturating_sub(HEADER.len());
    let expected: Vec<String> = HEADER
        .iter()
        .map(|s| s.to_string())
        .chain((0..n_shifts).map(|i| format!("shift_{i}")))
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(TraceCsvError::BadHeader {
            expected: expected.join(","),
            got: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let bad = |msg: String| TraceCsvError::BadRow { row, msg };
        let field = |k: usize| rec.get(k).unwrap_or("");
        let t: usize = field(0)
            .parse()
            .map_err(|_| bad(format!("step {:?} is not an integer", field(0))))?;
        if t != i {
            return Err(bad(format!("expected step {i}, got {t}")));
        }
        let float = |k: usize| {
            field(k)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    bad(format!(
                        "{} {:?} is not a finite number",
                        HEADER[k],
                        field(k)
                    ))
                })
        };
        let parsed = Row {
            v_source: float(1)?,
            v_load: float(2)?,
            i_total: float(3)?,
            n_flex_on: field(4)
                .parse()
                .map_err(|_| bad(format!("n_flex_on {:?} is not a count", field(4))))?,
        };
        for k in HEADER.len()..rec.len() {
            rec[k]
                .parse::<i32>()
                .map_err(|_| bad(format!("{} {:?} is not an integer", expected[k], &rec[k])))?;
        }
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(TraceCsvError::Empty);
    }
    Ok(rows)
}
