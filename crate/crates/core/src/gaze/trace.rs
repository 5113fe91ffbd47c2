use std::io::BufRead;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GazeSample {
    pub t_ms: f64,
    pub x: f64,
    pub y: f64,
    pub valid: bool,
    pub pupil: Option<f64>,
    /// A key pressed at this sample, if the trace records keys.
    pub key: Option<String>,
}

impl GazeSample {
    pub fn new(t_ms: f64, x: f64, y: f64) -> GazeSample {
        GazeSample { t_ms, x, y, valid: true, pupil: None, key: None }
    }

    pub fn invalid(t_ms: f64) -> GazeSample {
        GazeSample { t_ms, x: 0.0, y: 0.0, valid: false, pupil: None, key: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub samples: Vec<GazeSample>,
    /// 1-based line numbers of rows that were skipped.
    pub malformed_lines: Vec<usize>,
}

impl Trace {
    pub fn malformed(&self) -> usize {
        self.malformed_lines.len()
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read trace: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace header lacks column `{0}`")]
    MissingColumn(&'static str),
}

const DEFAULT_COLUMNS: [&str; 6] = ["t_ms", "x", "y", "valid", "pupil", "key"];

struct Columns {
    t: usize,
    x: usize,
    y: usize,
    valid: Option<usize>,
    pupil: Option<usize>,
    key: Option<usize>,
}

impl Columns {
    fn from_names(names: &[String]) -> Result<Columns, TraceError> {
        let find = |n: &str| names.iter().position(|c| c.eq_ignore_ascii_case(n));
        Ok(Columns {
            t: find("t_ms").ok_or(TraceError::MissingColumn("t_ms"))?,
            x: find("x").ok_or(TraceError::MissingColumn("x"))?,
            y: find("y").ok_or(TraceError::MissingColumn("y"))?,
            valid: find("valid"),
            pupil: find("pupil"),
            key: find("key"),
        })
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

fn parse_row(fields: &[&str], cols: &Columns) -> Option<GazeSample> {
    let num = |i: usize| -> Option<f64> { fields.get(i)?.trim().parse::<f64>().ok().filter(|v| v.is_finite()) };
    let t_ms = num(cols.t).filter(|t| *t >= 0.0)?;
    let valid = match cols.valid.and_then(|i| fields.get(i)) {
        Some(s) => parse_bool(s)?,
        None => true,
    };
    let (x, y) = match (num(cols.x), num(cols.y)) {
        (Some(x), Some(y)) => (x, y),
        _ if !valid => (0.0, 0.0),
        _ => return None,
    };
    let pupil = match cols.pupil.and_then(|i| fields.get(i)).map(|s| s.trim()) {
        None | Some("") => None,
        Some(s) => Some(s.parse::<f64>().ok()?),
    };
    let key = cols.key.and_then(|i| fields.get(i)).map(|s| s.trim()).filter(|s| !s.is_empty()).map(String::from);
    Some(GazeSample { t_ms, x, y, valid, pupil, key })
}

/// Reads a CSV gaze trace. A `#` comment or a plain row naming the columns
/// may precede the data; otherwise `t_ms,x,y,valid,pupil,key` is assumed. Rows that do not
/// parse, or go back in time, are skipped and counted.
pub fn read_trace(reader: impl BufRead) -> Result<Trace, TraceError> {
    let mut cols: Option<Columns> = None;
    let mut trace = Trace::default();
    let mut last_t = f64::NEG_INFINITY;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.trim();
        if body.is_empty() {
            continue;
        }
        if let Some(comment) = body.strip_prefix('#') {
            let names: Vec<String> = comment.split(',').map(|s| s.trim().to_string()).collect();
            if cols.is_none() && trace.samples.is_empty() && names.iter().any(|c| c.eq_ignore_ascii_case("t_ms")) {
                cols = Some(Columns::from_names(&names)?);
            }
            continue;
        }
        let cols = cols.get_or_insert_with(|| {
            Columns::from_names(&DEFAULT_COLUMNS.map(String::from)).expect("default columns are complete")
        });
        let fields: Vec<&str> = body.split(',').collect();
        match parse_row(&fields, cols) {
            Some(s) if s.t_ms >= last_t => {
                last_t = s.t_ms;
                trace.samples.push(s);
            }
            // A bare column-name row before any data, as written to samples.csv.
            None if trace.samples.is_empty() && fields.first().is_some_and(|f| f.trim().eq_ignore_ascii_case("t_ms")) => {
                let names: Vec<String> = fields.iter().map(|s| s.trim().to_string()).collect();
                *cols = Columns::from_names(&names)?;
            }
            _ => trace.malformed_lines.push(n + 1),
        }
    }
    Ok(trace)
}

pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    read_trace(text.as_bytes())
}
