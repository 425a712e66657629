//! File formats for matrices, vectors and bounded sets.
//!
//! * matrix: `{"dim": T, "entries": [[re, im], ...]}` in row-major order, or a
//!   headerless CSV with `T` real columns or `2T` interleaved `re, im` columns;
//! * vector: `{"entries": {"1": [re, im], ...}, "ambient": "s"}`;
//! * bounded set: `{"vectors": [vector, ...]}`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrices::{BoundedSet, TruncMatrix};
use crate::scalar::C64;
use crate::sequences::{Ambient, SeqVector};

/// Where in an input the problem was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub source: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.source, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("{source_name}: {message}")]
    Read { source_name: String, message: String },
    #[error("{location}: malformed JSON: {message}")]
    Json { location: Location, message: String },
    #[error("{location}: malformed CSV: {message}")]
    Csv { location: Location, message: String },
    #[error("{source_name}: {message}")]
    Shape { source_name: String, message: String },
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct VectorJson {
    entries: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    ambient: Ambient,
}

#[derive(Deserialize)]
struct SetJson {
    vectors: Vec<VectorJson>,
}

fn json_error(source: &str, e: serde_json::Error) -> IoError {
    IoError::Json {
        location: Location {
            source: source.to_string(),
            line: e.line(),
            column: e.column(),
        },
        message: e.to_string(),
    }
}

fn shape(source: &str, message: String) -> IoError {
    IoError::Shape {
        source_name: source.to_string(),
        message,
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::Read {
        source_name: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn parse_matrix_json(text: &str, source: &str) -> Result<TruncMatrix<C64>, IoError> {
    let m: MatrixJson = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
    if m.entries.len() != m.dim * m.dim {
        return Err(shape(
            source,
            format!("dim {} needs {} entries, found {}", m.dim, m.dim * m.dim, m.entries.len()),
        ));
    }
    let data = m.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
    TruncMatrix::from_row_major(m.dim, data).map_err(|e| shape(source, e.to_string()))
}

pub fn parse_matrix_csv(text: &str, source: &str) -> Result<TruncMatrix<C64>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            IoError::Csv {
                location: Location {
                    source: source.to_string(),
                    line,
                    column: 0,
                },
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|e| IoError::Csv {
                    location: Location {
                        source: source.to_string(),
                        line,
                        column: col + 1,
                    },
                    message: format!("`{field}`: {e}"),
                })
            })
            .collect::<Result<Vec<f64>, IoError>>()?;
        rows.push(row);
    }
    let dim = rows.len();
    if dim == 0 {
        return Err(shape(source, "empty matrix".into()));
    }
    let width = rows[0].len();
    let complex = if width == dim {
        false
    } else if width == 2 * dim {
        true
    } else {
        return Err(shape(
            source,
            format!("{dim} rows need {dim} or {} columns, found {width}", 2 * dim),
        ));
    };
    let mut data = Vec::with_capacity(dim * dim);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(IoError::Csv {
                location: Location {
                    source: source.to_string(),
                    line: r + 1,
                    column: 0,
                },
                message: format!("expected {width} columns, found {}", row.len()),
            });
        }
        if complex {
            data.extend(row.chunks(2).map(|p| C64::new(p[0], p[1])));
        } else {
            data.extend(row.iter().map(|&re| C64::new(re, 0.0)));
        }
    }
    TruncMatrix::from_row_major(dim, data).map_err(|e| shape(source, e.to_string()))
}

/// CSV when the path ends in `.csv`, JSON otherwise.
pub fn read_matrix(path: &Path) -> Result<TruncMatrix<C64>, IoError> {
    let text = read_text(path)?;
    let source = path.display().to_string();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        parse_matrix_csv(&text, &source)
    } else {
        parse_matrix_json(&text, &source)
    }
}

fn vector_from_json(v: VectorJson, source: &str) -> Result<SeqVector<C64>, IoError> {
    let mut entries = Vec::with_capacity(v.entries.len());
    for (key, [re, im]) in v.entries {
        let j: usize = key
            .parse()
            .map_err(|_| shape(source, format!("vector index `{key}` is not a positive integer")))?;
        entries.push((j, C64::new(re, im)));
    }
    Ok(SeqVector::from_entries(entries)
        .map_err(|e| shape(source, e.to_string()))?
        .with_ambient(v.ambient))
}

pub fn parse_vector_json(text: &str, source: &str) -> Result<SeqVector<C64>, IoError> {
    let v: VectorJson = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
    vector_from_json(v, source)
}

pub fn read_vector(path: &Path) -> Result<SeqVector<C64>, IoError> {
    parse_vector_json(&read_text(path)?, &path.display().to_string())
}

pub fn parse_bounded_set_json(text: &str, source: &str) -> Result<BoundedSet<C64>, IoError> {
    let s: SetJson = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
    if s.vectors.is_empty() {
        return Err(shape(source, "the bounded set is empty".into()));
    }
    let vectors = s
        .vectors
        .into_iter()
        .map(|v| vector_from_json(v, source))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoundedSet::new(vectors))
}

pub fn read_bounded_set(path: &Path) -> Result<BoundedSet<C64>, IoError> {
    parse_bounded_set_json(&read_text(path)?, &path.display().to_string())
}

pub fn matrix_to_json(x: &TruncMatrix<C64>) -> serde_json::Value {
    serde_json::to_value(MatrixJson {
        dim: x.dim(),
        entries: x.entries().iter().map(|z| [z.re, z.im]).collect(),
    })
    .expect("plain data")
}

pub fn vector_to_json(xi: &SeqVector<C64>) -> serde_json::Value {
    serde_json::to_value(VectorJson {
        entries: xi.iter().map(|(j, z)| (j.to_string(), [z.re, z.im])).collect(),
        ambient: xi.ambient,
    })
    .expect("plain data")
}

/// `2T` interleaved columns per row.
pub fn matrix_to_csv(x: &TruncMatrix<C64>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 1..=x.dim() {
        let row: Vec<String> = (1..=x.dim())
            .flat_map(|j| {
                let z = x.get(i, j);
                [crate::report::format_f64(z.re), crate::report::format_f64(z.im)]
            })
            .collect();
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}
