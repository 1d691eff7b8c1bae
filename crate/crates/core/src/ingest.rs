//! Line-oriented numeric input: one observation per line, values separated
//! by commas and/or whitespace.

use std::io::BufRead;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BadLinePolicy {
    /// Drop malformed lines and record their line numbers.
    Skip,
    /// Abort on the first malformed line.
    #[default]
    Fail,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("unsupported column count {0} (expected 1 or 2)")]
    Columns(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Observations read from a stream, flattened row-major.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ingested {
    pub columns: usize,
    pub values: Vec<f64>,
    /// 1-based numbers of skipped lines.
    pub skipped: Vec<usize>,
}

impl Ingested {
    pub fn len(&self) -> usize {
        self.values.len() / self.columns.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn pairs(&self) -> Vec<[f64; 2]> {
        self.values.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
    }
}

/// Parses one line into exactly `columns` finite values. Blank lines give
/// `Ok(None)`.
pub fn parse_line(line: &str, columns: usize) -> Result<Option<Vec<f64>>, String> {
    let line = line.trim();
    if line.is_empty() {
        return Ok(None);
    }
    let fields: Vec<&str> = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect();
    if fields.len() != columns {
        return Err(format!("expected {columns} value(s), found {}", fields.len()));
    }
    fields
        .iter()
        .map(|f| {
            // Accept the typographic minus sign as well.
            let f = f.replace('\u{2212}', "-");
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err(format!("non-finite value {v}")),
                Err(_) => Err(format!("cannot parse {f:?} as a number")),
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

pub fn ingest_stream<R: BufRead>(reader: R, columns: usize, policy: BadLinePolicy) -> Result<Ingested, IngestError> {
    if !(1..=2).contains(&columns) {
        return Err(IngestError::Columns(columns));
    }
    let mut out = Ingested {
        columns,
        ..Default::default()
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        match parse_line(&line, columns) {
            Ok(Some(vals)) => out.values.extend(vals),
            Ok(None) => {}
            Err(reason) => match policy {
                BadLinePolicy::Skip => out.skipped.push(idx + 1),
                BadLinePolicy::Fail => return Err(IngestError::BadLine { line: idx + 1, reason }),
            },
        }
    }
    Ok(out)
}
