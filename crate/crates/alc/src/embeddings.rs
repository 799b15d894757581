//! GloVe-style text embeddings: one record per line, a token followed by
//! `d` whitespace-separated floats.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use alc_core::{Dataset, UnitVector};

use crate::error::{AlcError, Result};

/// Parses records from `reader`; `path` only labels errors. Blank lines
/// are skipped. Stops after `max_rows` records when given.
pub fn parse_embeddings<R: BufRead>(reader: R, path: &Path, d: usize, max_rows: Option<usize>) -> Result<Dataset> {
    let err = |line: usize, msg: String| AlcError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    let mut seen = HashSet::new();
    let mut coords = Vec::with_capacity(d);
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        if max_rows.is_some_and(|m| vectors.len() >= m) {
            break;
        }
        let line = line.map_err(|e| AlcError::io(path, e))?;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        coords.clear();
        for f in fields {
            let v: f64 = f.parse().map_err(|_| err(lineno, format!("unparsable float {f:?}")))?;
            coords.push(v);
        }
        if coords.len() != d {
            return Err(err(lineno, format!("expected {d} values, found {}", coords.len())));
        }
        if !seen.insert(token.to_owned()) {
            return Err(err(lineno, format!("duplicate token {token:?}")));
        }
        let v = UnitVector::normalize(&coords).map_err(|e| err(lineno, e.to_string()))?;
        vectors.push(v);
        labels.push(token.to_owned());
    }
    Ok(Dataset::new(vectors, Some(labels))?)
}

pub fn load_embeddings(path: &Path, d: usize, max_rows: Option<usize>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| AlcError::io(path, e))?;
    parse_embeddings(BufReader::new(file), path, d, max_rows)
}

/// Writes `data` in the same text format. Unlabeled rows are named `row{i}`.
pub fn write_embeddings<W: Write>(mut out: W, data: &Dataset) -> std::io::Result<()> {
    for (i, v) in data.vectors().iter().enumerate() {
        match data.label(i) {
            Some(l) => write!(out, "{l}")?,
            None => write!(out, "row{i}")?,
        }
        for c in v.as_slice() {
            write!(out, " {c}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
