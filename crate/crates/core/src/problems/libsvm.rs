use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::data::DataMatrix;
use crate::error::{Error, Result};

/// Reads a LIBSVM sparse text file into a dense matrix, discarding labels.
///
/// Only the first `max_rows` rows and the first `d_cap` features are kept;
/// without a cap the width is the largest index seen. Missing indices are
/// zero.
pub fn load_libsvm(
    path: impl AsRef<Path>,
    max_rows: Option<usize>,
    d_cap: Option<usize>,
) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(BufReader::new(file), max_rows, d_cap).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn parse_libsvm<R: BufRead>(
    reader: R,
    max_rows: Option<usize>,
    d_cap: Option<usize>,
) -> Result<DataMatrix> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut width = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        if max_rows.is_some_and(|cap| rows.len() >= cap) {
            break;
        }
        let line = line.map_err(|e| Error::io("<libsvm input>", e))?;
        let lineno = lineno + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let mut tokens = content.split_whitespace();
        let label = tokens.next().unwrap_or_default();
        label
            .parse::<f64>()
            .map_err(|_| bad(format!("invalid label `{label}`")))?;
        let mut feats = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| bad(format!("expected `index:value`, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| bad(format!("invalid index `{idx}`")))?;
            if idx == 0 {
                return Err(bad("indices are 1-based; found 0".into()));
            }
            if idx <= last {
                return Err(bad(format!("index {idx} does not ascend past {last}")));
            }
            last = idx;
            let val: f64 = val
                .parse()
                .map_err(|_| bad(format!("invalid value `{val}`")))?;
            if !val.is_finite() {
                return Err(bad(format!("non-finite value `{val}`")));
            }
            if d_cap.is_none_or(|cap| idx <= cap) {
                feats.push((idx - 1, val));
                width = width.max(idx);
            }
        }
        rows.push(feats);
    }
    let cols = d_cap.unwrap_or(width);
    if cols == 0 {
        return Err(Error::InvalidDimension(
            "LIBSVM input has no feature columns".into(),
        ));
    }
    let mut entries = vec![0.0; rows.len() * cols];
    for (r, feats) in rows.iter().enumerate() {
        for &(c, v) in feats {
            entries[r * cols + c] = v;
        }
    }
    DataMatrix::new(rows.len(), cols, entries)
}
