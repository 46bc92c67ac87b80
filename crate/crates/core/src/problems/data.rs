use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense sample matrix; row `r` is one data vector `a_{i,j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    row_norms_sq: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::mismatch(rows * cols, entries.len()));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite entry at row {}, column {}",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        let row_norms_sq = entries
            .chunks_exact(cols.max(1))
            .take(rows)
            .map(|r| r.iter().map(|v| v * v).sum())
            .collect();
        Ok(Self {
            rows,
            cols,
            entries,
            row_norms_sq,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_norm_sq(&self, r: usize) -> f64 {
        self.row_norms_sq[r]
    }

    /// Keeps the first `rows` rows.
    pub fn truncate_rows(mut self, rows: usize) -> Self {
        if rows < self.rows {
            self.rows = rows;
            self.entries.truncate(rows * self.cols);
            self.row_norms_sq.truncate(rows);
        }
        self
    }

    /// Binary dump: `rows` and `cols` as little-endian `u32`, then the
    /// entries as row-major little-endian `f64`.
    pub fn write_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let rows = u32::try_from(self.rows)
            .map_err(|_| Error::InvalidDimension("too many rows for cache header".into()))?;
        let cols = u32::try_from(self.cols)
            .map_err(|_| Error::InvalidDimension("too many columns for cache header".into()))?;
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut write = |bytes: &[u8]| out.write_all(bytes).map_err(|e| Error::io(path, e));
        write(&rows.to_le_bytes())?;
        write(&cols.to_le_bytes())?;
        for v in &self.entries {
            write(&v.to_le_bytes())?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_cache(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut input = BufReader::new(file);
        let mut header = [0u8; 8];
        input
            .read_exact(&mut header)
            .map_err(|e| Error::io(path, e))?;
        let rows = u32::from_le_bytes(header[..4].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(header[4..].try_into().unwrap()) as usize;
        let mut raw = Vec::new();
        input
            .read_to_end(&mut raw)
            .map_err(|e| Error::io(path, e))?;
        if raw.len() != rows * cols * 8 {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "cache {} holds {} bytes, header promises {rows}x{cols}",
                    path.display(),
                    raw.len()
                ),
            });
        }
        let entries = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(rows, cols, entries)
    }
}

/// I.i.d. `+1` / `-1` entries with probability 1/2 each.
pub fn gen_bernoulli_matrix(rows: usize, cols: usize, seed: u64) -> Result<DataMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidDimension(format!(
            "bernoulli matrix needs rows, cols >= 1 (got {rows}x{cols})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..rows * cols)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    DataMatrix::new(rows, cols, entries)
}
