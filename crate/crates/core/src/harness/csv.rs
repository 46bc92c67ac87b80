use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solvers::RunTrace;

pub const CSV_HEADER: &str = "solver,epoch,sfo,comm,cost,subopt,consensus";

/// One CSV line of a solver trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub solver: String,
    pub epoch: usize,
    pub sfo: u64,
    pub comm: u64,
    /// `sfo + comm_weight * comm`.
    pub cost: f64,
    /// `NaN` when no reference optimum is known.
    pub subopt: f64,
    pub consensus: f64,
}

pub fn record_rows(trace: &RunTrace, comm_weight: f64) -> Vec<RecordRow> {
    trace
        .rows
        .iter()
        .map(|r| RecordRow {
            solver: trace.solver.clone(),
            epoch: r.epoch,
            sfo: r.sfo,
            comm: r.comm,
            cost: r.sfo as f64 + comm_weight * r.comm as f64,
            subopt: trace.suboptimality(r).unwrap_or(f64::NAN),
            consensus: r.consensus,
        })
        .collect()
}

/// Writes the trace; floats use 17 significant digits so they reload
/// bit-exactly.
pub fn emit_csv(trace: &RunTrace, comm_weight: f64, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    for r in record_rows(trace, comm_weight) {
        writeln!(
            out,
            "{},{},{},{},{:.16e},{:.16e},{:.16e}",
            r.solver, r.epoch, r.sfo, r.comm, r.cost, r.subopt, r.consensus
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<RecordRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = k + 1;
        if k == 0 {
            if line.trim() != CSV_HEADER {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unexpected header `{line}`"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let bad = |what: &str| Error::Parse {
            line: lineno,
            message: format!("bad {what}"),
        };
        rows.push(RecordRow {
            solver: fields[0].to_string(),
            epoch: fields[1].parse().map_err(|_| bad("epoch"))?,
            sfo: fields[2].parse().map_err(|_| bad("sfo"))?,
            comm: fields[3].parse().map_err(|_| bad("comm"))?,
            cost: fields[4].parse().map_err(|_| bad("cost"))?,
            subopt: fields[5].parse().map_err(|_| bad("subopt"))?,
            consensus: fields[6].parse().map_err(|_| bad("consensus"))?,
        });
    }
    Ok(rows)
}
