use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Cumulative work per agent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Component-gradient evaluations per agent.
    pub sfo: u64,
    /// Gossip rounds.
    pub comm: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub sfo: u64,
    pub comm: u64,
    /// Inner steps `T + 1` taken in this epoch (0 for the initial row and
    /// for full-gradient methods).
    pub inner_steps: u64,
    /// `F` at the network average of the output iterate.
    pub objective: f64,
    /// `||y - 1 y_bar||_F` of the output iterate.
    pub consensus: f64,
    /// Consensus error of the mirror sequence `q` (KatyushaX only, else 0).
    pub mirror_consensus: f64,
    pub wall_secs: f64,
}

/// Per-epoch history of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub solver: String,
    /// Reference optimum `F(x*)`, when known.
    pub f_star: Option<f64>,
    pub rows: Vec<TraceRow>,
    /// Network average of the last output iterate.
    pub solution: Vec<f64>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunTrace {
    pub fn new(solver: impl Into<String>, f_star: Option<f64>) -> Self {
        Self {
            solver: solver.into(),
            f_star,
            rows: Vec::new(),
            solution: Vec::new(),
            started: Some(Instant::now()),
        }
    }

    pub(crate) fn record(
        &mut self,
        epoch: usize,
        counters: Counters,
        inner_steps: u64,
        objective: f64,
        consensus: f64,
        mirror_consensus: f64,
    ) {
        let wall_secs = self.started.map_or(0.0, |t| t.elapsed().as_secs_f64());
        self.rows.push(TraceRow {
            epoch,
            sfo: counters.sfo,
            comm: counters.comm,
            inner_steps,
            objective,
            consensus,
            mirror_consensus,
            wall_secs,
        });
    }

    pub fn suboptimality(&self, row: &TraceRow) -> Option<f64> {
        self.f_star.map(|f| row.objective - f)
    }

    pub fn suboptimalities(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| self.suboptimality(r).unwrap_or(f64::NAN))
            .collect()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn final_suboptimality(&self) -> Option<f64> {
        self.last().and_then(|r| self.suboptimality(r))
    }

    /// First row whose suboptimality is finite and at most `target`.
    pub fn first_reaching(&self, target: f64) -> Option<&TraceRow> {
        self.rows.iter().find(|r| {
            self.suboptimality(r)
                .is_some_and(|s| s.is_finite() && s <= target)
        })
    }

    /// Least-squares slope of `ln(subopt)` against the epoch index, over
    /// rows with positive suboptimality.
    pub fn log_suboptimality_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter_map(|r| {
                let s = self.suboptimality(r)?;
                (s > 0.0 && s.is_finite()).then(|| (r.epoch as f64, s.ln()))
            })
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    /// Re-bases the suboptimality on a new reference value.
    pub fn set_reference(&mut self, f_star: f64) {
        self.f_star = Some(f_star);
    }

    pub(crate) fn reached(&self, stop_below: Option<f64>) -> bool {
        match (stop_below, self.last()) {
            (Some(target), Some(row)) => self
                .suboptimality(row)
                .is_some_and(|s| s.is_finite() && s <= target),
            _ => false,
        }
    }
}
