//! Decentralized and centralized solvers.
//!
//! All decentralized solvers simulate synchronous rounds: every agent
//! updates its row of an [`AgentMatrix`](crate::AgentMatrix), then rows are
//! mixed through the gossip matrix. Work is accounted per agent: one SFO
//! call is one component-gradient evaluation and one communication round is
//! one multiplication by the gossip matrix.

mod baselines;
mod config;
mod inner;
mod katyushax;
mod sampling;
mod svrg;
mod trace;

pub use baselines::{run_nids, run_pgextra, BaselineConfig};
pub use config::{default_hyperparams, theory_hyperparams, HyperparamRequest, SolverConfig};
pub use inner::{
    svrg_inner_epoch, svrg_inner_epoch_observed, vr_estimator, EpochState, InnerOutcome,
};
pub use katyushax::{mirror_step, run_pmgt_katyushax};
pub use sampling::{batch_indices, epoch_inner_len, sample_geometric, stream_rng};
pub use svrg::{run_centralized_svrg, run_pmgt_svrg};
pub use trace::{Counters, RunTrace, TraceRow};

use crate::error::Result;
use crate::matrix::AgentMatrix;
use crate::problems::ProblemInstance;

/// Stacked local full gradients `grad f_i(x_i)`; costs `n` SFO per agent.
pub(crate) fn local_gradients(
    inst: &ProblemInstance,
    x: &AgentMatrix,
    counters: &mut Counters,
) -> AgentMatrix {
    let mut out = AgentMatrix::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        inst.oracle().local_grad_into(i, x.row(i), out.row_mut(i));
    }
    counters.sfo += inst.n() as u64;
    out
}

/// `F(x_bar)` for the trace.
pub(crate) fn objective_at_mean(inst: &ProblemInstance, x: &AgentMatrix) -> Result<f64> {
    inst.objective_value(&x.row_mean())
}

/// Reference optimum from the closed form when one exists.
pub(crate) fn reference_optimum(inst: &ProblemInstance) -> Option<f64> {
    let x = inst.closed_form_minimizer().ok()?;
    inst.objective_value(&x).ok()
}

pub(crate) fn initial_point(inst: &ProblemInstance, x0: Option<&[f64]>) -> Result<Vec<f64>> {
    match x0 {
        Some(x) if x.len() != inst.d() => Err(crate::Error::mismatch(inst.d(), x.len())),
        Some(x) => Ok(x.to_vec()),
        None => Ok(vec![0.0; inst.d()]),
    }
}
