use super::katyushax::check_strongly_convex;
use super::sampling::{batch_indices, epoch_inner_len};
use super::{
    initial_point, inner::svrg_inner_epoch, local_gradients, objective_at_mean, reference_optimum,
    Counters, RunTrace, SolverConfig,
};
use crate::error::{Error, Result};
use crate::gossip::{fast_mix, GossipMatrix};
use crate::matrix::AgentMatrix;
use crate::problems::{prox, ProblemInstance};

/// Decentralized prox-SVRG with gradient tracking, no momentum.
///
/// Row 0 carries the initial `n` SFO and `M` rounds. Each epoch costs
/// `n + 2b(T+1)` SFO (the gradient at the new iterate is taken at the end
/// of the epoch) and `M (1 + 2(T+1))` rounds.
pub fn run_pmgt_svrg(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
    w: &GossipMatrix,
) -> Result<RunTrace> {
    check_strongly_convex(inst)?;
    cfg.check_instance(inst)?;
    if w.m() != inst.m() {
        return Err(Error::mismatch(format!("{} agents", inst.m()), w.m()));
    }
    let (m, rounds) = (inst.m(), cfg.rounds());
    let x0 = initial_point(inst, cfg.x0())?;
    let mut counters = Counters::default();
    let mut trace = RunTrace::new("pmgt_svrg", reference_optimum(inst));

    let mut y = AgentMatrix::broadcast(m, &x0);
    let mut grad_prev = local_gradients(inst, &y, &mut counters);
    let mut grad_cur = grad_prev.clone();
    let mut s_hat = fast_mix(&grad_prev, w, rounds)?;
    counters.comm += rounds as u64;
    trace.record(0, counters, 0, objective_at_mean(inst, &y)?, 0.0, 0.0);

    for k in 0..cfg.epochs() {
        if trace.reached(cfg.stop_below()) {
            break;
        }
        let nu = s_hat
            .add_scaled(1.0, &grad_cur)
            .add_scaled(-1.0, &grad_prev);
        s_hat = fast_mix(&nu, w, rounds)?;
        counters.comm += rounds as u64;

        let out = svrg_inner_epoch(inst, &y, &s_hat, cfg, w, k, &mut counters)?;
        y = out.y_next;
        grad_prev = grad_cur;
        grad_cur = local_gradients(inst, &y, &mut counters);

        let obj = objective_at_mean(inst, &y)?;
        trace.record(
            k + 1,
            counters,
            out.inner_steps,
            obj,
            y.consensus_error(),
            0.0,
        );
        if !obj.is_finite() {
            log::warn!("pmgt_svrg diverged at epoch {}", k + 1);
            break;
        }
    }
    trace.solution = y.row_mean();
    Ok(trace)
}

/// Plain prox-SVRG on one agent holding every component.
///
/// `inst` must already be single-shard (see
/// [`ProblemInstance::single_shard`]) and `cfg.n()` its component count.
/// Each epoch costs `n + 2b(T+1)` SFO and no communication.
pub fn run_centralized_svrg(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<RunTrace> {
    if inst.m() != 1 {
        return Err(Error::Config(format!(
            "centralized SVRG needs a single-shard instance, got m = {}",
            inst.m()
        )));
    }
    check_strongly_convex(inst)?;
    cfg.check_instance(inst)?;
    let (n, d, b, eta) = (inst.n(), inst.d(), cfg.batch(), cfg.eta());
    let oracle = inst.oracle();
    let mut counters = Counters::default();
    let mut trace = RunTrace::new("centralized_svrg", reference_optimum(inst));
    let mut y = initial_point(inst, cfg.x0())?;
    trace.record(0, counters, 0, inst.objective_value(&y)?, 0.0, 0.0);

    let mut g = vec![0.0; d];
    let mut g0 = vec![0.0; d];
    for k in 0..cfg.epochs() {
        if trace.reached(cfg.stop_below()) {
            break;
        }
        let mut mu = vec![0.0; d];
        oracle.local_grad_into(0, &y, &mut mu);
        counters.sfo += n as u64;
        let len = epoch_inner_len(cfg, k);
        let mut x = y.clone();
        for t in 0..=len {
            let mut v = mu.clone();
            for j in batch_indices(cfg.seed(), k, t, 0, n, b) {
                oracle.grad_into(0, j, &x, &mut g);
                oracle.grad_into(0, j, &y, &mut g0);
                for ((o, a), c) in v.iter_mut().zip(&g).zip(&g0) {
                    *o += (a - c) / b as f64;
                }
            }
            counters.sfo += 2 * b as u64;
            let step: Vec<f64> = x.iter().zip(&v).map(|(a, g)| a - eta * g).collect();
            x = prox(eta, inst.regularizer(), &step)?;
        }
        y = x;
        let obj = inst.objective_value(&y)?;
        trace.record(k + 1, counters, len + 1, obj, 0.0, 0.0);
        if !obj.is_finite() {
            break;
        }
    }
    trace.solution = y;
    Ok(trace)
}
