use super::inner::svrg_inner_epoch;
use super::{
    initial_point, local_gradients, objective_at_mean, reference_optimum, Counters, RunTrace,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::gossip::{fast_mix, GossipMatrix};
use crate::matrix::AgentMatrix;
use crate::problems::ProblemInstance;

/// `FastMix((q + tau y / 2 - (x - y) / (2 tau)) / (1 + tau / 2), M)`.
///
/// Row-wise this is the minimizer of
/// `1/2 |q' - q|^2 + <(x - y) / (2 tau), q'> + tau/4 |q' - y|^2`.
pub fn mirror_step(
    q: &AgentMatrix,
    y_next: &AgentMatrix,
    x_next: &AgentMatrix,
    tau: f64,
    w: &GossipMatrix,
    rounds: usize,
) -> Result<AgentMatrix> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Domain(format!("momentum {tau} not in (0, 1]")));
    }
    q.same_shape(y_next)?;
    q.same_shape(x_next)?;
    let scale = 1.0 / (1.0 + 0.5 * tau);
    let mut pre = q.clone();
    for ((p, &y), &x) in pre
        .as_mut_slice()
        .iter_mut()
        .zip(y_next.as_slice())
        .zip(x_next.as_slice())
    {
        *p = (*p + 0.5 * tau * y - (x - y) / (2.0 * tau)) * scale;
    }
    fast_mix(&pre, w, rounds)
}

pub(crate) fn check_strongly_convex(inst: &ProblemInstance) -> Result<()> {
    match inst.sigma() {
        Some(s) if !(s > 0.0) => Err(Error::Domain(format!(
            "sigma = {s}: objective is not strongly convex, apply regularize_epsilon first"
        ))),
        _ => Ok(()),
    }
}

/// Decentralized accelerated prox-SVRG with gradient tracking and
/// multi-round mixing.
///
/// Trace row 0 is the starting point and includes the cost of the initial
/// mixed gradient (`n` SFO, `M` rounds). Each epoch then costs
/// `n + 2b(T+1)` SFO and `M (3 + 2(T+1))` rounds per agent.
pub fn run_pmgt_katyushax(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
    w: &GossipMatrix,
) -> Result<RunTrace> {
    check_strongly_convex(inst)?;
    cfg.check_instance(inst)?;
    if w.m() != inst.m() {
        return Err(Error::mismatch(format!("{} agents", inst.m()), w.m()));
    }
    let (m, rounds, tau) = (inst.m(), cfg.rounds(), cfg.tau());
    let x0 = initial_point(inst, cfg.x0())?;
    let mut counters = Counters::default();
    let mut trace = RunTrace::new("pmgt_katyushax", reference_optimum(inst));

    let mut x = AgentMatrix::broadcast(m, &x0);
    let mut y = x.clone();
    let mut q = x.clone();
    let mut grad_x = local_gradients(inst, &x, &mut counters);
    let mut s_hat = fast_mix(&grad_x, w, rounds)?;
    counters.comm += rounds as u64;
    trace.record(0, counters, 0, objective_at_mean(inst, &y)?, 0.0, 0.0);

    for k in 0..cfg.epochs() {
        if trace.reached(cfg.stop_below()) {
            break;
        }
        x = fast_mix(&AgentMatrix::lincomb(tau, &q, 1.0 - tau, &y), w, rounds)?;
        let grad_new = local_gradients(inst, &x, &mut counters);
        let nu = s_hat.add_scaled(1.0, &grad_new).add_scaled(-1.0, &grad_x);
        s_hat = fast_mix(&nu, w, rounds)?;
        grad_x = grad_new;
        counters.comm += 2 * rounds as u64;

        let out = svrg_inner_epoch(inst, &x, &s_hat, cfg, w, k, &mut counters)?;
        y = out.y_next;
        q = mirror_step(&q, &y, &x, tau, w, rounds)?;
        counters.comm += rounds as u64;

        let obj = objective_at_mean(inst, &y)?;
        trace.record(
            k + 1,
            counters,
            out.inner_steps,
            obj,
            y.consensus_error(),
            q.consensus_error(),
        );
        if !obj.is_finite() {
            log::warn!("pmgt_katyushax diverged at epoch {}", k + 1);
            break;
        }
    }
    trace.solution = y.row_mean();
    Ok(trace)
}
