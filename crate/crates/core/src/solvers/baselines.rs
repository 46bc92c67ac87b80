use serde::{Deserialize, Serialize};

use super::{
    initial_point, local_gradients, objective_at_mean, reference_optimum, Counters, RunTrace,
};
use crate::error::{Error, Result};
use crate::gossip::GossipMatrix;
use crate::matrix::AgentMatrix;
use crate::problems::{prox_rows, ProblemInstance};

/// Settings shared by the full-gradient baselines.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Step size; `None` means `1 / (2L)`.
    pub step: Option<f64>,
    pub iterations: usize,
    pub x0: Option<Vec<f64>>,
    pub stop_below: Option<f64>,
}

impl BaselineConfig {
    pub fn new(iterations: usize) -> Self {
        Self {
            iterations,
            ..Default::default()
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    pub fn resolve_step(&self, inst: &ProblemInstance) -> Result<f64> {
        let step = match self.step {
            Some(s) => s,
            None => {
                let c = inst.constants().ok_or_else(|| {
                    Error::Config("no step size and no smoothness constants".into())
                })?;
                0.5 / c.l_smooth
            }
        };
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!("step size {step} must be > 0")));
        }
        Ok(step)
    }
}

struct Run<'a> {
    inst: &'a ProblemInstance,
    trace: RunTrace,
    counters: Counters,
    stop_below: Option<f64>,
}

impl<'a> Run<'a> {
    fn new(
        name: &str,
        inst: &'a ProblemInstance,
        cfg: &BaselineConfig,
        w: &GossipMatrix,
    ) -> Result<Self> {
        if w.m() != inst.m() {
            return Err(Error::mismatch(format!("{} agents", inst.m()), w.m()));
        }
        Ok(Self {
            inst,
            trace: RunTrace::new(name, reference_optimum(inst)),
            counters: Counters::default(),
            stop_below: cfg.stop_below,
        })
    }

    /// Records iterate `k`; returns false when the run should stop.
    fn record(&mut self, k: usize, x: &AgentMatrix) -> Result<bool> {
        self.trace.solution = x.row_mean();
        let obj = objective_at_mean(self.inst, x)?;
        self.trace
            .record(k, self.counters, 0, obj, x.consensus_error(), 0.0);
        Ok(obj.is_finite() && !self.trace.reached(self.stop_below))
    }
}

fn half_lazy(x: &AgentMatrix, wx: &AgentMatrix) -> AgentMatrix {
    AgentMatrix::lincomb(0.5, x, 0.5, wx)
}

/// PG-EXTRA with `W~ = (I + W) / 2`:
///
/// ```text
/// z^1     = W x^0 - a grad f(x^0)
/// z^{k+2} = z^{k+1} + W x^{k+1} - W~ x^k - a (grad f(x^{k+1}) - grad f(x^k))
/// x^k     = prox_a(z^k)
/// ```
///
/// `W x^k` is kept between iterations, so each costs one round and `n` SFO.
pub fn run_pgextra(
    inst: &ProblemInstance,
    cfg: &BaselineConfig,
    w: &GossipMatrix,
) -> Result<RunTrace> {
    let alpha = cfg.resolve_step(inst)?;
    let reg = inst.regularizer();
    let mut run = Run::new("pgextra", inst, cfg, w)?;
    let mut x = AgentMatrix::broadcast(inst.m(), &initial_point(inst, cfg.x0.as_deref())?);
    if !run.record(0, &x)? || cfg.iterations == 0 {
        return Ok(run.trace);
    }
    let mut g = local_gradients(inst, &x, &mut run.counters);
    let mut wx = w.apply(&x)?;
    run.counters.comm += 1;
    let mut z = wx.add_scaled(-alpha, &g);
    let mut x_prev = x;
    x = prox_rows(alpha, reg, &z)?;
    if !run.record(1, &x)? {
        return Ok(run.trace);
    }
    for k in 2..=cfg.iterations {
        let g_new = local_gradients(inst, &x, &mut run.counters);
        let wx_new = w.apply(&x)?;
        run.counters.comm += 1;
        let lazy_prev = half_lazy(&x_prev, &wx);
        z = z
            .add_scaled(1.0, &wx_new)
            .add_scaled(-1.0, &lazy_prev)
            .add_scaled(-alpha, &g_new)
            .add_scaled(alpha, &g);
        x_prev = x;
        x = prox_rows(alpha, reg, &z)?;
        g = g_new;
        wx = wx_new;
        if !run.record(k, &x)? {
            break;
        }
    }
    Ok(run.trace)
}

/// NIDS with `W~ = (I + W) / 2`:
///
/// ```text
/// z^1     = x^0 - a grad f(x^0)
/// z^{k+1} = z^k - x^k + W~ (2 x^k - x^{k-1} - a grad f(x^k) + a grad f(x^{k-1}))
/// x^k     = prox_a(z^k)
/// ```
///
/// The first iteration needs no communication; later ones apply `W~` once.
pub fn run_nids(
    inst: &ProblemInstance,
    cfg: &BaselineConfig,
    w: &GossipMatrix,
) -> Result<RunTrace> {
    let alpha = cfg.resolve_step(inst)?;
    let reg = inst.regularizer();
    let mut run = Run::new("nids", inst, cfg, w)?;
    let mut x = AgentMatrix::broadcast(inst.m(), &initial_point(inst, cfg.x0.as_deref())?);
    if !run.record(0, &x)? || cfg.iterations == 0 {
        return Ok(run.trace);
    }
    let mut g = local_gradients(inst, &x, &mut run.counters);
    let mut z = x.add_scaled(-alpha, &g);
    let mut x_prev = x;
    x = prox_rows(alpha, reg, &z)?;
    if !run.record(1, &x)? {
        return Ok(run.trace);
    }
    for k in 2..=cfg.iterations {
        let g_new = local_gradients(inst, &x, &mut run.counters);
        let inner = AgentMatrix::lincomb(2.0, &x, -1.0, &x_prev)
            .add_scaled(-alpha, &g_new)
            .add_scaled(alpha, &g);
        let mixed = half_lazy(&inner, &w.apply(&inner)?);
        run.counters.comm += 1;
        z = z.add_scaled(-1.0, &x).add_scaled(1.0, &mixed);
        x_prev = x;
        x = prox_rows(alpha, reg, &z)?;
        g = g_new;
        if !run.record(k, &x)? {
            break;
        }
    }
    Ok(run.trace)
}
