use super::sampling::{batch_indices, epoch_inner_len};
use super::{Counters, SolverConfig};
use crate::error::{Error, Result};
use crate::gossip::{fast_mix, GossipMatrix};
use crate::matrix::AgentMatrix;
use crate::problems::{prox_rows, ProblemInstance};

/// State of the decentralized SVRG inner loop.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochState {
    /// Inner iterate `w^t`.
    pub w: AgentMatrix,
    /// Gradient tracker `s^t`.
    pub s: AgentMatrix,
    /// Variance-reduced estimator `v^t`.
    pub v: AgentMatrix,
    /// Anchor gradients `mu_i`, set to the mixed tracker of the epoch.
    pub mu: AgentMatrix,
    /// Epoch anchor `w^0`.
    pub w0: AgentMatrix,
}

impl EpochState {
    /// `s^{-1} = v^{-1} = mu = s_hat`, `w^0 = x_epoch`.
    pub fn start(x_epoch: &AgentMatrix, s_hat: &AgentMatrix) -> Result<Self> {
        x_epoch.same_shape(s_hat)?;
        Ok(Self {
            w: x_epoch.clone(),
            s: s_hat.clone(),
            v: s_hat.clone(),
            mu: s_hat.clone(),
            w0: x_epoch.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    /// `w^{T+1}`.
    pub y_next: AgentMatrix,
    /// `T + 1`.
    pub inner_steps: u64,
}

/// `v_i = mu_i + (1/b) sum_{j in B_i} (grad f_{i,j}(w_i) - grad f_{i,j}(w0_i))`.
///
/// Costs `2 b` SFO per agent, `b` being the common batch length.
pub fn vr_estimator(
    inst: &ProblemInstance,
    state: &EpochState,
    batches: &[Vec<usize>],
    counters: &mut Counters,
) -> Result<AgentMatrix> {
    let (m, d, n) = (inst.m(), inst.d(), inst.n());
    if batches.len() != m || state.w.rows() != m || state.w.cols() != d {
        return Err(Error::mismatch(
            format!("{m} batches and {m}x{d} iterates"),
            format!(
                "{} batches and {}x{}",
                batches.len(),
                state.w.rows(),
                state.w.cols()
            ),
        ));
    }
    let b = batches.first().map_or(0, Vec::len);
    if b == 0 || batches.iter().any(|bi| bi.len() != b) {
        return Err(Error::Domain("batches must share a positive length".into()));
    }
    if let Some(&j) = batches.iter().flatten().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfRange(format!("component {j} >= n = {n}")));
    }
    let oracle = inst.oracle();
    let mut v = state.mu.clone();
    let mut g = vec![0.0; d];
    let mut g0 = vec![0.0; d];
    let inv_b = 1.0 / b as f64;
    for (i, batch) in batches.iter().enumerate() {
        let (w, w0) = (state.w.row(i), state.w0.row(i));
        let row = v.row_mut(i);
        for &j in batch {
            oracle.grad_into(i, j, w, &mut g);
            oracle.grad_into(i, j, w0, &mut g0);
            for ((o, a), c) in row.iter_mut().zip(&g).zip(&g0) {
                *o += inv_b * (a - c);
            }
        }
    }
    counters.sfo += 2 * b as u64;
    Ok(v)
}

/// One inner epoch with `T` drawn from the config's epoch stream.
pub fn svrg_inner_epoch(
    inst: &ProblemInstance,
    x_epoch: &AgentMatrix,
    s_hat: &AgentMatrix,
    cfg: &SolverConfig,
    w: &GossipMatrix,
    epoch: usize,
    counters: &mut Counters,
) -> Result<InnerOutcome> {
    let len = epoch_inner_len(cfg, epoch);
    svrg_inner_epoch_observed(
        inst,
        x_epoch,
        s_hat,
        cfg,
        w,
        epoch,
        len,
        counters,
        |_, _| {},
    )
}

/// Inner epoch of `inner_len + 1` steps; `observe(t, state)` runs after
/// `v^t` and `s^t` are formed and before `w^{t+1}`.
#[allow(clippy::too_many_arguments)]
pub fn svrg_inner_epoch_observed<F>(
    inst: &ProblemInstance,
    x_epoch: &AgentMatrix,
    s_hat: &AgentMatrix,
    cfg: &SolverConfig,
    w: &GossipMatrix,
    epoch: usize,
    inner_len: u64,
    counters: &mut Counters,
    mut observe: F,
) -> Result<InnerOutcome>
where
    F: FnMut(u64, &EpochState),
{
    cfg.check_instance(inst)?;
    let mut st = EpochState::start(x_epoch, s_hat)?;
    let rounds = cfg.rounds();
    let (m, n, b) = (inst.m(), inst.n(), cfg.batch());
    for t in 0..=inner_len {
        let batches: Vec<Vec<usize>> = (0..m)
            .map(|i| batch_indices(cfg.seed(), epoch, t, i, n, b))
            .collect();
        let v = vr_estimator(inst, &st, &batches, counters)?;
        // s^t = FastMix(s^{t-1} + v^t - v^{t-1})
        let mut pre = st.s.add_scaled(1.0, &v);
        pre = pre.add_scaled(-1.0, &st.v);
        st.s = fast_mix(&pre, w, rounds)?;
        st.v = v;
        observe(t, &st);
        let step = st.w.add_scaled(-cfg.eta(), &st.s);
        st.w = fast_mix(&prox_rows(cfg.eta(), inst.regularizer(), &step)?, w, rounds)?;
        counters.comm += 2 * rounds as u64;
    }
    Ok(InnerOutcome {
        y_next: st.w,
        inner_steps: inner_len + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gossip::build_lazy_ring;
    use crate::problems::{gen_bernoulli_matrix, make_shift_invert_pca, RegularizerSpec};

    fn instance(m: usize, n: usize, d: usize) -> ProblemInstance {
        let data = gen_bernoulli_matrix(m * n, d, 11).unwrap();
        make_shift_invert_pca(data, m, 2.0, 5, RegularizerSpec::None).unwrap()
    }

    fn spread(m: usize, d: usize, scale: f64) -> AgentMatrix {
        let data: Vec<f64> = (0..m * d)
            .map(|k| scale * ((k * 7 % 13) as f64 - 6.0))
            .collect();
        AgentMatrix::from_vec(m, d, data).unwrap()
    }

    #[test]
    fn estimator_equals_mu_at_anchor() {
        let inst = instance(3, 8, 4);
        let x = spread(3, 4, 0.1);
        let s = spread(3, 4, 0.3);
        let st = EpochState::start(&x, &s).unwrap();
        let mut c = Counters::default();
        let v = vr_estimator(&inst, &st, &vec![vec![0, 3, 3]; 3], &mut c).unwrap();
        assert_eq!(v, s);
        assert_eq!(c.sfo, 6);
    }

    #[test]
    fn full_batch_estimator() {
        let inst = instance(2, 8, 3);
        let mut st = EpochState::start(&spread(2, 3, 0.2), &spread(2, 3, 0.5)).unwrap();
        st.w = spread(2, 3, -0.4);
        let all: Vec<usize> = (0..8).collect();
        let mut c = Counters::default();
        let v = vr_estimator(&inst, &st, &[all.clone(), all], &mut c).unwrap();
        for i in 0..2 {
            let gw = inst.local_full_grad(i, st.w.row(i)).unwrap();
            let g0 = inst.local_full_grad(i, st.w0.row(i)).unwrap();
            for k in 0..3 {
                let expect = st.mu[(i, k)] + gw[k] - g0[k];
                assert!((v[(i, k)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn estimator_rejects_bad_indices() {
        let inst = instance(2, 4, 3);
        let st = EpochState::start(&spread(2, 3, 0.1), &spread(2, 3, 0.1)).unwrap();
        let mut c = Counters::default();
        assert!(vr_estimator(&inst, &st, &[vec![4], vec![0]], &mut c).is_err());
        assert!(vr_estimator(&inst, &st, &[vec![0]], &mut c).is_err());
        assert!(vr_estimator(&inst, &st, &[vec![0, 1], vec![0]], &mut c).is_err());
    }

    #[test]
    fn tracking_identity_each_step() {
        let inst = instance(4, 16, 5);
        let w = build_lazy_ring(4, 0.5).unwrap();
        let cfg = SolverConfig::new(16, 0.05, 0.5, 4, 2, 1, 9).unwrap();
        let mut c = Counters::default();
        let mut checked = 0;
        svrg_inner_epoch_observed(
            &inst,
            &spread(4, 5, 0.1),
            &spread(4, 5, 0.2),
            &cfg,
            &w,
            0,
            6,
            &mut c,
            |_, st| {
                let (sb, vb) = (st.s.row_mean(), st.v.row_mean());
                for (a, b) in sb.iter().zip(&vb) {
                    assert!((a - b).abs() < 1e-10);
                }
                checked += 1;
            },
        )
        .unwrap();
        assert_eq!(checked, 7);
        assert_eq!(c.sfo, 2 * 4 * 7);
        assert_eq!(c.comm, 2 * 2 * 7);
    }

    #[test]
    fn vanishing_step_keeps_anchor() {
        let inst = instance(3, 8, 4);
        let w = build_lazy_ring(3, 0.5).unwrap();
        let cfg = SolverConfig::new(8, 1e-15, 0.5, 2, 3, 1, 1).unwrap();
        let x = AgentMatrix::broadcast(3, &[0.3, -0.2, 0.1, 0.5]);
        let mut c = Counters::default();
        let out = svrg_inner_epoch(&inst, &x, &spread(3, 4, 0.2), &cfg, &w, 0, &mut c).unwrap();
        assert!(out.y_next.max_abs_diff(&x) < 1e-10);
    }
}
