use super::GossipMatrix;
use crate::error::{Error, Result};
use crate::matrix::AgentMatrix;

/// Heavy-ball momentum `1 / (1 + sqrt(1 - lambda2^2))` used by [`fast_mix`].
pub fn fast_mix_momentum(lambda2: f64) -> f64 {
    1.0 / (1.0 + (1.0 - lambda2 * lambda2).sqrt())
}

/// Accelerated multi-round consensus.
///
/// Runs `rounds` steps of `x^{k+1} = (1 + eta) W x^k - eta x^{k-1}` from
/// `x^{-1} = x^0 = X`; each step is one communication round. The row
/// average is preserved and `rounds = 0` returns `X` unchanged.
pub fn fast_mix(x: &AgentMatrix, w: &GossipMatrix, rounds: usize) -> Result<AgentMatrix> {
    if x.rows() != w.m() {
        return Err(Error::mismatch(format!("{} rows", w.m()), x.rows()));
    }
    if rounds == 0 || w.m() == 1 {
        return Ok(x.clone());
    }
    let eta = fast_mix_momentum(w.lambda2());
    let mut prev = x.clone();
    let mut cur = x.clone();
    let mut mixed = AgentMatrix::zeros(x.rows(), x.cols());
    for _ in 0..rounds {
        w.apply_into(&cur, &mut mixed);
        for (p, wx) in prev.as_mut_slice().iter_mut().zip(mixed.as_slice()) {
            *p = (1.0 + eta) * wx - eta * *p;
        }
        // `prev` now holds x^{k+1}
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(cur)
}

/// `sqrt(14) * (1 - (1 - 1/sqrt(2)) sqrt(1 - lambda2))^rounds`, the
/// worst-case consensus-error contraction of [`fast_mix`].
pub fn contraction_bound(lambda2: f64, rounds: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda2) {
        return Err(Error::Domain(format!("lambda2 {lambda2} not in [0, 1)")));
    }
    let base = 1.0 - (1.0 - std::f64::consts::FRAC_1_SQRT_2) * (1.0 - lambda2).sqrt();
    Ok(14f64.sqrt() * base.powi(rounds as i32))
}

/// Smallest round count whose contraction bound is at most `rho_target`.
pub fn min_rounds_for_rho(lambda2: f64, rho_target: f64) -> Result<usize> {
    if !(rho_target > 0.0) {
        return Err(Error::Domain(format!(
            "rho target {rho_target} must be > 0"
        )));
    }
    let mut rounds = 0;
    while contraction_bound(lambda2, rounds)? > rho_target {
        rounds += 1;
    }
    Ok(rounds)
}
