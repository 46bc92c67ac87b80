use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::AgentMatrix;

/// The convex, possibly non-smooth part `psi` of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegularizerSpec {
    #[default]
    None,
    /// `lambda * ||x||_1`
    L1 { lambda: f64 },
    /// `(eps / 2) * ||x||^2`
    SquaredL2 { eps: f64 },
    /// `lambda * ||x||_1 + (eps / 2) * ||x||^2`
    L1PlusSquaredL2 { lambda: f64, eps: f64 },
}

impl RegularizerSpec {
    pub fn validate(&self) -> Result<()> {
        let (lambda, eps) = self.weights();
        if !(lambda >= 0.0 && lambda.is_finite()) || !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!(
                "regularizer weights must be >= 0: {self:?}"
            )));
        }
        Ok(())
    }

    fn weights(&self) -> (f64, f64) {
        match *self {
            RegularizerSpec::None => (0.0, 0.0),
            RegularizerSpec::L1 { lambda } => (lambda, 0.0),
            RegularizerSpec::SquaredL2 { eps } => (0.0, eps),
            RegularizerSpec::L1PlusSquaredL2 { lambda, eps } => (lambda, eps),
        }
    }

    /// Strong-convexity modulus of `psi`.
    pub fn sigma_psi(&self) -> f64 {
        self.weights().1
    }

    /// True when `psi` is differentiable (no l1 part).
    pub fn is_smooth(&self) -> bool {
        self.weights().0 == 0.0
    }

    /// The same regularizer with `eps` added to its squared-l2 weight.
    pub fn with_extra_l2(&self, eps: f64) -> Self {
        match *self {
            RegularizerSpec::None => RegularizerSpec::SquaredL2 { eps },
            RegularizerSpec::L1 { lambda } => RegularizerSpec::L1PlusSquaredL2 { lambda, eps },
            RegularizerSpec::SquaredL2 { eps: e } => RegularizerSpec::SquaredL2 { eps: e + eps },
            RegularizerSpec::L1PlusSquaredL2 { lambda, eps: e } => {
                RegularizerSpec::L1PlusSquaredL2 {
                    lambda,
                    eps: e + eps,
                }
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (lambda, eps) = self.weights();
        let mut v = 0.0;
        if lambda != 0.0 {
            v += lambda * x.iter().map(|t| t.abs()).sum::<f64>();
        }
        if eps != 0.0 {
            v += 0.5 * eps * x.iter().map(|t| t * t).sum::<f64>();
        }
        v
    }

    /// In-place `prox_{eta, psi}`.
    pub(crate) fn prox_in_place(&self, eta: f64, x: &mut [f64]) {
        let (lambda, eps) = self.weights();
        if lambda != 0.0 {
            let thresh = eta * lambda;
            for t in x.iter_mut() {
                *t = t.signum() * (t.abs() - thresh).max(0.0);
            }
        }
        if eps != 0.0 {
            let shrink = 1.0 / (1.0 + eta * eps);
            x.iter_mut().for_each(|t| *t *= shrink);
        }
    }
}

/// `argmin_z psi(z) + ||z - x||^2 / (2 eta)`.
pub fn prox(eta: f64, reg: &RegularizerSpec, x: &[f64]) -> Result<Vec<f64>> {
    check_eta(eta)?;
    let mut out = x.to_vec();
    reg.prox_in_place(eta, &mut out);
    Ok(out)
}

/// Row-wise prox; the aggregated operator factorizes over agents.
pub fn prox_rows(eta: f64, reg: &RegularizerSpec, x: &AgentMatrix) -> Result<AgentMatrix> {
    check_eta(eta)?;
    let mut out = x.clone();
    for i in 0..out.rows() {
        reg.prox_in_place(eta, out.row_mut(i));
    }
    Ok(out)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("prox step {eta} must be > 0")));
    }
    Ok(())
}
