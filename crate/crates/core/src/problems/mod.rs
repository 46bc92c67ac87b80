//! Sharded composite objectives `F(x) = f(x) + psi(x)` with
//! `f = (1/m) sum_i f_i` and `f_i = (1/n) sum_j f_{i,j}`.

mod data;
mod libsvm;
mod quadratic;
mod regularizer;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use data::{gen_bernoulli_matrix, DataMatrix};
pub use libsvm::{load_libsvm, parse_libsvm};
pub use quadratic::{shift_invert_quadratic, top_two_eigenvalues, unit_gaussian, ShardedQuadratic};
pub use regularizer::{prox, prox_rows, RegularizerSpec};

use crate::error::{Error, Result};

/// Value/gradient access to the components `f_{i,j}`.
///
/// Indices are trusted; [`ProblemInstance`] performs the range checks for
/// its public accessors.
pub trait ComponentOracle: Send + Sync + fmt::Debug {
    fn agents(&self) -> usize;
    fn per_agent(&self) -> usize;
    fn dim(&self) -> usize;

    fn value(&self, agent: usize, j: usize, x: &[f64]) -> f64;
    fn grad_into(&self, agent: usize, j: usize, x: &[f64], out: &mut [f64]);

    /// `f_i(x)`; defaults to averaging the components.
    fn local_value(&self, agent: usize, x: &[f64]) -> f64 {
        let n = self.per_agent();
        (0..n).map(|j| self.value(agent, j, x)).sum::<f64>() / n as f64
    }

    /// `grad f_i(x)`; defaults to averaging the component gradients.
    fn local_grad_into(&self, agent: usize, x: &[f64], out: &mut [f64]) {
        let n = self.per_agent();
        let mut g = vec![0.0; self.dim()];
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            self.grad_into(agent, j, x, &mut g);
            out.iter_mut().zip(&g).for_each(|(o, v)| *o += v);
        }
        out.iter_mut().for_each(|v| *v /= n as f64);
    }
}

/// Smoothness and convexity constants of the smooth part `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessConstants {
    /// Lipschitz constant of `grad f`.
    #[serde(rename = "L")]
    pub l_smooth: f64,
    /// Upper curvature bound of every component.
    pub ell1: f64,
    /// Lower (negative) curvature bound of every component.
    pub ell2: f64,
    /// Strong-convexity modulus of `f`.
    pub sigma_f: f64,
}

/// A sharded finite-sum objective with its regularizer and constants.
#[derive(Clone)]
pub struct ProblemInstance {
    oracle: Arc<dyn ComponentOracle>,
    quadratic: Option<Arc<ShardedQuadratic>>,
    regularizer: RegularizerSpec,
    constants: Option<SmoothnessConstants>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("m", &self.m())
            .field("n", &self.n())
            .field("d", &self.d())
            .field("regularizer", &self.regularizer)
            .field("constants", &self.constants)
            .field("quadratic", &self.quadratic.is_some())
            .finish()
    }
}

impl ProblemInstance {
    /// Wraps an arbitrary oracle. Constants are optional but required by
    /// the hyperparameter rules.
    pub fn from_oracle(
        oracle: Arc<dyn ComponentOracle>,
        regularizer: RegularizerSpec,
        constants: Option<SmoothnessConstants>,
    ) -> Result<Self> {
        regularizer.validate()?;
        if oracle.agents() == 0 || oracle.per_agent() == 0 || oracle.dim() == 0 {
            return Err(Error::InvalidDimension(
                "oracle with an empty dimension".into(),
            ));
        }
        Ok(Self {
            oracle,
            quadratic: None,
            regularizer,
            constants,
        })
    }

    /// Quadratic instance with exact constants.
    pub fn quadratic(q: ShardedQuadratic, regularizer: RegularizerSpec) -> Result<Self> {
        regularizer.validate()?;
        let constants = q.smoothness_constants();
        let q = Arc::new(q);
        Ok(Self {
            oracle: q.clone(),
            quadratic: Some(q),
            regularizer,
            constants: Some(constants),
        })
    }

    pub fn m(&self) -> usize {
        self.oracle.agents()
    }

    pub fn n(&self) -> usize {
        self.oracle.per_agent()
    }

    pub fn d(&self) -> usize {
        self.oracle.dim()
    }

    pub fn oracle(&self) -> &dyn ComponentOracle {
        self.oracle.as_ref()
    }

    pub fn quadratic_data(&self) -> Option<&ShardedQuadratic> {
        self.quadratic.as_deref()
    }

    pub fn regularizer(&self) -> &RegularizerSpec {
        &self.regularizer
    }

    pub fn constants(&self) -> Option<SmoothnessConstants> {
        self.constants
    }

    /// `sigma_f + sigma_psi`, or `None` without constants.
    pub fn sigma(&self) -> Option<f64> {
        self.constants
            .map(|c| c.sigma_f.max(0.0) + self.regularizer.sigma_psi())
    }

    /// Condition number `(L + sqrt(ell1 ell2)) / sigma`.
    pub fn kappa(&self) -> Option<f64> {
        let c = self.constants?;
        let sigma = self.sigma()?;
        Some((c.l_smooth + (c.ell1 * c.ell2).sqrt()) / sigma)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d() {
            return Err(Error::mismatch(self.d(), x.len()));
        }
        Ok(())
    }

    fn check_agent(&self, i: usize) -> Result<()> {
        if i >= self.m() {
            return Err(Error::IndexOutOfRange(format!(
                "agent {i} >= m = {}",
                self.m()
            )));
        }
        Ok(())
    }

    /// `f(x)` without the regularizer.
    pub fn smooth_value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let m = self.m();
        Ok((0..m).map(|i| self.oracle.local_value(i, x)).sum::<f64>() / m as f64)
    }

    /// `F(x) = f(x) + psi(x)`.
    pub fn objective_value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.smooth_value(x)? + self.regularizer.value(x))
    }

    /// `grad f(x)` (smooth part only).
    pub fn global_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let (m, d) = (self.m(), self.d());
        let mut out = vec![0.0; d];
        let mut g = vec![0.0; d];
        for i in 0..m {
            self.oracle.local_grad_into(i, x, &mut g);
            out.iter_mut().zip(&g).for_each(|(o, v)| *o += v);
        }
        out.iter_mut().for_each(|v| *v /= m as f64);
        Ok(out)
    }

    pub fn local_full_grad(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_agent(i)?;
        self.check_point(x)?;
        let mut out = vec![0.0; self.d()];
        self.oracle.local_grad_into(i, x, &mut out);
        Ok(out)
    }

    pub fn component_grad(&self, i: usize, j: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_agent(i)?;
        self.check_point(x)?;
        if j >= self.n() {
            return Err(Error::IndexOutOfRange(format!(
                "component {j} >= n = {}",
                self.n()
            )));
        }
        let mut out = vec![0.0; self.d()];
        self.oracle.grad_into(i, j, x, &mut out);
        Ok(out)
    }

    pub fn component_value(&self, i: usize, j: usize, x: &[f64]) -> Result<f64> {
        self.check_agent(i)?;
        self.check_point(x)?;
        if j >= self.n() {
            return Err(Error::IndexOutOfRange(format!(
                "component {j} >= n = {}",
                self.n()
            )));
        }
        Ok(self.oracle.value(i, j, x))
    }

    /// The same objective seen as one agent holding all `m n` components.
    pub fn single_shard(&self) -> Result<Self> {
        if let Some(q) = &self.quadratic {
            let mut inst = Self::quadratic(q.reshard(1)?, self.regularizer)?;
            inst.constants = self.constants;
            return Ok(inst);
        }
        Ok(Self {
            oracle: Arc::new(SingleShard(self.oracle.clone())),
            quadratic: None,
            regularizer: self.regularizer,
            constants: self.constants,
        })
    }

    /// `F_eps(x) = F(x) + (eps_f / 2) ||x||^2`, with the extra term placed in
    /// the regularizer (and hence handled by the prox step).
    pub fn regularize_epsilon(&self, eps_f: f64) -> Result<Self> {
        if !(eps_f > 0.0 && eps_f.is_finite()) {
            return Err(Error::Domain(format!("eps_f = {eps_f} must be > 0")));
        }
        Ok(Self {
            regularizer: self.regularizer.with_extra_l2(eps_f),
            ..self.clone()
        })
    }

    /// Exact minimizer `-(H + eps I)^{-1} b` for quadratic instances with a
    /// smooth regularizer.
    pub fn closed_form_minimizer(&self) -> Result<Vec<f64>> {
        let q = self
            .quadratic
            .as_ref()
            .ok_or_else(|| Error::Unsupported("closed form needs a quadratic instance".into()))?;
        if !self.regularizer.is_smooth() {
            return Err(Error::Unsupported(
                "closed form needs psi in {none, squared_l2}".into(),
            ));
        }
        let d = self.d();
        let eps = self.regularizer.sigma_psi();
        let h = q.hessian() + DMatrix::identity(d, d) * eps;
        let chol = nalgebra::Cholesky::new(h.clone()).ok_or(Error::NotPositiveDefinite)?;
        let b = DVector::from_column_slice(q.linear());
        let mut x = chol.solve(&b);
        x.neg_mut();
        // one refinement step keeps the residual near machine precision
        let resid = &h * &x + &b;
        x -= chol.solve(&resid);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(x.as_slice().to_vec())
    }
}

/// Builds the shift-and-invert instance with `psi = reg`.
pub fn make_shift_invert_pca(
    data: DataMatrix,
    m: usize,
    r: f64,
    linear_seed: u64,
    reg: RegularizerSpec,
) -> Result<ProblemInstance> {
    ProblemInstance::quadratic(shift_invert_quadratic(data, m, r, linear_seed)?, reg)
}

/// Constants of a quadratic instance.
pub fn smoothness_constants(inst: &ProblemInstance) -> Result<SmoothnessConstants> {
    inst.quadratic_data()
        .map(ShardedQuadratic::smoothness_constants)
        .ok_or_else(|| Error::Unsupported("smoothness constants need quadratic data".into()))
}

#[derive(Debug)]
struct SingleShard(Arc<dyn ComponentOracle>);

impl ComponentOracle for SingleShard {
    fn agents(&self) -> usize {
        1
    }

    fn per_agent(&self) -> usize {
        self.0.agents() * self.0.per_agent()
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, _agent: usize, j: usize, x: &[f64]) -> f64 {
        let n = self.0.per_agent();
        self.0.value(j / n, j % n, x)
    }

    fn grad_into(&self, _agent: usize, j: usize, x: &[f64], out: &mut [f64]) {
        let n = self.0.per_agent();
        self.0.grad_into(j / n, j % n, x, out)
    }

    fn local_value(&self, _agent: usize, x: &[f64]) -> f64 {
        let m = self.0.agents();
        (0..m).map(|i| self.0.local_value(i, x)).sum::<f64>() / m as f64
    }

    fn local_grad_into(&self, _agent: usize, x: &[f64], out: &mut [f64]) {
        let m = self.0.agents();
        let mut g = vec![0.0; self.dim()];
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            self.0.local_grad_into(i, x, &mut g);
            out.iter_mut().zip(&g).for_each(|(o, v)| *o += v);
        }
        out.iter_mut().for_each(|v| *v /= m as f64);
    }
}

#[cfg(test)]
mod tests;
