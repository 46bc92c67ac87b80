//! Gossip matrices and accelerated multi-consensus mixing.
//!
//! A [`GossipMatrix`] is symmetric, doubly stochastic, positive
//! semidefinite, and has `1` as a simple eigenvalue. Its second-largest
//! eigenvalue `lambda2` controls how fast repeated mixing reaches consensus.

mod fastmix;
mod topology;

pub use fastmix::{contraction_bound, fast_mix, fast_mix_momentum, min_rounds_for_rho};
pub use topology::{build_lazy_ring, build_random_two_neighbor};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::AgentMatrix;

pub(crate) const SYMMETRY_TOL: f64 = 1e-12;
pub(crate) const STOCHASTIC_TOL: f64 = 1e-12;
pub(crate) const SPECTRUM_TOL: f64 = 1e-10;

/// Validated mixing matrix with its cached second eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct GossipMatrix {
    m: usize,
    weights: Vec<f64>,
    lambda2: f64,
}

impl GossipMatrix {
    /// Validates `weights` (row-major `m x m`) against every gossip-matrix
    /// invariant and caches `lambda2`.
    pub fn new(m: usize, weights: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension("gossip matrix needs m >= 1".into()));
        }
        if weights.len() != m * m {
            return Err(Error::mismatch(m * m, weights.len()));
        }
        check_symmetric(m, &weights)?;
        for i in 0..m {
            let row: f64 = weights[i * m..(i + 1) * m].iter().sum();
            if (row - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvariantViolation(format!(
                    "row {i} sums to {row:.17}"
                )));
            }
        }
        let eigs = sorted_eigenvalues(m, &weights);
        let (lo, hi) = (eigs[m - 1], eigs[0]);
        if lo < -SPECTRUM_TOL || hi > 1.0 + SPECTRUM_TOL {
            return Err(Error::InvariantViolation(format!(
                "spectrum [{lo:e}, {hi}] escapes [0, 1]"
            )));
        }
        let lambda2 = if m == 1 { 0.0 } else { eigs[1].max(0.0) };
        if lambda2 >= 1.0 - SPECTRUM_TOL {
            return Err(Error::InvariantViolation(
                "eigenvalue 1 is not simple (graph disconnected)".into(),
            ));
        }
        Ok(Self {
            m,
            weights,
            lambda2,
        })
    }

    /// The exact averaging matrix `(1/m) 1 1^T` (`lambda2 = 0`).
    pub fn averaging(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension("gossip matrix needs m >= 1".into()));
        }
        Self::new(m, vec![1.0 / m as f64; m * m])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.m + j]
    }

    /// `(I + W) / 2`, which keeps every invariant and has `lambda2' = (1 + lambda2) / 2`.
    pub fn lazified(&self) -> Self {
        let m = self.m;
        let mut w = self.weights.iter().map(|v| 0.5 * v).collect::<Vec<_>>();
        for i in 0..m {
            w[i * m + i] += 0.5;
        }
        Self {
            m,
            weights: w,
            lambda2: 0.5 * (1.0 + self.lambda2),
        }
    }

    /// One gossip round: `W X`.
    pub fn apply(&self, x: &AgentMatrix) -> Result<AgentMatrix> {
        if x.rows() != self.m {
            return Err(Error::mismatch(format!("{} rows", self.m), x.rows()));
        }
        let mut out = AgentMatrix::zeros(self.m, x.cols());
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, x: &AgentMatrix, out: &mut AgentMatrix) {
        let m = self.m;
        for i in 0..m {
            let dst = out.row_mut(i);
            dst.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..m {
                let w = self.weights[i * m + k];
                if w == 0.0 {
                    continue;
                }
                for (d, s) in dst.iter_mut().zip(x.row(k)) {
                    *d += w * s;
                }
            }
        }
    }

    /// All eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(self.m, &self.weights)
    }
}

fn check_symmetric(m: usize, w: &[f64]) -> Result<()> {
    for i in 0..m {
        for j in (i + 1)..m {
            let (a, b) = (w[i * m + j], w[j * m + i]);
            if (a - b).abs() > SYMMETRY_TOL {
                return Err(Error::InvariantViolation(format!(
                    "W[{i}][{j}] = {a} but W[{j}][{i}] = {b}"
                )));
            }
        }
    }
    Ok(())
}

fn sorted_eigenvalues(m: usize, w: &[f64]) -> Vec<f64> {
    let mat = DMatrix::from_row_slice(m, m, w);
    let mut eigs = SymmetricEigen::new(mat).eigenvalues.as_slice().to_vec();
    eigs.sort_by(|a, b| b.total_cmp(a));
    eigs
}

/// Second-largest eigenvalue of a symmetric `m x m` matrix given row-major.
///
/// Returns `0` for `m = 1`; tiny negative values produced by roundoff are
/// clamped to `0`.
pub fn second_eigenvalue(m: usize, weights: &[f64]) -> Result<f64> {
    if m == 0 || weights.len() != m * m {
        return Err(Error::mismatch(m * m, weights.len()));
    }
    check_symmetric(m, weights)?;
    if m == 1 {
        return Ok(0.0);
    }
    Ok(sorted_eigenvalues(m, weights)[1].max(0.0))
}
