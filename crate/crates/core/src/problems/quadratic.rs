use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::data::DataMatrix;
use super::{ComponentOracle, SmoothnessConstants};
use crate::error::{Error, Result};

/// Components `f_{i,j}(x) = 1/2 x^T (c I - a a^T) x + b^T x` where `a` is
/// data row `i * n + j` (contiguous sharding).
#[derive(Debug, Clone)]
pub struct ShardedQuadratic {
    m: usize,
    n: usize,
    d: usize,
    shift: f64,
    linear: Vec<f64>,
    data: DataMatrix,
    // per-agent (1/n) sum_j a a^T, row-major d x d
    local_moments: Vec<Vec<f64>>,
    moment: Vec<f64>,
}

impl ShardedQuadratic {
    pub fn new(data: DataMatrix, m: usize, shift: f64, linear: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension("need at least one agent".into()));
        }
        if data.rows() == 0 || !data.rows().is_multiple_of(m) {
            return Err(Error::InvalidDimension(format!(
                "{} data rows cannot be split evenly across {m} agents",
                data.rows()
            )));
        }
        let d = data.cols();
        if linear.len() != d {
            return Err(Error::mismatch(d, linear.len()));
        }
        if !shift.is_finite() || linear.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "quadratic coefficients must be finite".into(),
            ));
        }
        let n = data.rows() / m;
        let local_moments: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut acc = vec![0.0; d * d];
                for j in 0..n {
                    let a = data.row(i * n + j);
                    for p in 0..d {
                        for q in 0..d {
                            acc[p * d + q] += a[p] * a[q];
                        }
                    }
                }
                acc.iter_mut().for_each(|v| *v /= n as f64);
                acc
            })
            .collect();
        let mut moment = vec![0.0; d * d];
        for local in &local_moments {
            for (acc, v) in moment.iter_mut().zip(local) {
                *acc += v;
            }
        }
        moment.iter_mut().for_each(|v| *v /= m as f64);
        Ok(Self {
            m,
            n,
            d,
            shift,
            linear,
            data,
            local_moments,
            moment,
        })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn data(&self) -> &DataMatrix {
        &self.data
    }

    /// `A = (1/mn) sum a a^T`, row-major.
    pub fn second_moment(&self) -> &[f64] {
        &self.moment
    }

    /// Hessian `c I - A` of the smooth part.
    pub fn hessian(&self) -> DMatrix<f64> {
        let d = self.d;
        DMatrix::from_fn(d, d, |p, q| {
            let eye = if p == q { self.shift } else { 0.0 };
            eye - self.moment[p * d + q]
        })
    }

    pub fn local_hessian(&self, agent: usize) -> DMatrix<f64> {
        let d = self.d;
        let local = &self.local_moments[agent];
        DMatrix::from_fn(d, d, |p, q| {
            let eye = if p == q { self.shift } else { 0.0 };
            eye - local[p * d + q]
        })
    }

    /// Same data re-split across `m` agents.
    pub fn reshard(&self, m: usize) -> Result<Self> {
        Self::new(self.data.clone(), m, self.shift, self.linear.clone())
    }

    /// Exact constants from the spectrum of `A` and the component norms.
    pub fn smoothness_constants(&self) -> SmoothnessConstants {
        let eigs = symmetric_eigenvalues(self.d, &self.moment);
        let (a_min, a_max) = (eigs[self.d - 1], eigs[0]);
        let c = self.shift;
        let rows = 0..self.data.rows();
        // lambda_max(cI - a a^T) is c unless d = 1
        let ell1 = if self.d >= 2 {
            c
        } else {
            rows.clone()
                .map(|r| c - self.data.row_norm_sq(r))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let neg_curv = rows
            .map(|r| self.data.row_norm_sq(r) - c)
            .fold(f64::NEG_INFINITY, f64::max);
        SmoothnessConstants {
            l_smooth: c - a_min,
            ell1,
            ell2: ell1.max(neg_curv),
            sigma_f: c - a_max,
        }
    }

    fn dot_row(&self, row: usize, x: &[f64]) -> f64 {
        self.data.row(row).iter().zip(x).map(|(a, v)| a * v).sum()
    }

    fn quad_local(&self, moment: &[f64], x: &[f64]) -> f64 {
        let d = self.d;
        let mut acc = 0.0;
        for p in 0..d {
            let row = &moment[p * d..(p + 1) * d];
            acc += x[p] * row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        }
        acc
    }

    fn moment_grad(&self, moment: &[f64], x: &[f64], out: &mut [f64]) {
        let d = self.d;
        for p in 0..d {
            let row = &moment[p * d..(p + 1) * d];
            let ax: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            out[p] = self.shift * x[p] - ax + self.linear[p];
        }
    }
}

impl ComponentOracle for ShardedQuadratic {
    fn agents(&self) -> usize {
        self.m
    }

    fn per_agent(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, agent: usize, j: usize, x: &[f64]) -> f64 {
        let ax = self.dot_row(agent * self.n + j, x);
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let bx: f64 = self.linear.iter().zip(x).map(|(b, v)| b * v).sum();
        0.5 * (self.shift * xx - ax * ax) + bx
    }

    fn grad_into(&self, agent: usize, j: usize, x: &[f64], out: &mut [f64]) {
        let row = agent * self.n + j;
        let ax = self.dot_row(row, x);
        for ((o, (&a, &v)), b) in out
            .iter_mut()
            .zip(self.data.row(row).iter().zip(x))
            .zip(&self.linear)
        {
            *o = self.shift * v - a * ax + b;
        }
    }

    fn local_value(&self, agent: usize, x: &[f64]) -> f64 {
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let bx: f64 = self.linear.iter().zip(x).map(|(b, v)| b * v).sum();
        0.5 * (self.shift * xx - self.quad_local(&self.local_moments[agent], x)) + bx
    }

    fn local_grad_into(&self, agent: usize, x: &[f64], out: &mut [f64]) {
        self.moment_grad(&self.local_moments[agent], x, out);
    }
}

pub(crate) fn symmetric_eigenvalues(d: usize, m: &[f64]) -> Vec<f64> {
    let mat = DMatrix::from_row_slice(d, d, m);
    let mut eigs = SymmetricEigen::new(mat).eigenvalues.as_slice().to_vec();
    eigs.sort_by(|a, b| b.total_cmp(a));
    eigs
}

/// Top two eigenvalues of `A`; for `d = 1` the second is taken to be `0`.
pub fn top_two_eigenvalues(q: &ShardedQuadratic) -> (f64, f64) {
    let eigs = symmetric_eigenvalues(q.d, &q.moment);
    (eigs[0], if q.d >= 2 { eigs[1] } else { 0.0 })
}

/// Unit-norm seeded Gaussian vector used as the linear term.
pub fn unit_gaussian(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|t| *t /= norm);
    }
    v
}

/// Shift-and-invert PCA subproblem: shift `c = lambda1 + (lambda1 - lambda2) / r`.
pub fn shift_invert_quadratic(
    data: DataMatrix,
    m: usize,
    r: f64,
    linear_seed: u64,
) -> Result<ShardedQuadratic> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("eigengap ratio r = {r} must be > 0")));
    }
    let d = data.cols();
    // build once with c = 0 to get A's spectrum, then fix the shift
    let probe = ShardedQuadratic::new(data, m, 0.0, vec![0.0; d])?;
    let (l1, l2) = top_two_eigenvalues(&probe);
    let gap = l1 - l2;
    if gap <= 1e-12 {
        return Err(Error::DegenerateEigengap { gap });
    }
    Ok(ShardedQuadratic {
        shift: l1 + gap / r,
        linear: unit_gaussian(d, linear_seed),
        ..probe
    })
}
