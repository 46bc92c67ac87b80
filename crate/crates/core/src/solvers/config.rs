use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gossip::min_rounds_for_rho;
use crate::problems::{ProblemInstance, SmoothnessConstants};

/// Hyperparameters of the variance-reduced solvers.
///
/// `t0 = ceil(n / b)` and `alpha = t0 * eta / (2 tau)` are derived at
/// construction and stay consistent because the fields are read-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    n: usize,
    eta: f64,
    tau: f64,
    batch: usize,
    rounds: usize,
    epochs: usize,
    seed: u64,
    t0: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    x0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stop_below: Option<f64>,
}

impl SolverConfig {
    /// `n` is the number of components per agent of the instance the
    /// config will run on.
    pub fn new(
        n: usize,
        eta: f64,
        tau: f64,
        batch: usize,
        rounds: usize,
        epochs: usize,
        seed: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("n must be >= 1".into()));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Domain(format!("step size {eta} must be > 0")));
        }
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Domain(format!("momentum {tau} not in (0, 1]")));
        }
        if batch == 0 || batch > n {
            return Err(Error::Domain(format!("batch size {batch} not in [1, {n}]")));
        }
        Ok(Self {
            n,
            eta,
            tau,
            batch,
            rounds,
            epochs,
            seed,
            t0: n.div_ceil(batch),
            x0: None,
            stop_below: None,
        })
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    /// Stop as soon as the suboptimality drops to `target` (needs a known
    /// optimum).
    pub fn with_stop_below(mut self, target: Option<f64>) -> Self {
        self.stop_below = target;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn batch(&self) -> usize {
        self.batch
    }
    pub fn rounds(&self) -> usize {
        self.rounds
    }
    pub fn epochs(&self) -> usize {
        self.epochs
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn t0(&self) -> usize {
        self.t0
    }
    pub fn alpha(&self) -> f64 {
        self.t0 as f64 * self.eta / (2.0 * self.tau)
    }
    pub fn x0(&self) -> Option<&[f64]> {
        self.x0.as_deref()
    }
    pub fn stop_below(&self) -> Option<f64> {
        self.stop_below
    }

    pub(crate) fn check_instance(&self, inst: &ProblemInstance) -> Result<()> {
        if self.n != inst.n() {
            return Err(Error::mismatch(
                format!("config for n = {}", self.n),
                format!("instance with n = {}", inst.n()),
            ));
        }
        Ok(())
    }
}

/// Partial hyperparameters; unset values follow the theory rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparamRequest {
    pub batch: Option<usize>,
    pub eta: Option<f64>,
    pub tau: Option<f64>,
    pub rounds: Option<usize>,
    pub rho_target: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for HyperparamRequest {
    fn default() -> Self {
        Self {
            batch: None,
            eta: None,
            tau: None,
            rounds: None,
            rho_target: 0.1,
            epochs: 100,
            seed: 0,
        }
    }
}

/// Theory-driven defaults:
///
/// * `b = round(sqrt(n))` clamped to `[1, n]`, `t0 = ceil(n / b)`
/// * `eta = min(1/(2L), sqrt(b / (ell1 ell2 t0)) / 8)`
/// * `tau = min(1/2, sqrt(t0 eta sigma) / 2)`
/// * `M` = fewest gossip rounds whose contraction bound reaches `rho_target`
pub fn theory_hyperparams(
    constants: &SmoothnessConstants,
    sigma: f64,
    n: usize,
    lambda2: f64,
    req: &HyperparamRequest,
) -> Result<SolverConfig> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be >= 1".into()));
    }
    let batch = req
        .batch
        .unwrap_or_else(|| ((n as f64).sqrt().round() as usize).clamp(1, n));
    let t0 = n.div_ceil(batch.max(1));
    let eta = req.eta.unwrap_or_else(|| {
        let c = constants;
        (0.5 / c.l_smooth).min((batch as f64 / (c.ell1 * c.ell2 * t0 as f64)).sqrt() / 8.0)
    });
    let tau = match req.tau {
        Some(t) => t,
        None => {
            if !(sigma > 0.0) {
                return Err(Error::Domain(format!(
                    "sigma = {sigma}: momentum rule needs a strongly convex objective"
                )));
            }
            0.5f64.min((t0 as f64 * eta * sigma).sqrt() / 2.0)
        }
    };
    let rounds = match req.rounds {
        Some(r) => r,
        None => min_rounds_for_rho(lambda2, req.rho_target)?,
    };
    SolverConfig::new(n, eta, tau, batch, rounds, req.epochs, req.seed)
}

/// [`theory_hyperparams`] using the instance's constants.
pub fn default_hyperparams(
    inst: &ProblemInstance,
    lambda2: f64,
    req: &HyperparamRequest,
) -> Result<SolverConfig> {
    let constants = inst
        .constants()
        .ok_or_else(|| Error::Config("instance has no smoothness constants".into()))?;
    let sigma = inst.sigma().unwrap_or(0.0);
    theory_hyperparams(&constants, sigma, inst.n(), lambda2, req)
}
