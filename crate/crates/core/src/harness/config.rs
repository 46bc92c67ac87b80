use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gossip::{build_lazy_ring, build_random_two_neighbor, GossipMatrix};
use crate::problems::{
    gen_bernoulli_matrix, load_libsvm, make_shift_invert_pca, DataMatrix, ProblemInstance,
    RegularizerSpec,
};

/// Names accepted in [`SolverSpec::name`].
pub const KNOWN_SOLVERS: [&str; 5] = [
    "pmgt_katyushax",
    "pmgt_svrg",
    "centralized_svrg",
    "pgextra",
    "nids",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Bernoulli {
        rows: usize,
        cols: usize,
        seed: u64,
    },
    Libsvm {
        path: PathBuf,
        #[serde(default)]
        max_rows: Option<usize>,
        #[serde(default)]
        d_cap: Option<usize>,
        /// Binary cache written after the first parse and read afterwards.
        #[serde(default)]
        cache: Option<PathBuf>,
    },
}

impl DatasetSource {
    pub fn load(&self) -> Result<DataMatrix> {
        match self {
            DatasetSource::Bernoulli { rows, cols, seed } => {
                gen_bernoulli_matrix(*rows, *cols, *seed)
            }
            DatasetSource::Libsvm {
                path,
                max_rows,
                d_cap,
                cache,
            } => {
                if let Some(c) = cache.as_ref().filter(|c| c.exists()) {
                    log::info!("reading dataset cache {}", c.display());
                    return DataMatrix::read_cache(c);
                }
                let data = load_libsvm(path, *max_rows, *d_cap)?;
                if let Some(c) = cache {
                    data.write_cache(c)?;
                }
                Ok(data)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dataset: DatasetSource,
    /// Number of agents.
    pub m: usize,
    /// Eigengap ratio of the shift.
    pub r: f64,
    #[serde(default = "default_regularizer")]
    pub regularizer: RegularizerSpec,
    #[serde(default)]
    pub linear_seed: u64,
    /// Extra `(eps_f / 2) |x|^2` when the smooth part is not strongly convex.
    #[serde(default)]
    pub eps_f: Option<f64>,
}

fn default_regularizer() -> RegularizerSpec {
    RegularizerSpec::None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GossipSpec {
    LazyRing { laziness: f64 },
    RandomTwoNeighbor { seed: u64 },
}

impl GossipSpec {
    pub fn build(&self, m: usize) -> Result<GossipMatrix> {
        match *self {
            GossipSpec::LazyRing { laziness } => build_lazy_ring(m, laziness),
            GossipSpec::RandomTwoNeighbor { seed } => build_random_two_neighbor(m, seed),
        }
    }
}

/// One solver run; unset fields fall back to the experiment-level values
/// and the theory rules.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub name: String,
    #[serde(default)]
    pub batch: Option<usize>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default)]
    pub rho_target: Option<f64>,
    #[serde(default)]
    pub epochs: Option<usize>,
    /// Step size of the full-gradient baselines.
    #[serde(default)]
    pub step: Option<f64>,
}

impl SolverSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(
            self.name.as_str(),
            "pmgt_katyushax" | "pmgt_svrg" | "centralized_svrg"
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverSpec>,
    pub gossip: GossipSpec,
    #[serde(default = "default_rho")]
    pub rho_target: f64,
    /// Epochs (iterations for the full-gradient baselines).
    pub epochs: usize,
    #[serde(default = "default_comm_weight")]
    pub comm_weight: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Stop a run once its suboptimality reaches this value.
    #[serde(default)]
    pub stop_below: Option<f64>,
}

fn default_rho() -> f64 {
    0.1
}

fn default_comm_weight() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Static checks; instance-level checks happen in [`Self::build`].
    pub fn validate(&self) -> Result<()> {
        if self.problem.m == 0 {
            return Err(Error::Config("m must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if !(self.comm_weight >= 0.0 && self.comm_weight.is_finite()) {
            return Err(Error::Config(format!(
                "comm_weight {} must be >= 0",
                self.comm_weight
            )));
        }
        if !(self.rho_target > 0.0) {
            return Err(Error::Config("rho_target must be > 0".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::Config("no solvers listed".into()));
        }
        for (k, s) in self.solvers.iter().enumerate() {
            if !KNOWN_SOLVERS.contains(&s.name.as_str()) {
                return Err(Error::UnknownSolver(s.name.clone()));
            }
            if self.solvers[..k].iter().any(|p| p.name == s.name) {
                return Err(Error::Config(format!("solver `{}` listed twice", s.name)));
            }
            if s.epochs == Some(0) {
                return Err(Error::Config(format!(
                    "solver `{}`: epochs must be >= 1",
                    s.name
                )));
            }
        }
        self.problem.regularizer.validate()
    }

    /// Loads the data and builds the instance and gossip matrix.
    pub fn build(&self) -> Result<(ProblemInstance, GossipMatrix)> {
        let p = &self.problem;
        let mut data = p.dataset.load()?;
        let usable = data.rows() / p.m * p.m;
        if usable == 0 {
            return Err(Error::Config(format!(
                "{} rows cannot feed {} agents",
                data.rows(),
                p.m
            )));
        }
        if usable != data.rows() {
            log::info!("dropping {} rows for even sharding", data.rows() - usable);
            data = data.truncate_rows(usable);
        }
        let mut inst = make_shift_invert_pca(data, p.m, p.r, p.linear_seed, p.regularizer)?;
        if let Some(eps) = p.eps_f {
            inst = inst.regularize_epsilon(eps)?;
        }
        if inst.sigma().is_some_and(|s| !(s > 0.0))
            && self.solvers.iter().any(SolverSpec::is_stochastic)
        {
            return Err(Error::Config(
                "objective is not strongly convex; set problem.eps_f".into(),
            ));
        }
        let w = self.gossip.build(p.m)?;
        Ok((inst, w))
    }
}
