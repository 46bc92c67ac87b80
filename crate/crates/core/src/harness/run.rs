use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SolverSpec};
use super::csv::emit_csv;
use crate::error::{Error, Result};
use crate::gossip::GossipMatrix;
use crate::problems::{ProblemInstance, SmoothnessConstants};
use crate::solvers::{
    default_hyperparams, run_centralized_svrg, run_nids, run_pgextra, run_pmgt_katyushax,
    run_pmgt_svrg, BaselineConfig, HyperparamRequest, RunTrace, SolverConfig,
};

/// Resolved settings of one solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SolverPlan {
    Stochastic {
        name: String,
        config: SolverConfig,
    },
    Baseline {
        name: String,
        config: BaselineConfig,
    },
}

impl SolverPlan {
    pub fn name(&self) -> &str {
        match self {
            SolverPlan::Stochastic { name, .. } | SolverPlan::Baseline { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    ClosedForm,
    BestAchieved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub constants: Option<SmoothnessConstants>,
    pub sigma: Option<f64>,
    pub kappa: Option<f64>,
    pub lambda2: f64,
    pub f_star: Option<f64>,
    pub f_star_source: Option<ReferenceSource>,
    pub comm_weight: f64,
    pub solvers: Vec<SolverPlan>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub traces: Vec<RunTrace>,
    pub manifest: Manifest,
}

/// Fills in a solver's hyperparameters from the overrides and the theory
/// rules.
pub fn plan_solver(
    spec: &SolverSpec,
    cfg: &ExperimentConfig,
    inst: &ProblemInstance,
    w: &GossipMatrix,
) -> Result<SolverPlan> {
    let epochs = spec.epochs.unwrap_or(cfg.epochs);
    let name = spec.name.clone();
    let req = HyperparamRequest {
        batch: spec.batch,
        eta: spec.eta,
        tau: spec.tau,
        rounds: spec.rounds,
        rho_target: spec.rho_target.unwrap_or(cfg.rho_target),
        epochs,
        seed: cfg.seed,
    };
    let plan = match spec.name.as_str() {
        "pmgt_katyushax" | "pmgt_svrg" => SolverPlan::Stochastic {
            config: default_hyperparams(inst, w.lambda2(), &req)?.with_stop_below(cfg.stop_below),
            name,
        },
        "centralized_svrg" => {
            let single = inst.single_shard()?;
            let req = HyperparamRequest {
                rounds: Some(0),
                ..req
            };
            SolverPlan::Stochastic {
                config: default_hyperparams(&single, 0.0, &req)?.with_stop_below(cfg.stop_below),
                name,
            }
        }
        "pgextra" | "nids" => {
            let config = BaselineConfig {
                step: spec.step,
                stop_below: cfg.stop_below,
                ..BaselineConfig::new(epochs)
            };
            let step = config.resolve_step(inst)?;
            SolverPlan::Baseline {
                name,
                config: BaselineConfig {
                    step: Some(step),
                    ..config
                },
            }
        }
        other => return Err(Error::UnknownSolver(other.to_string())),
    };
    Ok(plan)
}

/// Runs one planned solver.
pub fn run_solver(plan: &SolverPlan, inst: &ProblemInstance, w: &GossipMatrix) -> Result<RunTrace> {
    match plan {
        SolverPlan::Stochastic { name, config } => match name.as_str() {
            "pmgt_katyushax" => run_pmgt_katyushax(inst, config, w),
            "pmgt_svrg" => run_pmgt_svrg(inst, config, w),
            "centralized_svrg" => run_centralized_svrg(&inst.single_shard()?, config),
            other => Err(Error::UnknownSolver(other.to_string())),
        },
        SolverPlan::Baseline { name, config } => match name.as_str() {
            "pgextra" => run_pgextra(inst, config, w),
            "nids" => run_nids(inst, config, w),
            other => Err(Error::UnknownSolver(other.to_string())),
        },
    }
}

/// Builds the instance, runs every solver (in parallel) and sets a common
/// reference optimum. Writes outputs when `cfg.output` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let (inst, w) = cfg.build()?;
    let plans = cfg
        .solvers
        .iter()
        .map(|s| plan_solver(s, cfg, &inst, &w))
        .collect::<Result<Vec<_>>>()?;
    for p in &plans {
        log::info!("{}: {:?}", p.name(), p);
    }

    let results: Vec<Result<RunTrace>> = std::thread::scope(|scope| {
        let handles: Vec<_> = plans
            .iter()
            .map(|p| {
                let (inst, w) = (&inst, &w);
                scope.spawn(move || run_solver(p, inst, w))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    let mut traces = results.into_iter().collect::<Result<Vec<_>>>()?;

    let (f_star, source) = match traces.iter().find_map(|t| t.f_star) {
        Some(f) => (Some(f), Some(ReferenceSource::ClosedForm)),
        None => {
            let best = traces
                .iter()
                .flat_map(|t| t.rows.iter().map(|r| r.objective))
                .filter(|v| v.is_finite())
                .fold(f64::INFINITY, f64::min);
            if best.is_finite() {
                (Some(best), Some(ReferenceSource::BestAchieved))
            } else {
                (None, None)
            }
        }
    };
    if let Some(f) = f_star {
        traces.iter_mut().for_each(|t| t.set_reference(f));
    }

    let manifest = Manifest {
        m: inst.m(),
        n: inst.n(),
        d: inst.d(),
        constants: inst.constants(),
        sigma: inst.sigma(),
        kappa: inst.kappa(),
        lambda2: w.lambda2(),
        f_star,
        f_star_source: source,
        comm_weight: cfg.comm_weight,
        solvers: plans,
    };
    let result = ExperimentResult { traces, manifest };
    if let Some(dir) = &cfg.output {
        write_outputs(&result, dir)?;
    }
    Ok(result)
}

/// `<dir>/<solver>.csv` per trace plus `<dir>/manifest.json`.
pub fn write_outputs(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for t in &result.traces {
        emit_csv(
            t,
            result.manifest.comm_weight,
            dir.join(format!("{}.csv", t.solver)),
        )?;
    }
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&result.manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}
