use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pmgt_core::harness::{run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "pmgt",
    version,
    about = "Decentralized variance-reduced optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver of a config and write CSV traces.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for sampling (overrides `seed` in the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Build the instance and gossip matrix without running solvers.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print L, ell1, ell2, sigma, lambda2 and kappa.
    Constants {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PMGT_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> pmgt_core::Result<()> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(dir) = out {
                cfg.output = Some(dir);
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if cfg.output.is_none() {
                cfg.output = Some(PathBuf::from("results"));
            }
            let result = run_experiment(&cfg)?;
            for t in &result.traces {
                let last = t.last().expect("trace has an initial row");
                println!(
                    "{:<18} epochs {:>6}  sfo {:>10}  comm {:>10}  subopt {:.3e}",
                    t.solver,
                    last.epoch,
                    last.sfo,
                    last.comm,
                    t.final_suboptimality().unwrap_or(f64::NAN)
                );
            }
            println!("wrote {}", cfg.output.unwrap().display());
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (inst, w) = cfg.build()?;
            println!(
                "ok: m = {}, n = {}, d = {}, lambda2 = {:.6}, solvers = {}",
                inst.m(),
                inst.n(),
                inst.d(),
                w.lambda2(),
                cfg.solvers.len()
            );
        }
        Command::Constants { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (inst, w) = cfg.build()?;
            let c = inst
                .constants()
                .ok_or_else(|| pmgt_core::Error::Unsupported("no constants".into()))?;
            println!("L       {:.10e}", c.l_smooth);
            println!("ell1    {:.10e}", c.ell1);
            println!("ell2    {:.10e}", c.ell2);
            println!("sigma_f {:.10e}", c.sigma_f);
            println!("sigma   {:.10e}", inst.sigma().unwrap_or(f64::NAN));
            println!("lambda2 {:.10e}", w.lambda2());
            println!("kappa   {:.10e}", inst.kappa().unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
