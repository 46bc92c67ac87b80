//! JSON-configured experiments and CSV trace output.

mod config;
mod csv;
mod run;

pub use config::{
    DatasetSource, ExperimentConfig, GossipSpec, ProblemSpec, SolverSpec, KNOWN_SOLVERS,
};
pub use csv::{emit_csv, read_csv, record_rows, RecordRow, CSV_HEADER};
pub use run::{
    plan_solver, run_experiment, run_solver, write_outputs, ExperimentResult, Manifest,
    ReferenceSource, SolverPlan,
};
