//! Decentralized stochastic optimization of sum-of-nonconvex objectives.
//!
//! The crate simulates `m` agents on a gossip network, each holding `n`
//! smooth components `f_{i,j}` of a composite objective
//! `F(x) = (1/mn) sum_{i,j} f_{i,j}(x) + psi(x)`. Individual components may be
//! nonconvex as long as their average is (strongly) convex.
//!
//! * [`gossip`]: doubly stochastic mixing matrices and accelerated
//!   multi-round consensus ([`gossip::fast_mix`]).
//! * [`problems`]: sharded objectives, proximal operators, the
//!   shift-and-invert PCA benchmark and dataset ingestion.
//! * [`solvers`]: PMGT-KatyushaX, PMGT-SVRG, centralized prox-SVRG,
//!   PG-EXTRA and NIDS.
//! * [`harness`]: JSON-configured experiments writing CSV traces.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gossip;
pub mod harness;
pub mod matrix;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use gossip::GossipMatrix;
pub use matrix::AgentMatrix;
pub use problems::{ProblemInstance, RegularizerSpec};
pub use solvers::{RunTrace, SolverConfig};
