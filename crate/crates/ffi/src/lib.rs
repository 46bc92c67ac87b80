//! C ABI over `pmgt-core`.
//!
//! Objects cross the boundary as opaque handles (`PmgtGossip`,
//! `PmgtProblem`, `PmgtTrace`) created by `pmgt_*` constructors and released
//! with the matching `*_free`. Fallible calls return a [`PmgtStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`pmgt_last_error`].
//!
//! # Safety
//!
//! Every pointer argument must be null or valid for the access its
//! documentation implies: handles must come from the matching constructor
//! and not be freed yet, and buffers must hold the stated number of
//! doubles. Null pointers are reported as `PMGT_STATUS_NULL_POINTER`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use pmgt_core::gossip::{self, GossipMatrix};
use pmgt_core::harness::{emit_csv, run_experiment, ExperimentConfig};
use pmgt_core::problems::{gen_bernoulli_matrix, load_libsvm, make_shift_invert_pca};
use pmgt_core::solvers::{
    default_hyperparams, run_centralized_svrg, run_nids, run_pgextra, run_pmgt_katyushax,
    run_pmgt_svrg, BaselineConfig, HyperparamRequest, RunTrace,
};
use pmgt_core::{AgentMatrix, Error, ProblemInstance, RegularizerSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmgtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Domain = 4,
    Io = 5,
    Parse = 6,
    Config = 7,
    Unsupported = 8,
    Numerical = 9,
    Panic = 10,
}

impl From<&Error> for PmgtStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidDimension(_) | Error::IndexOutOfRange(_) => PmgtStatus::InvalidArgument,
            Error::DimensionMismatch { .. } => PmgtStatus::DimensionMismatch,
            Error::Domain(_) | Error::InvariantViolation(_) => PmgtStatus::Domain,
            Error::DegenerateEigengap { .. } | Error::NotPositiveDefinite => PmgtStatus::Numerical,
            Error::Unsupported(_) => PmgtStatus::Unsupported,
            Error::Parse { .. } => PmgtStatus::Parse,
            Error::Io { .. } => PmgtStatus::Io,
            Error::Config(_) | Error::UnknownSolver(_) => PmgtStatus::Config,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

/// Message of the last failed call on this thread ("" if none). The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pmgt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

struct Fail(PmgtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(PmgtStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PmgtStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(PmgtStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PmgtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PmgtStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside pmgt");
            PmgtStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn c_path(p: *const c_char, what: &str) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

/// Opaque gossip matrix.
pub struct PmgtGossip(GossipMatrix);

/// Opaque problem instance.
pub struct PmgtProblem(ProblemInstance);

/// Opaque solver trace.
pub struct PmgtTrace(RunTrace);

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    write_out(out, Box::into_raw(Box::new(value)))
}

// ---------------------------------------------------------------- gossip

/// Lazy ring on `m` agents with self-weight `laziness`.
#[no_mangle]
pub unsafe extern "C" fn pmgt_gossip_lazy_ring(
    m: usize,
    laziness: f64,
    out: *mut *mut PmgtGossip,
) -> PmgtStatus {
    guard(|| emit(out, PmgtGossip(gossip::build_lazy_ring(m, laziness)?)))
}

/// Ring plus a seeded random matching, Metropolis weights, lazified.
#[no_mangle]
pub unsafe extern "C" fn pmgt_gossip_random_two_neighbor(
    m: usize,
    seed: u64,
    out: *mut *mut PmgtGossip,
) -> PmgtStatus {
    guard(|| emit(out, PmgtGossip(gossip::build_random_two_neighbor(m, seed)?)))
}

/// `weights` is row-major `m x m`.
#[no_mangle]
pub unsafe extern "C" fn pmgt_gossip_from_weights(
    m: usize,
    weights: *const f64,
    out: *mut *mut PmgtGossip,
) -> PmgtStatus {
    guard(|| {
        if weights.is_null() {
            return Err(null("weights"));
        }
        let w = std::slice::from_raw_parts(weights, m * m).to_vec();
        emit(out, PmgtGossip(GossipMatrix::new(m, w)?))
    })
}

/// Number of agents, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pmgt_gossip_agents(g: *const PmgtGossip) -> usize {
    g.as_ref().map_or(0, |g| g.0.m())
}

/// Second largest eigenvalue, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pmgt_gossip_lambda2(g: *const PmgtGossip) -> f64 {
    g.as_ref().map_or(f64::NAN, |g| g.0.lambda2())
}

#[no_mangle]
pub unsafe extern "C" fn pmgt_gossip_free(g: *mut PmgtGossip) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Accelerated mixing of the row-major `m x cols` block `x` into `out`
/// (which may alias `x`).
#[no_mangle]
pub unsafe extern "C" fn pmgt_fast_mix(
    g: *const PmgtGossip,
    x: *const f64,
    cols: usize,
    rounds: usize,
    out: *mut f64,
) -> PmgtStatus {
    guard(|| {
        let g = deref(g, "gossip")?;
        if x.is_null() || out.is_null() {
            return Err(null("matrix buffer"));
        }
        let m = g.0.m();
        let input = std::slice::from_raw_parts(x, m * cols).to_vec();
        let mixed = gossip::fast_mix(&AgentMatrix::from_vec(m, cols, input)?, &g.0, rounds)?;
        ptr::copy(mixed.as_slice().as_ptr(), out, m * cols);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pmgt_contraction_bound(
    lambda2: f64,
    rounds: usize,
    out: *mut f64,
) -> PmgtStatus {
    guard(|| write_out(out, gossip::contraction_bound(lambda2, rounds)?))
}

#[no_mangle]
pub unsafe extern "C" fn pmgt_min_rounds_for_rho(
    lambda2: f64,
    rho_target: f64,
    out: *mut usize,
) -> PmgtStatus {
    guard(|| write_out(out, gossip::min_rounds_for_rho(lambda2, rho_target)?))
}

// --------------------------------------------------------------- problems

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PmgtConstants {
    pub l_smooth: f64,
    pub ell1: f64,
    pub ell2: f64,
    pub sigma_f: f64,
    /// `sigma_f + sigma_psi`.
    pub sigma: f64,
    pub kappa: f64,
}

/// Shift-and-invert instance on a seeded +-1 Bernoulli `rows x cols` matrix
/// split across `m` agents, with no regularizer.
#[no_mangle]
pub unsafe extern "C" fn pmgt_problem_bernoulli(
    rows: usize,
    cols: usize,
    data_seed: u64,
    m: usize,
    r: f64,
    linear_seed: u64,
    out: *mut *mut PmgtProblem,
) -> PmgtStatus {
    guard(|| {
        let data = gen_bernoulli_matrix(rows, cols, data_seed)?;
        let inst = make_shift_invert_pca(data, m, r, linear_seed, RegularizerSpec::None)?;
        emit(out, PmgtProblem(inst))
    })
}

/// Same from a LIBSVM file. `max_rows` and `d_cap` of 0 mean "no limit";
/// rows beyond a multiple of `m` are dropped.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pmgt_problem_libsvm(
    path: *const c_char,
    max_rows: usize,
    d_cap: usize,
    m: usize,
    r: f64,
    linear_seed: u64,
    out: *mut *mut PmgtProblem,
) -> PmgtStatus {
    guard(|| {
        let path = c_path(path, "path")?;
        let limit = |v: usize| (v > 0).then_some(v);
        let data = load_libsvm(&path, limit(max_rows), limit(d_cap))?;
        if m == 0 {
            return Err(invalid("m must be >= 1"));
        }
        let usable = data.rows() / m * m;
        let inst = make_shift_invert_pca(
            data.truncate_rows(usable),
            m,
            r,
            linear_seed,
            RegularizerSpec::None,
        )?;
        emit(out, PmgtProblem(inst))
    })
}

/// New instance with `(eps_f / 2) |x|^2` added to the regularizer.
#[no_mangle]
pub unsafe extern "C" fn pmgt_problem_regularize(
    p: *const PmgtProblem,
    eps_f: f64,
    out: *mut *mut PmgtProblem,
) -> PmgtStatus {
    guard(|| {
        let p = deref(p, "problem")?;
        emit(out, PmgtProblem(p.0.regularize_epsilon(eps_f)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn pmgt_problem_dims(
    p: *const PmgtProblem,
    m: *mut usize,
    n: *mut usize,
    d: *mut usize,
) -> PmgtStatus {
    guard(|| {
        let p = &deref(p, "problem")?.0;
        write_out(m, p.m())?;
        write_out(n, p.n())?;
        write_out(d, p.d())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pmgt_problem_constants(
    p: *const PmgtProblem,
    out: *mut PmgtConstants,
) -> PmgtStatus {
    guard(|| {
        let p = &deref(p, "problem")?.0;
        let c = p
            .constants()
            .ok_or_else(|| Fail(PmgtStatus::Unsupported, "no constants".into()))?;
        write_out(
            out,
            PmgtConstants {
                l_smooth: c.l_smooth,
                ell1: c.ell1,
                ell2: c.ell2,
                sigma_f: c.sigma_f,
                sigma: p.sigma().unwrap_or(f64::NAN),
                kappa: p.kappa().unwrap_or(f64::NAN),
            },
        )
    })
}

/// `F(x)` for a point of length `d`.
#[no_mangle]
pub unsafe extern "C" fn pmgt_problem_objective(
    p: *const PmgtProblem,
    x: *const f64,
    out: *mut f64,
) -> PmgtStatus {
    guard(|| {
        let p = &deref(p, "problem")?.0;
        if x.is_null() {
            return Err(null("x"));
        }
        let x = std::slice::from_raw_parts(x, p.d());
        write_out(out, p.objective_value(x)?)
    })
}

/// Writes the exact minimizer (length `d`) into `out`.
#[no_mangle]
pub unsafe extern "C" fn pmgt_problem_minimizer(
    p: *const PmgtProblem,
    out: *mut f64,
) -> PmgtStatus {
    guard(|| {
        let p = &deref(p, "problem")?.0;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let x = p.closed_form_minimizer()?;
        ptr::copy_nonoverlapping(x.as_ptr(), out, x.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pmgt_problem_free(p: *mut PmgtProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

// ---------------------------------------------------------------- solvers

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmgtSolver {
    Katyushax = 0,
    Svrg = 1,
    CentralizedSvrg = 2,
    Pgextra = 3,
    Nids = 4,
}

/// Run options. Zero (or negative) values of `batch`, `eta`, `tau`,
/// `step` and a negative `rounds` select the default rule.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmgtSolverOptions {
    pub epochs: usize,
    pub seed: u64,
    pub batch: usize,
    pub eta: f64,
    pub tau: f64,
    pub rounds: i64,
    pub rho_target: f64,
    /// Step of the full-gradient baselines.
    pub step: f64,
    /// Stop once the suboptimality reaches this value (ignored if <= 0).
    pub stop_below: f64,
}

#[no_mangle]
pub extern "C" fn pmgt_solver_options_default() -> PmgtSolverOptions {
    PmgtSolverOptions {
        epochs: 100,
        seed: 0,
        batch: 0,
        eta: 0.0,
        tau: 0.0,
        rounds: -1,
        rho_target: 0.1,
        step: 0.0,
        stop_below: 0.0,
    }
}

fn positive(v: f64) -> Option<f64> {
    (v > 0.0).then_some(v)
}

fn run(
    inst: &ProblemInstance,
    w: Option<&GossipMatrix>,
    solver: PmgtSolver,
    o: &PmgtSolverOptions,
) -> Result<RunTrace, Fail> {
    let stop = positive(o.stop_below);
    let req = HyperparamRequest {
        batch: (o.batch > 0).then_some(o.batch),
        eta: positive(o.eta),
        tau: positive(o.tau),
        rounds: usize::try_from(o.rounds).ok(),
        rho_target: o.rho_target,
        epochs: o.epochs,
        seed: o.seed,
    };
    let need_w = || w.ok_or_else(|| null("gossip"));
    let baseline = || BaselineConfig {
        step: positive(o.step),
        iterations: o.epochs,
        x0: None,
        stop_below: stop,
    };
    let trace = match solver {
        PmgtSolver::Katyushax => {
            let w = need_w()?;
            let cfg = default_hyperparams(inst, w.lambda2(), &req)?.with_stop_below(stop);
            run_pmgt_katyushax(inst, &cfg, w)?
        }
        PmgtSolver::Svrg => {
            let w = need_w()?;
            let cfg = default_hyperparams(inst, w.lambda2(), &req)?.with_stop_below(stop);
            run_pmgt_svrg(inst, &cfg, w)?
        }
        PmgtSolver::CentralizedSvrg => {
            let single = inst.single_shard()?;
            let req = HyperparamRequest {
                rounds: Some(0),
                ..req
            };
            let cfg = default_hyperparams(&single, 0.0, &req)?.with_stop_below(stop);
            run_centralized_svrg(&single, &cfg)?
        }
        PmgtSolver::Pgextra => run_pgextra(inst, &baseline(), need_w()?)?,
        PmgtSolver::Nids => run_nids(inst, &baseline(), need_w()?)?,
    };
    Ok(trace)
}

/// Runs `solver` on `problem`. `gossip` may be null for the centralized
/// solver. `options` may be null for the defaults.
#[no_mangle]
pub unsafe extern "C" fn pmgt_run_solver(
    problem: *const PmgtProblem,
    gossip: *const PmgtGossip,
    solver: PmgtSolver,
    options: *const PmgtSolverOptions,
    out: *mut *mut PmgtTrace,
) -> PmgtStatus {
    guard(|| {
        let inst = &deref(problem, "problem")?.0;
        let w = gossip.as_ref().map(|g| &g.0);
        let opts = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| pmgt_solver_options_default());
        emit(out, PmgtTrace(run(inst, w, solver, &opts)?))
    })
}

// ----------------------------------------------------------------- traces

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PmgtTraceRow {
    pub epoch: usize,
    pub sfo: u64,
    pub comm: u64,
    pub objective: f64,
    /// NaN when no reference optimum is known.
    pub subopt: f64,
    pub consensus: f64,
}

/// Number of rows (initial point included), or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pmgt_trace_len(t: *const PmgtTrace) -> usize {
    t.as_ref().map_or(0, |t| t.0.rows.len())
}

#[no_mangle]
pub unsafe extern "C" fn pmgt_trace_row(
    t: *const PmgtTrace,
    index: usize,
    out: *mut PmgtTraceRow,
) -> PmgtStatus {
    guard(|| {
        let t = &deref(t, "trace")?.0;
        let r = t
            .rows
            .get(index)
            .ok_or_else(|| invalid(format!("row {index} >= {}", t.rows.len())))?;
        write_out(
            out,
            PmgtTraceRow {
                epoch: r.epoch,
                sfo: r.sfo,
                comm: r.comm,
                objective: r.objective,
                subopt: t.suboptimality(r).unwrap_or(f64::NAN),
                consensus: r.consensus,
            },
        )
    })
}

/// Reference optimum, or NaN when unknown.
#[no_mangle]
pub unsafe extern "C" fn pmgt_trace_f_star(t: *const PmgtTrace) -> f64 {
    t.as_ref().and_then(|t| t.0.f_star).unwrap_or(f64::NAN)
}

/// Copies the final network-average iterate into `out` (`len` doubles,
/// which must equal the problem dimension).
#[no_mangle]
pub unsafe extern "C" fn pmgt_trace_solution(
    t: *const PmgtTrace,
    out: *mut f64,
    len: usize,
) -> PmgtStatus {
    guard(|| {
        let t = &deref(t, "trace")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != t.solution.len() {
            return Err(Fail(
                PmgtStatus::DimensionMismatch,
                format!("solution has {} entries, buffer {len}", t.solution.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&t.solution);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pmgt_trace_write_csv(
    t: *const PmgtTrace,
    path: *const c_char,
    comm_weight: f64,
) -> PmgtStatus {
    guard(|| {
        let t = &deref(t, "trace")?.0;
        Ok(emit_csv(t, comm_weight, c_path(path, "path")?)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn pmgt_trace_free(t: *mut PmgtTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

// ------------------------------------------------------------- experiments

/// Runs a JSON experiment config. A non-null `out_dir` overrides the
/// config's output directory.
#[no_mangle]
pub unsafe extern "C" fn pmgt_run_experiment_json(
    json: *const c_char,
    out_dir: *const c_char,
) -> PmgtStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| invalid("config is not UTF-8"))?;
        let mut cfg = ExperimentConfig::from_json(text)?;
        if !out_dir.is_null() {
            cfg.output = Some(c_path(out_dir, "out_dir")?);
        }
        run_experiment(&cfg)?;
        Ok(())
    })
}
