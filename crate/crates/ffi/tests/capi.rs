use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use pmgt_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pmgt_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn problem(rows: usize, cols: usize, m: usize) -> *mut PmgtProblem {
    let mut p = ptr::null_mut();
    let status = unsafe { pmgt_problem_bernoulli(rows, cols, 1, m, 2.0, 0, &mut p) };
    assert_eq!(status, PmgtStatus::Ok, "{}", last_error());
    p
}

fn ring(m: usize) -> *mut PmgtGossip {
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { pmgt_gossip_lazy_ring(m, 0.5, &mut g) },
        PmgtStatus::Ok
    );
    g
}

#[test]
fn gossip_handles() {
    unsafe {
        let g = ring(4);
        assert_eq!(pmgt_gossip_agents(g), 4);
        assert!((pmgt_gossip_lambda2(g) - 0.5).abs() < 1e-12);

        let x = [1.0, 0.0];
        let mut out = [0.0; 2];
        let mut avg = ptr::null_mut();
        let w = [0.5; 4];
        assert_eq!(
            pmgt_gossip_from_weights(2, w.as_ptr(), &mut avg),
            PmgtStatus::Ok
        );
        assert_eq!(
            pmgt_fast_mix(avg, x.as_ptr(), 1, 1, out.as_mut_ptr()),
            PmgtStatus::Ok
        );
        assert!((out[0] - 0.25).abs() < 1e-14 && (out[1] - 0.75).abs() < 1e-14);

        let mut rho = 0.0;
        assert_eq!(pmgt_contraction_bound(0.5, 0, &mut rho), PmgtStatus::Ok);
        assert!((rho - 14f64.sqrt()).abs() < 1e-12);
        let mut rounds = 0;
        assert_eq!(
            pmgt_min_rounds_for_rho(0.5, 0.1, &mut rounds),
            PmgtStatus::Ok
        );
        assert!(rounds > 0);

        pmgt_gossip_free(g);
        pmgt_gossip_free(avg);
        pmgt_gossip_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(pmgt_gossip_lazy_ring(5, 0.2, &mut g), PmgtStatus::Domain);
        assert!(g.is_null());
        assert!(last_error().contains("spectrum"), "{}", last_error());

        assert_eq!(
            pmgt_gossip_lazy_ring(4, 0.5, ptr::null_mut()),
            PmgtStatus::NullPointer
        );
        assert!(last_error().contains("null"));

        let asym = [0.6, 0.4, 0.5, 0.5];
        assert_eq!(
            pmgt_gossip_from_weights(2, asym.as_ptr(), &mut g),
            PmgtStatus::Domain
        );
        assert_eq!(
            pmgt_gossip_from_weights(2, ptr::null(), &mut g),
            PmgtStatus::NullPointer
        );
        assert_eq!(
            pmgt_gossip_random_two_neighbor(2, 0, &mut g),
            PmgtStatus::InvalidArgument
        );

        let mut p = ptr::null_mut();
        // 10 rows cannot be split across 4 agents
        assert_eq!(
            pmgt_problem_bernoulli(10, 3, 0, 4, 2.0, 0, &mut p),
            PmgtStatus::InvalidArgument
        );
        assert_eq!(
            pmgt_problem_bernoulli(16, 3, 0, 4, -1.0, 0, &mut p),
            PmgtStatus::Domain
        );

        let missing = CString::new("/nonexistent/data.libsvm").unwrap();
        assert_eq!(
            pmgt_problem_libsvm(missing.as_ptr(), 0, 0, 1, 2.0, 0, &mut p),
            PmgtStatus::Io
        );

        assert_eq!(
            pmgt_run_experiment_json(ptr::null(), ptr::null()),
            PmgtStatus::NullPointer
        );
        let bad = CString::new("{not json").unwrap();
        assert_eq!(
            pmgt_run_experiment_json(bad.as_ptr(), ptr::null()),
            PmgtStatus::Config
        );

        assert_eq!(pmgt_trace_len(ptr::null()), 0);
        assert!(pmgt_trace_f_star(ptr::null()).is_nan());
        assert!(pmgt_gossip_lambda2(ptr::null()).is_nan());
    }
}

#[test]
fn problem_queries() {
    unsafe {
        let p = problem(256, 6, 4);
        let (mut m, mut n, mut d) = (0, 0, 0);
        assert_eq!(pmgt_problem_dims(p, &mut m, &mut n, &mut d), PmgtStatus::Ok);
        assert_eq!((m, n, d), (4, 64, 6));

        let mut c = PmgtConstants::default();
        assert_eq!(pmgt_problem_constants(p, &mut c), PmgtStatus::Ok);
        assert!(c.sigma_f > 0.0 && c.l_smooth >= c.sigma_f && c.kappa > 1.0);

        let mut x = [0.0; 6];
        assert_eq!(pmgt_problem_minimizer(p, x.as_mut_ptr()), PmgtStatus::Ok);
        let (mut f_star, mut f0) = (0.0, 0.0);
        assert_eq!(
            pmgt_problem_objective(p, x.as_ptr(), &mut f_star),
            PmgtStatus::Ok
        );
        assert_eq!(
            pmgt_problem_objective(p, [0.0; 6].as_ptr(), &mut f0),
            PmgtStatus::Ok
        );
        assert!(f_star < f0);

        let mut q = ptr::null_mut();
        assert_eq!(pmgt_problem_regularize(p, 0.5, &mut q), PmgtStatus::Ok);
        let mut cq = PmgtConstants::default();
        pmgt_problem_constants(q, &mut cq);
        assert!((cq.sigma - c.sigma - 0.5).abs() < 1e-12);
        assert_eq!(pmgt_problem_regularize(p, 0.0, &mut q), PmgtStatus::Domain);

        pmgt_problem_free(q);
        pmgt_problem_free(p);
    }
}

#[test]
fn solvers_produce_traces() {
    unsafe {
        let p = problem(256, 6, 4);
        let g = ring(4);
        let mut opts = pmgt_solver_options_default();
        opts.epochs = 30;
        opts.batch = 4;
        opts.eta = 0.1;
        opts.step = 0.2;
        for solver in [
            PmgtSolver::Katyushax,
            PmgtSolver::Svrg,
            PmgtSolver::CentralizedSvrg,
            PmgtSolver::Pgextra,
            PmgtSolver::Nids,
        ] {
            let mut t = ptr::null_mut();
            let status = pmgt_run_solver(p, g, solver, &opts, &mut t);
            assert_eq!(status, PmgtStatus::Ok, "{solver:?}: {}", last_error());
            assert_eq!(pmgt_trace_len(t), 31);
            let (mut first, mut last) = (PmgtTraceRow::default(), PmgtTraceRow::default());
            assert_eq!(pmgt_trace_row(t, 0, &mut first), PmgtStatus::Ok);
            assert_eq!(pmgt_trace_row(t, 30, &mut last), PmgtStatus::Ok);
            assert!(last.subopt < first.subopt, "{solver:?}");
            assert!(pmgt_trace_f_star(t).is_finite());
            assert_eq!(
                pmgt_trace_row(t, 31, &mut last),
                PmgtStatus::InvalidArgument
            );

            let mut x = [0.0; 6];
            assert_eq!(pmgt_trace_solution(t, x.as_mut_ptr(), 6), PmgtStatus::Ok);
            let mut f = 0.0;
            pmgt_problem_objective(p, x.as_ptr(), &mut f);
            // centralized runs sum the components in a different order
            assert!((f - last.objective).abs() <= 1e-12 * f.abs(), "{solver:?}");
            assert_eq!(
                pmgt_trace_solution(t, x.as_mut_ptr(), 5),
                PmgtStatus::DimensionMismatch
            );
            pmgt_trace_free(t);
        }

        let mut t = ptr::null_mut();
        assert_eq!(
            pmgt_run_solver(p, ptr::null(), PmgtSolver::Katyushax, &opts, &mut t),
            PmgtStatus::NullPointer
        );
        let g3 = ring(3);
        assert_eq!(
            pmgt_run_solver(p, g3, PmgtSolver::Svrg, &opts, &mut t),
            PmgtStatus::DimensionMismatch
        );
        opts.eta = -1.0;
        opts.tau = 2.0;
        assert_ne!(
            pmgt_run_solver(p, g, PmgtSolver::Katyushax, &opts, &mut t),
            PmgtStatus::Ok
        );
        pmgt_gossip_free(g3);
        pmgt_gossip_free(g);
        pmgt_problem_free(p);
    }
}

#[test]
fn csv_and_experiment_outputs() {
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let p = problem(64, 4, 2);
        let g = ring(2);
        let mut opts = pmgt_solver_options_default();
        opts.epochs = 3;
        let mut t = ptr::null_mut();
        assert_eq!(
            pmgt_run_solver(p, g, PmgtSolver::Svrg, &opts, &mut t),
            PmgtStatus::Ok
        );
        let path = CString::new(dir.path().join("svrg.csv").to_str().unwrap()).unwrap();
        assert_eq!(pmgt_trace_write_csv(t, path.as_ptr(), 1.0), PmgtStatus::Ok);
        let text = std::fs::read_to_string(dir.path().join("svrg.csv")).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("solver,epoch,sfo,comm,cost,subopt,consensus"));
        pmgt_trace_free(t);
        pmgt_gossip_free(g);
        pmgt_problem_free(p);

        let json = CString::new(
            r#"{"problem": {"dataset": {"kind": "bernoulli", "rows": 64, "cols": 4, "seed": 1},
                           "m": 4, "r": 2.0},
               "gossip": {"kind": "lazy_ring", "laziness": 0.5},
               "solvers": [{"name": "pmgt_katyushax"}, {"name": "nids"}],
               "epochs": 2}"#,
        )
        .unwrap();
        let out = CString::new(dir.path().join("exp").to_str().unwrap()).unwrap();
        assert_eq!(
            pmgt_run_experiment_json(json.as_ptr(), out.as_ptr()),
            PmgtStatus::Ok,
            "{}",
            last_error()
        );
        assert!(dir.path().join("exp/manifest.json").exists());
        assert!(dir.path().join("exp/nids.csv").exists());
    }
}

#[test]
fn generated_header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pmgt.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "PMGT_STATUS_OK = 0",
        "PMGT_STATUS_PANIC = 10",
        "typedef struct PmgtGossip PmgtGossip",
        "typedef struct PmgtProblem PmgtProblem",
        "typedef struct PmgtTrace PmgtTrace",
        "pmgt_last_error",
        "pmgt_run_solver",
        "pmgt_trace_solution",
        "pmgt_run_experiment_json",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // compile the header as C when a compiler is around
    if let Ok(cc) = which_cc() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("use.c");
        std::fs::write(
            &src,
            "#include \"pmgt.h\"\nint main(void) { PmgtSolverOptions o = pmgt_solver_options_default(); return (int)o.epochs == 0; }\n",
        )
        .unwrap();
        let status = Command::new(cc)
            .args(["-std=c99", "-fsyntax-only", "-Wall", "-Werror", "-I"])
            .arg(header.parent().unwrap())
            .arg(&src)
            .status()
            .unwrap();
        assert!(status.success());
    }
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|cc| {
            Command::new(cc)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .ok_or(())
}
