//! C ABI over `lclavg`.
//!
//! Trees and runs live behind opaque handles. Every fallible function
//! returns an `i32` status, `LCLAVG_OK` on success, and writes results
//! through out-pointers. Handles are released with the matching `_free`.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lclavg::bench::{build_instance, run_once, Family, ProblemId, SolverId};
use lclavg::solvers::{Mode, SolverConfig};
use lclavg::tree::Tree;

pub const LCLAVG_OK: i32 = 0;
pub const LCLAVG_ERR_NULL: i32 = -1;
pub const LCLAVG_ERR_INVALID_ARGUMENT: i32 = -2;
pub const LCLAVG_ERR_SOLVER: i32 = -3;
pub const LCLAVG_ERR_BUFFER_TOO_SMALL: i32 = -4;
pub const LCLAVG_ERR_PANIC: i32 = -5;

pub const LCLAVG_FAMILY_PATH: i32 = 0;
pub const LCLAVG_FAMILY_COMPLETE: i32 = 1;
pub const LCLAVG_FAMILY_RANDOM: i32 = 2;
pub const LCLAVG_FAMILY_HIER: i32 = 3;

pub const LCLAVG_PROBLEM_3COL: i32 = 0;
pub const LCLAVG_PROBLEM_2HALF: i32 = 1;

pub const LCLAVG_SOLVER_DET_AVG: i32 = 0;
pub const LCLAVG_SOLVER_RAND_AVG: i32 = 1;
pub const LCLAVG_SOLVER_BASELINE: i32 = 2;
pub const LCLAVG_SOLVER_DIAM_ORACLE: i32 = 3;

/// Opaque tree handle.
pub struct LclavgTree {
    tree: Tree,
}

/// Opaque result of one solve.
pub struct LclavgRun {
    termination: Vec<u64>,
    checker_ok: bool,
    iterations: usize,
    failures: usize,
}

fn guard(f: impl FnOnce() -> i32) -> i32 {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(LCLAVG_ERR_PANIC)
}

fn family(code: i32) -> Option<Family> {
    Some(match code {
        LCLAVG_FAMILY_PATH => Family::Path,
        LCLAVG_FAMILY_COMPLETE => Family::Complete,
        LCLAVG_FAMILY_RANDOM => Family::Random,
        LCLAVG_FAMILY_HIER => Family::Hier,
        _ => return None,
    })
}

fn problem(code: i32) -> Option<ProblemId> {
    Some(match code {
        LCLAVG_PROBLEM_3COL => ProblemId::ThreeColoring,
        LCLAVG_PROBLEM_2HALF => ProblemId::TwoHalf,
        _ => return None,
    })
}

fn solver(code: i32) -> Option<SolverId> {
    Some(match code {
        LCLAVG_SOLVER_DET_AVG => SolverId::DetAvg,
        LCLAVG_SOLVER_RAND_AVG => SolverId::RandAvg,
        LCLAVG_SOLVER_BASELINE => SolverId::Baseline,
        LCLAVG_SOLVER_DIAM_ORACLE => SolverId::DiamOracle,
        _ => return None,
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn lclavg_status_message(status: i32) -> *const c_char {
    let s: &'static CStr = match status {
        LCLAVG_OK => c"ok",
        LCLAVG_ERR_NULL => c"null pointer argument",
        LCLAVG_ERR_INVALID_ARGUMENT => c"invalid argument",
        LCLAVG_ERR_SOLVER => c"solver failed",
        LCLAVG_ERR_BUFFER_TOO_SMALL => c"buffer too small",
        LCLAVG_ERR_PANIC => c"internal panic",
        _ => c"unknown status",
    };
    s.as_ptr()
}

/// Generates a tree of the family with about `n` nodes. `k` is used by the
/// hierarchical family, the random family caps degrees at 4.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn lclavg_tree_generate(family_code: i32, n: usize, seed: u64, k: usize, out: *mut *mut LclavgTree) -> i32 {
    guard(|| {
        if out.is_null() {
            return LCLAVG_ERR_NULL;
        }
        let Some(f) = family(family_code) else { return LCLAVG_ERR_INVALID_ARGUMENT };
        if n == 0 || (f == Family::Hier && k == 0) {
            return LCLAVG_ERR_INVALID_ARGUMENT;
        }
        let tree = build_instance(f, n, seed, k, 4);
        *out = Box::into_raw(Box::new(LclavgTree { tree }));
        LCLAVG_OK
    })
}

/// Builds a tree from `edge_count` pairs stored flat in `edges`
/// (`u0 v0 u1 v1 ...`).
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable values (it may be null
/// when `edge_count` is 0) and `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn lclavg_tree_from_edges(
    n: usize,
    edges: *const u32,
    edge_count: usize,
    out: *mut *mut LclavgTree,
) -> i32 {
    guard(|| {
        if out.is_null() || (edges.is_null() && edge_count > 0) {
            return LCLAVG_ERR_NULL;
        }
        let flat: &[u32] = if edge_count == 0 { &[] } else { std::slice::from_raw_parts(edges, 2 * edge_count) };
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|c| (c[0] as usize, c[1] as usize)).collect();
        let mut deg = vec![0usize; n];
        for &(u, v) in &pairs {
            if u >= n || v >= n {
                return LCLAVG_ERR_INVALID_ARGUMENT;
            }
            deg[u] += 1;
            deg[v] += 1;
        }
        let cap = deg.iter().copied().max().unwrap_or(0).max(1);
        match Tree::from_edges(n, &pairs, cap) {
            Ok(tree) => {
                *out = Box::into_raw(Box::new(LclavgTree { tree }));
                LCLAVG_OK
            }
            Err(_) => LCLAVG_ERR_INVALID_ARGUMENT,
        }
    })
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `tree` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn lclavg_tree_node_count(tree: *const LclavgTree) -> usize {
    tree.as_ref().map_or(0, |t| t.tree.node_count())
}

/// # Safety
/// `tree` must be null or a live handle from this library, not used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn lclavg_tree_free(tree: *mut LclavgTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Solves `problem_code` on `tree` with `solver_code`. IDs and random coins
/// derive from `seed`. A run whose output the checker rejects still
/// succeeds; query it with `lclavg_run_checker_ok`.
///
/// # Safety
/// `tree` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn lclavg_solve(
    tree: *const LclavgTree,
    problem_code: i32,
    solver_code: i32,
    seed: u64,
    ell: usize,
    k: usize,
    out: *mut *mut LclavgRun,
) -> i32 {
    guard(|| {
        let (Some(t), false) = (tree.as_ref(), out.is_null()) else { return LCLAVG_ERR_NULL };
        let (Some(p), Some(s)) = (problem(problem_code), solver(solver_code)) else { return LCLAVG_ERR_INVALID_ARGUMENT };
        let mode = if s == SolverId::RandAvg { Mode::Randomized } else { Mode::Deterministic };
        let cfg = SolverConfig { ell, seed, mode, ..SolverConfig::default() };
        if cfg.validate().is_err() || (p == ProblemId::TwoHalf && k == 0) || lclavg::bench::check_supported(p, s).is_err() {
            return LCLAVG_ERR_INVALID_ARGUMENT;
        }
        match run_once(p, s, &t.tree, seed, &cfg, k) {
            Ok(o) => {
                let run = LclavgRun {
                    termination: o.termination.iter().map(|&x| x as u64).collect(),
                    checker_ok: o.checker_ok,
                    iterations: o.iterations,
                    failures: o.failures,
                };
                *out = Box::into_raw(Box::new(run));
                LCLAVG_OK
            }
            Err(_) => LCLAVG_ERR_SOLVER,
        }
    })
}

/// Node-averaged termination round.
///
/// # Safety
/// `run` must be a live handle and `avg` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lclavg_run_avg_rounds(run: *const LclavgRun, avg: *mut f64) -> i32 {
    let (Some(r), false) = (run.as_ref(), avg.is_null()) else { return LCLAVG_ERR_NULL };
    let n = r.termination.len().max(1) as f64;
    *avg = r.termination.iter().map(|&t| t as f64).sum::<f64>() / n;
    LCLAVG_OK
}

/// Last termination round over all nodes.
///
/// # Safety
/// `run` must be a live handle and `max` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lclavg_run_max_rounds(run: *const LclavgRun, max: *mut u64) -> i32 {
    let (Some(r), false) = (run.as_ref(), max.is_null()) else { return LCLAVG_ERR_NULL };
    *max = r.termination.iter().copied().max().unwrap_or(0);
    LCLAVG_OK
}

/// Writes 1 if the checker accepted the output, else 0.
///
/// # Safety
/// `run` must be a live handle and `ok` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lclavg_run_checker_ok(run: *const LclavgRun, ok: *mut i32) -> i32 {
    let (Some(r), false) = (run.as_ref(), ok.is_null()) else { return LCLAVG_ERR_NULL };
    *ok = r.checker_ok as i32;
    LCLAVG_OK
}

/// Decomposition iterations (or `k` for the 2½-coloring) and randomized
/// compress fallbacks.
///
/// # Safety
/// `run` must be a live handle; both out-pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lclavg_run_stats(run: *const LclavgRun, iterations: *mut usize, failures: *mut usize) -> i32 {
    let Some(r) = run.as_ref() else { return LCLAVG_ERR_NULL };
    if iterations.is_null() || failures.is_null() {
        return LCLAVG_ERR_NULL;
    }
    *iterations = r.iterations;
    *failures = r.failures;
    LCLAVG_OK
}

/// Copies the per-node termination rounds into `buf`. `len` must be at
/// least the node count; `written` receives the node count either way.
///
/// # Safety
/// `run` must be a live handle, `buf` writable for `len` values (or null
/// with `len` 0), `written` null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn lclavg_run_termination_rounds(run: *const LclavgRun, buf: *mut u64, len: usize, written: *mut usize) -> i32 {
    let Some(r) = run.as_ref() else { return LCLAVG_ERR_NULL };
    if !written.is_null() {
        *written = r.termination.len();
    }
    if len < r.termination.len() {
        return LCLAVG_ERR_BUFFER_TOO_SMALL;
    }
    if buf.is_null() && !r.termination.is_empty() {
        return LCLAVG_ERR_NULL;
    }
    if !r.termination.is_empty() {
        ptr::copy_nonoverlapping(r.termination.as_ptr(), buf, r.termination.len());
    }
    LCLAVG_OK
}

/// # Safety
/// `run` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lclavg_run_free(run: *mut LclavgRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
