//! Experiment harness: instance families, solver dispatch, CSV rows and
//! log-log slope fits.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::node_averaged_complexity;
use crate::lcl::{check_solution, solve_diameter, uniform_inputs, DiameterOutcome, LclSpec, ThreeColoringFunction};
use crate::solvers::{
    solve_deterministic_avg, solve_hierarchical_2half, solve_randomized_avg, solve_worst_case_baseline,
    BaselineProblem, Mode, SolverConfig,
};
use crate::tree::{
    bfs_distances, generate_complete_tree, generate_hierarchical_worst_case, generate_path, generate_random_tree,
    hierarchical_construction_levels, subdivide_edges, IdAssignment, Tree,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("unknown {kind} `{value}`")]
    Unknown { kind: &'static str, value: String },
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("{solver} does not solve {problem}")]
    Unsupported { problem: ProblemId, solver: SolverId },
    #[error("slope fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("nonpositive value in slope fit: ({0}, {1})")]
    Nonpositive(f64, f64),
    #[error("{0}")]
    Io(String),
}

macro_rules! named_enum {
    ($name:ident, $kind:literal, { $($var:ident => $s:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $s)] $var),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$var => $s),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = BenchError;
            fn from_str(s: &str) -> Result<$name, BenchError> {
                match s {
                    $($s => Ok($name::$var),)+
                    _ => Err(BenchError::Unknown { kind: $kind, value: s.to_string() }),
                }
            }
        }
    };
}

named_enum!(ProblemId, "problem", { ThreeColoring => "3col", TwoHalf => "2half" });
named_enum!(SolverId, "solver", { DetAvg => "det-avg", RandAvg => "rand-avg", Baseline => "baseline", DiamOracle => "diam-oracle" });
named_enum!(Family, "family", { Path => "path", Complete => "complete", Random => "random", Hier => "hier" });

fn default_k() -> usize {
    2
}
fn default_ell() -> usize {
    2
}
fn default_c_fail() -> u32 {
    2
}
fn default_c_phase() -> f64 {
    4.0
}
fn default_max_degree() -> usize {
    4
}

/// A sweep over sizes and seeds, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub problem: ProblemId,
    pub solver: SolverId,
    pub family: Family,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_ell")]
    pub ell: usize,
    #[serde(default = "default_c_fail")]
    pub c_fail: u32,
    #[serde(default = "default_c_phase")]
    pub c_phase: f64,
    /// Degree cap of the random family.
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
    /// Off by default so that reruns give identical files.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl ExperimentPlan {
    pub fn new(problem: ProblemId, solver: SolverId, family: Family, sizes: Vec<usize>, seeds: Vec<u64>) -> ExperimentPlan {
        ExperimentPlan {
            problem,
            solver,
            family,
            sizes,
            seeds,
            out: None,
            k: default_k(),
            ell: default_ell(),
            c_fail: default_c_fail(),
            c_phase: default_c_phase(),
            max_degree: default_max_degree(),
            record_wall_time: false,
        }
    }

    pub fn parse(text: &str) -> Result<ExperimentPlan, BenchError> {
        let plan: ExperimentPlan = serde_json::from_str(text).map_err(|e| BenchError::Plan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::Plan("sizes must be non-empty and strictly increasing".into()));
        }
        if self.sizes[0] == 0 {
            return Err(BenchError::Plan("sizes must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(BenchError::Plan("at least one seed is needed".into()));
        }
        if self.k == 0 {
            return Err(BenchError::Plan("k must be at least 1".into()));
        }
        if self.max_degree < 2 {
            return Err(BenchError::Plan("max_degree must be at least 2".into()));
        }
        self.solver_config(0).validate().map_err(|e| BenchError::Plan(e.to_string()))?;
        check_supported(self.problem, self.solver)
    }

    pub fn solver_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            ell: self.ell,
            c_fail: self.c_fail,
            c_phase: self.c_phase,
            mode: if self.solver == SolverId::RandAvg { Mode::Randomized } else { Mode::Deterministic },
            seed,
            coloring_distance: None,
        }
    }
}

pub fn check_supported(problem: ProblemId, solver: SolverId) -> Result<(), BenchError> {
    match (problem, solver) {
        (ProblemId::TwoHalf, SolverId::RandAvg | SolverId::DiamOracle) => Err(BenchError::Unsupported { problem, solver }),
        _ => Ok(()),
    }
}

/// Instance of the family with about `n` nodes. Complete trees are binary
/// with `2^d - 1 <= n` nodes for the largest such `d`; the hierarchical
/// family uses the largest `s` whose instance has at most `n` nodes.
pub fn build_instance(family: Family, n: usize, seed: u64, k: usize, max_degree: usize) -> Tree {
    match family {
        Family::Path => generate_path(n),
        Family::Random => generate_random_tree(n, max_degree, seed),
        Family::Complete => {
            let depth = (usize::BITS - (n + 1).leading_zeros()).saturating_sub(2);
            generate_complete_tree(2, depth).expect("binary tree")
        }
        Family::Hier => generate_hierarchical_worst_case(k, hier_s(k, n)),
    }
}

/// Largest `s >= 1` with at most `n` nodes in the hierarchical instance.
pub fn hier_s(k: usize, n: usize) -> usize {
    let size = |s: usize| hierarchical_construction_levels(k, s).len();
    let (mut lo, mut hi) = (1usize, 2usize);
    while size(hi) <= n {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if size(mid) <= n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Exact average in decimal with six fractional digits, rounded half up.
pub fn format_ratio(r: Ratio<u64>) -> String {
    let (num, den) = (*r.numer() as u128, *r.denom() as u128);
    let scaled = (num * 1_000_000 * 2 + den) / (2 * den);
    format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
}

/// One run. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub problem: ProblemId,
    pub solver: SolverId,
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub avg_rounds: String,
    pub max_rounds: usize,
    pub checker_ok: bool,
    pub iterations: usize,
    pub wall_time_ms: u64,
    #[serde(skip)]
    pub avg: Ratio<u64>,
    #[serde(skip)]
    pub failures: usize,
    #[serde(skip)]
    pub error: Option<String>,
}

/// Result of a single solve, before it becomes a row.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub termination: Vec<usize>,
    pub checker_ok: bool,
    pub iterations: usize,
    pub failures: usize,
    /// Output in the text form read by `check`, when the solver exposes it.
    pub labels: Option<String>,
}

fn label_text<T: fmt::Display>(labels: &[T]) -> String {
    let mut s = String::with_capacity(3 * labels.len());
    for l in labels {
        s.push_str(&l.to_string());
        s.push('\n');
    }
    s
}

/// Runs one solver on one instance with IDs drawn from `seed`.
pub fn run_once(
    problem: ProblemId,
    solver: SolverId,
    tree: &Tree,
    seed: u64,
    config: &SolverConfig,
    k: usize,
) -> Result<Outcome, String> {
    check_supported(problem, solver).map_err(|e| e.to_string())?;
    let n = tree.node_count();
    let ids = IdAssignment::from_seed(n, seed);
    let ids = ids.as_slice();
    let spec = LclSpec::three_coloring(tree.max_degree().max(1));
    let f = ThreeColoringFunction;
    let err = |e: crate::solvers::SolverError| e.to_string();
    match (problem, solver) {
        (ProblemId::ThreeColoring, SolverId::DetAvg) => {
            let r = solve_deterministic_avg(&spec, &f, tree, ids, config).map_err(err)?;
            Ok(Outcome {
                labels: Some(label_text(&r.labels)),
                termination: r.run.termination_round,
                checker_ok: r.verdict.is_accept(),
                iterations: r.iterations,
                failures: 0,
            })
        }
        (ProblemId::ThreeColoring, SolverId::RandAvg) => {
            let r = solve_randomized_avg(&spec, &f, tree, ids, config).map_err(err)?;
            Ok(Outcome {
                labels: Some(label_text(&r.labels)),
                termination: r.run.termination_round,
                checker_ok: r.verdict.is_accept(),
                iterations: r.iterations,
                failures: r.failures,
            })
        }
        (ProblemId::ThreeColoring, SolverId::Baseline) => {
            let r = solve_worst_case_baseline(BaselineProblem::Lcl { spec: &spec, f: &f }, tree, ids, config).map_err(err)?;
            Ok(Outcome {
                termination: r.run.termination_round,
                checker_ok: r.accepted,
                iterations: r.iterations,
                failures: 0,
                labels: None,
            })
        }
        (ProblemId::ThreeColoring, SolverId::DiamOracle) => {
            let bt = subdivide_edges(tree);
            let inputs = uniform_inputs(&bt);
            let (ok, text) = match solve_diameter(&spec, &bt, &inputs) {
                DiameterOutcome::Solved(labels) => {
                    let opt: Vec<_> = labels.iter().map(|&l| Some(l)).collect();
                    let ok = check_solution(&spec, &bt, &inputs, &opt).map_err(|e| e.to_string())?.is_accept();
                    (ok, Some(label_text(&labels)))
                }
                DiameterOutcome::Unsolvable { .. } => (false, None),
            };
            Ok(Outcome { termination: vec![diameter(tree); n], checker_ok: ok, iterations: 0, failures: 0, labels: text })
        }
        (ProblemId::TwoHalf, SolverId::DetAvg) => {
            let r = solve_hierarchical_2half(tree, ids, k, config.c_phase).map_err(err)?;
            Ok(Outcome {
                termination: r.run.termination_round,
                checker_ok: r.verdict.is_accept() && r.participation_ok,
                iterations: k,
                failures: 0,
                labels: Some(label_text(&r.labels)),
            })
        }
        (ProblemId::TwoHalf, SolverId::Baseline) => {
            let r = solve_worst_case_baseline(BaselineProblem::TwoHalf { k }, tree, ids, config).map_err(err)?;
            Ok(Outcome {
                termination: r.run.termination_round,
                checker_ok: r.accepted,
                iterations: r.iterations,
                failures: 0,
                labels: None,
            })
        }
        (ProblemId::TwoHalf, _) => unreachable!("rejected by check_supported"),
    }
}

/// Diameter in edges, by two BFS sweeps.
pub fn diameter(tree: &Tree) -> usize {
    let d0 = bfs_distances(tree, 0);
    let far = (0..d0.len()).max_by_key(|&v| d0[v]).unwrap_or(0);
    bfs_distances(tree, far).into_iter().max().unwrap_or(0)
}

fn make_row(plan: &ExperimentPlan, n: usize, seed: u64) -> ResultRow {
    let tree = build_instance(plan.family, n, seed, plan.k, plan.max_degree);
    let start = Instant::now();
    let res = run_once(plan.problem, plan.solver, &tree, seed, &plan.solver_config(seed), plan.k);
    let ms = if plan.record_wall_time { start.elapsed().as_millis() as u64 } else { 0 };
    let mut row = ResultRow {
        problem: plan.problem,
        solver: plan.solver,
        family: plan.family,
        n: tree.node_count(),
        seed,
        avg_rounds: format_ratio(Ratio::from_integer(0)),
        max_rounds: 0,
        checker_ok: false,
        iterations: 0,
        wall_time_ms: ms,
        avg: Ratio::from_integer(0),
        failures: 0,
        error: None,
    };
    match res {
        Ok(o) => {
            let avg = node_averaged_complexity(&crate::engine::RunResult::new(o.termination.clone(), vec![(); o.termination.len()]));
            row.avg = avg;
            row.avg_rounds = format_ratio(avg);
            row.max_rounds = o.termination.iter().copied().max().unwrap_or(0);
            row.checker_ok = o.checker_ok;
            row.iterations = o.iterations;
            row.failures = o.failures;
        }
        Err(e) => row.error = Some(e),
    }
    row
}

/// Number of worker threads: `LCLAVG_THREADS` if set and positive, else the
/// rayon default.
pub fn thread_count() -> usize {
    std::env::var("LCLAVG_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// One row per `(size, seed)`, sorted by `(n, seed)`. Failed solves give
/// rows with `checker_ok = false` and the error attached.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<ResultRow>, BenchError> {
    plan.validate()?;
    let jobs: Vec<(usize, u64)> = plan.sizes.iter().flat_map(|&n| plan.seeds.iter().map(move |&s| (n, s))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| BenchError::Io(e.to_string()))?;
    let mut rows: Vec<ResultRow> = pool.install(|| jobs.par_iter().map(|&(n, s)| make_row(plan, n, s)).collect());
    rows.sort_by_key(|r| (r.n, r.seed));
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], w: W) -> Result<(), BenchError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| BenchError::Io(e.to_string()))?;
    }
    wr.flush().map_err(|e| BenchError::Io(e.to_string()))
}

pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String, BenchError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| BenchError::Io(e.to_string()))
}

/// Ordinary least squares of `ln y` on `ln n`: `(slope, intercept, r²)`.
pub fn estimate_slope(points: &[(f64, f64)]) -> Result<(f64, f64, f64), BenchError> {
    if points.len() < 3 {
        return Err(BenchError::TooFewPoints(points.len()));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(BenchError::Nonpositive(x, y));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(BenchError::Plan("slope fit needs distinct sizes".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, intercept, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes() {
        let lin: Vec<_> = [10.0, 100.0, 1000.0, 1e4].iter().map(|&n| (n, n)).collect();
        assert!((estimate_slope(&lin).unwrap().0 - 1.0).abs() < 1e-9);
        let flat: Vec<_> = [10.0, 100.0, 1000.0].iter().map(|&n| (n, 7.0)).collect();
        let (s, _, r2) = estimate_slope(&flat).unwrap();
        assert!(s.abs() < 1e-9);
        assert_eq!(r2, 1.0);
        let cube: Vec<_> = [1e3, 1e4, 1e5].iter().map(|&n: &f64| (n, n.cbrt())).collect();
        assert!((estimate_slope(&cube).unwrap().0 - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(estimate_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(BenchError::Nonpositive(2.0, 0.0)));
        assert_eq!(estimate_slope(&[(1.0, 1.0)]), Err(BenchError::TooFewPoints(1)));
    }

    #[test]
    fn ratio_format() {
        assert_eq!(format_ratio(Ratio::new(1, 3)), "0.333333");
        assert_eq!(format_ratio(Ratio::new(2, 3)), "0.666667");
        assert_eq!(format_ratio(Ratio::new(57, 1)), "57.000000");
        assert_eq!(format_ratio(Ratio::new(1999999, 2000000)), "1.000000");
    }

    #[test]
    fn plan_parsing() {
        let p = ExperimentPlan::parse(r#"{"problem":"3col","solver":"det-avg","family":"path","sizes":[10,20],"seeds":[1]}"#).unwrap();
        assert_eq!(p.k, 2);
        assert_eq!(p.ell, 2);
        assert!(!p.record_wall_time);
        assert!(ExperimentPlan::parse(r#"{"problem":"3col","solver":"det-avg","family":"path","sizes":[20,10],"seeds":[1]}"#).is_err());
        assert!(ExperimentPlan::parse(r#"{"problem":"3col","solver":"det-avg","family":"path","sizes":[10],"seeds":[]}"#).is_err());
        assert!(ExperimentPlan::parse(r#"{"problem":"2half","solver":"rand-avg","family":"hier","sizes":[10],"seeds":[1]}"#).is_err());
        assert!(ExperimentPlan::parse(r#"{"problem":"4col","solver":"det-avg","family":"path","sizes":[10],"seeds":[1]}"#).is_err());
    }

    #[test]
    fn instance_sizes() {
        assert_eq!(build_instance(Family::Complete, 1 << 10, 0, 2, 4).node_count(), 1023);
        assert_eq!(build_instance(Family::Complete, 1023, 0, 2, 4).node_count(), 1023);
        assert_eq!(hier_s(2, 10_100), 100);
        assert_eq!(build_instance(Family::Hier, 10_099, 0, 2, 4).node_count(), 99 * 100);
        assert_eq!(build_instance(Family::Random, 500, 3, 2, 4).node_count(), 500);
    }

    #[test]
    fn rows_sorted_and_deterministic() {
        let mut plan = ExperimentPlan::new(ProblemId::ThreeColoring, SolverId::DetAvg, Family::Random, vec![50, 200, 400], vec![5, 1, 3, 2, 4]);
        plan.max_degree = 3;
        let rows = run_experiment(&plan).unwrap();
        assert_eq!(rows.len(), 15);
        assert!(rows.windows(2).all(|w| (w[0].n, w[0].seed) < (w[1].n, w[1].seed)));
        for r in &rows {
            assert!(r.checker_ok, "{r:?}");
            assert!(r.avg <= Ratio::from_integer(r.max_rounds as u64));
        }
        let again = run_experiment(&plan).unwrap();
        assert_eq!(rows_to_csv(&rows).unwrap(), rows_to_csv(&again).unwrap());
        let csv = rows_to_csv(&rows[..1]).unwrap();
        assert!(csv.starts_with("problem,solver,family,n,seed,avg_rounds,max_rounds,checker_ok,iterations,wall_time_ms\n"));
    }

    #[test]
    fn every_pair_runs() {
        let t = generate_random_tree(60, 3, 9);
        let c = SolverConfig::default();
        for s in [SolverId::DetAvg, SolverId::RandAvg, SolverId::Baseline, SolverId::DiamOracle] {
            let o = run_once(ProblemId::ThreeColoring, s, &t, 9, &c, 2).unwrap();
            assert!(o.checker_ok, "{s}");
        }
        let h = generate_hierarchical_worst_case(2, 10);
        for s in [SolverId::DetAvg, SolverId::Baseline] {
            assert!(run_once(ProblemId::TwoHalf, s, &h, 1, &c, 2).unwrap().checker_ok, "{s}");
        }
        assert!(run_once(ProblemId::TwoHalf, SolverId::DiamOracle, &h, 1, &c, 2).is_err());
    }
}
