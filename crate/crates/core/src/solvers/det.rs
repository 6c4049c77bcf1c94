//! Deterministic node-averaged solver.

use super::generic::solve_on_decomposition;
use super::randomized::ElectStats;
use super::timing::{dataflow_times, Schedule};
use super::{SolverConfig, SolverError};
use crate::decomp::{compute_decomposition, ColoringZ, DecompParams, DecompositionState, NoHooks, TraceRow};
use crate::engine::{compute_distance_coloring, RunResult};
use crate::lcl::{check_solution, choose_labels_single_node, uniform_inputs, FeasibleFunction, LclSpec, Verdict};
use crate::tree::{subdivide_edges, NodeColor, Tree};
use crate::Label;

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Per node of the input tree: termination round and the labels of its
    /// incident edges of the subdivided tree, in port order.
    pub run: RunResult<Vec<Label>>,
    /// Per edge of the subdivided tree.
    pub labels: Vec<Label>,
    pub verdict: Verdict,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    pub state: DecompositionState,
    pub schedule: Schedule,
    /// Randomized compress instances that needed the fallback split.
    pub failures: usize,
    /// Nodes with `T_v > t * i_mark + T_col`.
    pub bound_violations: usize,
    /// `unmarked(i + 5) <= 0.95 unmarked(i)` for all iterations `i >= 5`.
    pub decay_ok: bool,
    /// Fitted per-iteration decay factor of the unmarked count.
    pub sigma: Option<f64>,
    pub elect: Option<ElectStats>,
}

impl SolveReport {
    pub fn avg_rounds(&self) -> f64 {
        self.run.average_f64()
    }

    pub fn max_rounds(&self) -> usize {
        self.run.rounds_total
    }
}

/// Constant `t` of the per-iteration termination bound.
pub fn termination_slope(schedule: &Schedule, ell: usize) -> usize {
    schedule.t_iter() + 2 * (schedule.gamma + 2) * (2 * ell + 1)
}

pub(crate) fn single_node(spec: &LclSpec, tree: &Tree, ids: &[u64]) -> Result<SolveReport, SolverError> {
    choose_labels_single_node(spec, NodeColor::White, &[], None)?;
    let bt = subdivide_edges(tree);
    let state = DecompositionState::new(tree, ids);
    Ok(SolveReport {
        run: RunResult::new(vec![0], vec![Vec::new()]),
        labels: Vec::new(),
        verdict: check_solution(spec, &bt, &[], &[])?,
        iterations: 0,
        trace: Vec::new(),
        state,
        schedule: Schedule::randomized(1),
        failures: 0,
        bound_violations: 0,
        decay_ok: true,
        sigma: None,
        elect: None,
    })
}

/// Decay check and least-squares fit of `ln unmarked` against the iteration.
pub(crate) fn unmarked_decay(n: usize, trace: &[TraceRow]) -> (bool, Option<f64>) {
    let unmarked: Vec<f64> = trace.iter().map(|r| (n - r.marked) as f64).collect();
    let mut ok = true;
    for i in 4..unmarked.len() {
        if i + 5 < unmarked.len() && unmarked[i] > 0.0 && unmarked[i + 5] > 0.95 * unmarked[i] {
            ok = false;
        }
    }
    let pts: Vec<(f64, f64)> = unmarked
        .iter()
        .enumerate()
        .filter(|(_, &u)| u > 0.0)
        .map(|(i, &u)| (i as f64, u.ln()))
        .collect();
    if pts.len() < 2 {
        return (ok, None);
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (ok, (sxx > 0.0).then(|| (sxy / sxx).exp()))
}

pub(crate) struct Assembled {
    pub run: RunResult<Vec<Label>>,
    pub labels: Vec<Label>,
    pub verdict: Verdict,
}

pub(crate) fn assemble(
    spec: &LclSpec,
    f: &dyn FeasibleFunction,
    tree: &Tree,
    state: &DecompositionState,
    schedule: &Schedule,
    done: Option<&[Option<usize>]>,
) -> Result<Assembled, SolverError> {
    let bt = subdivide_edges(tree);
    let inputs = uniform_inputs(&bt);
    let sol = solve_on_decomposition(spec, f, tree, &bt, &inputs, state)?;
    let assign: Vec<usize> = (0..tree.node_count())
        .map(|v| match done.and_then(|d| d[v]) {
            Some(t) => t,
            None => schedule.assign_time(state.assigned[v]),
        })
        .collect();
    let times = dataflow_times(tree, &sol.units, &assign, done);
    let outputs = (0..tree.node_count())
        .map(|v| bt.tree().incident_edges(v).iter().map(|&e| sol.labels[e]).collect())
        .collect();
    let opt: Vec<Option<Label>> = sol.labels.iter().map(|&l| Some(l)).collect();
    let verdict = check_solution(spec, &bt, &inputs, &opt)?;
    Ok(Assembled { run: RunResult::new(times, outputs), labels: sol.labels, verdict })
}

/// Distance coloring, decomposition with coloring-based compress, label-set
/// propagation and top-down label choice with early termination below
/// local maxima.
pub fn solve_deterministic_avg(
    spec: &LclSpec,
    f: &dyn FeasibleFunction,
    tree: &Tree,
    ids: &[u64],
    config: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    config.validate()?;
    let n = tree.node_count();
    if n == 1 {
        return single_node(spec, tree, ids);
    }
    let ell = config.ell;
    let (coloring, col_rounds) = compute_distance_coloring(tree, ids, config.s())?;
    let t_col = col_rounds.iter().copied().max().unwrap_or(0);
    let mut chooser = ColoringZ { colors: &coloring.colors, palette: coloring.palette_size, ell };
    let (state, trace) = compute_decomposition(tree, ids, DecompParams::new(ell), &mut chooser, &mut NoHooks)?;
    let schedule = Schedule::deterministic(t_col, ell, coloring.palette_size);
    let a = assemble(spec, f, tree, &state, &schedule, None)?;
    let t = termination_slope(&schedule, ell);
    let bound_violations = (0..n)
        .filter(|&v| a.run.termination_round[v] > t * state.mark_iteration[v] as usize + t_col)
        .count();
    let (decay_ok, sigma) = unmarked_decay(n, &trace);
    Ok(SolveReport {
        run: a.run,
        labels: a.labels,
        verdict: a.verdict,
        iterations: trace.len(),
        trace,
        state,
        schedule,
        failures: 0,
        bound_violations,
        decay_ok,
        sigma,
        elect: None,
    })
}
