//! Worst-case baselines: every node waits for the whole computation.

use super::det::termination_slope;
use super::generic::solve_on_decomposition;
use super::timing::{dataflow_times, Schedule};
use super::twohalf::run_phases;
use super::{SolverConfig, SolverError};
use crate::decomp::{compute_decomposition, ColoringZ, DecompParams, NoHooks};
use crate::engine::{compute_distance_coloring, RunResult};
use crate::lcl::{check_solution, uniform_inputs, FeasibleFunction, LclSpec};
use crate::tree::{subdivide_edges, Tree};

#[derive(Clone, Copy)]
pub enum BaselineProblem<'a> {
    Lcl { spec: &'a LclSpec, f: &'a dyn FeasibleFunction },
    TwoHalf { k: usize },
}

#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub run: RunResult<()>,
    pub accepted: bool,
    pub iterations: usize,
}

/// LCLs: decomposition, then label-sets up and labels down with no node
/// stopping before the last one. 2½-coloring: phases with
/// `gamma_i = n^(1/k)` and a common end round.
pub fn solve_worst_case_baseline(
    problem: BaselineProblem<'_>,
    tree: &Tree,
    ids: &[u64],
    config: &SolverConfig,
) -> Result<BaselineRun, SolverError> {
    config.validate()?;
    let n = tree.node_count();
    match problem {
        BaselineProblem::TwoHalf { k } => {
            if k == 0 {
                return Err(SolverError::Config("k must be at least 1".into()));
            }
            let g = (n as f64).powf(1.0 / k as f64);
            let r = run_phases(tree, ids, k, &vec![g; k], config.c_phase, false)?;
            Ok(BaselineRun {
                run: RunResult::new(r.run.termination_round, vec![(); n]),
                accepted: r.verdict.is_accept(),
                iterations: k,
            })
        }
        BaselineProblem::Lcl { spec, f } => {
            if n == 1 {
                let acc = super::det::single_node(spec, tree, ids)?.verdict.is_accept();
                return Ok(BaselineRun { run: RunResult::new(vec![0], vec![()]), accepted: acc, iterations: 0 });
            }
            let ell = config.ell;
            let (coloring, col_rounds) = compute_distance_coloring(tree, ids, config.s())?;
            let t_col = col_rounds.iter().copied().max().unwrap_or(0);
            let mut chooser = ColoringZ { colors: &coloring.colors, palette: coloring.palette_size, ell };
            let (state, trace) = compute_decomposition(tree, ids, DecompParams::new(ell), &mut chooser, &mut NoHooks)?;
            let schedule = Schedule::deterministic(t_col, ell, coloring.palette_size);
            let bt = subdivide_edges(tree);
            let inputs = uniform_inputs(&bt);
            let sol = solve_on_decomposition(spec, f, tree, &bt, &inputs, &state)?;
            // nobody starts on label-sets before the decomposition is complete
            let last = trace.last().map_or(1, |r| r.iteration);
            let finished = t_col + schedule.gamma + (last as usize).saturating_sub(1) * termination_slope(&schedule, ell);
            let times = dataflow_times(tree, &sol.units, &vec![finished; n], None);
            let end = times.iter().copied().max().unwrap_or(0);
            let opt: Vec<_> = sol.labels.iter().map(|&l| Some(l)).collect();
            let accepted = check_solution(spec, &bt, &inputs, &opt)?.is_accept();
            Ok(BaselineRun { run: RunResult::new(vec![end; n], vec![(); n]), accepted, iterations: trace.len() })
        }
    }
}
