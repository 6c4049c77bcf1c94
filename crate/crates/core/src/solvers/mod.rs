//! End-to-end solvers: deterministic and randomized node-averaged solvers on
//! top of the decomposition, hierarchical 2½-coloring, and worst-case
//! baselines.

mod baseline;
mod det;
mod generic;
mod randomized;
mod timing;
mod twohalf;

pub use baseline::{solve_worst_case_baseline, BaselineProblem, BaselineRun};
pub use det::{solve_deterministic_avg, SolveReport};
pub use generic::{solve_on_decomposition, GenericSolution, Unit, Units};
pub use randomized::{
    elect_maximums, randomized_compress, solve_randomized_avg, split_long_path, CompressPathState, ElectStats,
    PathSplit, RandomZ,
};
pub use timing::{dataflow_times, Schedule};
pub use twohalf::{
    check_hierarchical_2half, compute_levels, compute_levels_distributed, gamma_schedule,
    solve_hierarchical_2half, HierLabel, HierVerdict, LevelAssignment, TwoHalfRun,
};

use thiserror::Error;

use crate::decomp::DecompError;
use crate::engine::EngineError;
use crate::lcl::LclError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("empty label-set at node {0}")]
    EmptyLabelSet(usize),
    #[error("edge {0} left without a label")]
    Unlabeled(usize),
    #[error("bad decomposition: {0}")]
    Decomposition(String),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Lcl(#[from] LclError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("level-k path at node {node} with {length} nodes would decline")]
    ForcedDecline { node: usize, length: usize },
    #[error("internal error: {0}")]
    Internal(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Deterministic,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub ell: usize,
    pub c_fail: u32,
    pub c_phase: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Distance of the coloring used by deterministic compress; `ell` when
    /// unset.
    pub coloring_distance: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig { ell: 2, c_fail: 2, c_phase: 4.0, mode: Mode::Deterministic, seed: 0, coloring_distance: None }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.ell == 0 {
            return Err(SolverError::Config("ell must be at least 1".into()));
        }
        if self.c_fail == 0 {
            return Err(SolverError::Config("c_fail must be at least 1".into()));
        }
        if !self.c_phase.is_finite() || self.c_phase <= 0.0 {
            return Err(SolverError::Config("c_phase must be positive".into()));
        }
        Ok(())
    }

    pub fn b(&self) -> usize {
        self.ell + 2
    }

    pub fn gamma(&self) -> usize {
        self.ell + 3
    }

    pub fn s(&self) -> usize {
        self.coloring_distance.unwrap_or(self.ell)
    }
}
