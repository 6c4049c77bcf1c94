//! Round schedule of the decomposition and the dataflow model of when each
//! node knows its label-set and its output.

use super::generic::Units;
use crate::decomp::{AssignEvent, Step};
use crate::tree::Tree;

/// Global schedule: the coloring first, then the initial rake, then
/// iterations of compress, rake and promote of fixed length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub t_col: usize,
    pub gamma: usize,
    /// Rounds to detect long paths and pick their local maxima.
    pub r_c: usize,
    /// Rounds of the promotion step.
    pub r_p: usize,
}

impl Schedule {
    pub fn deterministic(t_col: usize, ell: usize, palette: usize) -> Schedule {
        Schedule { t_col, gamma: ell + 3, r_c: (4 * ell + 9) + palette * ell + 1, r_p: 2 * (ell + 2) + 1 }
    }

    pub fn randomized(ell: usize) -> Schedule {
        Schedule { t_col: 0, gamma: ell + 3, r_c: (4 * ell + 9) + 1, r_p: 2 * (ell + 2) + 1 }
    }

    pub fn t_iter(&self) -> usize {
        self.r_c + self.gamma + self.r_p
    }

    /// First round of loop iteration `i >= 2`.
    pub fn iteration_start(&self, i: u32) -> usize {
        self.t_col + self.gamma + (i as usize - 2) * self.t_iter()
    }

    /// Round at which compress of iteration `i` has decided.
    pub fn compress_time(&self, i: u32) -> usize {
        self.iteration_start(i) + self.r_c
    }

    pub fn assign_time(&self, ev: AssignEvent) -> usize {
        match (ev.iteration, ev.step) {
            (_, Step::Unassigned) => self.t_col,
            (1, Step::Rake(j)) => self.t_col + j as usize,
            (i, Step::Compress) => self.compress_time(i),
            (i, Step::Rake(j)) => self.compress_time(i) + j as usize,
            (i, Step::Promote) => self.compress_time(i) + self.gamma + self.r_p,
        }
    }
}

/// Termination round of every node. `assign[v]` is when `v` knows its layer.
/// For units whose nodes all carry a `done` round, the output time is that
/// round, delayed only by label-sets of lower units.
pub fn dataflow_times(tree: &Tree, units: &Units, assign: &[usize], done: Option<&[Option<usize>]>) -> Vec<usize> {
    let m = units.units.len();
    let mut lset = vec![0usize; m];
    let mut ready = vec![0usize; m];
    for &u in &units.order {
        let unit = &units.units[u];
        let mut best = 0;
        for &x in &unit.nodes {
            let child = units
                .children_of(tree, u, x)
                .iter()
                .map(|&c| lset[units.unit_of[c]] + 1)
                .max()
                .unwrap_or(0);
            best = best.max(assign[x].max(child));
            ready[u] = ready[u].max(child);
        }
        lset[u] = best + unit.nodes.len() - 1;
    }
    let mut out = vec![0usize; m];
    for &u in units.order.iter().rev() {
        let unit = &units.units[u];
        let fixed = done.and_then(|d| {
            let times: Option<Vec<usize>> = unit.nodes.iter().map(|&x| d[x]).collect();
            times.map(|t| t.into_iter().max().unwrap_or(0))
        });
        out[u] = match fixed {
            Some(t) => t.max(ready[u]),
            None => {
                let above = unit.up.iter().map(|&(_, h)| out[units.unit_of[h]] + 1).max();
                match (above, unit.compress) {
                    (None, _) => lset[u],
                    (Some(a), false) => lset[u].max(a),
                    (Some(a), true) => lset[u].max(a) + unit.nodes.len(),
                }
            }
        };
    }
    (0..tree.node_count()).map(|v| out[units.unit_of[v]]).collect()
}
