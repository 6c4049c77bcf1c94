//! Hierarchical 2½-coloring: levels, the phase-based solver and the checker.

use std::collections::VecDeque;
use std::fmt;

use super::SolverError;
use crate::engine::{run_simulation, NodeAlgorithm, NodeContext, RunResult};
use crate::tree::Tree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HierLabel {
    W,
    B,
    E,
    D,
}

impl fmt::Display for HierLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HierLabel::W => "W",
            HierLabel::B => "B",
            HierLabel::E => "E",
            HierLabel::D => "D",
        };
        f.write_str(s)
    }
}

/// Level in `1..=k+1` per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelAssignment {
    pub k: usize,
    pub levels: Vec<usize>,
}

/// Sequential peeling: level `i` nodes have degree at most 2 once levels
/// below `i` are removed.
pub fn compute_levels(tree: &Tree, k: usize) -> LevelAssignment {
    let n = tree.node_count();
    let mut levels = vec![k + 1; n];
    let mut deg: Vec<usize> = (0..n).map(|v| tree.degree(v)).collect();
    for i in 1..=k {
        let peel: Vec<usize> = (0..n).filter(|&v| levels[v] == k + 1 && deg[v] <= 2).collect();
        for &v in &peel {
            levels[v] = i;
        }
        for &v in &peel {
            for &u in tree.neighbors(v) {
                deg[u] -= 1;
            }
        }
    }
    LevelAssignment { k, levels }
}

/// Level computation as a node program. A node of level `i <= k` outputs at
/// round `i - 1`; level `k + 1` nodes output at round `k - 1`.
pub struct LevelAlgorithm {
    pub k: usize,
}

impl NodeAlgorithm for LevelAlgorithm {
    type State = usize;
    /// Level if already known.
    type Public = Option<usize>;
    type Output = usize;

    fn init(&self, ctx: &NodeContext<'_>) -> (usize, Option<usize>, Option<usize>) {
        if ctx.degree <= 2 {
            (ctx.degree, Some(1), Some(1))
        } else if self.k == 1 {
            (ctx.degree, Some(2), Some(2))
        } else {
            (ctx.degree, None, None)
        }
    }

    fn step(&self, round: usize, _: &mut usize, nbrs: &[&Option<usize>]) -> (Option<usize>, Option<usize>) {
        let remaining = nbrs.iter().filter(|l| l.is_none_or(|x| x > round)).count();
        let level = if remaining <= 2 {
            Some(round + 1)
        } else if round + 1 >= self.k {
            Some(self.k + 1)
        } else {
            None
        };
        (level, level)
    }
}

/// Distributed level computation; also returns each node's decision round.
pub fn compute_levels_distributed(tree: &Tree, ids: &[u64], k: usize) -> Result<(LevelAssignment, Vec<usize>), SolverError> {
    if k == 0 {
        return Err(SolverError::Config("k must be at least 1".into()));
    }
    let r = run_simulation(tree, ids, &LevelAlgorithm { k }, 0, Some(k + 2))?;
    Ok((LevelAssignment { k, levels: r.outputs }, r.termination_round))
}

/// `gamma_i = n^(2^(i-1) / (2^k - 1))` for `i = 1..=k`.
pub fn gamma_schedule(n: usize, k: usize) -> Vec<f64> {
    let denom = ((1u64 << k) - 1) as f64;
    (1..=k).map(|i| (n as f64).powf((1u64 << (i - 1)) as f64 / denom)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HierVerdict {
    Accept,
    /// First failing node and the violated rule (1 to 5 in definition order).
    Reject { node: usize, rule: u8 },
}

impl HierVerdict {
    pub fn is_accept(&self) -> bool {
        *self == HierVerdict::Accept
    }
}

/// Checks the five level-dependent constraints at every node.
pub fn check_hierarchical_2half(tree: &Tree, k: usize, labels: &[HierLabel]) -> HierVerdict {
    use HierLabel::*;
    let lv = compute_levels(tree, k).levels;
    for v in 0..tree.node_count() {
        let i = lv[v];
        let l = labels[v];
        let reject = |rule| HierVerdict::Reject { node: v, rule };
        if i == 1 && l == E {
            return reject(1);
        }
        if i == k + 1 {
            if l != E {
                return reject(2);
            }
            continue;
        }
        if i >= 2 {
            let lower = tree.neighbors(v).iter().any(|&u| lv[u] < i && matches!(labels[u], W | B | E));
            if lower != (l == E) {
                return reject(3);
            }
        }
        if matches!(l, W | B) && tree.neighbors(v).iter().any(|&u| lv[u] == i && (labels[u] == l || labels[u] == D)) {
            return reject(4);
        }
        if i == k && l == D {
            return reject(5);
        }
    }
    HierVerdict::Accept
}

#[derive(Debug, Clone)]
pub struct TwoHalfRun {
    pub labels: Vec<HierLabel>,
    pub run: RunResult<HierLabel>,
    pub levels: LevelAssignment,
    pub verdict: HierVerdict,
    /// Per phase: level-`i` nodes that did not output `E` at once.
    pub participants: Vec<usize>,
    /// `participants[i] * prod_{j<i} t_j / 2 <= n` for every phase.
    pub participation_ok: bool,
    /// Phase lengths `t_i`.
    pub phase_lengths: Vec<usize>,
}

/// Maximal runs of level-`i` nodes in `members`, as ordered paths.
fn level_paths(tree: &Tree, member: &[bool]) -> Vec<Vec<usize>> {
    let n = tree.node_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if !member[s] || seen[s] {
            continue;
        }
        let mut comp = Vec::new();
        let mut q = VecDeque::from([s]);
        seen[s] = true;
        while let Some(v) = q.pop_front() {
            comp.push(v);
            for &u in tree.neighbors(v) {
                if member[u] && !seen[u] {
                    seen[u] = true;
                    q.push_back(u);
                }
            }
        }
        let inner = |v: usize| tree.neighbors(v).iter().filter(|&&u| member[u]).count();
        let start = *comp.iter().filter(|&&v| inner(v) <= 1).min().expect("level components are paths");
        let mut path = vec![start];
        let (mut prev, mut cur) = (usize::MAX, start);
        while let Some(&nx) = tree.neighbors(cur).iter().find(|&&u| member[u] && u != prev) {
            prev = cur;
            cur = nx;
            path.push(cur);
        }
        out.push(path);
    }
    out
}

/// Rounds after the phase start until a node at distances `a` and `b` from
/// the ends of its path knows the outcome for threshold `t`.
fn decision_radius(a: usize, b: usize, t: usize) -> usize {
    let len = a + b + 1;
    if len <= t {
        return a.max(b) + 1;
    }
    let mut r = 0;
    while r.min(a) + r.min(b) < t {
        r += 1;
    }
    r
}

/// Phase-based solver with phase lengths `t_i = ceil(c_phase * gamma_i)`.
/// With `early` unset every node waits for the last phase to end.
pub(crate) fn run_phases(
    tree: &Tree,
    ids: &[u64],
    k: usize,
    gammas: &[f64],
    c_phase: f64,
    early: bool,
) -> Result<TwoHalfRun, SolverError> {
    use HierLabel::*;
    let n = tree.node_count();
    let (levels, level_rounds) = compute_levels_distributed(tree, ids, k)?;
    let lv = &levels.levels;
    let t: Vec<usize> = gammas.iter().map(|g| (c_phase * g).ceil() as usize).collect();
    let mut labels: Vec<Option<HierLabel>> = vec![None; n];
    let mut term = vec![0usize; n];
    for v in 0..n {
        if lv[v] == k + 1 {
            labels[v] = Some(E);
            term[v] = k.max(level_rounds[v]);
        }
    }
    let mut participants = Vec::with_capacity(k);
    let mut start = k;
    for i in 1..=k {
        let ti = t[i - 1];
        let mut member = vec![false; n];
        for v in (0..n).filter(|&v| lv[v] == i) {
            let lower = tree.neighbors(v).iter().any(|&u| lv[u] < i && matches!(labels[u], Some(W | B | E)));
            if lower {
                labels[v] = Some(E);
                term[v] = start;
            } else {
                member[v] = true;
            }
        }
        participants.push(member.iter().filter(|&&m| m).count());
        for path in level_paths(tree, &member) {
            let len = path.len();
            if len > ti && i == k {
                return Err(SolverError::ForcedDecline { node: path[0], length: len });
            }
            let flip = ids[path[0]] > ids[path[len - 1]];
            for (pos, &v) in path.iter().enumerate() {
                let d = if flip { len - 1 - pos } else { pos };
                labels[v] = Some(if len > ti {
                    D
                } else if d % 2 == 0 {
                    W
                } else {
                    B
                });
                term[v] = start + decision_radius(pos, len - 1 - pos, ti);
            }
        }
        start += ti + 2;
    }
    if !early {
        let end = term.iter().copied().max().unwrap_or(0);
        term.iter_mut().for_each(|x| *x = end);
    }
    let labels: Vec<HierLabel> = labels.into_iter().map(|l| l.expect("every node labeled")).collect();
    let mut budget = 1.0f64;
    let mut participation_ok = true;
    for (i, &p) in participants.iter().enumerate() {
        if p as f64 * budget > n as f64 {
            participation_ok = false;
        }
        budget *= t[i] as f64 / 2.0;
    }
    let verdict = check_hierarchical_2half(tree, k, &labels);
    Ok(TwoHalfRun {
        run: RunResult::new(term, labels.clone()),
        labels,
        levels,
        verdict,
        participants,
        participation_ok,
        phase_lengths: t,
    })
}

/// Phases `i = 1..=k`: a level-`i` node next to a lower `W`, `B` or `E`
/// node outputs `E`; otherwise its level-`i` path is 2-colored if it has at
/// most `t_i` nodes and declined otherwise.
pub fn solve_hierarchical_2half(tree: &Tree, ids: &[u64], k: usize, c_phase: f64) -> Result<TwoHalfRun, SolverError> {
    if k == 0 {
        return Err(SolverError::Config("k must be at least 1".into()));
    }
    let gammas = gamma_schedule(tree.node_count(), k);
    run_phases(tree, ids, k, &gammas, c_phase, true)
}
