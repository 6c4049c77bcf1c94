//! Randomized compress: elect maximums on long paths, and the randomized
//! node-averaged solver built on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::det::{assemble, single_node, unmarked_decay, SolveReport};
use super::timing::Schedule;
use super::{SolverConfig, SolverError};
use crate::decomp::{compute_decomposition, DecompParams, DecompositionState, NoHooks, ZChooser};
use crate::lcl::{FeasibleFunction, LclSpec};
use crate::tree::Tree;

/// State of one compress instance: the middle part `N` of a long path,
/// whose first and last node start in `Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressPathState {
    pub in_z: Vec<bool>,
    pub done: Vec<bool>,
    /// Rounds since the start of the instance until the node was done.
    pub done_round: Vec<Option<usize>>,
    /// Execution (1-based) in which the node was done, 0 for the start.
    pub done_execution: Vec<Option<u32>>,
    pub executions: u32,
    pub elapsed: usize,
}

impl CompressPathState {
    pub fn new(m: usize) -> CompressPathState {
        assert!(m >= 1, "empty compress instance");
        let mut in_z = vec![false; m];
        in_z[0] = true;
        in_z[m - 1] = true;
        let mut s = CompressPathState {
            in_z,
            done: vec![false; m],
            done_round: vec![None; m],
            done_execution: vec![None; m],
            executions: 0,
            elapsed: 0,
        };
        if m == 1 {
            s.done[0] = true;
            s.done_round[0] = Some(0);
            s.done_execution[0] = Some(0);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.in_z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_z.is_empty()
    }

    pub fn all_done(&self) -> bool {
        self.done.iter().all(|&d| d)
    }

    pub fn z_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.in_z[k]).collect()
    }

    /// Lengths of the maximal runs of non-`Z` nodes.
    pub fn segments(&self) -> Vec<usize> {
        self.z_positions().windows(2).map(|w| w[1] - w[0] - 1).filter(|&l| l > 0).collect()
    }
}

/// Outcome of one execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Execution {
    pub active: usize,
    pub candidates: usize,
    pub joined: usize,
    pub newly_done: usize,
    pub rounds: usize,
}

/// Aggregate statistics over executions and instances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElectStats {
    pub instances: u64,
    pub executions: u64,
    pub active: u64,
    pub joined: u64,
    pub max_rounds: usize,
    /// Executions that took more than `6 ell` rounds.
    pub over_cap: u64,
    pub done_nodes: u64,
    pub done_execution_sum: u64,
    /// Instances that needed the fallback split.
    pub failures: u64,
    pub min_segment: Option<usize>,
    pub max_segment: Option<usize>,
}

impl ElectStats {
    pub fn join_rate(&self) -> f64 {
        self.joined as f64 / self.active.max(1) as f64
    }

    pub fn mean_done_execution(&self) -> f64 {
        self.done_execution_sum as f64 / self.done_nodes.max(1) as f64
    }

    fn add(&mut self, ex: &Execution, ell: usize) {
        self.executions += 1;
        self.active += ex.active as u64;
        self.joined += ex.joined as u64;
        self.max_rounds = self.max_rounds.max(ex.rounds);
        if ex.rounds > 6 * ell {
            self.over_cap += 1;
        }
    }

    fn add_segments(&mut self, segs: &[usize]) {
        for &l in segs {
            self.min_segment = Some(self.min_segment.map_or(l, |m| m.min(l)));
            self.max_segment = Some(self.max_segment.map_or(l, |m| m.max(l)));
        }
    }
}

fn nearest_z(in_z: &[bool]) -> Vec<usize> {
    let m = in_z.len();
    let mut d = vec![usize::MAX; m];
    let mut last: Option<usize> = None;
    for k in 0..m {
        if in_z[k] {
            last = Some(k);
        }
        if let Some(z) = last {
            d[k] = k - z;
        }
    }
    let mut last: Option<usize> = None;
    for k in (0..m).rev() {
        if in_z[k] {
            last = Some(k);
        }
        if let Some(z) = last {
            d[k] = d[k].min(z - k);
        }
    }
    d
}

/// One execution with the candidate coin of node `k` given by `coin(k)`.
pub fn elect_with(state: &mut CompressPathState, ell: usize, mut coin: impl FnMut(usize) -> bool) -> Execution {
    let m = state.len();
    let old_z = state.in_z.clone();
    let dist = nearest_z(&old_z);
    let active: Vec<bool> = (0..m).map(|k| !old_z[k] && dist[k] > ell).collect();
    let cand: Vec<bool> = (0..m).map(|k| active[k] && coin(k)).collect();
    let cpos: Vec<usize> = (0..m).filter(|&k| cand[k]).collect();
    let mut joined = 0;
    for (idx, &k) in cpos.iter().enumerate() {
        let left_clear = idx == 0 || k - cpos[idx - 1] > ell;
        let right_clear = idx + 1 == cpos.len() || cpos[idx + 1] - k > ell;
        if left_clear && right_clear {
            state.in_z[k] = true;
            joined += 1;
        }
    }
    let zs = state.z_positions();
    let close = 2 * ell + 1;
    let z_done: Vec<bool> = (0..zs.len())
        .map(|i| (i == 0 || zs[i] - zs[i - 1] <= close) && (i + 1 == zs.len() || zs[i + 1] - zs[i] <= close))
        .collect();
    // knowledge time of a node's status at the node itself
    let status_time = |y: usize| -> usize {
        if old_z[y] {
            0
        } else if !active[y] {
            ell
        } else {
            2 * ell
        }
    };
    let span_time = |x: usize, lo: usize, hi: usize| -> usize {
        (lo..=hi).map(|y| x.abs_diff(y) + status_time(y)).max().unwrap_or(0)
    };
    let mut newly: Vec<(usize, usize)> = Vec::new();
    for i in 0..zs.len() {
        let z = zs[i];
        if z_done[i] && !state.done[z] {
            let lo = if i == 0 { z } else { zs[i - 1] };
            let hi = if i + 1 == zs.len() { z } else { zs[i + 1] };
            newly.push((z, span_time(z, lo, hi)));
        }
        if i + 1 < zs.len() && z_done[i] && z_done[i + 1] {
            let lo = if i == 0 { zs[i] } else { zs[i - 1] };
            let hi = if i + 2 >= zs.len() { zs[i + 1] } else { zs[i + 2] };
            for x in zs[i] + 1..zs[i + 1] {
                if !state.done[x] {
                    newly.push((x, span_time(x, lo, hi)));
                }
            }
        }
    }
    let rounds = newly.iter().map(|&(_, t)| t).max().unwrap_or(0).max(2 * ell);
    state.executions += 1;
    for &(x, t) in &newly {
        state.done[x] = true;
        state.done_round[x] = Some(state.elapsed + t);
        state.done_execution[x] = Some(state.executions);
    }
    state.elapsed += rounds;
    Execution { active: active.iter().filter(|&&a| a).count(), candidates: cpos.len(), joined, newly_done: newly.len(), rounds }
}

/// One execution where every active node is a candidate with probability
/// `1 / (2 ell)`.
pub fn elect_maximums<R: Rng>(state: &mut CompressPathState, ell: usize, rng: &mut R) -> Execution {
    let p = 1.0 / (2.0 * ell as f64);
    elect_with(state, ell, |_| rng.gen_bool(p))
}

/// Runs up to `ceil(8 ell c_fail ln n)` executions, stopping once every node
/// is done. If some run of non-`Z` nodes is still too long, splits it
/// deterministically and returns `false`.
pub fn randomized_compress<R: Rng>(
    state: &mut CompressPathState,
    ell: usize,
    c_fail: u32,
    n: usize,
    rng: &mut R,
    stats: &mut ElectStats,
) -> bool {
    stats.instances += 1;
    let reps = (8.0 * ell as f64 * c_fail as f64 * (n.max(2) as f64).ln()).ceil() as u32;
    for _ in 0..reps {
        if state.all_done() {
            break;
        }
        let ex = elect_maximums(state, ell, rng);
        stats.add(&ex, ell);
    }
    let ok = state.all_done();
    if !ok {
        stats.failures += 1;
        let zs = state.z_positions();
        for w in zs.windows(2) {
            let mut start = w[0] + 1;
            while w[1] - start > 2 * ell {
                state.in_z[start + ell] = true;
                start += ell + 1;
            }
        }
        for k in 0..state.len() {
            if !state.done[k] {
                state.done[k] = true;
                state.done_round[k] = Some(state.elapsed);
                state.done_execution[k] = Some(state.executions);
            }
        }
    }
    for k in 0..state.len() {
        stats.done_nodes += 1;
        stats.done_execution_sum += state.done_execution[k].unwrap_or(0) as u64;
    }
    stats.add_segments(&state.segments());
    ok
}

/// Split of the middle part of a long path into `P_l`, `N`, `P_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathSplit {
    pub left: usize,
    pub middle: usize,
    pub right: usize,
}

/// Split of a path with `m` nodes. Short paths get a single middle node;
/// longer ones keep `ell + 1` nodes on either side, or `ell` when exactly
/// `3 ell + 3` nodes leave no room for `ell + 1`.
pub fn split_long_path(m: usize, ell: usize) -> PathSplit {
    assert!(m >= 2 * ell + 3, "path too short for compress");
    let beta = m - 1;
    if beta < 3 * ell + 2 {
        PathSplit { left: ell + 1, middle: 1, right: m - ell - 2 }
    } else if beta == 3 * ell + 2 {
        PathSplit { left: ell, middle: m - 2 * ell, right: ell }
    } else {
        PathSplit { left: ell + 1, middle: m - 2 * ell - 2, right: ell + 1 }
    }
}

/// Randomized choice of local maxima for the decomposition. Records, per
/// node of the tree, the iteration and round at which it was done.
pub struct RandomZ {
    pub ell: usize,
    pub c_fail: u32,
    pub n: usize,
    pub rng: ChaCha8Rng,
    pub stats: ElectStats,
    /// `(iteration, rounds since compress decided)` for nodes of `N`.
    pub done: Vec<Option<(u32, usize)>>,
}

impl RandomZ {
    pub fn new(ell: usize, c_fail: u32, n: usize, seed: u64) -> RandomZ {
        RandomZ {
            ell,
            c_fail,
            n,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: ElectStats::default(),
            done: vec![None; n],
        }
    }
}

impl ZChooser for RandomZ {
    fn choose_z(&mut self, _: &Tree, _: &DecompositionState, p: &[usize], iteration: u32) -> Vec<bool> {
        let split = split_long_path(p.len(), self.ell);
        let mut st = CompressPathState::new(split.middle);
        randomized_compress(&mut st, self.ell, self.c_fail, self.n, &mut self.rng, &mut self.stats);
        let mut mask = vec![false; p.len()];
        for k in 0..split.middle {
            let v = p[split.left + k];
            mask[split.left + k] = st.in_z[k];
            self.done[v] = Some((iteration, st.done_round[k].expect("all done")));
        }
        mask
    }
}

/// Decomposition with randomized compress; the loop never waits for the
/// compress instances, whose nodes finish on their own schedule.
pub fn solve_randomized_avg(
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
    let mut chooser = RandomZ::new(ell, config.c_fail, n, config.seed);
    let (state, trace) = compute_decomposition(tree, ids, DecompParams::new(ell), &mut chooser, &mut NoHooks)?;
    let schedule = Schedule::randomized(ell);
    let done: Vec<Option<usize>> = chooser
        .done
        .iter()
        .map(|d| d.map(|(it, r)| schedule.compress_time(it) + r))
        .collect();
    let a = assemble(spec, f, tree, &state, &schedule, Some(&done))?;
    let (decay_ok, sigma) = unmarked_decay(n, &trace);
    Ok(SolveReport {
        run: a.run,
        labels: a.labels,
        verdict: a.verdict,
        iterations: trace.len(),
        trace,
        state,
        schedule,
        failures: chooser.stats.failures as usize,
        bound_violations: 0,
        decay_ok,
        sigma,
        elect: Some(chooser.stats),
    })
}
