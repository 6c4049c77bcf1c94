//! Rake, compress and promote subroutines and the iteration driver.

use super::{AssignEvent, DecompError, DecompositionState, LayerLabel};
use crate::tree::Tree;

/// Which subroutine assigned a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Step {
    #[default]
    Unassigned,
    /// Rake sublayer `j`.
    Rake(u32),
    Compress,
    Promote,
}

/// Called after every subroutine; used by tests to check invariants.
pub trait DecompHooks {
    fn after_subroutine(&mut self, _step: Step, _iteration: u32, _tree: &Tree, _state: &DecompositionState) {}
}

pub struct NoHooks;

impl DecompHooks for NoHooks {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    pub iteration: u32,
    pub free: usize,
    pub marked: usize,
    pub promoted: usize,
}

/// Picks the local maxima `Z` inside the middle part `P'` of a long path.
pub trait ZChooser {
    /// Mask over `p_prime`. Segments between consecutive chosen nodes and the
    /// two outer segments must have between `ell` and `2 * ell` nodes.
    fn choose_z(&mut self, tree: &Tree, state: &DecompositionState, p_prime: &[usize], iteration: u32) -> Vec<bool>;
}

/// Deterministic choice: color classes of a distance coloring join in turn.
pub struct ColoringZ<'a> {
    pub colors: &'a [usize],
    pub palette: usize,
    pub ell: usize,
}

impl ZChooser for ColoringZ<'_> {
    fn choose_z(&mut self, _: &Tree, _: &DecompositionState, p: &[usize], _: u32) -> Vec<bool> {
        let ell = self.ell;
        let len = p.len();
        let mut in_z = vec![false; len];
        let mut prev = vec![0usize; len];
        let mut next = vec![0usize; len];
        for c in 0..self.palette {
            // gaps measured against Z before this class
            let mut last: Option<usize> = None;
            for k in 0..len {
                prev[k] = last.map_or(k, |z| k - z - 1);
                if in_z[k] {
                    last = Some(k);
                }
            }
            let mut last: Option<usize> = None;
            for k in (0..len).rev() {
                next[k] = last.map_or(len - 1 - k, |z| z - k - 1);
                if in_z[k] {
                    last = Some(k);
                }
            }
            let joins: Vec<usize> = (0..len)
                .filter(|&k| !in_z[k] && self.colors[p[k]] == c && prev[k] >= ell && next[k] >= ell)
                .collect();
            for k in joins {
                in_z[k] = true;
            }
        }
        in_z
    }
}

fn free_neighbor(tree: &Tree, state: &DecompositionState, v: usize) -> Option<usize> {
    tree.neighbors(v).iter().copied().find(|&u| state.is_free(u))
}

fn make_local_max(state: &mut DecompositionState, v: usize, iteration: u32) {
    state.local_max[v] = true;
    state.mark_tree(v, iteration, true);
}

/// `gamma` sublayers of rake at layer `i`. Returns the number of raked nodes.
pub fn orienting_rake(tree: &Tree, state: &mut DecompositionState, i: u32, gamma: usize) -> usize {
    let n = tree.node_count();
    let mut cand: Vec<usize> = (0..n).filter(|&v| state.is_free(v) && state.free_degree(v) <= 1).collect();
    let mut in_cand = vec![false; n];
    let mut total = 0;
    for j in 1..=gamma as u32 {
        if cand.is_empty() {
            break;
        }
        for &v in &cand {
            in_cand[v] = true;
        }
        // of two adjacent candidates only the one with the smaller id goes
        let removal: Vec<usize> = cand
            .iter()
            .copied()
            .filter(|&v| match free_neighbor(tree, state, v) {
                Some(u) => !(in_cand[u] && state.free_degree(u) == 1 && state.ids[u] < state.ids[v]),
                None => true,
            })
            .collect();
        let mut touched = Vec::new();
        for &v in &removal {
            let up = free_neighbor(tree, state, v);
            state.assign(tree, v, LayerLabel::Rake(i, j), AssignEvent { iteration: i, step: Step::Rake(j) });
            match up {
                Some(u) => {
                    state.orient(tree, u, v);
                    state.subtree_unmarked_count[u] += 1 + state.subtree_unmarked_count[v];
                    touched.push(u);
                }
                None => make_local_max(state, v, i),
            }
        }
        total += removal.len();
        for &v in &cand {
            in_cand[v] = false;
        }
        let mut next: Vec<usize> = cand.iter().copied().chain(touched).filter(|&v| state.is_free(v)).collect();
        next.sort_unstable();
        next.dedup();
        next.retain(|&v| state.free_degree(v) <= 1);
        cand = next;
    }
    total
}

/// Maximal paths of free nodes with free-degree 2, each listed from the end
/// with the smaller id.
fn degree_two_paths(tree: &Tree, state: &DecompositionState) -> Vec<Vec<usize>> {
    let n = tree.node_count();
    let inner = |v: usize| state.is_free(v) && state.free_degree(v) == 2;
    let mut seen = vec![false; n];
    let mut paths = Vec::new();
    for s in 0..n {
        if seen[s] || !inner(s) {
            continue;
        }
        seen[s] = true;
        let mut halves: Vec<Vec<usize>> = Vec::new();
        for &first in tree.neighbors(s).iter().filter(|&&u| state.is_free(u)) {
            let mut half = Vec::new();
            let (mut prev, mut cur) = (s, first);
            while inner(cur) && !seen[cur] {
                seen[cur] = true;
                half.push(cur);
                let nxt = tree.neighbors(cur).iter().copied().find(|&u| u != prev && state.is_free(u));
                match nxt {
                    Some(x) => {
                        prev = cur;
                        cur = x;
                    }
                    None => break,
                }
            }
            halves.push(half);
        }
        let mut path: Vec<usize> = halves.first().cloned().unwrap_or_default();
        path.reverse();
        path.push(s);
        if let Some(h) = halves.get(1) {
            path.extend(h.iter().copied());
        }
        if state.ids[path[0]] > state.ids[*path.last().expect("non-empty")] {
            path.reverse();
        }
        paths.push(path);
    }
    paths
}

/// Compress with slack at layer `i` on every free degree-2 path of at least
/// `4 * ell + 9` nodes. Returns the number of such paths.
pub fn compress_with_slack(
    tree: &Tree,
    state: &mut DecompositionState,
    i: u32,
    ell: usize,
    chooser: &mut dyn ZChooser,
) -> usize {
    let iteration = i + 1;
    let mut count = 0;
    for p in degree_two_paths(tree, state) {
        if p.len() < 4 * ell + 9 {
            continue;
        }
        count += 1;
        let pp: Vec<usize> = p[ell + 3..p.len() - ell - 3].to_vec();
        let in_z = chooser.choose_z(tree, state, &pp, iteration);
        let w = in_z.iter().position(|&z| z).expect("a long path always gets a local maximum");
        let y = in_z.iter().rposition(|&z| z).expect("non-empty");
        for (k, &v) in pp.iter().enumerate() {
            let layer = if in_z[k] { LayerLabel::Rake(i + 1, 1) } else { LayerLabel::Compress(i) };
            state.assign(tree, v, layer, AssignEvent { iteration, step: Step::Compress });
        }
        // chains from the slack ends up to the first and last local maximum
        let lo = p[ell + 2];
        let hi = p[p.len() - ell - 3];
        for k in (0..w).rev() {
            let from = if k == 0 { lo } else { pp[k - 1] };
            state.orient(tree, from, pp[k]);
        }
        for k in y + 1..pp.len() {
            let from = if k == pp.len() - 1 { hi } else { pp[k + 1] };
            state.orient(tree, from, pp[k]);
        }
        for k in (0..w).rev() {
            let below = if k + 1 < w { 1 + state.subtree_unmarked_count[pp[k + 1]] } else { 0 };
            state.subtree_unmarked_count[pp[k]] += below;
        }
        if w > 0 {
            state.subtree_unmarked_count[lo] += 1 + state.subtree_unmarked_count[pp[0]];
        }
        for k in y + 1..pp.len() {
            let below = if k > y + 1 { 1 + state.subtree_unmarked_count[pp[k - 1]] } else { 0 };
            state.subtree_unmarked_count[pp[k]] += below;
        }
        if y + 1 < pp.len() {
            state.subtree_unmarked_count[hi] += 1 + state.subtree_unmarked_count[pp[pp.len() - 1]];
        }
        for k in w..=y {
            let v = pp[k];
            state.n_set[v] = true;
            if in_z[k] {
                make_local_max(state, v, iteration);
            }
            state.mark_tree(v, iteration, false);
        }
    }
    count
}

/// Nodes at distance exactly `b` from `r` reached through assigned nodes,
/// with the path from `r` (inclusive) to them.
fn distance_b_paths(tree: &Tree, state: &DecompositionState, r: usize, b: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = vec![r];
    fn go(tree: &Tree, state: &DecompositionState, b: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().expect("non-empty");
        if path.len() == b + 1 {
            out.push(path.clone());
            return;
        }
        let prev = if path.len() >= 2 { Some(path[path.len() - 2]) } else { None };
        for &u in tree.neighbors(v) {
            if Some(u) != prev && !state.is_free(u) {
                path.push(u);
                go(tree, state, b, path, out);
                path.pop();
            }
        }
    }
    go(tree, state, b, &mut path, &mut out);
    out
}

/// Promotion step of iteration `i` with distance `b`. Returns the number of
/// promoted nodes.
pub fn promote_if_possible(tree: &Tree, state: &mut DecompositionState, i: u32, b: usize) -> Result<usize, DecompError> {
    let mut free: Vec<usize> = (0..tree.node_count()).filter(|&v| state.is_free(v)).collect();
    free.sort_unstable_by_key(|&v| state.ids[v]);
    let mut promoted = 0;
    for r in free {
        let paths = distance_b_paths(tree, state, r, b);
        let best = paths.iter().max_by(|a, c| {
            let (va, vc) = (*a.last().expect("non-empty"), *c.last().expect("non-empty"));
            super::quality(state, va)
                .cmp(&super::quality(state, vc))
                .then_with(|| state.ids[vc].cmp(&state.ids[va]))
        });
        let Some(path) = best else { continue };
        let blocked = path.iter().any(|&x| match state.layer[x] {
            LayerLabel::Compress(a) => a < i,
            LayerLabel::PromotedCompress(_) => true,
            _ => false,
        });
        if blocked {
            continue;
        }
        let vstar = *path.last().expect("non-empty");
        for k in 1..path.len() {
            if state.parent[path[k]] != Some(path[k - 1]) {
                return Err(DecompError::Invariant(format!(
                    "path from free node {r} to promoted node {vstar} is not consistently oriented"
                )));
            }
        }
        let delta = 1 + state.subtree_unmarked_count[vstar];
        for &x in &path[..path.len() - 1] {
            state.subtree_unmarked_count[x] -= delta;
        }
        for &x in &path[1..path.len() - 1] {
            state.assign(tree, x, LayerLabel::PromotedCompress(i), AssignEvent { iteration: i, step: Step::Promote });
        }
        state.assign(tree, vstar, LayerLabel::Rake(i + 1, 1), AssignEvent { iteration: i, step: Step::Promote });
        state.promoted[vstar] = true;
        if !state.is_local_max_now(tree, vstar) {
            return Err(DecompError::Invariant(format!("promoted node {vstar} is not a local maximum")));
        }
        make_local_max(state, vstar, i);
        promoted += 1;
    }
    Ok(promoted)
}

/// Parameters of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecompParams {
    pub ell: usize,
    pub gamma: usize,
    pub b: usize,
}

impl DecompParams {
    pub fn new(ell: usize) -> DecompParams {
        DecompParams { ell, gamma: ell + 3, b: ell + 2 }
    }
}

fn trace(state: &DecompositionState, iteration: u32) -> TraceRow {
    TraceRow {
        iteration,
        free: state.free_count(),
        marked: state.marked_count(),
        promoted: state.promoted_count(),
    }
}

/// Iteration cap `10 * log2(n) + 10`.
pub fn iteration_cap(n: usize) -> usize {
    10 * (n.max(2) as f64).log2().ceil() as usize + 10
}

/// Runs the full decomposition until no node is free.
pub fn compute_decomposition(
    tree: &Tree,
    ids: &[u64],
    params: DecompParams,
    chooser: &mut dyn ZChooser,
    hooks: &mut dyn DecompHooks,
) -> Result<(DecompositionState, Vec<TraceRow>), DecompError> {
    let mut state = DecompositionState::new(tree, ids);
    let mut rows = Vec::new();
    orienting_rake(tree, &mut state, 1, params.gamma);
    hooks.after_subroutine(Step::Rake(0), 1, tree, &state);
    rows.push(trace(&state, 1));
    let cap = iteration_cap(tree.node_count());
    let mut i = 2u32;
    while state.free_count() > 0 {
        if i as usize > cap {
            return Err(DecompError::IterationCap(cap));
        }
        compress_with_slack(tree, &mut state, i - 1, params.ell, chooser);
        hooks.after_subroutine(Step::Compress, i, tree, &state);
        orienting_rake(tree, &mut state, i, params.gamma);
        hooks.after_subroutine(Step::Rake(0), i, tree, &state);
        promote_if_possible(tree, &mut state, i, params.b)?;
        hooks.after_subroutine(Step::Promote, i, tree, &state);
        rows.push(trace(&state, i));
        i += 1;
    }
    Ok((state, rows))
}
