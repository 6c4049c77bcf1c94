//! Rake-and-compress decomposition with edge orientation, quality tracking
//! and promotion of local maxima.

mod ops;
mod quality;
mod validate;

pub use ops::{
    compress_with_slack, compute_decomposition, iteration_cap, orienting_rake, promote_if_possible, ColoringZ,
    DecompHooks, DecompParams, NoHooks, Step, TraceRow, ZChooser,
};
pub use quality::{quality, quality_oracle};
pub use validate::{check_invariants, validate_partial_decomposition, DecompVerdict};

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompError {
    #[error("layer comparison involving a free node")]
    FreeComparison,
    #[error("iteration cap {0} exceeded")]
    IterationCap(usize),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LayerLabel {
    #[default]
    Free,
    Rake(u32, u32),
    Compress(u32),
    PromotedCompress(u32),
}

impl LayerLabel {
    /// Sort key; free nodes sort above every assigned layer.
    pub fn key(self) -> (u32, u32, u32) {
        match self {
            LayerLabel::Free => (u32::MAX, u32::MAX, u32::MAX),
            LayerLabel::Rake(i, j) => (i, 0, j),
            LayerLabel::PromotedCompress(i) => (i, 1, 0),
            LayerLabel::Compress(i) => (i, 2, 0),
        }
    }

    pub fn is_free(self) -> bool {
        self == LayerLabel::Free
    }

    pub fn is_compress_like(self) -> bool {
        matches!(self, LayerLabel::Compress(_) | LayerLabel::PromotedCompress(_))
    }

    pub fn is_rake(self) -> bool {
        matches!(self, LayerLabel::Rake(..))
    }

    /// Scheduling order with free on top.
    pub fn sched_cmp(self, other: LayerLabel) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for LayerLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerLabel::Free => write!(f, "F"),
            LayerLabel::Rake(i, j) => write!(f, "R{i}.{j}"),
            LayerLabel::Compress(i) => write!(f, "C{i}"),
            LayerLabel::PromotedCompress(i) => write!(f, "P{i}"),
        }
    }
}

pub fn layer_less_than(a: LayerLabel, b: LayerLabel) -> Result<bool, DecompError> {
    if a.is_free() || b.is_free() {
        return Err(DecompError::FreeComparison);
    }
    Ok(a.key() < b.key())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Unoriented,
    /// Towards the smaller endpoint of the edge.
    TowardsA,
    /// Towards the larger endpoint.
    TowardsB,
}

/// When a node received its current layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AssignEvent {
    pub iteration: u32,
    pub step: Step,
}

#[derive(Debug, Clone)]
pub struct DecompositionState {
    pub layer: Vec<LayerLabel>,
    pub orientation: Vec<Orientation>,
    /// Tail of the unique edge oriented towards the node.
    pub parent: Vec<Option<usize>>,
    pub n_set: Vec<bool>,
    pub promoted: Vec<bool>,
    pub marked: Vec<bool>,
    /// Iteration in which the node was marked, 0 if unmarked.
    pub mark_iteration: Vec<u32>,
    /// `|H(v)|`, maintained incrementally.
    pub subtree_unmarked_count: Vec<u64>,
    /// Local maximum at the time of assignment.
    pub local_max: Vec<bool>,
    /// Local maximum or descendant of one.
    pub dominated: Vec<bool>,
    pub assigned: Vec<AssignEvent>,
    pub ids: Vec<u64>,
    free_deg: Vec<u32>,
    free_count: usize,
    children: Vec<Vec<usize>>,
}

impl DecompositionState {
    pub fn new(tree: &Tree, ids: &[u64]) -> DecompositionState {
        let n = tree.node_count();
        DecompositionState {
            layer: vec![LayerLabel::Free; n],
            orientation: vec![Orientation::Unoriented; tree.edge_count()],
            parent: vec![None; n],
            n_set: vec![false; n],
            promoted: vec![false; n],
            marked: vec![false; n],
            mark_iteration: vec![0; n],
            subtree_unmarked_count: vec![0; n],
            local_max: vec![false; n],
            dominated: vec![false; n],
            assigned: vec![AssignEvent::default(); n],
            ids: ids.to_vec(),
            free_deg: (0..n).map(|v| tree.degree(v) as u32).collect(),
            free_count: n,
            children: vec![Vec::new(); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.layer.len()
    }

    pub fn free_count(&self) -> usize {
        self.free_count
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.layer[v].is_free()
    }

    pub fn free_degree(&self, v: usize) -> usize {
        self.free_deg[v] as usize
    }

    pub fn marked_count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }

    pub fn promoted_count(&self) -> usize {
        self.promoted.iter().filter(|&&m| m).count()
    }

    /// Nodes with an edge oriented from `v` towards them.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Whether `v` is a local maximum with respect to current layers.
    pub fn is_local_max_now(&self, tree: &Tree, v: usize) -> bool {
        let l = self.layer[v];
        !l.is_free() && tree.neighbors(v).iter().all(|&u| !self.is_free(u) && self.layer[u].key() < l.key())
    }

    pub(crate) fn orient(&mut self, tree: &Tree, from: usize, to: usize) {
        let e = tree.edge_between(from, to).expect("orienting a non-edge");
        let dir = if tree.edge(e).0 == to { Orientation::TowardsA } else { Orientation::TowardsB };
        match self.orientation[e] {
            Orientation::Unoriented => {}
            d if d == dir => return,
            _ => panic!("edge {from}-{to} already oriented the other way"),
        }
        assert!(self.parent[to].is_none(), "node {to} would get a second incoming edge");
        self.orientation[e] = dir;
        self.parent[to] = Some(from);
        self.children[from].push(to);
    }

    pub(crate) fn assign(&mut self, tree: &Tree, v: usize, layer: LayerLabel, ev: AssignEvent) {
        if self.is_free(v) {
            self.free_count -= 1;
            for &u in tree.neighbors(v) {
                self.free_deg[u] -= 1;
            }
        }
        self.layer[v] = layer;
        self.assigned[v] = ev;
    }

    /// Marks `v` and all its descendants.
    pub(crate) fn mark_tree(&mut self, v: usize, iteration: u32, dominated: bool) {
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            if dominated {
                if self.dominated[x] {
                    continue;
                }
                self.dominated[x] = true;
            } else if self.marked[x] {
                continue;
            }
            if !self.marked[x] {
                self.marked[x] = true;
                self.mark_iteration[x] = iteration;
            }
            stack.extend(self.children[x].iter().copied());
        }
    }

    /// Per-node `node layer` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (v, l) in self.layer.iter().enumerate() {
            out.push_str(&format!("{v} {l}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_order() {
        use LayerLabel::*;
        assert!(layer_less_than(Rake(1, 2), Rake(1, 3)).unwrap());
        assert!(layer_less_than(PromotedCompress(2), Compress(2)).unwrap());
        assert!(layer_less_than(Compress(1), Rake(2, 1)).unwrap());
        assert!(layer_less_than(Rake(2, 9), PromotedCompress(2)).unwrap());
        assert!(!layer_less_than(Rake(2, 1), Compress(1)).unwrap());
        assert_eq!(layer_less_than(Free, Rake(1, 1)), Err(DecompError::FreeComparison));
        assert_eq!(Free.sched_cmp(Compress(99)), Ordering::Greater);
    }

    use crate::engine::compute_distance_coloring;
    use crate::tree::{generate_hierarchical_worst_case, generate_path, generate_random_tree, IdAssignment};
    use proptest::prelude::*;

    struct Checker {
        params: DecompParams,
        failures: Vec<String>,
    }

    impl DecompHooks for Checker {
        fn after_subroutine(&mut self, step: Step, iteration: u32, tree: &Tree, state: &DecompositionState) {
            if let Err(e) = check_invariants(tree, state) {
                self.failures.push(format!("{step:?} {iteration}: {e}"));
            }
            let v = validate_partial_decomposition(tree, state, self.params.ell, self.params.gamma);
            if !v.is_accept() {
                self.failures.push(format!("{step:?} {iteration}: {v:?}"));
            }
            if matches!(step, Step::Rake(_)) {
                // no fresh compress node within gamma of a free node
                for r in (0..tree.node_count()).filter(|&r| state.is_free(r)) {
                    let d = crate::tree::bfs_distances(tree, r);
                    for u in 0..tree.node_count() {
                        if state.layer[u] == LayerLabel::Compress(iteration - 1) && d[u] <= self.params.gamma {
                            self.failures.push(format!("compress node {u} within gamma of free {r}"));
                        }
                    }
                }
            }
        }
    }

    fn run(tree: &Tree, seed: u64, ell: usize) -> (DecompositionState, Vec<TraceRow>, Vec<String>) {
        let ids = IdAssignment::from_seed(tree.node_count(), seed);
        let (col, _) = compute_distance_coloring(tree, ids.as_slice(), ell).unwrap();
        let params = DecompParams::new(ell);
        let mut z = ColoringZ { colors: &col.colors, palette: col.palette_size, ell };
        let mut hooks = Checker { params, failures: Vec::new() };
        let (state, rows) = compute_decomposition(tree, ids.as_slice(), params, &mut z, &mut hooks).unwrap();
        (state, rows, hooks.failures)
    }

    #[test]
    fn star_rake() {
        let t = Tree::from_edges(4, &[(0, 1), (0, 2), (0, 3)], 3).unwrap();
        let mut st = DecompositionState::new(&t, &[10, 11, 12, 13]);
        orienting_rake(&t, &mut st, 1, 1);
        assert_eq!(st.layer[1..], [LayerLabel::Rake(1, 1); 3]);
        assert!(st.is_free(0));
        assert_eq!(st.parent[2], Some(0));
        assert_eq!(quality(&st, 0), 3);
    }

    #[test]
    fn adjacent_leaves_keep_larger_id() {
        let t = generate_path(2);
        let mut st = DecompositionState::new(&t, &[5, 3]);
        orienting_rake(&t, &mut st, 1, 1);
        assert_eq!(st.layer, vec![LayerLabel::Free, LayerLabel::Rake(1, 1)]);
        orienting_rake(&t, &mut st, 1, 2);
        assert!(st.local_max[0]);
    }

    #[test]
    fn long_path_is_compressed() {
        for ell in 1..=3 {
            let t = generate_path(400);
            let (state, rows, failures) = run(&t, 7, ell);
            assert!(failures.is_empty(), "{failures:?}");
            assert!(state.layer.iter().any(|l| matches!(l, LayerLabel::Compress(_))));
            assert_eq!(rows.last().unwrap().free, 0);
            assert!(state.n_set.iter().any(|&x| x));
        }
    }

    #[test]
    fn hierarchical_tree_decomposes() {
        let t = generate_hierarchical_worst_case(3, 12);
        let (state, _, failures) = run(&t, 3, 2);
        assert!(failures.is_empty(), "{failures:?}");
        assert_eq!(state.free_count(), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn invariants_hold_on_random_trees(n in 1usize..600, cap in 2usize..5, seed in any::<u64>(), ell in 1usize..4) {
            let t = generate_random_tree(n, cap, seed);
            let (state, rows, failures) = run(&t, seed ^ 1, ell);
            prop_assert!(failures.is_empty(), "{:?}", failures);
            prop_assert_eq!(state.free_count(), 0);
            prop_assert!(rows.len() <= iteration_cap(n));
            for w in rows.windows(2) {
                prop_assert!(w[1].marked >= w[0].marked);
            }
        }
    }
}
