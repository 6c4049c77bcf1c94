//! Sequential label-set propagation oracle and an exhaustive search oracle.

use std::collections::VecDeque;

use super::single::{choose_labels_single_node, maximal_label_set_single_node};
use super::{LabelSet, LclSpec, Pair};
use crate::tree::BipartiteTree;
use crate::Label;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiameterOutcome {
    /// Output label per edge of the subdivided tree.
    Solved(Vec<Label>),
    /// Node whose label-set came out empty, or the root if it cannot be
    /// satisfied.
    Unsolvable { node: usize },
}

impl DiameterOutcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, DiameterOutcome::Solved(_))
    }
}

/// BFS order from node 0 with the parent edge of every node.
fn rooted(bt: &BipartiteTree) -> (Vec<usize>, Vec<Option<usize>>) {
    let t = bt.tree();
    let n = t.node_count();
    let mut order = Vec::with_capacity(n);
    let mut parent_edge = vec![None; n];
    let mut seen = vec![false; n];
    let mut q = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = q.pop_front() {
        order.push(v);
        for (&u, &e) in t.neighbors(v).iter().zip(t.incident_edges(v)) {
            if !seen[u] {
                seen[u] = true;
                parent_edge[u] = Some(e);
                q.push_back(u);
            }
        }
    }
    (order, parent_edge)
}

/// Leaves-up computation of the label-set of every parent edge, then
/// top-down label choice from the root.
pub fn solve_diameter(spec: &LclSpec, bt: &BipartiteTree, inputs: &[Label]) -> DiameterOutcome {
    let t = bt.tree();
    let (order, parent_edge) = rooted(bt);
    let mut sets = vec![LabelSet::EMPTY; t.edge_count()];
    let children = |v: usize| -> Vec<usize> {
        t.incident_edges(v).iter().copied().filter(|&e| Some(e) != parent_edge[v]).collect()
    };
    for &v in order.iter().rev() {
        let inc: Vec<(Label, LabelSet)> = children(v).iter().map(|&e| (inputs[e], sets[e])).collect();
        match parent_edge[v] {
            Some(pe) => {
                let s = maximal_label_set_single_node(spec, bt.color(v), &inc, inputs[pe]);
                if s.is_empty() {
                    return DiameterOutcome::Unsolvable { node: v };
                }
                sets[pe] = s;
            }
            None => {
                if choose_labels_single_node(spec, bt.color(v), &inc, None).is_err() {
                    return DiameterOutcome::Unsolvable { node: v };
                }
            }
        }
    }
    let mut labels: Vec<Option<Label>> = vec![None; t.edge_count()];
    for &v in &order {
        let ch = children(v);
        let inc: Vec<(Label, LabelSet)> = ch.iter().map(|&e| (inputs[e], sets[e])).collect();
        let out = parent_edge[v].map(|pe| (inputs[pe], labels[pe].expect("parent labeled first")));
        let chosen = choose_labels_single_node(spec, bt.color(v), &inc, out)
            .expect("label-set membership guarantees a completion");
        for (&e, l) in ch.iter().zip(chosen) {
            labels[e] = Some(l);
        }
    }
    DiameterOutcome::Solved(labels.into_iter().map(|l| l.expect("every edge labeled")).collect())
}

fn is_sub_multiset(part: &[Pair], whole: &[Pair]) -> bool {
    let mut j = 0;
    for p in part {
        while j < whole.len() && whole[j] < *p {
            j += 1;
        }
        if j == whole.len() || whole[j] != *p {
            return false;
        }
        j += 1;
    }
    true
}

/// Backtracking over all edge labelings, pruning nodes whose partial
/// multiset extends to no allowed multiset.
pub fn exhaustive_solve(spec: &LclSpec, bt: &BipartiteTree, inputs: &[Label]) -> Option<Vec<Label>> {
    let t = bt.tree();
    let (order, parent_edge) = rooted(bt);
    let edge_order: Vec<usize> = order.iter().filter_map(|&v| parent_edge[v]).collect();
    let labels: Vec<Label> = spec.outputs.iter().collect();
    let mut assigned: Vec<Option<Label>> = vec![None; t.edge_count()];
    let feasible = |v: usize, assigned: &[Option<Label>]| -> bool {
        let mut part: Vec<Pair> = t
            .incident_edges(v)
            .iter()
            .filter_map(|&e| assigned[e].map(|l| (inputs[e], l)))
            .collect();
        part.sort_unstable();
        spec.constraint(bt.color(v)).of_size(t.degree(v)).iter().any(|m| is_sub_multiset(&part, m))
    };
    if t.edge_count() == 0 {
        return feasible(0, &assigned).then(Vec::new);
    }
    fn go(
        k: usize,
        edge_order: &[usize],
        labels: &[Label],
        assigned: &mut Vec<Option<Label>>,
        ends: &dyn Fn(usize) -> (usize, usize),
        feasible: &dyn Fn(usize, &[Option<Label>]) -> bool,
    ) -> bool {
        if k == edge_order.len() {
            return true;
        }
        let e = edge_order[k];
        let (u, v) = ends(e);
        for &l in labels {
            assigned[e] = Some(l);
            if feasible(u, assigned) && feasible(v, assigned) && go(k + 1, edge_order, labels, assigned, ends, feasible) {
                return true;
            }
        }
        assigned[e] = None;
        false
    }
    let ends = |e: usize| t.edge(e);
    if go(0, &edge_order, &labels, &mut assigned, &ends, &feasible) {
        Some(assigned.into_iter().map(|l| l.expect("complete")).collect())
    } else {
        None
    }
}
