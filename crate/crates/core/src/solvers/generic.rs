//! Label-set propagation and label choice over a finished decomposition.
//!
//! A rake node forms a unit with the black node of the edge to its higher
//! neighbour. A compress path forms a unit with the black nodes of its
//! internal edges and of the two edges leaving it.

use std::collections::{HashMap, VecDeque};

use super::SolverError;
use crate::decomp::{DecompositionState, LayerLabel};
use crate::lcl::{
    choose_labels_single_node, maximal_label_set_single_node, path_maximal_class, FeasibleFunction, LabelSet,
    LclSpec, PathClass, PathInstance, PathNode,
};
use crate::tree::{BipartiteTree, NodeColor, Tree};
use crate::Label;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    /// One node for rake units, path order for compress units.
    pub nodes: Vec<usize>,
    /// `(node of the unit, higher neighbour)` for each edge leaving upwards.
    pub up: Vec<(usize, usize)>,
    pub compress: bool,
    pub layer: LayerLabel,
}

#[derive(Debug, Clone)]
pub struct Units {
    pub unit_of: Vec<usize>,
    pub units: Vec<Unit>,
    /// Unit indices sorted by layer, lowest first.
    pub order: Vec<usize>,
}

impl Units {
    pub fn build(tree: &Tree, state: &DecompositionState) -> Result<Units, SolverError> {
        let n = tree.node_count();
        let layer = &state.layer;
        if let Some(v) = (0..n).find(|&v| layer[v].is_free()) {
            return Err(SolverError::Decomposition(format!("node {v} is still free")));
        }
        let higher = |v: usize| -> Vec<usize> {
            tree.neighbors(v).iter().copied().filter(|&u| layer[u].key() > layer[v].key()).collect()
        };
        let mut unit_of = vec![usize::MAX; n];
        let mut units = Vec::new();
        for s in 0..n {
            if unit_of[s] != usize::MAX {
                continue;
            }
            if !layer[s].is_compress_like() {
                unit_of[s] = units.len();
                let up: Vec<(usize, usize)> = higher(s).into_iter().map(|u| (s, u)).collect();
                if up.len() > 1 {
                    return Err(SolverError::Decomposition(format!("rake node {s} has {} higher neighbours", up.len())));
                }
                units.push(Unit { nodes: vec![s], up, compress: false, layer: layer[s] });
                continue;
            }
            // collect the component, then walk it from one end
            let mut comp = vec![s];
            let mut q = VecDeque::from([s]);
            unit_of[s] = units.len();
            while let Some(v) = q.pop_front() {
                for &u in tree.neighbors(v) {
                    if layer[u] == layer[v] && unit_of[u] == usize::MAX {
                        unit_of[u] = units.len();
                        comp.push(u);
                        q.push_back(u);
                    }
                }
            }
            let inner = |v: usize| tree.neighbors(v).iter().filter(|&&u| layer[u] == layer[v]).count();
            let start = *comp.iter().filter(|&&v| inner(v) <= 1).min().ok_or_else(|| {
                SolverError::Decomposition(format!("compress component at {s} is not a path"))
            })?;
            let mut nodes = vec![start];
            let mut prev = usize::MAX;
            let mut cur = start;
            while let Some(&nx) = tree.neighbors(cur).iter().find(|&&u| layer[u] == layer[cur] && u != prev) {
                prev = cur;
                cur = nx;
                nodes.push(cur);
            }
            if nodes.len() != comp.len() {
                return Err(SolverError::Decomposition(format!("compress component at {s} is not a path")));
            }
            let first = nodes[0];
            let last = *nodes.last().expect("non-empty");
            let mut up: Vec<(usize, usize)> = Vec::new();
            let mut hf = higher(first);
            hf.sort_unstable();
            if nodes.len() == 1 {
                up.extend(hf.iter().map(|&h| (first, h)));
            } else {
                up.extend(hf.iter().map(|&h| (first, h)));
                up.extend(higher(last).into_iter().map(|h| (last, h)));
            }
            if up.len() != 2 || nodes[1..nodes.len().saturating_sub(1)].iter().any(|&v| !higher(v).is_empty()) {
                return Err(SolverError::Decomposition(format!("compress path at {first} lacks two exits")));
            }
            units.push(Unit { nodes, up, compress: true, layer: layer[s] });
        }
        let mut order: Vec<usize> = (0..units.len()).collect();
        order.sort_by_key(|&u| (units[u].layer.key(), u));
        Ok(Units { unit_of, units, order })
    }

    /// Lower neighbours of node `x` of unit `u` whose edge belongs to their
    /// own unit.
    pub fn children_of(&self, tree: &Tree, u: usize, x: usize) -> Vec<usize> {
        tree.neighbors(x)
            .iter()
            .copied()
            .filter(|&c| self.unit_of[c] != u && !self.units[u].up.contains(&(x, c)))
            .collect()
    }
}

/// Label-sets of the half-edges offered upwards, plus the output labels.
#[derive(Debug, Clone)]
pub struct GenericSolution {
    pub units: Units,
    /// Indexed by edge of the subdivided tree; only upward half-edges set.
    pub sets: Vec<LabelSet>,
    pub labels: Vec<Label>,
    pub class_cache_hits: usize,
}

/// Half-edge of `bt` between `v` and the black node of the edge `v`-`u`.
fn half(tree: &Tree, bt: &BipartiteTree, v: usize, u: usize) -> usize {
    bt.half_edge(tree.edge_between(v, u).expect("adjacent"), v)
}

fn white_incoming(
    tree: &Tree,
    bt: &BipartiteTree,
    units: &Units,
    u: usize,
    x: usize,
    inputs: &[Label],
    sets: &[LabelSet],
) -> (Vec<usize>, Vec<(Label, LabelSet)>) {
    let ch = units.children_of(tree, u, x);
    let inc = ch
        .iter()
        .map(|&c| {
            let h = half(tree, bt, x, c);
            (inputs[h], sets[h])
        })
        .collect();
    (ch, inc)
}

struct PathSetup {
    instance: PathInstance,
    /// Half-edge per path edge.
    half_edges: Vec<usize>,
    /// Children per white node of the path, in path order.
    children: Vec<Vec<usize>>,
}

fn compress_path(
    tree: &Tree,
    bt: &BipartiteTree,
    units: &Units,
    u: usize,
    inputs: &[Label],
    sets: &[LabelSet],
) -> PathSetup {
    let unit = &units.units[u];
    let (w1, h1) = unit.up[0];
    let (wk, h2) = unit.up[1];
    let mut nodes = vec![PathNode { side: NodeColor::Black, incoming: vec![] }];
    let mut half_edges = vec![half(tree, bt, h1, w1), half(tree, bt, w1, h1)];
    let mut children = Vec::new();
    for (k, &x) in unit.nodes.iter().enumerate() {
        let (ch, inc) = white_incoming(tree, bt, units, u, x, inputs, sets);
        children.push(ch);
        nodes.push(PathNode { side: NodeColor::White, incoming: inc });
        nodes.push(PathNode { side: NodeColor::Black, incoming: vec![] });
        if let Some(&y) = unit.nodes.get(k + 1) {
            half_edges.push(half(tree, bt, x, y));
            half_edges.push(half(tree, bt, y, x));
        }
    }
    debug_assert_eq!(*unit.nodes.last().expect("non-empty"), wk);
    half_edges.push(half(tree, bt, wk, h2));
    half_edges.push(half(tree, bt, h2, wk));
    let edge_inputs = half_edges.iter().map(|&h| inputs[h]).collect();
    PathSetup { instance: PathInstance { nodes, edge_inputs }, half_edges, children }
}

/// Bottom-up label-sets, then top-down label choice.
pub fn solve_on_decomposition(
    spec: &LclSpec,
    f: &dyn FeasibleFunction,
    tree: &Tree,
    bt: &BipartiteTree,
    inputs: &[Label],
    state: &DecompositionState,
) -> Result<GenericSolution, SolverError> {
    let units = Units::build(tree, state)?;
    let mut sets = vec![LabelSet::EMPTY; bt.tree().edge_count()];
    let mut cache: HashMap<PathInstance, PathClass> = HashMap::new();
    let mut classes: HashMap<usize, PathInstance> = HashMap::new();
    let mut hits = 0;
    for &u in &units.order {
        let unit = &units.units[u];
        if !unit.compress {
            let v = unit.nodes[0];
            let (_, inc) = white_incoming(tree, bt, &units, u, v, inputs, &sets);
            match unit.up.first() {
                Some(&(_, h)) => {
                    let hv = half(tree, bt, v, h);
                    let s1 = maximal_label_set_single_node(spec, NodeColor::White, &inc, inputs[hv]);
                    let hh = half(tree, bt, h, v);
                    let s2 = maximal_label_set_single_node(spec, NodeColor::Black, &[(inputs[hv], s1)], inputs[hh]);
                    if s2.is_empty() {
                        return Err(SolverError::EmptyLabelSet(v));
                    }
                    sets[hv] = s1;
                    sets[hh] = s2;
                }
                None => {
                    if choose_labels_single_node(spec, NodeColor::White, &inc, None).is_err() {
                        return Err(SolverError::EmptyLabelSet(v));
                    }
                }
            }
            continue;
        }
        let setup = compress_path(tree, bt, &units, u, inputs, &sets);
        let class = match cache.get(&setup.instance) {
            Some(c) => {
                hits += 1;
                c.clone()
            }
            None => {
                let maximal = path_maximal_class(spec, &setup.instance);
                let c = f.apply(spec, &setup.instance, &maximal)?;
                cache.insert(setup.instance.clone(), c.clone());
                c
            }
        };
        let (s1, s2) = class.out_sets();
        if s1.is_empty() || s2.is_empty() {
            return Err(SolverError::EmptyLabelSet(unit.nodes[0]));
        }
        sets[setup.half_edges[0]] = s1;
        sets[*setup.half_edges.last().expect("non-empty")] = s2;
        classes.insert(u, setup.instance);
    }
    let mut labels: Vec<Option<Label>> = vec![None; bt.tree().edge_count()];
    for &u in units.order.iter().rev() {
        let unit = &units.units[u];
        if !unit.compress {
            let v = unit.nodes[0];
            let (ch, inc) = white_incoming(tree, bt, &units, u, v, inputs, &sets);
            let out = match unit.up.first() {
                Some(&(_, h)) => {
                    let hv = half(tree, bt, v, h);
                    let hh = half(tree, bt, h, v);
                    let x = labels[hh].ok_or(SolverError::Internal("parent label missing"))?;
                    let y = choose_labels_single_node(spec, NodeColor::Black, &[(inputs[hv], sets[hv])], Some((inputs[hh], x)))?[0];
                    labels[hv] = Some(y);
                    Some((inputs[hv], y))
                }
                None => None,
            };
            let chosen = choose_labels_single_node(spec, NodeColor::White, &inc, out)?;
            for (&c, l) in ch.iter().zip(chosen) {
                labels[half(tree, bt, v, c)] = Some(l);
            }
            continue;
        }
        let setup = compress_path(tree, bt, &units, u, inputs, &sets);
        let class = &cache[&classes[&u]];
        let first = *setup.half_edges.first().expect("non-empty");
        let last = *setup.half_edges.last().expect("non-empty");
        let a = labels[first].ok_or(SolverError::Internal("left label missing"))?;
        let b = labels[last].ok_or(SolverError::Internal("right label missing"))?;
        let member = class.find(a, b).ok_or(SolverError::Internal("class misses an outgoing pair"))?;
        for (k, &h) in setup.half_edges.iter().enumerate() {
            labels[h] = Some(member.edges[k]);
        }
        for (k, &x) in unit.nodes.iter().enumerate() {
            for (&c, &l) in setup.children[k].iter().zip(&member.incoming[2 * k + 1]) {
                labels[half(tree, bt, x, c)] = Some(l);
            }
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(e, l)| l.ok_or(SolverError::Unlabeled(e)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GenericSolution { units, sets, labels, class_cache_hits: hits })
}
