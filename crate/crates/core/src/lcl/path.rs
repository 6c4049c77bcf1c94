//! Classes of feasible labelings of short paths and feasible functions.

use std::collections::HashSet;

use super::single::choose_labels_single_node;
use super::{LabelSet, LclError, LclSpec};
use crate::tree::NodeColor;
use crate::Label;

/// One node of a path: its color and its incoming edges `(input, label-set)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathNode {
    pub side: NodeColor,
    pub incoming: Vec<(Label, LabelSet)>,
}

/// A path `x_0 .. x_{k-1}` with an outgoing edge before `x_0` and one after
/// `x_{k-1}`. Edge `j` joins `x_{j-1}` and `x_j`, so edges `0` and `k` are
/// the outgoing ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathInstance {
    pub nodes: Vec<PathNode>,
    /// Input label of each of the `k + 1` edges.
    pub edge_inputs: Vec<Label>,
}

impl PathInstance {
    pub fn new(nodes: Vec<PathNode>) -> PathInstance {
        let k = nodes.len();
        PathInstance { nodes, edge_inputs: vec![0; k + 1] }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A feasible labeling: labels of the `k + 1` path edges and, per node, a
/// witness choice for its incoming edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathLabeling {
    pub edges: Vec<Label>,
    pub incoming: Vec<Vec<Label>>,
}

impl PathLabeling {
    pub fn outgoing(&self) -> (Label, Label) {
        (self.edges[0], self.edges[self.edges.len() - 1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathClass {
    pub members: Vec<PathLabeling>,
}

impl PathClass {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Label-sets of the two outgoing edges.
    pub fn out_sets(&self) -> (LabelSet, LabelSet) {
        self.members.iter().fold((LabelSet::EMPTY, LabelSet::EMPTY), |(a, b), m| {
            let (x, y) = m.outgoing();
            (a.union(LabelSet::singleton(x)), b.union(LabelSet::singleton(y)))
        })
    }

    /// Realized outgoing pairs.
    pub fn outgoing_pairs(&self) -> HashSet<(Label, Label)> {
        self.members.iter().map(|m| m.outgoing()).collect()
    }

    pub fn find(&self, a: Label, b: Label) -> Option<&PathLabeling> {
        self.members.iter().find(|m| m.outgoing() == (a, b))
    }
}

fn node_witness(spec: &LclSpec, path: &PathInstance, i: usize, left: Label, right: Label) -> Option<Vec<Label>> {
    let node = &path.nodes[i];
    let mut incoming = node.incoming.clone();
    incoming.push((path.edge_inputs[i], LabelSet::singleton(left)));
    let fixed = (path.edge_inputs[i + 1], right);
    let mut labels = choose_labels_single_node(spec, node.side, &incoming, Some(fixed)).ok()?;
    labels.pop();
    Some(labels)
}

/// Every feasible labeling of the path, by exhaustive search.
pub fn path_maximal_class(spec: &LclSpec, path: &PathInstance) -> PathClass {
    let mut class = PathClass::default();
    if path.is_empty() {
        return class;
    }
    let labels: Vec<Label> = spec.outputs.iter().collect();
    let mut edges = Vec::with_capacity(path.len() + 1);
    let mut wit = Vec::with_capacity(path.len());
    for &l in &labels {
        edges.push(l);
        extend(spec, path, &labels, &mut edges, &mut wit, &mut class);
        edges.pop();
    }
    class
}

fn extend(
    spec: &LclSpec,
    path: &PathInstance,
    labels: &[Label],
    edges: &mut Vec<Label>,
    wit: &mut Vec<Vec<Label>>,
    class: &mut PathClass,
) {
    let i = edges.len() - 1;
    if i == path.len() {
        class.members.push(PathLabeling { edges: edges.clone(), incoming: wit.clone() });
        return;
    }
    for &l in labels {
        if let Some(w) = node_witness(spec, path, i, edges[i], l) {
            edges.push(l);
            wit.push(w);
            extend(spec, path, labels, edges, wit, class);
            wit.pop();
            edges.pop();
        }
    }
}

fn member_is_feasible(spec: &LclSpec, path: &PathInstance, m: &PathLabeling) -> bool {
    if m.edges.len() != path.len() + 1 || m.incoming.len() != path.len() {
        return false;
    }
    path.nodes.iter().enumerate().all(|(i, node)| {
        let chosen = &m.incoming[i];
        if chosen.len() != node.incoming.len() {
            return false;
        }
        if chosen.iter().zip(&node.incoming).any(|(&l, &(_, s))| !s.contains(l)) {
            return false;
        }
        let mut pairs: Vec<(Label, Label)> = node.incoming.iter().zip(chosen).map(|(&(a, _), &l)| (a, l)).collect();
        pairs.push((path.edge_inputs[i], m.edges[i]));
        pairs.push((path.edge_inputs[i + 1], m.edges[i + 1]));
        spec.constraint(node.side).allows(&pairs)
    })
}

/// Whether `candidate` is closed under mixing outgoing labels: for any two
/// members with outgoing pairs `(a1, b1)` and `(a2, b2)`, some member has
/// outgoing pair `(a1, b2)`. Errors if a member is not a feasible labeling.
pub fn verify_independent_class(spec: &LclSpec, path: &PathInstance, candidate: &PathClass) -> Result<bool, LclError> {
    if candidate.members.iter().any(|m| !member_is_feasible(spec, path, m)) {
        return Err(LclError::NotInMaximalClass);
    }
    let pairs = candidate.outgoing_pairs();
    let (s1, s2) = candidate.out_sets();
    Ok(pairs.len() == s1.len() * s2.len())
}

/// A map from a path's maximal class to a nonempty independent subclass.
pub trait FeasibleFunction: Sync {
    fn apply(&self, spec: &LclSpec, path: &PathInstance, maximal: &PathClass) -> Result<PathClass, LclError>;
}

/// Keeps the members whose outgoing pair lies in the largest rectangle
/// `S1 × S2` of realized pairs. Ties go to the smallest `S1` bitmask.
#[derive(Debug, Clone, Copy, Default)]
pub struct RectangleFunction;

impl FeasibleFunction for RectangleFunction {
    fn apply(&self, _spec: &LclSpec, _path: &PathInstance, maximal: &PathClass) -> Result<PathClass, LclError> {
        if maximal.is_empty() {
            return Err(LclError::EmptyClass);
        }
        let pairs = maximal.outgoing_pairs();
        let (p1, _) = maximal.out_sets();
        let firsts: Vec<Label> = p1.iter().collect();
        let mut best = (0usize, LabelSet::EMPTY, LabelSet::EMPTY);
        for mask in 1u64..(1u64 << firsts.len()) {
            let s1 = LabelSet::from_labels((0..firsts.len()).filter(|&k| mask >> k & 1 == 1).map(|k| firsts[k]));
            let mut s2: Option<LabelSet> = None;
            for a in s1.iter() {
                let row = LabelSet::from_labels(pairs.iter().filter(|p| p.0 == a).map(|p| p.1));
                s2 = Some(s2.map_or(row, |s| s.intersect(row)));
            }
            let s2 = s2.unwrap_or(LabelSet::EMPTY);
            let area = s1.len() * s2.len();
            if area > best.0 || (area == best.0 && area > 0 && s1 < best.1) {
                best = (area, s1, s2);
            }
        }
        let (_, s1, s2) = best;
        let members = maximal
            .members
            .iter()
            .filter(|m| {
                let (a, b) = m.outgoing();
                s1.contains(a) && s2.contains(b)
            })
            .cloned()
            .collect();
        Ok(PathClass { members })
    }
}

/// Rectangle restriction for proper 3-coloring, which also requires every
/// white node to have at least two colors available and both outgoing
/// label-sets to keep at least two colors.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThreeColoringFunction;

impl FeasibleFunction for ThreeColoringFunction {
    fn apply(&self, spec: &LclSpec, path: &PathInstance, maximal: &PathClass) -> Result<PathClass, LclError> {
        for (i, node) in path.nodes.iter().enumerate() {
            if node.side == NodeColor::White {
                let avail = node.incoming.iter().fold(spec.outputs, |acc, &(_, s)| acc.intersect(s));
                if avail.len() < 2 {
                    return Err(LclError::TooFewColors(i));
                }
            }
        }
        let class = RectangleFunction.apply(spec, path, maximal)?;
        let (s1, s2) = class.out_sets();
        if s1.len() < 2 || s2.len() < 2 {
            return Err(LclError::TooFewColors(if s1.len() < 2 { 0 } else { path.len() - 1 }));
        }
        Ok(class)
    }
}

pub fn feasible_function_3coloring(spec: &LclSpec, path: &PathInstance) -> Result<PathClass, LclError> {
    let maximal = path_maximal_class(spec, path);
    ThreeColoringFunction.apply(spec, path, &maximal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full() -> LabelSet {
        LabelSet::from_labels([1, 2, 3])
    }

    fn white(incoming: Vec<LabelSet>) -> PathNode {
        PathNode { side: NodeColor::White, incoming: incoming.into_iter().map(|s| (0, s)).collect() }
    }

    fn black() -> PathNode {
        PathNode { side: NodeColor::Black, incoming: vec![] }
    }

    /// Black-ended path with `w` white nodes.
    fn segment(w: usize) -> PathInstance {
        let mut nodes = vec![black()];
        for _ in 0..w {
            nodes.push(white(vec![]));
            nodes.push(black());
        }
        PathInstance::new(nodes)
    }

    #[test]
    fn single_white_between_blacks() {
        let spec = LclSpec::three_coloring(3);
        let class = path_maximal_class(&spec, &segment(1));
        assert_eq!(class.outgoing_pairs().len(), 9);
        for m in &class.members {
            let c = m.edges[1];
            assert_eq!(m.edges[2], c);
            assert_ne!(m.edges[0], c);
            assert_ne!(m.edges[3], c);
        }
        assert_eq!(class.len(), 9 + 3);
    }

    #[test]
    fn empty_set_gives_empty_class() {
        let spec = LclSpec::three_coloring(3);
        let p = PathInstance::new(vec![black(), white(vec![LabelSet::EMPTY]), black()]);
        assert!(path_maximal_class(&spec, &p).is_empty());
    }

    #[test]
    fn independence_examples() {
        let spec = LclSpec::three_coloring(3);
        let p = segment(2);
        let maximal = path_maximal_class(&spec, &p);
        assert!(verify_independent_class(&spec, &p, &maximal).unwrap());
        let single = PathClass { members: vec![maximal.members[0].clone()] };
        assert!(verify_independent_class(&spec, &p, &single).unwrap());
        let a = maximal.find(1, 1).unwrap().clone();
        let b = maximal.find(2, 2).unwrap().clone();
        assert!(!verify_independent_class(&spec, &p, &PathClass { members: vec![a.clone(), b] }).unwrap());
        let mut bogus = a;
        bogus.edges[1] = bogus.edges[0];
        assert_eq!(
            verify_independent_class(&spec, &p, &PathClass { members: vec![bogus] }),
            Err(LclError::NotInMaximalClass)
        );
    }

    #[test]
    fn coloring_function_keeps_full_sets() {
        let spec = LclSpec::three_coloring(3);
        let class = feasible_function_3coloring(&spec, &segment(1)).unwrap();
        assert_eq!(class.out_sets(), (full(), full()));
        assert!(verify_independent_class(&spec, &segment(1), &class).unwrap());
        let narrow = PathInstance::new(vec![black(), white(vec![LabelSet::singleton(1)]), black()]);
        assert_eq!(feasible_function_3coloring(&spec, &narrow), Err(LclError::TooFewColors(1)));
    }

    #[test]
    fn rectangle_prefers_largest_area() {
        let spec = LclSpec::three_coloring(3);
        let two = LabelSet::from_labels([1, 2]);
        let p = PathInstance::new(vec![black(), white(vec![two]), black()]);
        let maximal = path_maximal_class(&spec, &p);
        assert_eq!(maximal.outgoing_pairs().len(), 7);
        let class = RectangleFunction.apply(&spec, &p, &maximal).unwrap();
        assert_eq!(class.out_sets(), (LabelSet::from_labels([1, 3]), LabelSet::from_labels([1, 3])));
        assert!(verify_independent_class(&spec, &p, &class).unwrap());
    }
}
