//! LCL problems in the black-white formalism: specs, checking, label-sets,
//! path classes, feasible functions and the diameter-time oracle.

mod diameter;
mod path;
mod single;

pub use diameter::{exhaustive_solve, solve_diameter, DiameterOutcome};
pub use path::{
    feasible_function_3coloring, path_maximal_class, verify_independent_class, FeasibleFunction, PathClass,
    PathInstance, PathLabeling, PathNode, RectangleFunction, ThreeColoringFunction,
};
pub use single::{choose_labels_single_node, maximal_label_set_single_node, node_satisfiable};

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::tree::{BipartiteTree, NodeColor, Tree};
use crate::Label;

/// `(input, output)` pair on one incident edge.
pub type Pair = (Label, Label);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LclError {
    #[error("empty {0} alphabet")]
    EmptyAlphabet(&'static str),
    #[error("label {0} is outside the supported range 0..64")]
    LabelTooLarge(Label),
    #[error("pair ({0},{1}) uses a label outside the alphabets")]
    PairOutsideAlphabet(Label, Label),
    #[error("edge {0} has no output label")]
    MissingLabel(usize),
    #[error("edge constraint multiset of size {0}, expected 2")]
    EdgeConstraintSize(usize),
    #[error("no labeling satisfies the node constraint")]
    NoCompletion,
    #[error("candidate member is not a feasible labeling of the path")]
    NotInMaximalClass,
    #[error("node {0} of the path has fewer than 2 available colors")]
    TooFewColors(usize),
    #[error("empty class for the path")]
    EmptyClass,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Subset of output labels as a bitmask over label values `0..64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LabelSet(u64);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn from_bits(bits: u64) -> LabelSet {
        LabelSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(l: Label) -> LabelSet {
        LabelSet(1 << l)
    }

    pub fn from_labels<I: IntoIterator<Item = Label>>(it: I) -> LabelSet {
        LabelSet(it.into_iter().fold(0, |acc, l| acc | 1 << l))
    }

    pub fn contains(self, l: Label) -> bool {
        l < 64 && self.0 >> l & 1 == 1
    }

    pub fn insert(&mut self, l: Label) {
        self.0 |= 1 << l;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, o: LabelSet) -> LabelSet {
        LabelSet(self.0 & o.0)
    }

    pub fn union(self, o: LabelSet) -> LabelSet {
        LabelSet(self.0 | o.0)
    }

    pub fn is_subset(self, o: LabelSet) -> bool {
        self.0 & !o.0 == 0
    }

    /// Smallest member.
    pub fn first(self) -> Option<Label> {
        (self.0 != 0).then(|| self.0.trailing_zeros())
    }

    pub fn iter(self) -> impl Iterator<Item = Label> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let l = bits.trailing_zeros();
            bits &= bits - 1;
            Some(l)
        })
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Set of allowed multisets, each stored sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Constraint {
    set: HashSet<Vec<Pair>>,
    by_size: HashMap<usize, Vec<Vec<Pair>>>,
}

impl Constraint {
    pub fn new(multisets: Vec<Vec<Pair>>) -> Constraint {
        let mut c = Constraint::default();
        for mut m in multisets {
            m.sort_unstable();
            if c.set.insert(m.clone()) {
                c.by_size.entry(m.len()).or_default().push(m);
            }
        }
        for v in c.by_size.values_mut() {
            v.sort_unstable();
        }
        c
    }

    pub fn allows(&self, pairs: &[Pair]) -> bool {
        let mut m = pairs.to_vec();
        m.sort_unstable();
        self.set.contains(&m)
    }

    pub fn of_size(&self, d: usize) -> &[Vec<Pair>] {
        self.by_size.get(&d).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// All multisets in a fixed order.
    pub fn sorted(&self) -> Vec<&Vec<Pair>> {
        let mut v: Vec<&Vec<Pair>> = self.set.iter().collect();
        v.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LclSpec {
    pub inputs: LabelSet,
    pub outputs: LabelSet,
    pub white: Constraint,
    pub black: Constraint,
}

impl LclSpec {
    pub fn new(
        inputs: &[Label],
        outputs: &[Label],
        white: Vec<Vec<Pair>>,
        black: Vec<Vec<Pair>>,
    ) -> Result<LclSpec, LclError> {
        if inputs.is_empty() {
            return Err(LclError::EmptyAlphabet("input"));
        }
        if outputs.is_empty() {
            return Err(LclError::EmptyAlphabet("output"));
        }
        if let Some(&l) = inputs.iter().chain(outputs).find(|&&l| l >= 64) {
            return Err(LclError::LabelTooLarge(l));
        }
        let inputs = LabelSet::from_labels(inputs.iter().copied());
        let outputs = LabelSet::from_labels(outputs.iter().copied());
        for &(a, x) in white.iter().chain(&black).flatten() {
            if !inputs.contains(a) || !outputs.contains(x) {
                return Err(LclError::PairOutsideAlphabet(a, x));
            }
        }
        Ok(LclSpec { inputs, outputs, white: Constraint::new(white), black: Constraint::new(black) })
    }

    pub fn constraint(&self, side: NodeColor) -> &Constraint {
        match side {
            NodeColor::White => &self.white,
            NodeColor::Black => &self.black,
        }
    }

    /// Proper 3-coloring with colors 1, 2, 3 and the single input 0: a white
    /// node sees one color on all its edges, a black node two distinct ones.
    pub fn three_coloring(max_degree: usize) -> LclSpec {
        let white = (0..=max_degree)
            .flat_map(|d| (1..=3).map(move |c| vec![(0, c); d]))
            .collect();
        let black = (1..=3)
            .flat_map(|a| (1..=3).filter(move |&b| b != a).map(move |b| vec![(0, a), (0, b)]))
            .collect();
        LclSpec::new(&[0], &[1, 2, 3], white, black).expect("built-in spec is well formed")
    }

    /// Parses the line format `inputs: ...`, `outputs: ...`, `W: (a,x) ...`, `B: ...`.
    pub fn parse(text: &str) -> Result<LclSpec, LclError> {
        let mut inputs = None;
        let mut outputs = None;
        let mut white = Vec::new();
        let mut black = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| LclError::Parse { line: i + 1, msg: msg.to_string() };
            let (key, rest) = line.split_once(':').ok_or_else(|| err("missing ':'"))?;
            match key.trim() {
                "inputs" => inputs = Some(parse_labels(rest).ok_or_else(|| err("bad label"))?),
                "outputs" => outputs = Some(parse_labels(rest).ok_or_else(|| err("bad label"))?),
                "W" => white.push(parse_pairs(rest).ok_or_else(|| err("bad pair"))?),
                "B" => black.push(parse_pairs(rest).ok_or_else(|| err("bad pair"))?),
                other => return Err(err(&format!("unknown key {other:?}"))),
            }
        }
        let inputs = inputs.ok_or(LclError::EmptyAlphabet("input"))?;
        let outputs = outputs.ok_or(LclError::EmptyAlphabet("output"))?;
        LclSpec::new(&inputs, &outputs, white, black)
    }

    pub fn to_text(&self) -> String {
        let join = |s: LabelSet| s.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = format!("inputs: {}\noutputs: {}\n", join(self.inputs), join(self.outputs));
        for (tag, c) in [("W", &self.white), ("B", &self.black)] {
            for m in c.sorted() {
                out.push_str(tag);
                out.push(':');
                for (a, x) in m {
                    let _ = write!(out, " ({a},{x})");
                }
                out.push('\n');
            }
        }
        out
    }
}

fn parse_labels(s: &str) -> Option<Vec<Label>> {
    s.split_whitespace().map(|t| t.parse().ok()).collect()
}

fn parse_pairs(s: &str) -> Option<Vec<Pair>> {
    s.split_whitespace()
        .map(|t| {
            let inner = t.strip_prefix('(')?.strip_suffix(')')?;
            let (a, x) = inner.split_once(',')?;
            Some((a.trim().parse().ok()?, x.trim().parse().ok()?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    /// First node (in index order) whose constraint fails.
    Reject(usize),
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

/// Checks a labeling of the edges of a subdivided tree. `inputs` and
/// `outputs` are indexed by edge id of `bt.tree()`.
pub fn check_solution(
    spec: &LclSpec,
    bt: &BipartiteTree,
    inputs: &[Label],
    outputs: &[Option<Label>],
) -> Result<Verdict, LclError> {
    let t = bt.tree();
    if let Some(e) = (0..t.edge_count()).find(|&e| outputs.get(e).copied().flatten().is_none()) {
        return Err(LclError::MissingLabel(e));
    }
    for v in 0..t.node_count() {
        if !node_ok(spec, bt.color(v), t, v, inputs, outputs) {
            return Ok(Verdict::Reject(v));
        }
    }
    Ok(Verdict::Accept)
}

fn node_ok(spec: &LclSpec, side: NodeColor, t: &Tree, v: usize, inputs: &[Label], outputs: &[Option<Label>]) -> bool {
    let pairs: Vec<Pair> = t
        .incident_edges(v)
        .iter()
        .map(|&e| (inputs[e], outputs[e].expect("checked above")))
        .collect();
    spec.constraint(side).allows(&pairs)
}

/// All-zero inputs for every edge of `bt`.
pub fn uniform_inputs(bt: &BipartiteTree) -> Vec<Label> {
    vec![0; bt.tree().edge_count()]
}

/// An LCL in the node-edge formalism on the original tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeEdgeSpec {
    pub inputs: Vec<Label>,
    pub outputs: Vec<Label>,
    pub node: Vec<Vec<Pair>>,
    pub edge: Vec<Vec<Pair>>,
}

impl NodeEdgeSpec {
    pub fn three_coloring(max_degree: usize) -> NodeEdgeSpec {
        let node = (0..=max_degree)
            .flat_map(|d| (1..=3).map(move |c| vec![(0, c); d]))
            .collect();
        let edge = (1..=3)
            .flat_map(|a| (1..=3).filter(move |&b| b != a).map(move |b| vec![(0, a), (0, b)]))
            .collect();
        NodeEdgeSpec { inputs: vec![0], outputs: vec![1, 2, 3], node, edge }
    }

    /// Checks half-edge labels on `t`: `labels[2e]` belongs to the smaller
    /// endpoint of edge `e`, `labels[2e + 1]` to the larger.
    pub fn check(&self, t: &Tree, inputs: &[Label], labels: &[Label]) -> Verdict {
        let node = Constraint::new(self.node.clone());
        let edge = Constraint::new(self.edge.clone());
        for v in 0..t.node_count() {
            let pairs: Vec<Pair> = t
                .incident_edges(v)
                .iter()
                .map(|&e| {
                    let h = if t.edge(e).0 == v { 2 * e } else { 2 * e + 1 };
                    (inputs[h], labels[h])
                })
                .collect();
            if !node.allows(&pairs) {
                return Verdict::Reject(v);
            }
        }
        for e in 0..t.edge_count() {
            if !edge.allows(&[(inputs[2 * e], labels[2 * e]), (inputs[2 * e + 1], labels[2 * e + 1])]) {
                return Verdict::Reject(t.node_count() + e);
            }
        }
        Verdict::Accept
    }
}

/// White constraint from node constraints, black from edge constraints.
pub fn convert_node_edge_to_black_white(ne: &NodeEdgeSpec) -> Result<LclSpec, LclError> {
    if let Some(m) = ne.edge.iter().find(|m| m.len() != 2) {
        return Err(LclError::EdgeConstraintSize(m.len()));
    }
    LclSpec::new(&ne.inputs, &ne.outputs, ne.node.clone(), ne.edge.clone())
}
