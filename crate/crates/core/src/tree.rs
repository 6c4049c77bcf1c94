//! Trees, instance generators, edge subdivision and the edge-list file format.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("malformed input at line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(usize, usize),
    #[error("input is disconnected")]
    Disconnected,
    #[error("cycle detected at edge {0} {1}")]
    Cycle(usize, usize),
    #[error("node {node} has degree {degree} above the cap {cap}")]
    DegreeExceeded { node: usize, degree: usize, cap: usize },
    #[error("node count overflow")]
    Overflow,
    #[error("duplicate identifier {0}")]
    DuplicateId(u64),
}

/// Immutable tree in CSR form. Ports of a node are its neighbours in
/// ascending index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    offsets: Vec<usize>,
    nbrs: Vec<usize>,
    nbr_edges: Vec<usize>,
    edges: Vec<(usize, usize)>,
    max_degree: usize,
}

impl Tree {
    /// Builds a tree from an edge list. Edge ids follow the order of `edges`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], max_degree: usize) -> Result<Tree, TreeError> {
        if n == 0 {
            return Err(TreeError::Malformed { line: 1, msg: "node count must be positive".into() });
        }
        let mut dsu = Dsu::new(n);
        let mut seen = HashSet::with_capacity(edges.len());
        let mut canon = Vec::with_capacity(edges.len());
        let mut deg = vec![0usize; n];
        for &(a, b) in edges {
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n || u == v {
                return Err(TreeError::Malformed { line: 0, msg: format!("bad edge {a} {b}") });
            }
            if !seen.insert((u, v)) {
                return Err(TreeError::DuplicateEdge(u, v));
            }
            if !dsu.union(u, v) {
                return Err(TreeError::Cycle(u, v));
            }
            deg[u] += 1;
            deg[v] += 1;
            canon.push((u, v));
        }
        if canon.len() != n - 1 {
            return Err(TreeError::Disconnected);
        }
        for (node, &d) in deg.iter().enumerate() {
            if d > max_degree {
                return Err(TreeError::DegreeExceeded { node, degree: d, cap: max_degree });
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut pairs: Vec<Vec<(usize, usize)>> = deg.iter().map(|&d| Vec::with_capacity(d)).collect();
        for (e, &(u, v)) in canon.iter().enumerate() {
            pairs[u].push((v, e));
            pairs[v].push((u, e));
        }
        let mut nbrs = Vec::with_capacity(2 * canon.len());
        let mut nbr_edges = Vec::with_capacity(2 * canon.len());
        for list in pairs.iter_mut() {
            list.sort_unstable();
            for &(w, e) in list.iter() {
                nbrs.push(w);
                nbr_edges.push(e);
            }
        }
        Ok(Tree { offsets, nbrs, nbr_edges, edges: canon, max_degree })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Neighbours of `v` in port order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nbrs[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Edge ids of `v`, aligned with [`Tree::neighbors`].
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.nbr_edges[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Edges as `(u, v)` with `u < v`, indexed by edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Endpoint of `e` that is not `v`.
    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Port index of neighbour `u` at `v`.
    pub fn port_of(&self, v: usize, u: usize) -> Option<usize> {
        self.neighbors(v).binary_search(&u).ok()
    }

    /// Edge id joining `v` and `u`, if adjacent.
    pub fn edge_between(&self, v: usize, u: usize) -> Option<usize> {
        self.port_of(v, u).map(|p| self.incident_edges(v)[p])
    }

    /// Largest actual degree.
    pub fn actual_max_degree(&self) -> usize {
        (0..self.node_count()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Rechecks every structural invariant.
    pub fn validate(&self) -> Result<(), TreeError> {
        let n = self.node_count();
        if self.edges.len() + 1 != n {
            return Err(TreeError::Disconnected);
        }
        for v in 0..n {
            if self.degree(v) > self.max_degree {
                return Err(TreeError::DegreeExceeded { node: v, degree: self.degree(v), cap: self.max_degree });
            }
            let nb = self.neighbors(v);
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return Err(TreeError::Malformed { line: 0, msg: format!("ports of {v} not ascending") });
            }
            for (p, &u) in nb.iter().enumerate() {
                if self.port_of(u, v).is_none() {
                    return Err(TreeError::Malformed { line: 0, msg: format!("asymmetric adjacency {v} {u}") });
                }
                let (a, b) = self.edges[self.incident_edges(v)[p]];
                if !((a == v && b == u) || (a == u && b == v)) {
                    return Err(TreeError::Malformed { line: 0, msg: format!("edge id mismatch at {v}") });
                }
            }
        }
        let d = bfs_distances(self, 0);
        if d.contains(&usize::MAX) {
            return Err(TreeError::Disconnected);
        }
        Ok(())
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// BFS hop distances from `src`; unreachable nodes get `usize::MAX`.
pub fn bfs_distances(t: &Tree, src: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; t.node_count()];
    let mut q = VecDeque::new();
    dist[src] = 0;
    q.push_back(src);
    while let Some(v) = q.pop_front() {
        for &u in t.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                q.push_back(u);
            }
        }
    }
    dist
}

/// Distinct 64-bit identifiers, one per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdAssignment {
    ids: Vec<u64>,
}

impl IdAssignment {
    pub fn from_seed(n: usize, seed: u64) -> IdAssignment {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1d5_a55e_7001);
        let mut seen = HashSet::with_capacity(n);
        let mut ids = Vec::with_capacity(n);
        while ids.len() < n {
            let x: u64 = rng.gen();
            if seen.insert(x) {
                ids.push(x);
            }
        }
        IdAssignment { ids }
    }

    pub fn from_vec(ids: Vec<u64>) -> Result<IdAssignment, TreeError> {
        let mut seen = HashSet::with_capacity(ids.len());
        for &x in &ids {
            if !seen.insert(x) {
                return Err(TreeError::DuplicateId(x));
            }
        }
        Ok(IdAssignment { ids })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, v: usize) -> u64 {
        self.ids[v]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.ids
    }
}

pub fn generate_path(n: usize) -> Tree {
    assert!(n >= 1, "path needs at least one node");
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Tree::from_edges(n, &edges, 2).expect("path is a tree")
}

pub fn generate_complete_tree(arity: usize, depth: u32) -> Result<Tree, TreeError> {
    assert!(arity >= 2, "arity must be at least 2");
    let mut n: usize = 0;
    let mut level: usize = 1;
    for d in 0..=depth {
        n = n.checked_add(level).ok_or(TreeError::Overflow)?;
        if d < depth {
            level = level.checked_mul(arity).ok_or(TreeError::Overflow)?;
        }
    }
    let edges: Vec<_> = (1..n).map(|c| ((c - 1) / arity, c)).collect();
    Tree::from_edges(n, &edges, arity + 1)
}

/// Random attachment: node `i` joins a uniformly chosen earlier node whose
/// degree is still below the cap.
pub fn generate_random_tree(n: usize, max_degree: usize, seed: u64) -> Tree {
    assert!(n >= 1 && max_degree >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deg = vec![0usize; n];
    let mut open: Vec<usize> = vec![0];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let k = rng.gen_range(0..open.len());
        let p = open[k];
        edges.push((p, i));
        deg[p] += 1;
        deg[i] += 1;
        if deg[p] == max_degree {
            open.swap_remove(k);
        }
        open.push(i);
    }
    Tree::from_edges(n, &edges, max_degree).expect("attachment yields a tree")
}

struct HierBuilder {
    edges: Vec<(usize, usize)>,
    levels: Vec<usize>,
}

impl HierBuilder {
    fn node(&mut self, level: usize) -> usize {
        self.levels.push(level);
        self.levels.len() - 1
    }

    fn path(&mut self, len: usize, level: usize) -> Vec<usize> {
        let nodes: Vec<usize> = (0..len).map(|_| self.node(level)).collect();
        for w in nodes.windows(2) {
            self.edges.push((w[0], w[1]));
        }
        nodes
    }

    /// Builds H(k, s) and returns the first spine node.
    fn build(&mut self, k: usize, s: usize) -> usize {
        let spine = self.path(s, k);
        if k == 1 {
            return spine[0];
        }
        if s == 1 {
            let c = self.build(k - 1, s);
            self.edges.push((spine[0], c));
            return spine[0];
        }
        for (idx, &x) in spine.iter().enumerate() {
            let end = idx == 0 || idx == s - 1;
            if k == 2 {
                if end {
                    for len in [s.div_ceil(2), s / 2] {
                        let p = self.path(len, 1);
                        self.edges.push((x, p[0]));
                    }
                } else {
                    let p = self.path(s, 1);
                    self.edges.push((x, p[0]));
                }
            } else {
                let copies = if end { 2 } else { 1 };
                for _ in 0..copies {
                    let c = self.build(k - 1, s);
                    self.edges.push((x, c));
                }
            }
        }
        spine[0]
    }
}

fn hierarchical(k: usize, s: usize) -> (Vec<(usize, usize)>, Vec<usize>) {
    assert!(k >= 1 && s >= 1);
    let mut b = HierBuilder { edges: Vec::new(), levels: Vec::new() };
    b.build(k, s);
    (b.edges, b.levels)
}

/// Worst-case instance for the hierarchical 2½-coloring.
///
/// `k = 1` is a path of `s` nodes. For `k = 2` a spine of `s` nodes carries
/// one pendant path of `s` nodes per interior node and two pendant paths of
/// sizes `ceil(s/2)` and `floor(s/2)` per end, so `n = s + s²` and the spine
/// ends keep degree 3. For `k ≥ 3` each interior spine node carries one copy
/// of the `k − 1` instance and each end carries two.
pub fn generate_hierarchical_worst_case(k: usize, s: usize) -> Tree {
    let (edges, levels) = hierarchical(k, s);
    let cap = if k == 1 { 2 } else { 4 };
    Tree::from_edges(levels.len(), &edges, cap).expect("construction yields a tree")
}

/// Level each node of [`generate_hierarchical_worst_case`] was built for.
pub fn hierarchical_construction_levels(k: usize, s: usize) -> Vec<usize> {
    hierarchical(k, s).1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeColor {
    White,
    Black,
}

/// A tree with every edge subdivided. Original node `v` keeps index `v`;
/// the black node of original edge `e` is `n + e`. The half-edge of `e`
/// on the side of its smaller endpoint has id `2e`, the other `2e + 1`.
#[derive(Debug, Clone)]
pub struct BipartiteTree {
    tree: Tree,
    original_n: usize,
}

impl BipartiteTree {
    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn original_n(&self) -> usize {
        self.original_n
    }

    pub fn color(&self, v: usize) -> NodeColor {
        if v < self.original_n {
            NodeColor::White
        } else {
            NodeColor::Black
        }
    }

    pub fn is_white(&self, v: usize) -> bool {
        v < self.original_n
    }

    /// Original edge represented by a black node.
    pub fn original_edge(&self, black: usize) -> usize {
        debug_assert!(black >= self.original_n);
        black - self.original_n
    }

    pub fn black_of_edge(&self, e: usize) -> usize {
        self.original_n + e
    }

    /// Half-edge id for original edge `e`, on the side of original endpoint `v`.
    pub fn half_edge(&self, e: usize, v: usize) -> usize {
        let (a, _) = self.tree.edge(e * 2);
        if a == v {
            2 * e
        } else {
            2 * e + 1
        }
    }
}

pub fn subdivide_edges(t: &Tree) -> BipartiteTree {
    let n = t.node_count();
    let mut edges = Vec::with_capacity(2 * t.edge_count());
    for (e, &(u, v)) in t.edges().iter().enumerate() {
        edges.push((u, n + e));
        edges.push((v, n + e));
    }
    let cap = t.max_degree().max(2);
    let tree = Tree::from_edges(n + t.edge_count(), &edges, cap).expect("subdivision of a tree is a tree");
    BipartiteTree { tree, original_n: n }
}

pub fn read_tree(text: &str) -> Result<Tree, TreeError> {
    let mut lines = text.lines().enumerate();
    let (_, head) = lines.next().ok_or(TreeError::Malformed { line: 1, msg: "empty input".into() })?;
    let n: usize = head
        .trim()
        .parse()
        .map_err(|_| TreeError::Malformed { line: 1, msg: format!("bad node count {head:?}") })?;
    if n == 0 {
        return Err(TreeError::Malformed { line: 1, msg: "node count must be positive".into() });
    }
    let mut dsu = Dsu::new(n);
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut deg = vec![0usize; n];
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| TreeError::Malformed { line: lineno, msg: msg.to_string() };
        if parts.len() != 2 {
            return Err(bad("expected two node indices"));
        }
        let u: usize = parts[0].parse().map_err(|_| bad("bad node index"))?;
        let v: usize = parts[1].parse().map_err(|_| bad("bad node index"))?;
        if u >= v || v >= n {
            return Err(bad("need 0 <= u < v < n"));
        }
        if !seen.insert((u, v)) {
            return Err(TreeError::DuplicateEdge(u, v));
        }
        if !dsu.union(u, v) {
            return Err(TreeError::Cycle(u, v));
        }
        deg[u] += 1;
        deg[v] += 1;
        edges.push((u, v));
    }
    if edges.len() != n - 1 {
        return Err(TreeError::Disconnected);
    }
    edges.sort_unstable();
    let cap = deg.iter().copied().max().unwrap_or(0).max(1);
    Tree::from_edges(n, &edges, cap)
}

/// Canonical text: header, then edges sorted ascending.
pub fn write_tree(t: &Tree) -> String {
    let mut edges = t.edges().to_vec();
    edges.sort_unstable();
    let mut out = String::with_capacity(12 * (edges.len() + 1));
    let _ = writeln!(out, "{}", t.node_count());
    for (u, v) in edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
