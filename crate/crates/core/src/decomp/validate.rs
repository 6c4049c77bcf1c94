//! Validation of (partial) decompositions and state invariants.

use std::collections::VecDeque;

use super::{quality, quality_oracle, DecompositionState, LayerLabel, Orientation};
use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompVerdict {
    Accept,
    /// `property` is 1 (compress paths), 2 (rake components) or 3
    /// (independence and single higher neighbour).
    Reject { property: u8, witnesses: Vec<usize> },
}

impl DecompVerdict {
    pub fn is_accept(&self) -> bool {
        *self == DecompVerdict::Accept
    }
}

fn higher_or_free(state: &DecompositionState, v: usize, u: usize) -> bool {
    state.is_free(u) || state.layer[u].key() > state.layer[v].key()
}

/// Connected components of nodes selected by `same`.
fn components(tree: &Tree, nodes: &[usize], same: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let n = tree.node_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for &s in nodes {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &u in tree.neighbors(v) {
                if !seen[u] && same(v, u) {
                    seen[u] = true;
                    comp.push(u);
                    q.push_back(u);
                }
            }
        }
        out.push(comp);
    }
    out
}

fn diameter_within(tree: &Tree, comp: &[usize], inside: &dyn Fn(usize) -> bool) -> usize {
    let far = |s: usize| -> (usize, usize) {
        let mut dist = std::collections::HashMap::from([(s, 0usize)]);
        let mut q = VecDeque::from([s]);
        let mut best = (s, 0);
        while let Some(v) = q.pop_front() {
            let d = dist[&v];
            if d > best.1 {
                best = (v, d);
            }
            for &u in tree.neighbors(v) {
                if inside(u) && !dist.contains_key(&u) {
                    dist.insert(u, d + 1);
                    q.push_back(u);
                }
            }
        }
        best
    };
    let (a, _) = far(comp[0]);
    far(a).1
}

/// Checks the structural properties of the assigned part of a decomposition.
pub fn validate_partial_decomposition(tree: &Tree, state: &DecompositionState, ell: usize, gamma: usize) -> DecompVerdict {
    let n = tree.node_count();
    let layer = &state.layer;
    let compress: Vec<usize> = (0..n).filter(|&v| layer[v].is_compress_like()).collect();
    for comp in components(tree, &compress, |v, u| layer[u] == layer[v]) {
        let inside = |x: usize| layer[x] == layer[comp[0]];
        let bad_shape = comp.iter().any(|&v| tree.neighbors(v).iter().filter(|&&u| inside(u)).count() > 2)
            || comp.len() < ell
            || comp.len() > 2 * ell;
        let higher = |v: usize| tree.neighbors(v).iter().filter(|&&u| higher_or_free(state, v, u)).count();
        let bad_ends = comp.iter().any(|&v| {
            let deg_in = tree.neighbors(v).iter().filter(|&&u| inside(u)).count();
            let expected = match deg_in {
                0 => 2,
                1 => 1,
                _ => 0,
            };
            higher(v) != expected
        });
        if bad_shape || bad_ends {
            return DecompVerdict::Reject { property: 1, witnesses: comp };
        }
    }
    let rake: Vec<usize> = (0..n).filter(|&v| layer[v].is_rake()).collect();
    let rake_layer = |v: usize| match layer[v] {
        LayerLabel::Rake(i, _) => Some(i),
        _ => None,
    };
    for comp in components(tree, &rake, |v, u| rake_layer(u) == rake_layer(v)) {
        let tops = comp
            .iter()
            .filter(|&&v| tree.neighbors(v).iter().any(|&u| higher_or_free(state, v, u) && rake_layer(u) != rake_layer(v)))
            .count();
        let i = rake_layer(comp[0]);
        let inside = |x: usize| rake_layer(x) == i;
        if tops > 1 || diameter_within(tree, &comp, &inside) > 2 * gamma {
            return DecompVerdict::Reject { property: 2, witnesses: comp };
        }
    }
    for &v in &rake {
        let same = tree.neighbors(v).iter().find(|&&u| layer[u] == layer[v]);
        if let Some(&u) = same {
            return DecompVerdict::Reject { property: 3, witnesses: vec![v, u] };
        }
        if tree.neighbors(v).iter().filter(|&&u| higher_or_free(state, v, u)).count() > 1 {
            return DecompVerdict::Reject { property: 3, witnesses: vec![v] };
        }
    }
    DecompVerdict::Accept
}

/// Orientation bookkeeping, permanence of local maxima and the incremental
/// quality against the oracle.
pub fn check_invariants(tree: &Tree, state: &DecompositionState) -> Result<(), String> {
    let n = tree.node_count();
    let mut incoming = vec![0usize; n];
    for (e, &o) in state.orientation.iter().enumerate() {
        let (a, b) = tree.edge(e);
        match o {
            Orientation::Unoriented => {}
            Orientation::TowardsA => incoming[a] += 1,
            Orientation::TowardsB => incoming[b] += 1,
        }
    }
    for v in 0..n {
        if incoming[v] > 1 {
            return Err(format!("node {v} has {} incoming edges", incoming[v]));
        }
        if (incoming[v] == 1) != state.parent[v].is_some() {
            return Err(format!("parent of {v} disagrees with orientations"));
        }
        if state.local_max[v] && !state.is_local_max_now(tree, v) {
            return Err(format!("node {v} stopped being a local maximum"));
        }
        if quality(state, v) != quality_oracle(state, v) {
            return Err(format!(
                "quality of {v}: incremental {} oracle {}",
                quality(state, v),
                quality_oracle(state, v)
            ));
        }
    }
    Ok(())
}
