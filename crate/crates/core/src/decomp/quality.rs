//! Quality of a node: the size of its undominated out-tree.

use super::DecompositionState;

/// Incrementally maintained quality: 0 for dominated nodes, otherwise the
/// number of descendants not separated from `v` by a local maximum.
pub fn quality(state: &DecompositionState, v: usize) -> u64 {
    if state.dominated[v] {
        0
    } else {
        state.subtree_unmarked_count[v]
    }
}

/// Recomputes `quality` from scratch by walking the oriented edges.
pub fn quality_oracle(state: &DecompositionState, v: usize) -> u64 {
    if state.dominated[v] {
        return 0;
    }
    let mut count = 0;
    let mut stack: Vec<usize> = state.children(v).to_vec();
    while let Some(x) = stack.pop() {
        if state.local_max[x] {
            continue;
        }
        count += 1;
        stack.extend(state.children(x).iter().copied());
    }
    count
}
