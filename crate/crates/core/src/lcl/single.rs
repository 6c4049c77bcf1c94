//! Label-sets and label choice for a single node.

use super::{LabelSet, LclError, LclSpec, Pair};
use crate::tree::NodeColor;
use crate::Label;

/// Matches each incoming edge `(input, allowed outputs)` to a distinct pair
/// of `m`, recording the chosen outputs.
fn match_incoming(m: &[Pair], used: &mut [bool], incoming: &[(Label, LabelSet)], idx: usize, out: &mut Vec<Label>) -> bool {
    if idx == incoming.len() {
        return true;
    }
    let (input, set) = incoming[idx];
    for k in 0..m.len() {
        if used[k] || m[k].0 != input || !set.contains(m[k].1) {
            continue;
        }
        if k > 0 && !used[k - 1] && m[k - 1] == m[k] {
            continue;
        }
        used[k] = true;
        out.push(m[k].1);
        if match_incoming(m, used, incoming, idx + 1, out) {
            return true;
        }
        out.pop();
        used[k] = false;
    }
    false
}

/// Labels `l` for the outgoing edge such that some choice from the incoming
/// sets satisfies the node constraint together with `(outgoing_input, l)`.
pub fn maximal_label_set_single_node(
    spec: &LclSpec,
    side: NodeColor,
    incoming: &[(Label, LabelSet)],
    outgoing_input: Label,
) -> LabelSet {
    let mut result = LabelSet::EMPTY;
    let mut used = Vec::new();
    let mut scratch = Vec::new();
    for m in spec.constraint(side).of_size(incoming.len() + 1) {
        for (k, &(a, l)) in m.iter().enumerate() {
            if a != outgoing_input || result.contains(l) {
                continue;
            }
            used.clear();
            used.resize(m.len(), false);
            used[k] = true;
            scratch.clear();
            if match_incoming(m, &mut used, incoming, 0, &mut scratch) {
                result.insert(l);
            }
        }
    }
    result
}

/// Whether a node without outgoing edge can satisfy its constraint.
pub fn node_satisfiable(spec: &LclSpec, side: NodeColor, incoming: &[(Label, LabelSet)]) -> bool {
    choose_labels_single_node(spec, side, incoming, None).is_ok()
}

/// Picks one label per incoming edge, drawn from its set, so that together
/// with the fixed outgoing `(input, output)` pair the node constraint holds.
pub fn choose_labels_single_node(
    spec: &LclSpec,
    side: NodeColor,
    incoming: &[(Label, LabelSet)],
    outgoing: Option<Pair>,
) -> Result<Vec<Label>, LclError> {
    let size = incoming.len() + usize::from(outgoing.is_some());
    let mut used = Vec::new();
    let mut out = Vec::with_capacity(incoming.len());
    for m in spec.constraint(side).of_size(size) {
        used.clear();
        used.resize(m.len(), false);
        if let Some(p) = outgoing {
            match m.iter().position(|&q| q == p) {
                Some(k) => used[k] = true,
                None => continue,
            }
        }
        out.clear();
        if match_incoming(m, &mut used, incoming, 0, &mut out) {
            return Ok(out);
        }
    }
    Err(LclError::NoCompletion)
}
