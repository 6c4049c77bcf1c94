use lclavg::lcl::{maximal_label_set_single_node, LabelSet, LclSpec};
use lclavg::tree::NodeColor;

#[test]
fn white_over_two_blacks_leaves_third_color() {
    let spec = LclSpec::three_coloring(3);
    let gb = |c: u32| maximal_label_set_single_node(&spec, NodeColor::Black, &[(0, LabelSet::singleton(c))], 0);
    assert_eq!(gb(1), LabelSet::from_labels([2, 3]));
    let w = maximal_label_set_single_node(&spec, NodeColor::White, &[(0, gb(1)), (0, gb(2))], 0);
    assert_eq!(w, LabelSet::singleton(3));
}

#[test]
fn white_over_three_blacks_is_empty() {
    let spec = LclSpec::three_coloring(3);
    let gb = |c: u32| maximal_label_set_single_node(&spec, NodeColor::Black, &[(0, LabelSet::singleton(c))], 0);
    let w = maximal_label_set_single_node(&spec, NodeColor::White, &[(0, gb(1)), (0, gb(2)), (0, gb(3))], 0);
    assert!(w.is_empty());
}
