//! Small named instances shared by tests, examples and the CLI.

use std::collections::BTreeSet;

use crate::structure::{DiGraph, Graph};
use crate::xfix::CardinalityCondition;

/// Quotient graph on classes a=0, b=1, d=2 with edges a→b, a→a, a→d, d→d,
/// d→a and labels C(a)={0,2,3}, C(b)={0,1}, C(d)={3}.
///
/// C(b) lists 1 although b has no children; the label comes from a class
/// union and simply can never be met.
pub fn three_class_quotient() -> (DiGraph, CardinalityCondition) {
    let g = DiGraph::new(3, [(0, 1), (0, 0), (0, 2), (2, 2), (2, 0)]).expect("valid graph");
    let c = CardinalityCondition::from_labels(
        3,
        vec![BTreeSet::from([0, 2, 3]), BTreeSet::from([0, 1]), BTreeSet::from([3])],
    )
    .expect("one label per vertex");
    (g, c)
}

/// Interval graph on a..h = 0..7: a–b; a and b adjacent to all of c..h;
/// c–d, d–e, e–f; d and e adjacent to g and h.
pub fn eight_vertex_interval() -> Graph {
    let (a, b, c, d, e, f, g, h) = (0, 1, 2, 3, 4, 5, 6, 7);
    let mut edges = vec![(a, b), (c, d), (d, e), (e, f), (d, g), (d, h), (e, g), (e, h)];
    for hub in [a, b] {
        for other in c..=h {
            edges.push((hub, other));
        }
    }
    Graph::new(8, edges).expect("valid graph")
}

/// Vertex names for [`eight_vertex_interval`].
pub const EIGHT_VERTEX_NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];
