//! Splitter selection and the logarithmic-height decomposition tree of a
//! rooted DAG.
//!
//! Every tree node carries a vertex `v(t)` and a set `W(t)` of at most one
//! vertex and stands for the subgraph `G_{v(t)}^{W(t)}`. Children of a node
//! depend only on `(v(t), W(t))`, so equal nodes are stored once and the
//! tree is the unfolding of the stored node DAG from its root.

use num_bigint::BigUint;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::dagstats::RootedDag;
use crate::error::{Error, Result};
use crate::structure::{DiGraph, ElemId};

fn half_ceil(m: u128) -> u128 {
    m.div_ceil(2)
}

/// Splitter for a type-0 node: `v ⊴ a`, `awt(G_v^a) ≤ awt(G_v)/2` and
/// `awt(G_b) ≤ ⌈awt(G_v)/2⌉` for every child `b` of `a`.
pub fn split_type0(dag: &RootedDag, v: ElemId) -> Result<ElemId> {
    let g = dag.graph();
    if g.is_leaf(v) {
        return Err(Error::IsLeaf(v));
    }
    let m = dag.awt(v, &[])?;
    let mut a = v;
    loop {
        let mut next = None;
        for &b in g.out_neighbors(a) {
            if 2 * dag.awt(v, &[b])? <= m {
                next = Some(b);
                break;
            }
        }
        match next {
            Some(b) => a = b,
            None => break,
        }
    }
    if !type0_valid(dag, v, a, m)? {
        return Err(Error::InternalLemmaViolation(format!("type-0 split of {v} at {a} violates the bounds")));
    }
    Ok(a)
}

fn type0_valid(dag: &RootedDag, v: ElemId, a: ElemId, m: u128) -> Result<bool> {
    if !dag.reaches(v, a) || 2 * dag.awt(v, &[a])? > m {
        return Ok(false);
    }
    for &b in dag.graph().out_neighbors(a) {
        if dag.awt(b, &[])? > half_ceil(m) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Splitter for a type-1 node: `v ⊴ a ◁ w`, `awt(G_v^{a,w}) ≤ awt(G_v^w)/2` and
/// `awt(G_b^w) ≤ ⌈awt(G_v^w)/2⌉` for every child `b ⊴ w` of `a`.
///
/// Chosen as a ⊴-maximal valid candidate, smallest id first.
pub fn split_type1(dag: &RootedDag, v: ElemId, w: ElemId) -> Result<ElemId> {
    if !dag.strictly_reaches(v, w) {
        return Err(Error::PreconditionViolated(format!("{v} does not strictly reach {w}")));
    }
    let m = dag.awt(v, &[w])?;
    let mut valid = Vec::new();
    for u in 0..dag.graph().n() as ElemId {
        if dag.reaches(v, u) && dag.strictly_reaches(u, w) && type1_valid(dag, v, w, u, m)? {
            valid.push(u);
        }
    }
    valid
        .iter()
        .copied()
        .find(|&u| !valid.iter().any(|&x| dag.strictly_reaches(u, x)))
        .ok_or_else(|| Error::InternalLemmaViolation(format!("no type-1 split between {v} and {w}")))
}

fn type1_valid(dag: &RootedDag, v: ElemId, w: ElemId, a: ElemId, m: u128) -> Result<bool> {
    if 2 * dag.awt(v, &[a, w])? > m {
        return Ok(false);
    }
    for &b in dag.graph().out_neighbors(a) {
        if dag.reaches(b, w) && dag.awt(b, &[w])? > half_ceil(m) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub v: ElemId,
    #[serde(rename = "W")]
    pub w: Vec<ElemId>,
    #[serde(rename = "type")]
    pub kind: u8,
    pub children: Vec<usize>,
}

/// Decomposition tree stored with shared subtrees; `nodes[root]` is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompTree {
    pub root: usize,
    pub nodes: Vec<TreeNode>,
}

impl DecompTree {
    /// Height of the unfolded tree, or `None` if the node graph has a cycle.
    pub fn height(&self) -> Option<usize> {
        let mut memo = vec![None; self.nodes.len()];
        let mut on_stack = vec![false; self.nodes.len()];
        self.height_rec(self.root, &mut memo, &mut on_stack)
    }

    fn height_rec(&self, t: usize, memo: &mut [Option<usize>], on_stack: &mut [bool]) -> Option<usize> {
        if let Some(h) = memo[t] {
            return Some(h);
        }
        if on_stack[t] {
            return None;
        }
        on_stack[t] = true;
        let mut h = 0;
        for &c in &self.nodes[t].children {
            h = h.max(self.height_rec(c, memo, on_stack)? + 1);
        }
        on_stack[t] = false;
        memo[t] = Some(h);
        Some(h)
    }

    /// Number of nodes in the unfolded tree.
    pub fn unfolded_size(&self) -> Option<BigUint> {
        self.height()?;
        let mut memo: Vec<Option<BigUint>> = vec![None; self.nodes.len()];
        fn go(t: &DecompTree, i: usize, memo: &mut [Option<BigUint>]) -> BigUint {
            if let Some(s) = &memo[i] {
                return s.clone();
            }
            let mut s = BigUint::from(1u8);
            for &c in &t.nodes[i].children {
                s += go(t, c, memo);
            }
            memo[i] = Some(s.clone());
            s
        }
        Some(go(self, self.root, &mut memo))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }
}

pub fn build_tree(g: &DiGraph) -> Result<DecompTree> {
    let dag = RootedDag::new(g)?;
    build_tree_on(&dag)
}

pub fn build_tree_on(dag: &RootedDag) -> Result<DecompTree> {
    let g = dag.graph();
    let mut index: FxHashMap<(ElemId, Option<ElemId>), usize> = FxHashMap::default();
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut intern = |v: ElemId, w: Option<ElemId>, nodes: &mut Vec<TreeNode>| -> (usize, bool) {
        if let Some(&i) = index.get(&(v, w)) {
            return (i, false);
        }
        nodes.push(TreeNode { v, w: w.into_iter().collect(), kind: w.is_some() as u8, children: Vec::new() });
        index.insert((v, w), nodes.len() - 1);
        (nodes.len() - 1, true)
    };
    let (root, _) = intern(dag.root(), None, &mut nodes);
    let mut work = vec![root];
    while let Some(t) = work.pop() {
        let v = nodes[t].v;
        let w = nodes[t].w.first().copied();
        if g.is_leaf(v) || w == Some(v) {
            continue;
        }
        let mut spec = Vec::new();
        match w {
            None => {
                let a = split_type0(dag, v)?;
                spec.push((v, Some(a)));
                spec.extend(g.out_neighbors(a).iter().map(|&b| (b, None)));
            }
            Some(w) => {
                let a = split_type1(dag, v, w)?;
                spec.push((v, Some(a)));
                spec.extend(g.out_neighbors(a).iter().map(|&b| (b, if dag.reaches(b, w) { Some(w) } else { None })));
            }
        }
        let mut children = Vec::with_capacity(spec.len());
        for (cv, cw) in spec {
            let (c, fresh) = intern(cv, cw, &mut nodes);
            if fresh {
                work.push(c);
            }
            children.push(c);
        }
        nodes[t].children = children;
    }
    Ok(DecompTree { root, nodes })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemCheck {
    pub item: &'static str,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeReport {
    pub items: Vec<ItemCheck>,
    pub height: Option<usize>,
    pub awt: String,
}

impl TreeReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn item(&self, name: &str) -> Option<&ItemCheck> {
        self.items.iter().find(|i| i.item == name)
    }
}

pub const ITEM_SINGLE_W: &str = "at-most-one";
pub const ITEM_LEAF: &str = "leaf";
pub const ITEM_NON_LEAF: &str = "no-leaf";
pub const ITEM_COVER: &str = "cover";
pub const ITEM_HEIGHT: &str = "height";
pub const ITEM_HALVING: &str = "grandchild-halving";

/// Checks the five structural conditions plus grandchild halving.
pub fn check_tree(g: &DiGraph, t: &DecompTree) -> Result<TreeReport> {
    let dag = RootedDag::new(g)?;
    let n = g.n();
    let mut first_failure: FxHashMap<&'static str, String> = FxHashMap::default();
    let mut fail = |item: &'static str, msg: String| {
        first_failure.entry(item).or_insert(msg);
    };

    let in_range = |x: ElemId| (x as usize) < n;
    let mut area: Vec<Option<u128>> = vec![None; t.nodes.len()];
    for (i, node) in t.nodes.iter().enumerate() {
        if !in_range(node.v) || !node.w.iter().copied().all(in_range) {
            fail(ITEM_SINGLE_W, format!("node {i} names a vertex outside the graph"));
            continue;
        }
        if node.w.len() > 1 {
            fail(ITEM_SINGLE_W, format!("node {i} has W = {:?}", node.w));
        }
        let is_leaf = node.children.is_empty();
        let should_be_leaf = g.is_leaf(node.v) || node.w == [node.v];
        if is_leaf != should_be_leaf {
            fail(ITEM_LEAF, format!("node {i} (v={}, W={:?}) leaf={is_leaf}", node.v, node.w));
        }
        if !is_leaf && node.w.len() == 1 && !dag.strictly_reaches(node.v, node.w[0]) {
            fail(ITEM_NON_LEAF, format!("node {i}: {} does not strictly reach {}", node.v, node.w[0]));
        }
        if node.w.iter().all(|&w| dag.reaches(node.v, w)) {
            area[i] = Some(dag.awt(node.v, &node.w)?);
        }
        if !is_leaf {
            let own = crate::dagstats::restricted_mask(g, node.v, &node.w);
            let mut covered = vec![false; n];
            for &c in &node.children {
                let ch = &t.nodes[c];
                if in_range(ch.v) && ch.w.iter().copied().all(in_range) {
                    let m = crate::dagstats::restricted_mask(g, ch.v, &ch.w);
                    covered.iter_mut().zip(m).for_each(|(a, b)| *a |= b);
                }
            }
            if let Some(u) = (0..n).find(|&u| own[u] && u != node.v as usize && !covered[u]) {
                fail(ITEM_COVER, format!("node {i}: vertex {u} is not covered by any child"));
            }
        }
    }
    let root = &t.nodes[t.root];
    if root.v != dag.root() || !root.w.is_empty() {
        fail(ITEM_COVER, format!("tree root is (v={}, W={:?}), not the graph root", root.v, root.w));
    }

    for (i, node) in t.nodes.iter().enumerate() {
        let Some(a) = area[i] else { continue };
        for &c in &node.children {
            for &gc in &t.nodes[c].children {
                if let Some(b) = area[gc] {
                    if 2 * b > a {
                        fail(ITEM_HALVING, format!("node {i} has A={a} but grandchild {gc} has A={b}"));
                    }
                }
            }
        }
    }

    let awt = dag.awt(dag.root(), &[])?;
    let height = t.height();
    match height {
        None => fail(ITEM_HEIGHT, "node graph has a cycle".into()),
        Some(h) => {
            // h ≤ 2·log₂(awt)  ⇔  2^h ≤ awt²
            if BigUint::from(1u8) << h > BigUint::from(awt) * BigUint::from(awt) {
                fail(ITEM_HEIGHT, format!("height {h} exceeds 2·log2({awt})"));
            }
        }
    }

    let items = [ITEM_SINGLE_W, ITEM_LEAF, ITEM_NON_LEAF, ITEM_COVER, ITEM_HEIGHT, ITEM_HALVING]
        .into_iter()
        .map(|item| {
            let witness = first_failure.get(item).cloned();
            ItemCheck { item, pass: witness.is_none(), witness }
        })
        .collect();
    Ok(TreeReport { items, height, awt: awt.to_string() })
}

/// Whether `2^h ≤ bound²`, i.e. `h ≤ 2·log₂(bound)`, for integer `bound ≥ 1`.
pub fn height_within_two_log(h: usize, bound: u128) -> bool {
    BigUint::from(1u8) << h <= BigUint::from(bound) * BigUint::from(bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(k: u32) -> DiGraph {
        DiGraph::new(k as usize + 1, (0..k).map(|i| (i, i + 1))).unwrap()
    }

    fn diamond() -> DiGraph {
        DiGraph::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    /// All vertices meeting both type-0 bounds, by exhaustive search.
    fn type0_candidates(dag: &RootedDag, v: ElemId) -> Vec<ElemId> {
        let m = dag.awt(v, &[]).unwrap();
        (0..dag.graph().n() as ElemId).filter(|&a| type0_valid(dag, v, a, m).unwrap()).collect()
    }

    #[test]
    fn type0_on_chain() {
        let g = chain(3);
        let dag = RootedDag::new(&g).unwrap();
        assert_eq!(split_type0(&dag, 0).unwrap(), 1);
        assert_eq!(dag.awt(0, &[1]).unwrap(), 2);
        assert_eq!(dag.awt(0, &[2]).unwrap(), 3);
    }

    #[test]
    fn type0_on_edge_and_star() {
        let g = DiGraph::new(2, [(0, 1)]).unwrap();
        let dag = RootedDag::new(&g).unwrap();
        assert_eq!(split_type0(&dag, 0).unwrap(), 0);
        assert_eq!(type0_candidates(&dag, 0), vec![0]);
        let star = DiGraph::new(5, (1..5).map(|i| (0, i))).unwrap();
        let dag = RootedDag::new(&star).unwrap();
        let a = split_type0(&dag, 0).unwrap();
        assert!(type0_candidates(&dag, 0).contains(&a));
        assert_eq!(a, 0);
        assert!(matches!(split_type0(&dag, 3), Err(Error::IsLeaf(3))));
    }

    #[test]
    fn type1_examples() {
        let g = chain(3);
        let dag = RootedDag::new(&g).unwrap();
        assert_eq!(split_type1(&dag, 0, 3).unwrap(), 1);
        let g = DiGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let dag = RootedDag::new(&g).unwrap();
        assert_eq!(split_type1(&dag, 1, 2).unwrap(), 1);
        assert!(matches!(split_type1(&dag, 2, 1), Err(Error::PreconditionViolated(_))));
        let g = diamond();
        let dag = RootedDag::new(&g).unwrap();
        let a = split_type1(&dag, 0, 3).unwrap();
        let m = dag.awt(0, &[3]).unwrap();
        assert!(type1_valid(&dag, 0, 3, a, m).unwrap());
    }

    #[test]
    fn type1_measures_inside_the_bounded_region() {
        let edges = [
            (1, 0),
            (1, 5),
            (2, 0),
            (2, 3),
            (2, 6),
            (3, 0),
            (3, 1),
            (3, 5),
            (3, 6),
            (4, 0),
            (4, 2),
            (4, 3),
            (5, 0),
            (6, 1),
            (6, 5),
        ];
        let g = DiGraph::new(7, edges).unwrap();
        let dag = RootedDag::new(&g).unwrap();
        // paths 4→3→… and 4→2→3→… carry awt(G_4^2) to 18, above awt(G_4^3) = 13
        assert_eq!(dag.awt(4, &[3]).unwrap(), 13);
        assert_eq!(dag.awt(4, &[2]).unwrap(), 18);
        assert_eq!(dag.awt(4, &[2, 3]).unwrap(), 4);
        assert_eq!(split_type1(&dag, 4, 3).unwrap(), 2);
        let report = check_tree(&g, &build_tree(&g).unwrap()).unwrap();
        let failing: Vec<_> = report.items.iter().filter(|i| !i.pass).map(|i| i.item).collect();
        assert_eq!(failing, [ITEM_HALVING]);
    }

    #[test]
    fn trees_pass_the_checker() {
        let single = DiGraph::new(1, []).unwrap();
        let t = build_tree(&single).unwrap();
        assert_eq!(t.height(), Some(0));
        assert!(check_tree(&single, &t).unwrap().all_pass());
        for g in [chain(3), diamond(), chain(7)] {
            let t = build_tree(&g).unwrap();
            let report = check_tree(&g, &t).unwrap();
            assert!(report.all_pass(), "{report:?}");
        }
        let t = build_tree(&chain(3)).unwrap();
        assert!(t.height().unwrap() <= 4);
    }

    #[test]
    fn corrupted_trees_fail() {
        let g = diamond();
        let mut t = build_tree(&g).unwrap();
        let inner = t.nodes.iter().position(|n| !n.children.is_empty()).unwrap();
        t.nodes[inner].w = vec![1, 2];
        let r = check_tree(&g, &t).unwrap();
        assert!(!r.item(ITEM_SINGLE_W).unwrap().pass);

        let mut t = build_tree(&g).unwrap();
        let root = t.root;
        t.nodes[root].children.pop();
        let r = check_tree(&g, &t).unwrap();
        let cover = r.item(ITEM_COVER).unwrap();
        assert!(!cover.pass);
        assert!(cover.witness.as_ref().unwrap().contains("vertex"));
    }

    #[test]
    fn height_bound_helper() {
        assert!(height_within_two_log(0, 1));
        assert!(!height_within_two_log(1, 1));
        assert!(height_within_two_log(4, 4));
        assert!(!height_within_two_log(5, 4));
    }
}
