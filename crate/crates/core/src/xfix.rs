//! Cardinality conditions and the resource-bounded recursion relation X(G,C).
//!
//! `(v, i) ∈ X` iff `i ≥ 1` and the number of out-neighbours `w` with
//! `(w, ⌊(i−1)/deg⁻(w)⌋) ∈ X` lies in `C(v)`. In-degrees are taken in the
//! full graph.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{DiGraph, ElemId, RelStructure};

/// Per-vertex sets of admissible child counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityCondition {
    sets: Vec<BTreeSet<u32>>,
}

impl CardinalityCondition {
    /// Checked constructor: `C(v) ⊆ [0, deg⁺(v)]` for every vertex.
    pub fn new(g: &DiGraph, sets: Vec<BTreeSet<u32>>) -> Result<Self> {
        let c = Self::from_labels(g.n(), sets)?;
        for v in 0..g.n() as ElemId {
            if let Some(&bad) = c.sets[v as usize].iter().find(|&&k| k as usize > g.out_degree(v)) {
                return Err(Error::InvalidCondition(format!(
                    "C({v}) contains {bad} but vertex {v} has out-degree {}",
                    g.out_degree(v)
                )));
            }
        }
        Ok(c)
    }

    /// Unchecked labels. Entries above the out-degree can never be met and
    /// are harmless; quotient graphs built from formulas produce them.
    pub fn from_labels(n: usize, sets: Vec<BTreeSet<u32>>) -> Result<Self> {
        if sets.len() != n {
            return Err(Error::SizeMismatch(sets.len(), n));
        }
        Ok(CardinalityCondition { sets })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn get(&self, v: ElemId) -> &BTreeSet<u32> {
        &self.sets[v as usize]
    }

    pub fn contains(&self, v: ElemId, count: usize) -> bool {
        u32::try_from(count).is_ok_and(|c| self.sets[v as usize].contains(&c))
    }

    pub fn to_json(&self) -> String {
        let raw = RawCondition {
            c: self.sets.iter().enumerate().map(|(v, s)| (v.to_string(), s.iter().copied().collect())).collect(),
        };
        serde_json::to_string(&raw).expect("condition serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct RawCondition {
    #[serde(rename = "C")]
    c: BTreeMap<String, Vec<u32>>,
}

/// Parses `{"C": {"<vertex>": [ints...]}}`; missing vertices get `C(v) = ∅`.
///
/// Entries above a vertex's out-degree are kept (they can never be met) and
/// reported in the returned warnings.
pub fn parse_condition(text: &str, g: &DiGraph) -> Result<(CardinalityCondition, Vec<String>)> {
    let raw: RawCondition = serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))?;
    let mut sets = vec![BTreeSet::new(); g.n()];
    for (key, values) in raw.c {
        let v: usize = key.parse().map_err(|_| Error::MalformedInput(format!("vertex key `{key}` is not a number")))?;
        if v >= g.n() {
            return Err(Error::IdOutOfRange { id: v as u64, size: g.n() });
        }
        sets[v].extend(values);
    }
    let warnings = sets
        .iter()
        .enumerate()
        .filter_map(|(v, s)| {
            let deg = g.out_degree(v as ElemId);
            s.iter().find(|&&k| k as usize > deg).map(|k| format!("C({v}) contains {k}, above out-degree {deg}"))
        })
        .collect();
    Ok((CardinalityCondition::from_labels(g.n(), sets)?, warnings))
}

/// Resource passed from a vertex holding `i` to a successor with in-degree `indeg`.
pub fn split_resource(i: u64, indeg: usize) -> u64 {
    (i - 1) / indeg as u64
}

/// A graph with a cardinality condition and a memo table for X.
#[derive(Debug, Clone)]
pub struct XInstance {
    g: DiGraph,
    c: CardinalityCondition,
    memo: FxHashMap<(ElemId, u64), bool>,
}

impl XInstance {
    pub fn new(g: DiGraph, c: CardinalityCondition) -> Result<Self> {
        if c.len() != g.n() {
            return Err(Error::SizeMismatch(c.len(), g.n()));
        }
        Ok(XInstance { g, c, memo: FxHashMap::default() })
    }

    pub fn graph(&self) -> &DiGraph {
        &self.g
    }

    pub fn condition(&self) -> &CardinalityCondition {
        &self.c
    }

    /// Whether `(v, i) ∈ X(G, C)`. Resources `i ≤ 0` are never in X.
    pub fn compute_x(&mut self, v: ElemId, i: i64) -> Result<bool> {
        if v as usize >= self.g.n() {
            return Err(Error::IdOutOfRange { id: v as u64, size: self.g.n() });
        }
        if i < 1 {
            return Ok(false);
        }
        // explicit stack: resources can be large on graphs with in-degree 1
        let mut stack = vec![(v, i as u64)];
        while let Some(&(u, j)) = stack.last() {
            if self.memo.contains_key(&(u, j)) {
                stack.pop();
                continue;
            }
            let mut pending = false;
            let mut hits = 0usize;
            for &w in self.g.out_neighbors(u) {
                let jw = split_resource(j, self.g.in_degree(w));
                if jw == 0 {
                    continue;
                }
                match self.memo.get(&(w, jw)) {
                    Some(true) => hits += 1,
                    Some(false) => {}
                    None => {
                        pending = true;
                        stack.push((w, jw));
                    }
                }
            }
            if !pending {
                let r = self.c.contains(u, hits);
                self.memo.insert((u, j), r);
                stack.pop();
            }
        }
        Ok(self.memo[&(v, i as u64)])
    }
}

/// `τ^(n)` encoding: binary `E` plus unary `P_0..P_n` with `P_i = {v : i ∈ C(v)}`.
pub fn encode_tau_n(g: &DiGraph, c: &CardinalityCondition, n: usize) -> Result<RelStructure> {
    if g.n() > n {
        return Err(Error::SizeExceeded(format!("graph has {} vertices, bound is {n}", g.n())));
    }
    if c.len() != g.n() {
        return Err(Error::SizeMismatch(c.len(), g.n()));
    }
    let mut rels = vec![("E".to_string(), 2, g.edges().map(|(u, v)| vec![u, v]).collect())];
    for i in 0..=n {
        let members = (0..g.n() as ElemId).filter(|&v| c.contains(v, i)).map(|v| vec![v]).collect();
        rels.push((p_name(i), 1, members));
    }
    Ok(RelStructure::new(g.n(), rels)?.0)
}

/// Name of the unary predicate `P_i` in the τ encoding.
pub fn p_name(i: usize) -> String {
    format!("P{i}")
}

/// The unfolded DAG `H_{v,i}` with nodes labelled by (vertex, resource).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HDag {
    pub graph: DiGraph,
    pub labels: Vec<(ElemId, u64)>,
}

impl HDag {
    pub fn index_of(&self, v: ElemId, i: u64) -> Option<ElemId> {
        self.labels.iter().position(|&l| l == (v, i)).map(|p| p as ElemId)
    }
}

pub fn build_h(g: &DiGraph, v: ElemId, i: i64) -> Result<HDag> {
    if i < 1 {
        return Err(Error::NonPositiveResource(i));
    }
    if v as usize >= g.n() {
        return Err(Error::IdOutOfRange { id: v as u64, size: g.n() });
    }
    let mut ids: FxHashMap<(ElemId, u64), ElemId> = FxHashMap::default();
    let mut labels = vec![(v, i as u64)];
    ids.insert((v, i as u64), 0);
    let mut edges = Vec::new();
    let mut next = 0;
    while next < labels.len() {
        let (u, j) = labels[next];
        for &w in g.out_neighbors(u) {
            let jw = split_resource(j, g.in_degree(w));
            if jw == 0 {
                continue;
            }
            let id = *ids.entry((w, jw)).or_insert_with(|| {
                labels.push((w, jw));
                (labels.len() - 1) as ElemId
            });
            edges.push((next as ElemId, id));
        }
        next += 1;
    }
    let graph = DiGraph::new(labels.len(), edges)?.with_root(0)?;
    Ok(HDag { graph, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::three_class_quotient;

    /// Bottom-up construction by increasing resource: every pair refers
    /// only to strictly smaller resources, so each layer is final when built.
    fn fixpoint_oracle(g: &DiGraph, c: &CardinalityCondition, max_i: u64) -> BTreeSet<(ElemId, u64)> {
        let mut x = BTreeSet::new();
        for i in 1..=max_i {
            for v in 0..g.n() as ElemId {
                let hits =
                    g.out_neighbors(v).iter().filter(|&&w| x.contains(&(w, (i - 1) / g.in_degree(w) as u64))).count();
                if c.contains(v, hits) {
                    x.insert((v, i));
                }
            }
        }
        x
    }

    #[test]
    fn quotient_example_memberships() {
        let (g, c) = three_class_quotient();
        let mut inst = XInstance::new(g, c).unwrap();
        let (a, b, d) = (0, 1, 2);
        assert!(inst.compute_x(b, 2).unwrap());
        assert!(inst.compute_x(a, 1).unwrap());
        assert!(!inst.compute_x(d, 1).unwrap());
        assert!(inst.compute_x(a, 3).unwrap());
        assert!(!inst.compute_x(d, 3).unwrap());
        assert!(!inst.compute_x(a, 0).unwrap());
        assert!(!inst.compute_x(a, -4).unwrap());
    }

    #[test]
    fn strict_condition_rejects_large_counts() {
        let (g, _) = three_class_quotient();
        let sets = vec![BTreeSet::from([0, 2, 3]), BTreeSet::from([0, 1]), BTreeSet::from([1])];
        assert!(matches!(CardinalityCondition::new(&g, sets), Err(Error::InvalidCondition(_))));
    }

    #[test]
    fn tau_encoding_of_quotient_example() {
        let (g, c) = three_class_quotient();
        let s = encode_tau_n(&g, &c, 3).unwrap();
        let members =
            |i: usize| -> Vec<ElemId> { s.relation(&p_name(i)).unwrap().tuples().iter().map(|t| t[0]).collect() };
        assert_eq!(members(0), vec![0, 1]);
        assert_eq!(members(1), vec![1]);
        assert_eq!(members(2), vec![0]);
        assert_eq!(members(3), vec![0, 2]);
        assert_eq!(s.relation("E").unwrap().len(), 5);
        assert!(matches!(encode_tau_n(&g, &c, 2), Err(Error::SizeExceeded(_))));
    }

    #[test]
    fn tau_encoding_small_cases() {
        let g = DiGraph::new(1, []).unwrap();
        let c = CardinalityCondition::new(&g, vec![BTreeSet::from([0])]).unwrap();
        let s = encode_tau_n(&g, &c, 1).unwrap();
        assert_eq!(s.relation("P0").unwrap().len(), 1);
        assert!(s.relation("P1").unwrap().is_empty());
        assert!(s.relation("E").unwrap().is_empty());
        let empty = CardinalityCondition::new(&g, vec![BTreeSet::new()]).unwrap();
        let s = encode_tau_n(&g, &empty, 1).unwrap();
        assert!(s.relation("P0").unwrap().is_empty());
    }

    #[test]
    fn h_dag_examples() {
        let single = DiGraph::new(1, []).unwrap();
        let h = build_h(&single, 0, 5).unwrap();
        assert_eq!(h.labels, vec![(0, 5)]);
        let two_cycle = DiGraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let h = build_h(&two_cycle, 0, 3).unwrap();
        assert_eq!(h.labels, vec![(0, 3), (1, 2), (0, 1)]);
        assert_eq!(h.graph.edge_count(), 2);
        assert!(matches!(build_h(&two_cycle, 0, 0), Err(Error::NonPositiveResource(0))));
    }

    #[test]
    fn h_dag_of_quotient_example() {
        let (g, _) = three_class_quotient();
        let h = build_h(&g, 0, 3).unwrap();
        // a has in-degree 2, b in-degree 1, d in-degree 2
        let top: BTreeSet<_> = h.graph.out_neighbors(0).iter().map(|&t| h.labels[t as usize]).collect();
        assert_eq!(top, BTreeSet::from([(0, 1), (1, 2), (2, 1)]));
        for (u, w) in h.graph.edges() {
            assert!(h.labels[w as usize].1 < h.labels[u as usize].1);
        }
    }

    #[test]
    fn agrees_with_fixpoint_iteration() {
        let (g, c) = three_class_quotient();
        let oracle = fixpoint_oracle(&g, &c, 20);
        let mut inst = XInstance::new(g, c).unwrap();
        for v in 0..3 {
            for i in 1..=20 {
                assert_eq!(inst.compute_x(v, i as i64).unwrap(), oracle.contains(&(v, i)), "({v},{i})");
            }
        }
    }

    #[test]
    fn deep_resources_do_not_overflow_the_stack() {
        let g = DiGraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let c = CardinalityCondition::new(&g, vec![BTreeSet::from([0]), BTreeSet::from([1])]).unwrap();
        let mut inst = XInstance::new(g, c).unwrap();
        // (0,i) ∈ X iff (1,i−1) ∉ X; (1,j) ∈ X iff (0,j−1) ∈ X
        assert!(inst.compute_x(0, 200_000).is_ok());
    }

    #[test]
    fn condition_json_round_trip() {
        let (g, c) = three_class_quotient();
        let text = r#"{"C": {"0": [0, 2, 3], "1": [0, 1], "2": [3]}}"#;
        let (parsed, warnings) = parse_condition(text, &g).unwrap();
        assert_eq!(parsed, c);
        assert_eq!(warnings.len(), 2, "C(b) and C(d) exceed the out-degrees");
        let (parsed, warnings) = parse_condition(r#"{"C": {"0": [0, 2], "2": [1]}}"#, &g).unwrap();
        assert_eq!(parsed.get(1), &BTreeSet::new());
        assert!(warnings.is_empty());
        assert!(parse_condition(r#"{"C": {"7": [0]}}"#, &g).is_err());
        let reparsed = CardinalityCondition::from_labels(3, c.sets.clone()).unwrap();
        assert_eq!(reparsed, c);
        assert!(c.to_json().contains("\"C\""));
    }
}
