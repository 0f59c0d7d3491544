//! Finite relational structures and the directed/undirected graphs built on them.
//!
//! Elements are dense ids `0..n`. The number sort `0..=n` of a two-sorted
//! structure is never stored; everything about it follows from `n`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub type ElemId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    symbols: Vec<(String, usize)>,
}

impl Vocabulary {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out = Vocabulary::default();
        for (name, arity) in symbols {
            out.push(name.into(), arity)?;
        }
        Ok(out)
    }

    fn push(&mut self, name: String, arity: usize) -> Result<()> {
        if arity == 0 {
            return Err(Error::MalformedInput(format!("symbol `{name}` has arity 0")));
        }
        if self.symbols.iter().any(|(n, _)| *n == name) {
            return Err(Error::MalformedInput(format!("duplicate symbol `{name}`")));
        }
        self.symbols.push((name, arity));
        Ok(())
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.iter().find(|(n, _)| n == name).map(|(_, a)| *a)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|(n, _)| n == name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&str, usize)> {
        self.symbols.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Relation {
    arity: usize,
    tuples: BTreeSet<Vec<ElemId>>,
    // Dense membership table for arity <= 2.
    dense: Option<Vec<bool>>,
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.tuples == other.tuples
    }
}
impl Eq for Relation {}

impl Relation {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &BTreeSet<Vec<ElemId>> {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// A finite relational structure over a vocabulary, with universe `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelStructure {
    size: usize,
    vocab: Vocabulary,
    rels: Vec<Relation>,
}

impl RelStructure {
    /// Builds a structure; duplicate tuples are merged and counted in the returned warnings.
    pub fn new(
        size: usize,
        relations: impl IntoIterator<Item = (String, usize, Vec<Vec<ElemId>>)>,
    ) -> Result<(Self, Vec<String>)> {
        if size == 0 {
            return Err(Error::MalformedInput("structure size must be at least 1".into()));
        }
        let mut vocab = Vocabulary::default();
        let mut rels = Vec::new();
        let mut warnings = Vec::new();
        for (name, arity, tuples) in relations {
            vocab.push(name.clone(), arity)?;
            let mut set = BTreeSet::new();
            let mut dups = 0usize;
            for t in tuples {
                if t.len() != arity {
                    return Err(Error::ArityMismatch(format!(
                        "tuple {t:?} in `{name}` has length {}, expected {arity}",
                        t.len()
                    )));
                }
                if let Some(&bad) = t.iter().find(|&&id| id as usize >= size) {
                    return Err(Error::IdOutOfRange { id: bad as u64, size });
                }
                if !set.insert(t) {
                    dups += 1;
                }
            }
            if dups > 0 {
                warnings.push(format!("relation `{name}`: {dups} duplicate tuple(s) merged"));
            }
            rels.push(Self::make_relation(size, arity, set));
        }
        Ok((RelStructure { size, vocab, rels }, warnings))
    }

    fn make_relation(size: usize, arity: usize, tuples: BTreeSet<Vec<ElemId>>) -> Relation {
        let dense = match arity {
            1 => {
                let mut d = vec![false; size];
                for t in &tuples {
                    d[t[0] as usize] = true;
                }
                Some(d)
            }
            2 => {
                let mut d = vec![false; size * size];
                for t in &tuples {
                    d[t[0] as usize * size + t[1] as usize] = true;
                }
                Some(d)
            }
            _ => None,
        };
        Relation { arity, tuples, dense }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.vocab.index_of(name).map(|i| &self.rels[i])
    }

    pub fn relation_at(&self, index: usize) -> &Relation {
        &self.rels[index]
    }

    /// Membership test for the relation at `index`; ids are assumed in range.
    #[inline]
    pub fn holds(&self, index: usize, tuple: &[ElemId]) -> bool {
        let rel = &self.rels[index];
        match &rel.dense {
            Some(d) if rel.arity == 1 => d[tuple[0] as usize],
            Some(d) => d[tuple[0] as usize * self.size + tuple[1] as usize],
            None => rel.tuples.contains(tuple),
        }
    }

    pub fn to_json_value(&self) -> Value {
        let mut rels = serde_json::Map::new();
        let mut arity = serde_json::Map::new();
        for ((name, a), rel) in self.vocab.symbols.iter().zip(&self.rels) {
            let tuples: Vec<&Vec<ElemId>> = rel.tuples.iter().collect();
            rels.insert(name.clone(), serde_json::to_value(tuples).expect("tuples serialize"));
            if rel.is_empty() && *a != 2 {
                arity.insert(name.clone(), Value::from(*a));
            }
        }
        let mut obj = serde_json::Map::new();
        obj.insert("n".into(), Value::from(self.size));
        obj.insert("rels".into(), Value::Object(rels));
        if !arity.is_empty() {
            obj.insert("arity".into(), Value::Object(arity));
        }
        Value::Object(obj)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("structure serializes")
    }
}

/// Result of parsing the external JSON structure format.
#[derive(Debug, Clone)]
pub struct ParsedStructure {
    pub structure: RelStructure,
    pub root: Option<ElemId>,
    pub names: Option<Vec<String>>,
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
struct RawStructure {
    n: i64,
    #[serde(default)]
    rels: BTreeMap<String, Vec<Vec<i64>>>,
    #[serde(default)]
    arity: BTreeMap<String, usize>,
    #[serde(default)]
    root: Option<i64>,
    #[serde(default)]
    names: Option<Vec<String>>,
}

/// Parses `{"n": <int>, "rels": {"<name>": [[ids...], ...]}}`.
///
/// Empty relations take their arity from the optional `"arity"` map and
/// default to 2. An optional `"root"` and a `"names"` sidecar are accepted.
pub fn parse_structure(text: &str) -> Result<ParsedStructure> {
    let raw: RawStructure = serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))?;
    if raw.n < 1 {
        return Err(Error::MalformedInput(format!("n must be positive, got {}", raw.n)));
    }
    let size = raw.n as usize;
    let mut relations = Vec::new();
    for (name, tuples) in raw.rels {
        let arity = match (raw.arity.get(&name), tuples.first()) {
            (Some(&a), _) => a,
            (None, Some(t)) => t.len(),
            (None, None) => 2,
        };
        let mut converted = Vec::with_capacity(tuples.len());
        for t in tuples {
            let mut row = Vec::with_capacity(t.len());
            for id in t {
                if id < 0 || id as u64 >= size as u64 {
                    return Err(Error::IdOutOfRange { id: id.max(0) as u64, size });
                }
                row.push(id as ElemId);
            }
            converted.push(row);
        }
        relations.push((name, arity, converted));
    }
    let (structure, warnings) = RelStructure::new(size, relations)?;
    let root = match raw.root {
        None => None,
        Some(r) if r >= 0 && (r as usize) < size => Some(r as ElemId),
        Some(r) => return Err(Error::IdOutOfRange { id: r.max(0) as u64, size }),
    };
    if let Some(names) = &raw.names {
        if names.len() != size {
            return Err(Error::MalformedInput(format!(
                "names sidecar has {} entries for {size} elements",
                names.len()
            )));
        }
    }
    Ok(ParsedStructure { structure, root, names: raw.names, warnings })
}

/// A directed graph on `0..n`, optionally with a designated root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    n: usize,
    out: Vec<Vec<ElemId>>,
    inn: Vec<Vec<ElemId>>,
    edge_count: usize,
    root: Option<ElemId>,
}

impl DiGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (ElemId, ElemId)>) -> Result<Self> {
        let mut out: Vec<BTreeSet<ElemId>> = vec![BTreeSet::new(); n];
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::IdOutOfRange { id: x as u64, size: n });
                }
            }
            out[u as usize].insert(v);
        }
        let mut inn = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (u, succ) in out.iter().enumerate() {
            for &v in succ {
                inn[v as usize].push(u as ElemId);
                edge_count += 1;
            }
        }
        let out = out.into_iter().map(|s| s.into_iter().collect()).collect();
        Ok(DiGraph { n, out, inn, edge_count, root: None })
    }

    /// Designates `root`; fails unless every vertex is reachable from it.
    pub fn with_root(mut self, root: ElemId) -> Result<Self> {
        self.check_id(root)?;
        if self.reachable_closure(root)?.len() != self.n {
            return Err(Error::NotRooted);
        }
        self.root = Some(root);
        Ok(self)
    }

    pub fn from_structure(s: &RelStructure) -> Result<Self> {
        let rel = s.relation("E").ok_or_else(|| Error::UnknownSymbol("E".into()))?;
        if rel.arity() != 2 {
            return Err(Error::ArityMismatch("graph relation E must be binary".into()));
        }
        DiGraph::new(s.size(), rel.tuples().iter().map(|t| (t[0], t[1])))
    }

    pub fn from_parsed(p: &ParsedStructure) -> Result<Self> {
        let g = Self::from_structure(&p.structure)?;
        match p.root {
            Some(r) => g.with_root(r),
            None => Ok(g),
        }
    }

    pub fn to_structure(&self) -> RelStructure {
        let tuples = self.edges().map(|(u, v)| vec![u, v]).collect();
        RelStructure::new(self.n, [("E".to_string(), 2, tuples)]).expect("graph edges are in range").0
    }

    pub fn to_json(&self) -> String {
        let mut v = self.to_structure().to_json_value();
        if let Some(r) = self.root {
            v["root"] = Value::from(r);
        }
        v.to_string()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> Option<ElemId> {
        self.root
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn edges(&self) -> impl Iterator<Item = (ElemId, ElemId)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, succ)| succ.iter().map(move |&v| (u as ElemId, v)))
    }

    pub fn out_neighbors(&self, v: ElemId) -> &[ElemId] {
        &self.out[v as usize]
    }

    pub fn in_neighbors(&self, v: ElemId) -> &[ElemId] {
        &self.inn[v as usize]
    }

    pub fn out_degree(&self, v: ElemId) -> usize {
        self.out[v as usize].len()
    }

    pub fn in_degree(&self, v: ElemId) -> usize {
        self.inn[v as usize].len()
    }

    pub fn has_edge(&self, u: ElemId, v: ElemId) -> bool {
        self.out[u as usize].binary_search(&v).is_ok()
    }

    pub fn is_leaf(&self, v: ElemId) -> bool {
        self.out[v as usize].is_empty()
    }

    fn check_id(&self, v: ElemId) -> Result<()> {
        if (v as usize) < self.n {
            Ok(())
        } else {
            Err(Error::IdOutOfRange { id: v as u64, size: self.n })
        }
    }

    /// `(in_degree, out_degree)` of `v`.
    pub fn degrees(&self, v: ElemId) -> Result<(usize, usize)> {
        self.check_id(v)?;
        Ok((self.in_degree(v), self.out_degree(v)))
    }

    /// All vertices reachable from `root`, including `root` itself.
    pub fn reachable_closure(&self, root: ElemId) -> Result<BTreeSet<ElemId>> {
        self.check_id(root)?;
        Ok(self.reachable_mask(root).iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v as ElemId).collect())
    }

    pub fn reachable_mask(&self, root: ElemId) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([root]);
        seen[root as usize] = true;
        while let Some(u) = queue.pop_front() {
            for &w in &self.out[u as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Reflexive-transitive reachability matrix, row-major.
    pub fn reachability(&self) -> Reachability {
        let rows = (0..self.n as ElemId).map(|v| self.reachable_mask(v)).collect();
        Reachability { rows }
    }

    /// Kahn topological order, or `None` when the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<ElemId>> {
        let mut indeg: Vec<usize> = (0..self.n).map(|v| self.inn[v].len()).collect();
        let mut queue: VecDeque<ElemId> = (0..self.n as ElemId).filter(|&v| indeg[v as usize] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in &self.out[u as usize] {
                indeg[w as usize] -= 1;
                if indeg[w as usize] == 0 {
                    queue.push_back(w);
                }
            }
        }
        (order.len() == self.n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// The unique vertex from which everything is reachable in a DAG, if any.
    pub fn find_root(&self) -> Option<ElemId> {
        let sources: Vec<ElemId> = (0..self.n as ElemId).filter(|&v| self.inn[v as usize].is_empty()).collect();
        match sources.as_slice() {
            [r] if self.reachable_mask(*r).iter().all(|&b| b) => Some(*r),
            _ => None,
        }
    }

    /// Induced subgraph on `keep` (any order); returns the graph and the
    /// old id of every new vertex.
    pub fn induced(&self, keep: &[ElemId]) -> (DiGraph, Vec<ElemId>) {
        let mut ids: Vec<ElemId> = keep.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut new_id = vec![u32::MAX; self.n];
        for (i, &v) in ids.iter().enumerate() {
            new_id[v as usize] = i as ElemId;
        }
        let edges = self
            .edges()
            .filter(|&(u, v)| new_id[u as usize] != u32::MAX && new_id[v as usize] != u32::MAX)
            .map(|(u, v)| (new_id[u as usize], new_id[v as usize]));
        (DiGraph::new(ids.len(), edges).expect("remapped ids are in range"), ids)
    }
}

/// Reachability matrix with `reaches(u, v)` meaning u ⊴ v.
#[derive(Debug, Clone)]
pub struct Reachability {
    rows: Vec<Vec<bool>>,
}

impl Reachability {
    #[inline]
    pub fn reaches(&self, u: ElemId, v: ElemId) -> bool {
        self.rows[u as usize][v as usize]
    }

    #[inline]
    pub fn strictly_reaches(&self, u: ElemId, v: ElemId) -> bool {
        u != v && self.reaches(u, v)
    }
}

/// An undirected simple graph (symmetric, irreflexive edge set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

#[derive(Serialize)]
struct GraphJson<'a> {
    n: usize,
    rels: BTreeMap<&'a str, Vec<[ElemId; 2]>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (ElemId, ElemId)>) -> Result<Self> {
        let mut adj = vec![vec![false; n]; n];
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::IdOutOfRange { id: x as u64, size: n });
                }
            }
            if u == v {
                return Err(Error::MalformedInput(format!("self-loop at {u}")));
            }
            adj[u as usize][v as usize] = true;
            adj[v as usize][u as usize] = true;
        }
        Ok(Graph { n, adj })
    }

    /// Reads E as unordered pairs; self-loops are rejected.
    pub fn from_structure(s: &RelStructure) -> Result<Self> {
        let rel = s.relation("E").ok_or_else(|| Error::UnknownSymbol("E".into()))?;
        if rel.arity() != 2 {
            return Err(Error::ArityMismatch("graph relation E must be binary".into()));
        }
        Graph::new(s.size(), rel.tuples().iter().map(|t| (t[0], t[1])))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn adjacent(&self, u: ElemId, v: ElemId) -> bool {
        self.adj[u as usize][v as usize]
    }

    pub fn neighbors(&self, v: ElemId) -> impl Iterator<Item = ElemId> + '_ {
        self.adj[v as usize].iter().enumerate().filter(|(_, &b)| b).map(|(w, _)| w as ElemId)
    }

    pub fn degree(&self, v: ElemId) -> usize {
        self.adj[v as usize].iter().filter(|&&b| b).count()
    }

    /// Edges as `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(ElemId, ElemId)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u][v] {
                    out.push((u as ElemId, v as ElemId));
                }
            }
        }
        out
    }

    /// Symmetric E relation as a structure (both orientations stored).
    pub fn to_structure(&self) -> RelStructure {
        let tuples = self.edges().into_iter().flat_map(|(u, v)| [vec![u, v], vec![v, u]]).collect();
        RelStructure::new(self.n, [("E".to_string(), 2, tuples)]).expect("edges in range").0
    }

    pub fn to_json(&self) -> String {
        let pairs = self.edges().into_iter().map(|(u, v)| [u, v]).collect();
        serde_json::to_string(&GraphJson { n: self.n, rels: BTreeMap::from([("E", pairs)]) }).expect("graph serializes")
    }

    pub fn induced(&self, keep: &[ElemId]) -> Graph {
        let mut ids = keep.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut adj = vec![vec![false; ids.len()]; ids.len()];
        for (i, &u) in ids.iter().enumerate() {
            for (j, &v) in ids.iter().enumerate() {
                adj[i][j] = self.adjacent(u, v);
            }
        }
        Graph { n: ids.len(), adj }
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for (w, &edge) in self.adj[u].iter().enumerate() {
                if edge && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&b| b)
    }

    /// Vertex-relabelled copy: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[ElemId]) -> Graph {
        let edges: Vec<_> = self.edges().into_iter().map(|(u, v)| (perm[u as usize], perm[v as usize])).collect();
        Graph::new(self.n, edges).expect("permutation preserves ranges")
    }

    pub fn path(n: usize) -> Graph {
        Graph::new(n, (1..n as ElemId).map(|v| (v - 1, v))).expect("path")
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n as ElemId).map(|v| (v, (v + 1) % n as ElemId))).expect("cycle")
    }

    pub fn star(leaves: usize) -> Graph {
        Graph::new(leaves + 1, (1..=leaves as ElemId).map(|v| (0, v))).expect("star")
    }

    pub fn complete(n: usize) -> Graph {
        let mut e = Vec::new();
        for u in 0..n as ElemId {
            for v in u + 1..n as ElemId {
                e.push((u, v));
            }
        }
        Graph::new(n, e).expect("complete")
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.n as ElemId;
        let edges: Vec<_> =
            self.edges().into_iter().chain(other.edges().into_iter().map(|(u, v)| (u + off, v + off))).collect();
        Graph::new(self.n + other.n, edges).expect("union")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> DiGraph {
        DiGraph::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn parse_smallest_graph() {
        let p = parse_structure(r#"{"n":2,"rels":{"E":[[0,1]]}}"#).unwrap();
        let g = DiGraph::from_structure(&p.structure).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn parse_single_vertex() {
        let p = parse_structure(r#"{"n":1,"rels":{"E":[]}}"#).unwrap();
        let g = DiGraph::from_structure(&p.structure).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn parse_rejects_out_of_range() {
        let err = parse_structure(r#"{"n":2,"rels":{"E":[[0,5]]}}"#).unwrap_err();
        assert!(matches!(err, Error::IdOutOfRange { id: 5, size: 2 }));
    }

    #[test]
    fn parse_rejects_ragged_tuples() {
        let err = parse_structure(r#"{"n":3,"rels":{"R":[[0,1],[0]]}}"#).unwrap_err();
        assert!(matches!(err, Error::ArityMismatch(_)));
        let err = parse_structure(r#"{"n":3,"rels":{"R":[[0,1]]},"arity":{"R":3}}"#).unwrap_err();
        assert!(matches!(err, Error::ArityMismatch(_)));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(parse_structure("{"), Err(Error::MalformedInput(_))));
        assert!(matches!(parse_structure(r#"{"n":0}"#), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn duplicates_are_merged_with_warning() {
        let p = parse_structure(r#"{"n":2,"rels":{"E":[[0,1],[0,1]]}}"#).unwrap();
        assert_eq!(p.structure.relation("E").unwrap().len(), 1);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn root_field_is_checked() {
        let p = parse_structure(r#"{"n":3,"rels":{"E":[[0,1],[1,2]]},"root":0}"#).unwrap();
        assert_eq!(DiGraph::from_parsed(&p).unwrap().root(), Some(0));
        let p = parse_structure(r#"{"n":3,"rels":{"E":[[0,1],[1,2]]},"root":2}"#).unwrap();
        assert_eq!(DiGraph::from_parsed(&p).unwrap_err(), Error::NotRooted);
    }

    #[test]
    fn degrees_of_diamond() {
        let g = diamond();
        assert_eq!(g.degrees(3).unwrap(), (2, 0));
        assert_eq!(g.degrees(0).unwrap(), (0, 2));
        assert!(g.degrees(9).is_err());
    }

    #[test]
    fn degrees_of_quotient_example() {
        // a=0, b=1, d=2
        let g = DiGraph::new(3, [(0, 1), (0, 0), (0, 2), (2, 2), (2, 0)]).unwrap();
        assert_eq!(g.degrees(0).unwrap(), (2, 3));
    }

    #[test]
    fn reachability_examples() {
        let chain = DiGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(chain.reachable_closure(0).unwrap(), BTreeSet::from([0, 1, 2]));
        assert_eq!(chain.reachable_closure(2).unwrap(), BTreeSet::from([2]));
        assert_eq!(diamond().reachable_closure(0).unwrap().len(), 4);
        assert!(chain.reachable_closure(3).is_err());
    }

    #[test]
    fn root_detection() {
        assert_eq!(diamond().find_root(), Some(0));
        let two_sources = DiGraph::new(3, [(0, 2), (1, 2)]).unwrap();
        assert_eq!(two_sources.find_root(), None);
        assert!(!DiGraph::new(2, [(0, 1), (1, 0)]).unwrap().is_acyclic());
    }

    #[test]
    fn undirected_rejects_loops() {
        assert!(Graph::new(2, [(1, 1)]).is_err());
        let g = Graph::new(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    }
}
