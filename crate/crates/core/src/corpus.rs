//! Seeded random and exhaustive corpora of rooted DAGs with cardinality
//! conditions.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::structure::{DiGraph, ElemId};
use crate::xfix::CardinalityCondition;

pub const MAX_CORPUS_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: usize,
    pub graph: DiGraph,
    pub condition: CardinalityCondition,
}

/// Deterministic generator for instance `id` of the corpus with `seed`.
pub fn instance_rng(seed: u64, id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

/// Random rooted DAG on exactly `n` vertices: a random topological order,
/// one random earlier parent per non-root vertex, and extra forward edges
/// with probability `p`. Vertex ids are a random relabelling.
pub fn random_rooted_dag(rng: &mut impl Rng, n: usize, p: f64) -> DiGraph {
    let mut label: Vec<ElemId> = (0..n as ElemId).collect();
    label.shuffle(rng);
    let mut edges = BTreeSet::new();
    for j in 1..n {
        let parent = rng.gen_range(0..j);
        edges.insert((label[parent], label[j]));
        for i in 0..j {
            if rng.gen_bool(p) {
                edges.insert((label[i], label[j]));
            }
        }
    }
    DiGraph::new(n, edges).expect("ids in range").with_root(label[0]).expect("every vertex has a path from the root")
}

/// Each `k ∈ [0, deg⁺(v)]` is admitted with probability 1/2.
pub fn random_condition(rng: &mut impl Rng, g: &DiGraph) -> CardinalityCondition {
    let sets =
        (0..g.n() as ElemId).map(|v| (0..=g.out_degree(v) as u32).filter(|_| rng.gen_bool(0.5)).collect()).collect();
    CardinalityCondition::new(g, sets).expect("entries bounded by out-degree")
}

/// `count` instances with sizes uniform in `[n_min, n_max]`.
pub fn generate_corpus(seed: u64, n_min: usize, n_max: usize, count: usize) -> Result<Vec<Instance>> {
    if n_max > MAX_CORPUS_N || n_min == 0 || n_min > n_max {
        return Err(Error::RangeViolation(format!(
            "corpus sizes must satisfy 1 ≤ n_min ≤ n_max ≤ {MAX_CORPUS_N}, got [{n_min}, {n_max}]"
        )));
    }
    Ok((0..count)
        .map(|id| {
            let mut rng = instance_rng(seed, id);
            let n = rng.gen_range(n_min..=n_max);
            let p = rng.gen_range(0.1..0.6);
            let graph = random_rooted_dag(&mut rng, n, p);
            let condition = random_condition(&mut rng, &graph);
            Instance { id, graph, condition }
        })
        .collect())
}

fn edge_mask(n: usize, edges: impl IntoIterator<Item = (ElemId, ElemId)>) -> u64 {
    edges.into_iter().fold(0, |m, (u, v)| m | 1 << (u as usize * n + v as usize))
}

fn permutations(n: usize) -> Vec<Vec<ElemId>> {
    let mut out = Vec::new();
    let mut cur: Vec<ElemId> = (0..n as ElemId).collect();
    fn rec(k: usize, cur: &mut Vec<ElemId>, out: &mut Vec<Vec<ElemId>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}

/// Canonical form of a digraph: the smallest edge bitmask over all relabellings.
pub fn canonical_mask(g: &DiGraph) -> u64 {
    let n = g.n();
    permutations(n)
        .iter()
        .map(|p| edge_mask(n, g.edges().map(|(u, v)| (p[u as usize], p[v as usize]))))
        .min()
        .unwrap_or(0)
}

/// Every rooted DAG on `n` vertices, one per isomorphism class, rooted at 0
/// with vertices numbered in a topological order.
pub fn rooted_dags_up_to_iso(n: usize) -> Result<Vec<DiGraph>> {
    if n == 0 || n > 5 {
        return Err(Error::RangeViolation(format!("exhaustive enumeration supports 1..=5 vertices, got {n}")));
    }
    let pairs: Vec<(ElemId, ElemId)> =
        (0..n as ElemId).flat_map(|u| (u + 1..n as ElemId).map(move |v| (u, v))).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for bits in 0u64..1 << pairs.len() {
        let edges = pairs.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &e)| e);
        let g = DiGraph::new(n, edges).expect("ids in range");
        if g.find_root() != Some(0) {
            continue;
        }
        if seen.insert(canonical_mask(&g)) {
            out.push(g.with_root(0).expect("rooted at 0"));
        }
    }
    Ok(out)
}

/// Every cardinality condition with `C(v) ⊆ [0, deg⁺(v)]`.
pub fn all_conditions(g: &DiGraph) -> Vec<CardinalityCondition> {
    let mut out = vec![Vec::<BTreeSet<u32>>::new()];
    for v in 0..g.n() as ElemId {
        let d = g.out_degree(v) as u32;
        let subsets: Vec<BTreeSet<u32>> =
            (0u32..1 << (d + 1)).map(|bits| (0..=d).filter(|k| bits >> k & 1 == 1).collect()).collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                subsets.iter().map(move |s| {
                    let mut p = prefix.clone();
                    p.push(s.clone());
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(|sets| CardinalityCondition::new(g, sets).expect("admissible")).collect()
}

/// All rooted DAGs on `1..=n_max` vertices up to isomorphism, each with every
/// admissible condition.
pub fn exhaustive_corpus(n_max: usize) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        for g in rooted_dags_up_to_iso(n)? {
            for condition in all_conditions(&g) {
                out.push(Instance { id: out.len(), graph: g.clone(), condition });
            }
        }
    }
    Ok(out)
}
