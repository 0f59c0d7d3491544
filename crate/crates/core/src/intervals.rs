//! Interval graphs through their maxcliques: consecutive orderings, possible
//! ends, the relation `≺_M` and module extraction.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::{ElemId, Graph};

/// Largest graph accepted by the clique routines.
pub const MAX_INTERVAL_N: usize = 32;
/// Largest number of maxcliques for ordering searches.
pub const MAX_ORDERING_CLIQUES: usize = 12;

type Mask = u32;

fn mask_of(vs: impl IntoIterator<Item = ElemId>) -> Mask {
    vs.into_iter().fold(0, |m, v| m | 1 << v)
}

fn members(m: Mask) -> Vec<ElemId> {
    (0..32).filter(|&v| m >> v & 1 == 1).collect()
}

fn adjacency(g: &Graph) -> Result<Vec<Mask>> {
    if g.n() > MAX_INTERVAL_N {
        return Err(Error::SizeExceeded(format!("{} vertices (at most {MAX_INTERVAL_N})", g.n())));
    }
    Ok((0..g.n() as ElemId).map(|v| mask_of(g.neighbors(v))).collect())
}

/// All maxcliques, each sorted, the list sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxcliqueSet {
    pub cliques: Vec<Vec<ElemId>>,
}

impl MaxcliqueSet {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn index_of(&self, clique: &[ElemId]) -> Option<usize> {
        let mut c = clique.to_vec();
        c.sort_unstable();
        self.cliques.iter().position(|x| *x == c)
    }

    fn masks(&self) -> Vec<Mask> {
        self.cliques.iter().map(|c| mask_of(c.iter().copied())).collect()
    }
}

/// Bron–Kerbosch with pivoting.
pub fn maxcliques(g: &Graph) -> Result<MaxcliqueSet> {
    let adj = adjacency(g)?;
    let mut out = Vec::new();
    fn bk(adj: &[Mask], r: Mask, mut p: Mask, mut x: Mask, out: &mut Vec<Mask>) {
        if p == 0 {
            if x == 0 {
                out.push(r);
            }
            return;
        }
        let pivot =
            members(p | x).into_iter().max_by_key(|&u| (adj[u as usize] & p).count_ones()).expect("p ∪ x non-empty");
        for v in members(p & !adj[pivot as usize]) {
            let bit = 1 << v;
            bk(adj, r | bit, p & adj[v as usize], x & adj[v as usize], out);
            p &= !bit;
            x |= bit;
        }
    }
    if g.n() > 0 {
        let all = if g.n() == 32 { Mask::MAX } else { (1 << g.n()) - 1 };
        bk(&adj, 0, all, 0, &mut out);
    }
    let mut cliques: Vec<Vec<ElemId>> = out.into_iter().map(members).collect();
    cliques.sort();
    Ok(MaxcliqueSet { cliques })
}

fn check_ordering_size(m: &MaxcliqueSet) -> Result<()> {
    if m.len() > MAX_ORDERING_CLIQUES {
        return Err(Error::SizeExceeded(format!("{} maxcliques (at most {MAX_ORDERING_CLIQUES})", m.len())));
    }
    Ok(())
}

/// Backtracking over clique orders where every vertex occupies a contiguous
/// block; `visit` returns false to stop.
fn search_orderings(masks: &[Mask], mut visit: impl FnMut(&[usize]) -> bool) {
    fn rec(
        masks: &[Mask],
        order: &mut Vec<usize>,
        used: &mut Vec<bool>,
        seen: Mask,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if order.len() == masks.len() {
            return visit(order);
        }
        let last = order.last().map_or(0, |&i| masks[i]);
        for c in 0..masks.len() {
            // a vertex seen before must still be present in the previous clique
            if used[c] || masks[c] & seen & !last != 0 {
                continue;
            }
            used[c] = true;
            order.push(c);
            let go_on = rec(masks, order, used, seen | masks[c], visit);
            order.pop();
            used[c] = false;
            if !go_on {
                return false;
            }
        }
        true
    }
    rec(masks, &mut Vec::new(), &mut vec![false; masks.len()], 0, &mut visit);
}

/// Every consecutive ordering of the maxcliques, as index lists into
/// [`maxcliques`].
pub fn consecutive_orderings(g: &Graph) -> Result<Vec<Vec<usize>>> {
    let m = maxcliques(g)?;
    check_ordering_size(&m)?;
    let mut out = Vec::new();
    search_orderings(&m.masks(), |o| {
        out.push(o.to_vec());
        true
    });
    Ok(out)
}

pub fn is_interval(g: &Graph) -> Result<bool> {
    let m = maxcliques(g)?;
    check_ordering_size(&m)?;
    let mut found = false;
    search_orderings(&m.masks(), |_| {
        found = true;
        false
    });
    Ok(found)
}

/// Indices of maxcliques that start some consecutive ordering.
pub fn possible_ends(g: &Graph) -> Result<BTreeSet<usize>> {
    let m = maxcliques(g)?;
    check_ordering_size(&m)?;
    let masks = m.masks();
    let mut ends = BTreeSet::new();
    for first in 0..masks.len() {
        let mut found = false;
        search_orderings(&masks, |o| {
            found = o[0] == first;
            !found && o[0] <= first
        });
        if found {
            ends.insert(first);
        }
    }
    if ends.is_empty() && !masks.is_empty() {
        return Err(Error::NotInterval);
    }
    Ok(ends)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrecRelation {
    pub anchor: usize,
    pub cliques: Vec<Vec<ElemId>>,
    /// Pairs `(C, D)` with `C ≺_M D`, as clique indices.
    pub pairs: BTreeSet<(usize, usize)>,
    pub irreflexive: bool,
    pub transitive: bool,
    pub strict_weak_order: bool,
}

impl PrecRelation {
    pub fn precedes(&self, c: usize, d: usize) -> bool {
        self.pairs.contains(&(c, d))
    }

    pub fn comparable(&self, c: usize, d: usize) -> bool {
        self.precedes(c, d) || self.precedes(d, c)
    }
}

/// Least relation with `M ≺ C` for `C ≠ M`, closed under
/// `X ≺ D ∧ (X∩C)∖D ≠ ∅ ⟹ C ≺ D` and `C ≺ X ∧ (X∩D)∖C ≠ ∅ ⟹ C ≺ D`.
pub fn prec_order(g: &Graph, anchor: &[ElemId]) -> Result<PrecRelation> {
    let m = maxcliques(g)?;
    let a = m.index_of(anchor).ok_or(Error::NotAMaxclique)?;
    Ok(prec_order_with(&m, a, &(0..m.len()).collect::<Vec<_>>()))
}

/// The fixpoint, visiting cliques in `order`; the result does not depend on it.
pub fn prec_order_with(m: &MaxcliqueSet, anchor: usize, order: &[usize]) -> PrecRelation {
    let masks = m.masks();
    let k = masks.len();
    let mut rel = vec![vec![false; k]; k];
    for (c, r) in rel[anchor].iter_mut().enumerate() {
        *r = c != anchor;
    }
    let mut changed = true;
    while changed {
        changed = false;
        for &c in order {
            for &d in order {
                if rel[c][d] {
                    continue;
                }
                let derived = (0..k).any(|x| {
                    (rel[x][d] && masks[x] & masks[c] & !masks[d] != 0)
                        || (rel[c][x] && masks[x] & masks[d] & !masks[c] != 0)
                });
                if derived {
                    rel[c][d] = true;
                    changed = true;
                }
            }
        }
    }
    let pairs: BTreeSet<(usize, usize)> =
        (0..k).flat_map(|c| (0..k).map(move |d| (c, d))).filter(|&(c, d)| rel[c][d]).collect();
    let irreflexive = (0..k).all(|c| !rel[c][c]);
    let transitive = pairs.iter().all(|&(c, d)| (0..k).all(|e| !rel[d][e] || rel[c][e]));
    let incomparable = |c: usize, d: usize| !rel[c][d] && !rel[d][c];
    let incomparability_transitive = (0..k)
        .all(|c| (0..k).all(|d| (0..k).all(|e| !(incomparable(c, d) && incomparable(d, e)) || incomparable(c, e))));
    PrecRelation {
        anchor,
        cliques: m.cliques.clone(),
        pairs,
        irreflexive,
        transitive,
        strict_weak_order: irreflexive && transitive && incomparability_transitive,
    }
}

/// Whether every vertex outside `set` sees all of it or none of it.
pub fn is_module(g: &Graph, set: &[ElemId]) -> bool {
    let inside: BTreeSet<ElemId> = set.iter().copied().collect();
    (0..g.n() as ElemId).filter(|v| !inside.contains(v)).all(|v| {
        let seen = set.iter().filter(|&&u| g.adjacent(u, v)).count();
        seen == 0 || seen == set.len()
    })
}

/// For each maximal set of ≥ 2 pairwise incomparable maxcliques `𝒞`, the set
/// `∪𝒞 ∖ ∪(M(G) ∖ 𝒞)`; only non-empty sets passing [`is_module`] are kept.
pub fn extract_modules(g: &Graph, prec: &PrecRelation) -> Vec<Vec<ElemId>> {
    let k = prec.cliques.len();
    let masks: Vec<Mask> = prec.cliques.iter().map(|c| mask_of(c.iter().copied())).collect();
    let mut antichains = Vec::new();
    // maximal cliques of the incomparability graph
    let inc: Vec<u64> =
        (0..k).map(|c| (0..k).filter(|&d| d != c && !prec.comparable(c, d)).fold(0u64, |m, d| m | 1 << d)).collect();
    fn bk(inc: &[u64], r: u64, p: u64, x: u64, out: &mut Vec<u64>) {
        if p == 0 && x == 0 {
            out.push(r);
            return;
        }
        let mut p2 = p;
        let mut x2 = x;
        for v in 0..inc.len() {
            if p2 >> v & 1 == 0 {
                continue;
            }
            bk(inc, r | 1 << v, p2 & inc[v], x2 & inc[v], out);
            p2 &= !(1 << v);
            x2 |= 1 << v;
        }
    }
    if k > 0 {
        bk(&inc, 0, (1u64 << k) - 1, 0, &mut antichains);
    }
    let mut out = BTreeSet::new();
    for a in antichains.into_iter().filter(|a| a.count_ones() >= 2) {
        let (mut union, mut rest) = (0 as Mask, 0 as Mask);
        for (c, &mask) in masks.iter().enumerate() {
            if a >> c & 1 == 1 {
                union |= mask;
            } else {
                rest |= mask;
            }
        }
        let s = members(union & !rest);
        if !s.is_empty() && is_module(g, &s) {
            out.insert(s);
        }
    }
    out.into_iter().collect()
}

/// Replaces `module` by its least vertex; returns the quotient and, for each
/// new vertex, the old vertices it stands for.
pub fn contract_module(g: &Graph, module: &[ElemId]) -> (Graph, Vec<Vec<ElemId>>) {
    let inside: BTreeSet<ElemId> = module.iter().copied().collect();
    let Some(&keep) = inside.first() else { return (g.clone(), (0..g.n() as ElemId).map(|v| vec![v]).collect()) };
    let reps: Vec<ElemId> = (0..g.n() as ElemId).filter(|v| !inside.contains(v) || *v == keep).collect();
    let groups = reps.iter().map(|&v| if v == keep { inside.iter().copied().collect() } else { vec![v] }).collect();
    (g.induced(&reps), groups)
}

/// Repeatedly contracts the first extracted module of a non-trivial size,
/// anchored at the least possible end, until none remains. Returns the
/// contracted modules in order, in original vertex ids.
pub fn reduce_by_modules(g: &Graph) -> Result<(Graph, Vec<Vec<ElemId>>)> {
    let mut cur = g.clone();
    let mut groups: Vec<Vec<ElemId>> = (0..g.n() as ElemId).map(|v| vec![v]).collect();
    let mut steps = Vec::new();
    loop {
        let ends = possible_ends(&cur)?;
        let Some(&anchor) = ends.first() else { break };
        let m = maxcliques(&cur)?;
        let prec = prec_order_with(&m, anchor, &(0..m.len()).collect::<Vec<_>>());
        let Some(module) = extract_modules(&cur, &prec).into_iter().find(|s| s.len() >= 2 && s.len() < cur.n()) else {
            break;
        };
        let (next, local) = contract_module(&cur, &module);
        let merged: Vec<ElemId> = {
            let mut v: Vec<ElemId> = module.iter().flat_map(|&u| groups[u as usize].iter().copied()).collect();
            v.sort_unstable();
            v
        };
        steps.push(merged);
        groups = local
            .iter()
            .map(|l| {
                let mut v: Vec<ElemId> = l.iter().flat_map(|&u| groups[u as usize].iter().copied()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        cur = next;
    }
    Ok((cur, steps))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalReport {
    pub is_interval: bool,
    pub maxcliques: Vec<Vec<ElemId>>,
    pub possible_ends: Vec<usize>,
    pub prec_pairs: Vec<(usize, usize)>,
    pub modules: Vec<Vec<ElemId>>,
}

/// Recognition plus, for interval graphs, `≺_M` and modules anchored at the
/// least possible end.
pub fn interval_report(g: &Graph) -> Result<IntervalReport> {
    let m = maxcliques(g)?;
    let interval = is_interval(g)?;
    let mut report = IntervalReport {
        is_interval: interval,
        maxcliques: m.cliques.clone(),
        possible_ends: Vec::new(),
        prec_pairs: Vec::new(),
        modules: Vec::new(),
    };
    if interval {
        let ends = possible_ends(g)?;
        report.possible_ends = ends.iter().copied().collect();
        if let Some(&a) = ends.first() {
            let prec = prec_order_with(&m, a, &(0..m.len()).collect::<Vec<_>>());
            report.modules = extract_modules(g, &prec);
            report.prec_pairs = prec.pairs.into_iter().collect();
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::eight_vertex_interval;

    fn clique(vs: &[ElemId]) -> Vec<ElemId> {
        vs.to_vec()
    }

    #[test]
    fn maxclique_examples() {
        assert_eq!(maxcliques(&Graph::complete(3)).unwrap().cliques, vec![clique(&[0, 1, 2])]);
        assert_eq!(maxcliques(&Graph::path(3)).unwrap().cliques, vec![clique(&[0, 1]), clique(&[1, 2])]);
        let h8 = maxcliques(&eight_vertex_interval()).unwrap();
        assert_eq!(
            h8.cliques,
            vec![clique(&[0, 1, 2, 3]), clique(&[0, 1, 3, 4, 6]), clique(&[0, 1, 3, 4, 7]), clique(&[0, 1, 4, 5])]
        );
        assert_eq!(maxcliques(&Graph::new(0, []).unwrap()).unwrap().len(), 0);
        assert!(maxcliques(&Graph::path(33)).is_err());
    }

    #[test]
    fn ordering_examples() {
        assert_eq!(consecutive_orderings(&Graph::path(3)).unwrap().len(), 2);
        assert!(!consecutive_orderings(&Graph::star(3)).unwrap().is_empty());
        assert!(consecutive_orderings(&Graph::cycle(4)).unwrap().is_empty());
        assert!(is_interval(&eight_vertex_interval()).unwrap());
        assert!(!is_interval(&Graph::cycle(4)).unwrap());
        for o in consecutive_orderings(&eight_vertex_interval()).unwrap() {
            let rev: Vec<usize> = o.iter().rev().copied().collect();
            assert!(consecutive_orderings(&eight_vertex_interval()).unwrap().contains(&rev));
        }
    }

    #[test]
    fn possible_end_examples() {
        assert_eq!(possible_ends(&Graph::path(3)).unwrap(), BTreeSet::from([0, 1]));
        let ends = possible_ends(&eight_vertex_interval()).unwrap();
        assert!(ends.contains(&0) && ends.contains(&3));
        assert_eq!(possible_ends(&Graph::complete(4)).unwrap(), BTreeSet::from([0]));
        assert_eq!(possible_ends(&Graph::cycle(4)), Err(Error::NotInterval));
    }

    #[test]
    fn prec_examples() {
        let p = prec_order(&Graph::path(3), &[0, 1]).unwrap();
        assert_eq!(p.pairs, BTreeSet::from([(0, 1)]));
        let h8 = eight_vertex_interval();
        let p = prec_order(&h8, &[0, 1, 2, 3]).unwrap();
        assert!(!p.comparable(1, 2));
        assert!(p.precedes(1, 3) && p.precedes(2, 3));
        assert!((1..4).all(|c| p.precedes(0, c)));
        assert!(p.irreflexive && p.transitive && p.strict_weak_order);
        let shuffled = prec_order_with(&maxcliques(&h8).unwrap(), 0, &[3, 1, 0, 2]);
        assert_eq!(shuffled, p);
        // a caterpillar with four maxcliques in a row
        let cat = Graph::path(5);
        let p = prec_order(&cat, &[0, 1]).unwrap();
        assert_eq!(p.pairs.len(), 6);
        assert!(extract_modules(&cat, &p).is_empty());
        assert_eq!(prec_order(&cat, &[0, 2]), Err(Error::NotAMaxclique));
    }

    #[test]
    fn module_examples() {
        let h8 = eight_vertex_interval();
        assert!(is_module(&h8, &[2, 3, 4, 5, 6, 7]));
        assert!(!is_module(&h8, &[2, 3]));
        let p = prec_order(&h8, &[0, 1, 2, 3]).unwrap();
        let modules = extract_modules(&h8, &p);
        assert!(modules.iter().all(|s| is_module(&h8, s)));
        assert!(modules.contains(&vec![6, 7]));
        let (reduced, steps) = reduce_by_modules(&h8).unwrap();
        assert!(reduced.n() < h8.n());
        assert!(steps.iter().all(|s| s.len() >= 2));
    }
}
