//! Tree-unfolding statistics of rooted DAGs: weights, multiplicities,
//! restricted subgraphs `G_v^W` and the m-path property.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::{DiGraph, ElemId, Reachability};

/// `wt(v)` = number of root paths to `v`; `mul(v)` = `deg⁻(v) · max mul` over
/// in-neighbours. Values are exact and serialized as decimal strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightTable {
    pub root: ElemId,
    pub wt: Vec<BigUint>,
    pub mul: Vec<BigUint>,
    pub awt: BigUint,
    pub amul: BigUint,
}

#[derive(Serialize)]
struct WeightJson {
    root: ElemId,
    wt: Vec<String>,
    mul: Vec<String>,
    awt: String,
    amul: String,
}

impl WeightTable {
    pub fn to_json(&self) -> String {
        let j = WeightJson {
            root: self.root,
            wt: self.wt.iter().map(ToString::to_string).collect(),
            mul: self.mul.iter().map(ToString::to_string).collect(),
            awt: self.awt.to_string(),
            amul: self.amul.to_string(),
        };
        serde_json::to_string(&j).expect("weights serialize")
    }
}

/// Root and topological order of a rooted DAG.
pub fn rooted_order(g: &DiGraph) -> Result<(ElemId, Vec<ElemId>)> {
    let topo = g.topological_order().ok_or(Error::NotAcyclic)?;
    let root = match g.root() {
        Some(r) => r,
        None => g.find_root().ok_or(Error::NotRooted)?,
    };
    if !g.reachable_mask(root).iter().all(|&b| b) {
        return Err(Error::NotRooted);
    }
    Ok((root, topo))
}

pub fn weights(g: &DiGraph) -> Result<WeightTable> {
    let (root, topo) = rooted_order(g)?;
    let n = g.n();
    let mut wt = vec![BigUint::zero(); n];
    let mut mul = vec![BigUint::zero(); n];
    for &v in &topo {
        if v == root {
            wt[v as usize] = BigUint::one();
            mul[v as usize] = BigUint::one();
            continue;
        }
        let preds = g.in_neighbors(v);
        let mut s = BigUint::zero();
        for &u in preds {
            s += &wt[u as usize];
        }
        let best = preds.iter().map(|&u| &mul[u as usize]).max().cloned().unwrap_or_default();
        wt[v as usize] = s;
        mul[v as usize] = best * BigUint::from(preds.len());
    }
    let awt = wt.iter().sum();
    let amul = mul.iter().sum();
    Ok(WeightTable { root, wt, mul, awt, amul })
}

/// Whether `mul(v) ≤ m` for every vertex.
pub fn has_m_path_property(g: &DiGraph, m: &BigUint) -> Result<bool> {
    Ok(weights(g)?.mul.iter().all(|x| x <= m))
}

/// Vertex set of `G_v^W`: endpoints of paths from `v` whose vertices before
/// the endpoint avoid `W`.
pub fn restricted_mask(g: &DiGraph, v: ElemId, w: &[ElemId]) -> Vec<bool> {
    let mut blocked = vec![false; g.n()];
    for &x in w {
        blocked[x as usize] = true;
    }
    let mut seen = vec![false; g.n()];
    seen[v as usize] = true;
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        if blocked[u as usize] {
            continue;
        }
        for &x in g.out_neighbors(u) {
            if !seen[x as usize] {
                seen[x as usize] = true;
                stack.push(x);
            }
        }
    }
    seen
}

/// The induced subgraph `G_v^W`, rooted at `v`, with the old id of every new vertex.
pub fn restricted(g: &DiGraph, v: ElemId, w: &[ElemId]) -> Result<(DiGraph, Vec<ElemId>)> {
    for &x in std::iter::once(&v).chain(w) {
        if x as usize >= g.n() {
            return Err(Error::IdOutOfRange { id: x as u64, size: g.n() });
        }
    }
    let reach = g.reachable_mask(v);
    if let Some(&bad) = w.iter().find(|&&x| !reach[x as usize]) {
        return Err(Error::PreconditionViolated(format!("{bad} is not reachable from {v}")));
    }
    let mask = restricted_mask(g, v, w);
    let keep: Vec<ElemId> = (0..g.n() as ElemId).filter(|&u| mask[u as usize]).collect();
    let (sub, ids) = g.induced(&keep);
    let root = ids.binary_search(&v).expect("v is kept") as ElemId;
    Ok((sub.with_root(root)?, ids))
}

/// A validated rooted DAG with precomputed order and reachability, for
/// repeated aggregate-weight queries on restricted subgraphs.
#[derive(Debug, Clone)]
pub struct RootedDag<'g> {
    g: &'g DiGraph,
    root: ElemId,
    topo: Vec<ElemId>,
    reach: Reachability,
}

impl<'g> RootedDag<'g> {
    pub fn new(g: &'g DiGraph) -> Result<Self> {
        let (root, topo) = rooted_order(g)?;
        Ok(RootedDag { g, root, topo, reach: g.reachability() })
    }

    pub fn graph(&self) -> &'g DiGraph {
        self.g
    }

    pub fn root(&self) -> ElemId {
        self.root
    }

    /// `u ⊴ v`.
    pub fn reaches(&self, u: ElemId, v: ElemId) -> bool {
        self.reach.reaches(u, v)
    }

    /// `u ◁ v`.
    pub fn strictly_reaches(&self, u: ElemId, v: ElemId) -> bool {
        self.reach.strictly_reaches(u, v)
    }

    /// `awt(G_v^W)`: the number of paths from `v` whose vertices before the
    /// endpoint avoid `W`, i.e. the size of the tree unfolding in which `W`
    /// vertices are leaves. Checked 128-bit arithmetic.
    ///
    /// Paths through a `W` vertex are not counted even where the induced
    /// subgraph keeps its out-edges; the weight and splitting bounds only
    /// hold for this count.
    pub fn awt(&self, v: ElemId, w: &[ElemId]) -> Result<u128> {
        let mask = restricted_mask(self.g, v, w);
        let open = |p: ElemId| mask[p as usize] && (p == v || !w.contains(&p));
        let mut wt = vec![0u128; self.g.n()];
        let mut total: u128 = 0;
        for &u in &self.topo {
            if !mask[u as usize] {
                continue;
            }
            let x = if u == v {
                1
            } else {
                self.g
                    .in_neighbors(u)
                    .iter()
                    .filter(|&&p| open(p))
                    .try_fold(0u128, |acc, &p| acc.checked_add(wt[p as usize]))
                    .ok_or_else(|| Error::Overflow("path count exceeds 128 bits".into()))?
            };
            wt[u as usize] = x;
            total = total.checked_add(x).ok_or_else(|| Error::Overflow("aggregate weight exceeds 128 bits".into()))?;
        }
        Ok(total)
    }
}
