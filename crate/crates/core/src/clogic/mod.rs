//! Counting logic: hash-consed formula DAGs, depth/variable accounting and
//! a memoizing model checker.
//!
//! Every formula lives in a [`FormulaStore`]. Structurally equal nodes are
//! interned to the same [`FormulaId`], so the recursive formula families
//! built by the compiler stay polynomial even though their tree expansion
//! is astronomically large. Builders apply constant folding for `⊤`/`⊥`;
//! nothing else is simplified.

mod eval;
mod print;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

pub use eval::{distinguishes, eval, Assignment, Evaluator};
pub use print::parse_formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormulaId(u32);

impl FormulaId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymId(u32);

impl SymId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CountMode {
    AtLeast,
    Exactly,
    AtMost,
}

impl CountMode {
    pub fn holds(self, count: usize, threshold: usize) -> bool {
        match self {
            CountMode::AtLeast => count >= threshold,
            CountMode::Exactly => count == threshold,
            CountMode::AtMost => count <= threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CountMode::AtLeast => ">=",
            CountMode::Exactly => "=",
            CountMode::AtMost => "<=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            ">=" => Some(CountMode::AtLeast),
            "=" => Some(CountMode::Exactly),
            "<=" => Some(CountMode::AtMost),
            _ => None,
        }
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Bool(bool),
    Eq(VarId, VarId),
    Atom(SymId, Box<[VarId]>),
    Not(FormulaId),
    Or(Box<[FormulaId]>),
    And(Box<[FormulaId]>),
    Count { mode: CountMode, threshold: u32, var: VarId, body: FormulaId },
}

impl Node {
    pub fn children(&self) -> &[FormulaId] {
        match self {
            Node::Not(c) => std::slice::from_ref(c),
            Node::Or(cs) | Node::And(cs) => cs,
            Node::Count { body, .. } => std::slice::from_ref(body),
            _ => &[],
        }
    }
}

#[derive(Debug, Clone)]
struct Meta {
    qd: u32,
    vars: Box<[VarId]>,
    free: Box<[VarId]>,
}

/// Measured size and shape of a formula.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct FormulaStats {
    pub qd: u32,
    pub nvars: usize,
    pub dag_size: usize,
    /// Node count of the fully expanded tree, as a decimal string.
    pub tree_size: String,
}

pub const DEFAULT_MAX_THRESHOLD: u32 = 1 << 20;

/// Interning table for formulas. Creation takes `&mut self`; share it across
/// threads behind a lock, read-only access (evaluation) needs only `&self`.
#[derive(Debug, Clone)]
pub struct FormulaStore {
    nodes: Vec<Node>,
    meta: Vec<Meta>,
    index: FxHashMap<Node, FormulaId>,
    var_names: Vec<String>,
    var_index: FxHashMap<String, VarId>,
    syms: Vec<(String, usize)>,
    sym_index: FxHashMap<String, SymId>,
    max_threshold: u32,
}

impl Default for FormulaStore {
    fn default() -> Self {
        Self::new()
    }
}

impl FormulaStore {
    pub fn new() -> Self {
        Self::with_max_threshold(DEFAULT_MAX_THRESHOLD)
    }

    pub fn with_max_threshold(max_threshold: u32) -> Self {
        FormulaStore {
            nodes: Vec::new(),
            meta: Vec::new(),
            index: FxHashMap::default(),
            var_names: Vec::new(),
            var_index: FxHashMap::default(),
            syms: Vec::new(),
            sym_index: FxHashMap::default(),
            max_threshold,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn var(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.var_index.get(name) {
            return v;
        }
        let v = VarId(self.var_names.len() as u32);
        self.var_names.push(name.to_string());
        self.var_index.insert(name.to_string(), v);
        v
    }

    pub fn lookup_var(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.var_names[v.index()]
    }

    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    /// Registers a relation symbol; its arity is fixed by the first use.
    pub fn sym(&mut self, name: &str, arity: usize) -> Result<SymId> {
        if let Some(&s) = self.sym_index.get(name) {
            let known = self.syms[s.index()].1;
            if known != arity {
                return Err(Error::ArityMismatch(format!(
                    "symbol `{name}` used with arity {arity}, previously {known}"
                )));
            }
            return Ok(s);
        }
        if arity == 0 {
            return Err(Error::ArityMismatch(format!("symbol `{name}` with arity 0")));
        }
        let s = SymId(self.syms.len() as u32);
        self.syms.push((name.to_string(), arity));
        self.sym_index.insert(name.to_string(), s);
        Ok(s)
    }

    pub fn sym_name(&self, s: SymId) -> &str {
        &self.syms[s.index()].0
    }

    pub fn sym_arity(&self, s: SymId) -> usize {
        self.syms[s.index()].1
    }

    pub fn node(&self, f: FormulaId) -> &Node {
        &self.nodes[f.index()]
    }

    pub fn qdepth(&self, f: FormulaId) -> u32 {
        self.meta[f.index()].qd
    }

    /// All variables occurring in `f`, bound or free, sorted by id.
    pub fn vars(&self, f: FormulaId) -> &[VarId] {
        &self.meta[f.index()].vars
    }

    pub fn nvars(&self, f: FormulaId) -> usize {
        self.meta[f.index()].vars.len()
    }

    pub fn free_vars(&self, f: FormulaId) -> &[VarId] {
        &self.meta[f.index()].free
    }

    pub fn is_sentence(&self, f: FormulaId) -> bool {
        self.meta[f.index()].free.is_empty()
    }

    fn intern(&mut self, node: Node) -> FormulaId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let meta = self.compute_meta(&node);
        let id = FormulaId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.meta.push(meta);
        self.index.insert(node, id);
        id
    }

    fn compute_meta(&self, node: &Node) -> Meta {
        fn sorted(mut v: Vec<VarId>) -> Box<[VarId]> {
            v.sort_unstable();
            v.dedup();
            v.into_boxed_slice()
        }
        match node {
            Node::Bool(_) => Meta { qd: 0, vars: Box::new([]), free: Box::new([]) },
            Node::Eq(a, b) => {
                let v = sorted(vec![*a, *b]);
                Meta { qd: 0, vars: v.clone(), free: v }
            }
            Node::Atom(_, args) => {
                let v = sorted(args.to_vec());
                Meta { qd: 0, vars: v.clone(), free: v }
            }
            Node::Not(c) => self.meta[c.index()].clone(),
            Node::Or(cs) | Node::And(cs) => {
                let mut qd = 0;
                let mut vars = Vec::new();
                let mut free = Vec::new();
                for c in cs.iter() {
                    let m = &self.meta[c.index()];
                    qd = qd.max(m.qd);
                    vars.extend_from_slice(&m.vars);
                    free.extend_from_slice(&m.free);
                }
                Meta { qd, vars: sorted(vars), free: sorted(free) }
            }
            Node::Count { var, body, .. } => {
                let m = &self.meta[body.index()];
                let mut vars = m.vars.to_vec();
                vars.push(*var);
                let free: Vec<VarId> = m.free.iter().copied().filter(|v| v != var).collect();
                Meta { qd: m.qd + 1, vars: sorted(vars), free: free.into_boxed_slice() }
            }
        }
    }

    pub fn bool(&mut self, b: bool) -> FormulaId {
        self.intern(Node::Bool(b))
    }

    pub fn top(&mut self) -> FormulaId {
        self.bool(true)
    }

    pub fn bot(&mut self) -> FormulaId {
        self.bool(false)
    }

    pub fn as_bool(&self, f: FormulaId) -> Option<bool> {
        match self.node(f) {
            Node::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn eq(&mut self, a: VarId, b: VarId) -> FormulaId {
        self.intern(Node::Eq(a, b))
    }

    pub fn atom(&mut self, sym: SymId, args: &[VarId]) -> Result<FormulaId> {
        let arity = self.sym_arity(sym);
        if args.len() != arity {
            return Err(Error::ArityMismatch(format!(
                "atom `{}` applied to {} arguments, arity is {arity}",
                self.sym_name(sym),
                args.len()
            )));
        }
        Ok(self.intern(Node::Atom(sym, args.into())))
    }

    pub fn not(&mut self, f: FormulaId) -> FormulaId {
        match self.node(f) {
            Node::Bool(b) => {
                let b = !*b;
                self.bool(b)
            }
            _ => self.intern(Node::Not(f)),
        }
    }

    pub fn and(&mut self, children: impl IntoIterator<Item = FormulaId>) -> FormulaId {
        self.junction(children, false)
    }

    pub fn or(&mut self, children: impl IntoIterator<Item = FormulaId>) -> FormulaId {
        self.junction(children, true)
    }

    pub fn and2(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        self.and([a, b])
    }

    pub fn or2(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        self.or([a, b])
    }

    pub fn implies(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        let na = self.not(a);
        self.or([na, b])
    }

    // `absorbing` is the constant that short-circuits: true for Or, false for And.
    fn junction(&mut self, children: impl IntoIterator<Item = FormulaId>, absorbing: bool) -> FormulaId {
        let mut kept = Vec::new();
        for c in children {
            match self.as_bool(c) {
                Some(b) if b == absorbing => return self.bool(absorbing),
                Some(_) => {}
                None => kept.push(c),
            }
        }
        match kept.len() {
            0 => self.bool(!absorbing),
            1 => kept[0],
            _ if absorbing => self.intern(Node::Or(kept.into())),
            _ => self.intern(Node::And(kept.into())),
        }
    }

    pub fn count(&mut self, mode: CountMode, threshold: u32, var: VarId, body: FormulaId) -> Result<FormulaId> {
        if threshold > self.max_threshold {
            return Err(Error::RangeViolation(format!(
                "counting threshold {threshold} exceeds maximum {}",
                self.max_threshold
            )));
        }
        if mode == CountMode::AtLeast && threshold == 0 {
            return Ok(self.top());
        }
        if self.as_bool(body) == Some(false) {
            return Ok(self.bool(mode.holds(0, threshold as usize)));
        }
        Ok(self.intern(Node::Count { mode, threshold, var, body }))
    }

    /// `∃x φ` as `∃^{≥1} x φ`.
    pub fn exists(&mut self, var: VarId, body: FormulaId) -> FormulaId {
        self.count(CountMode::AtLeast, 1, var, body).expect("threshold 1 is always allowed")
    }

    /// `∀x φ` as `¬∃x ¬φ`.
    pub fn forall(&mut self, var: VarId, body: FormulaId) -> FormulaId {
        let nb = self.not(body);
        let ex = self.exists(var, nb);
        self.not(ex)
    }

    /// Nodes reachable from `f`, children before parents.
    pub fn reachable(&self, f: FormulaId) -> Vec<FormulaId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![(f, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                order.push(id);
                continue;
            }
            if seen[id.index()] {
                continue;
            }
            seen[id.index()] = true;
            stack.push((id, true));
            for &c in self.node(id).children().iter().rev() {
                if !seen[c.index()] {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    pub fn dag_size(&self, f: FormulaId) -> usize {
        self.reachable(f).len()
    }

    /// Size of the tree expansion of `f` (can be exponential in the DAG size).
    pub fn tree_size(&self, f: FormulaId) -> BigUint {
        let mut sizes: FxHashMap<FormulaId, BigUint> = FxHashMap::default();
        for id in self.reachable(f) {
            let mut s = BigUint::one();
            for c in self.node(id).children() {
                s += &sizes[c];
            }
            sizes.insert(id, s);
        }
        sizes.remove(&f).expect("root visited")
    }

    pub fn stats(&self, f: FormulaId) -> FormulaStats {
        FormulaStats {
            qd: self.qdepth(f),
            nvars: self.nvars(f),
            dag_size: self.dag_size(f),
            tree_size: self.tree_size(f).to_string(),
        }
    }

    /// Relation symbols used anywhere below `f`.
    pub fn symbols_used(&self, f: FormulaId) -> BTreeSet<SymId> {
        self.reachable(f)
            .into_iter()
            .filter_map(|id| match self.node(id) {
                Node::Atom(s, _) => Some(*s),
                _ => None,
            })
            .collect()
    }

    /// Simultaneous substitution of free variables (`from[i]` ↦ `to[i]`).
    ///
    /// The targets must not occur bound anywhere in `f`; callers use fresh
    /// names, which makes the substitution capture-free.
    pub fn rename_free(&mut self, f: FormulaId, from: &[VarId], to: &[VarId]) -> FormulaId {
        assert!(from.len() == to.len() && from.len() <= 64, "rename supports up to 64 variables");
        if from.is_empty() {
            return f;
        }
        let mut memo: FxHashMap<(FormulaId, u64), FormulaId> = FxHashMap::default();
        self.rename_rec(f, from, to, u64::MAX >> (64 - from.len()), &mut memo)
    }

    fn rename_rec(
        &mut self,
        f: FormulaId,
        from: &[VarId],
        to: &[VarId],
        active: u64,
        memo: &mut FxHashMap<(FormulaId, u64), FormulaId>,
    ) -> FormulaId {
        // only the active sources that are actually free here matter
        let free = self.free_vars(f);
        let mut live = 0u64;
        for (i, v) in from.iter().enumerate() {
            if active >> i & 1 == 1 && free.binary_search(v).is_ok() {
                live |= 1 << i;
            }
        }
        if live == 0 {
            return f;
        }
        if let Some(&r) = memo.get(&(f, live)) {
            return r;
        }
        let map = |v: VarId| -> VarId {
            from.iter().position(|&s| s == v).filter(|&i| live >> i & 1 == 1).map(|i| to[i]).unwrap_or(v)
        };
        let out = match self.node(f).clone() {
            Node::Bool(_) => f,
            Node::Eq(a, b) => self.eq(map(a), map(b)),
            Node::Atom(s, args) => {
                let args: Vec<VarId> = args.iter().map(|&v| map(v)).collect();
                self.atom(s, &args).expect("arity preserved")
            }
            Node::Not(c) => {
                let c = self.rename_rec(c, from, to, live, memo);
                self.not(c)
            }
            Node::Or(cs) => {
                let cs: Vec<_> = cs.iter().map(|&c| self.rename_rec(c, from, to, live, memo)).collect();
                self.or(cs)
            }
            Node::And(cs) => {
                let cs: Vec<_> = cs.iter().map(|&c| self.rename_rec(c, from, to, live, memo)).collect();
                self.and(cs)
            }
            Node::Count { mode, threshold, var, body } => {
                let mut inner = live;
                if let Some(i) = from.iter().position(|&s| s == var) {
                    inner &= !(1 << i);
                }
                let b = self.rename_rec(body, from, to, inner, memo);
                self.count(mode, threshold, var, b).expect("threshold already accepted")
            }
        };
        memo.insert((f, live), out);
        out
    }

    pub fn to_sexpr(&self, f: FormulaId) -> String {
        print::to_sexpr(self, f)
    }

    pub fn to_sexpr_dag(&self, f: FormulaId) -> String {
        print::to_sexpr_dag(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∃x ∃^{=3}y (E(x,y) ∧ ∃^{=4}x E(y,x))
    fn three_neighbours(s: &mut FormulaStore) -> FormulaId {
        let (x, y) = (s.var("x"), s.var("y"));
        let e = s.sym("E", 2).unwrap();
        let eyx = s.atom(e, &[y, x]).unwrap();
        let inner = s.count(CountMode::Exactly, 4, x, eyx).unwrap();
        let exy = s.atom(e, &[x, y]).unwrap();
        let conj = s.and([exy, inner]);
        let mid = s.count(CountMode::Exactly, 3, y, conj).unwrap();
        s.exists(x, mid)
    }

    #[test]
    fn qdepth_examples() {
        let mut s = FormulaStore::new();
        let (x, y) = (s.var("x"), s.var("y"));
        let eq = s.eq(x, y);
        assert_eq!(s.qdepth(eq), 0);
        let f = three_neighbours(&mut s);
        assert_eq!(s.qdepth(f), 3);
        let xx = s.eq(x, x);
        let c = s.count(CountMode::AtLeast, 1, x, xx).unwrap();
        let n = s.not(c);
        assert_eq!(s.qdepth(n), 1);
    }

    #[test]
    fn nvars_examples() {
        let mut s = FormulaStore::new();
        let f = three_neighbours(&mut s);
        assert_eq!(s.nvars(f), 2);
        assert!(s.is_sentence(f));
        let x = s.var("x");
        let xx = s.eq(x, x);
        assert_eq!(s.nvars(xx), 1);
        let (y, z) = (s.var("y"), s.var("z"));
        let e = s.sym("E", 2).unwrap();
        let exy = s.eq(x, y);
        let ezx = s.atom(e, &[z, x]).unwrap();
        let c = s.count(CountMode::AtLeast, 1, z, ezx).unwrap();
        let f = s.and([exy, c]);
        assert_eq!(s.nvars(f), 3);
        assert_eq!(s.free_vars(f), &[x, y]);
    }

    #[test]
    fn interning_shares_ids() {
        let mut s = FormulaStore::new();
        let a = three_neighbours(&mut s);
        let before = s.len();
        let b = three_neighbours(&mut s);
        assert_eq!(a, b);
        assert_eq!(s.len(), before);
    }

    #[test]
    fn constant_folding() {
        let mut s = FormulaStore::new();
        let x = s.var("x");
        let t = s.top();
        let f = s.bot();
        let xx = s.eq(x, x);
        assert_eq!(s.and([]), t);
        assert_eq!(s.or([]), f);
        assert_eq!(s.and([xx, f]), f);
        assert_eq!(s.or([xx, f]), xx);
        assert_eq!(s.not(t), f);
        assert_eq!(s.count(CountMode::Exactly, 2, x, f).unwrap(), f);
        assert_eq!(s.count(CountMode::Exactly, 0, x, f).unwrap(), t);
        assert_eq!(s.count(CountMode::AtLeast, 0, x, xx).unwrap(), t);
    }

    #[test]
    fn arity_and_threshold_checks() {
        let mut s = FormulaStore::with_max_threshold(3);
        let x = s.var("x");
        let e = s.sym("E", 2).unwrap();
        assert!(s.atom(e, &[x]).is_err());
        assert!(s.sym("E", 1).is_err());
        let xx = s.eq(x, x);
        assert!(s.count(CountMode::AtLeast, 4, x, xx).is_err());
    }

    #[test]
    fn rename_respects_binders() {
        let mut s = FormulaStore::new();
        let (x, y, w) = (s.var("x"), s.var("y"), s.var("w"));
        let e = s.sym("E", 2).unwrap();
        let exy = s.atom(e, &[x, y]).unwrap();
        let bound = s.exists(x, exy); // x bound, y free
        let f = s.and([exy, bound]);
        let g = s.rename_free(f, &[x, y], &[w, w]);
        assert_eq!(s.to_sexpr(g), "(and (atom E w w) (count >= 1 x (atom E x w)))");
        assert_eq!(s.rename_free(f, &[], &[]), f);
    }

    #[test]
    fn tree_size_counts_shared_nodes_repeatedly() {
        let mut s = FormulaStore::new();
        let x = s.var("x");
        let mut f = s.eq(x, x);
        for _ in 0..10 {
            let n = s.not(f);
            f = s.and([f, n]);
        }
        assert!(s.dag_size(f) <= 21);
        assert_eq!(s.tree_size(f), BigUint::from(3070u32));
    }
}
