use std::collections::BTreeMap;

use rustc_hash::{FxHashMap, FxHashSet};

use super::{CountMode, FormulaId, FormulaStore, Node, VarId};
use crate::error::{Error, Result};
use crate::structure::{ElemId, RelStructure};

/// Partial map from variable names to elements.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<String, ElemId>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: &str, value: ElemId) -> Self {
        self.set(var, value);
        self
    }

    pub fn set(&mut self, var: &str, value: ElemId) {
        self.0.insert(var.to_string(), value);
    }

    pub fn get(&self, var: &str) -> Option<ElemId> {
        self.0.get(var).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ElemId)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, ElemId)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (S, ElemId)>>(iter: T) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// Model checker for one structure. The memo table is keyed by node and the
/// values of the node's free variables, so it stays valid across calls and
/// can be reused for many assignments.
pub struct Evaluator<'a> {
    store: &'a FormulaStore,
    structure: &'a RelStructure,
    sym_rel: Vec<Option<usize>>,
    values: Vec<Option<ElemId>>,
    memo: FxHashMap<(u32, u128), bool>,
    use_memo: bool,
    validated: FxHashSet<FormulaId>,
}

impl<'a> Evaluator<'a> {
    pub fn new(store: &'a FormulaStore, structure: &'a RelStructure) -> Self {
        let sym_rel = (0..store.syms.len())
            .map(|i| {
                let (name, arity) = &store.syms[i];
                structure.vocabulary().index_of(name).filter(|&r| structure.relation_at(r).arity() == *arity)
            })
            .collect();
        Evaluator {
            store,
            structure,
            sym_rel,
            values: vec![None; store.var_count()],
            memo: FxHashMap::default(),
            use_memo: true,
            validated: FxHashSet::default(),
        }
    }

    /// Disables memoization (used to cross-check the memoized path).
    pub fn without_memo(mut self) -> Self {
        self.use_memo = false;
        self
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn validate(&mut self, f: FormulaId) -> Result<()> {
        if self.validated.contains(&f) {
            return Ok(());
        }
        for s in self.store.symbols_used(f) {
            if self.sym_rel[s.index()].is_none() {
                let name = self.store.sym_name(s);
                return Err(match self.structure.vocabulary().arity(name) {
                    Some(a) => Error::ArityMismatch(format!(
                        "`{name}` has arity {a} in the structure but {} in the formula",
                        self.store.sym_arity(s)
                    )),
                    None => Error::UnknownSymbol(name.to_string()),
                });
            }
        }
        self.validated.insert(f);
        Ok(())
    }

    pub fn eval(&mut self, f: FormulaId, a: &Assignment) -> Result<bool> {
        let mut binding = Vec::new();
        for &v in self.store.free_vars(f) {
            let name = self.store.var_name(v);
            let value = a.get(name).ok_or_else(|| Error::UnboundVariable(name.to_string()))?;
            binding.push((v, value));
        }
        self.eval_bound(f, &binding)
    }

    /// Evaluates with variables given by id; every free variable of `f` must be bound.
    pub fn eval_bound(&mut self, f: FormulaId, binding: &[(VarId, ElemId)]) -> Result<bool> {
        self.validate(f)?;
        let n = self.structure.size();
        for &(_, value) in binding {
            if value as usize >= n {
                return Err(Error::IdOutOfRange { id: value as u64, size: n });
            }
        }
        if self.values.len() < self.store.var_count() {
            self.values.resize(self.store.var_count(), None);
        }
        self.values.iter_mut().for_each(|v| *v = None);
        for &(v, value) in binding {
            self.values[v.index()] = Some(value);
        }
        if let Some(&v) = self.store.free_vars(f).iter().find(|v| self.values[v.index()].is_none()) {
            return Err(Error::UnboundVariable(self.store.var_name(v).to_string()));
        }
        Ok(self.go(f))
    }

    fn value(&self, v: VarId) -> ElemId {
        self.values[v.index()].expect("free variables are bound before evaluation")
    }

    fn memo_key(&self, f: FormulaId) -> Option<u128> {
        let n = self.structure.size() as u128;
        let mut key: u128 = 0;
        for &v in self.store.free_vars(f) {
            key = key.checked_mul(n)?.checked_add(self.value(v) as u128)?;
        }
        Some(key)
    }

    fn go(&mut self, f: FormulaId) -> bool {
        let store = self.store;
        match store.node(f) {
            Node::Bool(b) => *b,
            Node::Eq(a, b) => self.value(*a) == self.value(*b),
            Node::Atom(s, args) => {
                let rel = self.sym_rel[s.index()].expect("symbols validated");
                let mut tuple = [0 as ElemId; 8];
                if args.len() <= tuple.len() {
                    for (slot, &v) in tuple.iter_mut().zip(args.iter()) {
                        *slot = self.value(v);
                    }
                    self.structure.holds(rel, &tuple[..args.len()])
                } else {
                    let t: Vec<ElemId> = args.iter().map(|&v| self.value(v)).collect();
                    self.structure.holds(rel, &t)
                }
            }
            node => {
                let key = if self.use_memo { self.memo_key(f) } else { None };
                if let Some(k) = key {
                    if let Some(&r) = self.memo.get(&(f.0, k)) {
                        return r;
                    }
                }
                let r = match node {
                    Node::Not(c) => !self.go(*c),
                    Node::Or(cs) => cs.iter().any(|&c| self.go(c)),
                    Node::And(cs) => cs.iter().all(|&c| self.go(c)),
                    Node::Count { mode, threshold, var, body } => self.count(*mode, *threshold as usize, *var, *body),
                    _ => unreachable!("leaf nodes handled above"),
                };
                if let Some(k) = key {
                    self.memo.insert((f.0, k), r);
                }
                r
            }
        }
    }

    fn count(&mut self, mode: CountMode, threshold: usize, var: VarId, body: FormulaId) -> bool {
        let n = self.structure.size();
        let saved = self.values[var.index()];
        let mut hits = 0usize;
        let mut decided = None;
        for e in 0..n {
            self.values[var.index()] = Some(e as ElemId);
            if self.go(body) {
                hits += 1;
            }
            let remaining = n - e - 1;
            decided = match mode {
                CountMode::AtLeast if hits >= threshold => Some(true),
                CountMode::AtLeast if hits + remaining < threshold => Some(false),
                CountMode::Exactly if hits > threshold || hits + remaining < threshold => Some(false),
                CountMode::AtMost if hits > threshold => Some(false),
                _ => None,
            };
            if decided.is_some() {
                break;
            }
        }
        self.values[var.index()] = saved;
        decided.unwrap_or_else(|| mode.holds(hits, threshold))
    }
}

/// One-shot evaluation of `f` on `s` under `a`.
pub fn eval(store: &FormulaStore, s: &RelStructure, f: FormulaId, a: &Assignment) -> Result<bool> {
    Evaluator::new(store, s).eval(f, a)
}

/// Whether the sentence `f` holds in exactly one of `g`, `h`.
pub fn distinguishes(store: &FormulaStore, g: &RelStructure, h: &RelStructure, f: FormulaId) -> Result<bool> {
    if !store.is_sentence(f) {
        let names: Vec<&str> = store.free_vars(f).iter().map(|&v| store.var_name(v)).collect();
        return Err(Error::NotASentence(names.join(", ")));
    }
    let empty = Assignment::new();
    Ok(eval(store, g, f, &empty)? != eval(store, h, f, &empty)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clogic::parse_formula;
    use crate::structure::{DiGraph, Graph};

    fn edge01() -> RelStructure {
        DiGraph::new(2, [(0, 1)]).unwrap().to_structure()
    }

    fn fig1() -> RelStructure {
        DiGraph::new(3, [(0, 1), (0, 0), (0, 2), (2, 2), (2, 0)]).unwrap().to_structure()
    }

    #[test]
    fn out_neighbour_examples() {
        let mut st = FormulaStore::new();
        let f = parse_formula(&mut st, "(count >= 1 y (atom E x y))").unwrap();
        let s = edge01();
        assert!(eval(&st, &s, f, &Assignment::new().with("x", 0)).unwrap());
        assert!(!eval(&st, &s, f, &Assignment::new().with("x", 1)).unwrap());
    }

    #[test]
    fn three_out_neighbours_in_quotient() {
        let mut st = FormulaStore::new();
        let f = parse_formula(&mut st, "(count = 3 y (atom E x y))").unwrap();
        let s = fig1();
        assert!(eval(&st, &s, f, &Assignment::new().with("x", 0)).unwrap());
        assert!(!eval(&st, &s, f, &Assignment::new().with("x", 2)).unwrap());
    }

    #[test]
    fn errors_are_reported() {
        let mut st = FormulaStore::new();
        let f = parse_formula(&mut st, "(atom E x y)").unwrap();
        let s = edge01();
        assert!(matches!(
            eval(&st, &s, f, &Assignment::new().with("x", 0)),
            Err(Error::UnboundVariable(v)) if v == "y"
        ));
        let g = parse_formula(&mut st, "(atom F x)").unwrap();
        assert!(matches!(eval(&st, &s, g, &Assignment::new().with("x", 0)), Err(Error::UnknownSymbol(_))));
        let open = parse_formula(&mut st, "(eq x x)").unwrap();
        assert!(matches!(distinguishes(&st, &s, &s, open), Err(Error::NotASentence(_))));
    }

    #[test]
    fn path_versus_star() {
        let mut st = FormulaStore::new();
        let f = parse_formula(&mut st, "(count >= 1 x (count = 3 y (atom E x y)))").unwrap();
        let p4 = Graph::path(4).to_structure();
        let k13 = Graph::star(3).to_structure();
        assert!(distinguishes(&st, &p4, &k13, f).unwrap());
        assert!(!distinguishes(&st, &p4, &p4, f).unwrap());
        let g = parse_formula(&mut st, "(count >= 1 x (count = 2 y (atom E x y)))").unwrap();
        let c6 = Graph::cycle(6).to_structure();
        let two_c3 = Graph::cycle(3).disjoint_union(&Graph::cycle(3)).to_structure();
        assert!(!distinguishes(&st, &c6, &two_c3, g).unwrap());
    }

    #[test]
    fn shadowing_uses_innermost_binding() {
        // x has an out-neighbour that itself has an out-neighbour; the inner
        // count rebinds x, so the value depends on correct scoping.
        let mut st = FormulaStore::new();
        let f = parse_formula(&mut st, "(count >= 1 y (and (atom E x y) (count >= 1 x (atom E y x))))").unwrap();
        let chain = DiGraph::new(3, [(0, 1), (1, 2)]).unwrap().to_structure();
        assert!(eval(&st, &chain, f, &Assignment::new().with("x", 0)).unwrap());
        assert!(!eval(&st, &chain, f, &Assignment::new().with("x", 1)).unwrap());
    }

    #[test]
    fn memo_is_reused_across_calls() {
        let mut st = FormulaStore::new();
        let f = parse_formula(&mut st, "(count >= 2 y (not (atom E x y)))").unwrap();
        let s = fig1();
        let mut ev = Evaluator::new(&st, &s);
        let a: Vec<bool> = (0..3).map(|v| ev.eval(f, &Assignment::new().with("x", v)).unwrap()).collect();
        assert_eq!(a, vec![false, true, false]);
        assert!(ev.memo_len() > 0);
    }
}
