//! Direct semantics of FO+C and of `lrec` via explicit quotient graphs.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::{decode_number, LFormula, Lrec, NumTerm, MAX_NUMBER_TUPLE, MAX_TUPLE_WIDTH};
use crate::error::{Error, Result};
use crate::structure::{DiGraph, ElemId, RelStructure};
use crate::xfix::{CardinalityCondition, XInstance};

/// Values for domain and number variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TwoSortedAssignment {
    pub domain: BTreeMap<String, ElemId>,
    pub number: BTreeMap<String, u64>,
}

impl TwoSortedAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dom(mut self, v: &str, e: ElemId) -> Self {
        self.domain.insert(v.into(), e);
        self
    }

    pub fn with_num(mut self, v: &str, k: u64) -> Self {
        self.number.insert(v.into(), k);
        self
    }
}

/// The graph on `V(A)^k` contracted along the closure of `φ₌`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    /// Size of the underlying structure.
    pub universe: usize,
    pub width: usize,
    /// Class of every tuple, tuples indexed little-endian in base `universe`.
    pub class_of: Vec<ElemId>,
    /// Members of each class, ascending; classes ordered by least member.
    pub classes: Vec<Vec<usize>>,
    pub graph: DiGraph,
    /// `C(class)`: union of `⟨ī⟩` over members.
    pub labels: Vec<BTreeSet<u64>>,
    /// Whether closing `φ₌` to an equivalence added pairs.
    pub closure_changed: bool,
}

#[derive(Serialize)]
struct QuotientJson<'a> {
    classes: Vec<Vec<Vec<ElemId>>>,
    edges: Vec<(ElemId, ElemId)>,
    #[serde(rename = "C")]
    labels: &'a [BTreeSet<u64>],
    closure_changed: bool,
}

impl QuotientGraph {
    pub fn tuple_index(&self, t: &[ElemId]) -> usize {
        t.iter().rev().fold(0, |acc, &e| acc * self.universe + e as usize)
    }

    pub fn tuple(&self, mut index: usize) -> Vec<ElemId> {
        (0..self.width)
            .map(|_| {
                let e = index % self.universe;
                index /= self.universe;
                e as ElemId
            })
            .collect()
    }

    pub fn class_of_tuple(&self, t: &[ElemId]) -> ElemId {
        self.class_of[self.tuple_index(t)]
    }

    /// The labels as a cardinality condition. Entries above the class count
    /// can never be met and are dropped.
    pub fn condition(&self) -> CardinalityCondition {
        let bound = self.classes.len() as u64;
        let sets = self.labels.iter().map(|s| s.iter().filter(|&&c| c <= bound).map(|&c| c as u32).collect()).collect();
        CardinalityCondition::from_labels(self.classes.len(), sets).expect("one label set per class")
    }

    pub fn to_json(&self) -> String {
        let j = QuotientJson {
            classes: self.classes.iter().map(|c| c.iter().map(|&t| self.tuple(t)).collect()).collect(),
            edges: self.graph.edges().collect(),
            labels: &self.labels,
            closure_changed: self.closure_changed,
        };
        serde_json::to_string(&j).expect("quotient serializes")
    }
}

struct Solved {
    quotient: QuotientGraph,
    x: XInstance,
}

/// Evaluator with a per-structure cache of solved `lrec` instances.
pub struct LrecEvaluator<'s> {
    s: &'s RelStructure,
    n: u64,
    dom: Vec<(String, ElemId)>,
    num: Vec<(String, u64)>,
    solved: FxHashMap<(Lrec, Vec<ElemId>, Vec<u64>), Solved>,
    diagnostics: Vec<String>,
}

impl<'s> LrecEvaluator<'s> {
    pub fn new(s: &'s RelStructure) -> Self {
        LrecEvaluator {
            s,
            n: s.size() as u64,
            dom: Vec::new(),
            num: Vec::new(),
            solved: FxHashMap::default(),
            diagnostics: Vec::new(),
        }
    }

    /// Messages emitted while building quotients.
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn eval(&mut self, f: &LFormula, a: &TwoSortedAssignment) -> Result<bool> {
        let fv = f.free_vars();
        if let Some(v) = fv.domain.iter().find(|v| !a.domain.contains_key(*v)) {
            return Err(Error::UnboundVariable(v.clone()));
        }
        if let Some(v) = fv.number.iter().find(|v| !a.number.contains_key(*v)) {
            return Err(Error::UnboundVariable(v.clone()));
        }
        if let Some(&e) = a.domain.values().find(|&&e| e as u64 >= self.n) {
            return Err(Error::IdOutOfRange { id: e as u64, size: self.s.size() });
        }
        // n+1 is admitted as a count value: `#ι φ` ranges over n+1 numbers
        if let Some(&k) = a.number.values().find(|&&k| k > self.n + 1) {
            return Err(Error::ComponentOutOfRange { value: k, bound: self.n + 1 });
        }
        self.dom = a.domain.iter().map(|(k, &v)| (k.clone(), v)).collect();
        self.num = a.number.iter().map(|(k, &v)| (k.clone(), v)).collect();
        self.go(f)
    }

    /// Builds the quotient of `l` under the assignment.
    pub fn quotient(&mut self, l: &Lrec, a: &TwoSortedAssignment) -> Result<QuotientGraph> {
        self.dom = a.domain.iter().map(|(k, &v)| (k.clone(), v)).collect();
        self.num = a.number.iter().map(|(k, &v)| (k.clone(), v)).collect();
        self.build_quotient(l)
    }

    fn dom_val(&self, v: &str) -> Result<ElemId> {
        self.dom.iter().rev().find(|(k, _)| k == v).map(|&(_, e)| e).ok_or_else(|| Error::UnboundVariable(v.into()))
    }

    fn num_val(&self, t: &NumTerm) -> Result<u64> {
        match t {
            NumTerm::Const(c) if *c > self.n + 1 => Err(Error::ComponentOutOfRange { value: *c, bound: self.n }),
            NumTerm::Const(c) => Ok(*c),
            NumTerm::Var(v) => self
                .num
                .iter()
                .rev()
                .find(|(k, _)| k == v)
                .map(|&(_, e)| e)
                .ok_or_else(|| Error::UnboundVariable(v.clone())),
        }
    }

    fn with_dom<T>(&mut self, v: &str, e: ElemId, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        self.dom.push((v.into(), e));
        let r = f(self);
        self.dom.pop();
        r
    }

    fn with_num<T>(&mut self, v: &str, k: u64, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        self.num.push((v.into(), k));
        let r = f(self);
        self.num.pop();
        r
    }

    fn count_dom(&mut self, v: &str, body: &LFormula) -> Result<usize> {
        let mut c = 0;
        for e in 0..self.s.size() as ElemId {
            if self.with_dom(v, e, |me| me.go(body))? {
                c += 1;
            }
        }
        Ok(c)
    }

    fn count_num(&mut self, v: &str, body: &LFormula) -> Result<u64> {
        let mut c = 0;
        for k in 0..=self.n {
            if self.with_num(v, k, |me| me.go(body))? {
                c += 1;
            }
        }
        Ok(c)
    }

    fn go(&mut self, f: &LFormula) -> Result<bool> {
        Ok(match f {
            LFormula::Bool(b) => *b,
            LFormula::Eq(a, b) => self.dom_val(a)? == self.dom_val(b)?,
            LFormula::Atom(r, args) => {
                let idx = self.s.vocabulary().index_of(r).ok_or_else(|| Error::UnknownSymbol(r.clone()))?;
                let arity = self.s.relation_at(idx).arity();
                if arity != args.len() {
                    return Err(Error::ArityMismatch(format!("{r} has arity {arity}, used with {}", args.len())));
                }
                let t = args.iter().map(|a| self.dom_val(a)).collect::<Result<Vec<_>>>()?;
                self.s.holds(idx, &t)
            }
            LFormula::NumRel(r, a, b) => r.holds(self.num_val(a)?, self.num_val(b)?),
            LFormula::NumMin(a) => self.num_val(a)? == 0,
            LFormula::NumMax(a) => self.num_val(a)? == self.n,
            LFormula::Not(g) => !self.go(g)?,
            LFormula::And(gs) => {
                for g in gs {
                    if !self.go(g)? {
                        return Ok(false);
                    }
                }
                true
            }
            LFormula::Or(gs) => {
                for g in gs {
                    if self.go(g)? {
                        return Ok(true);
                    }
                }
                false
            }
            LFormula::Exists(v, g) => {
                for e in 0..self.s.size() as ElemId {
                    if self.with_dom(v, e, |me| me.go(g))? {
                        return Ok(true);
                    }
                }
                false
            }
            LFormula::Forall(v, g) => {
                for e in 0..self.s.size() as ElemId {
                    if !self.with_dom(v, e, |me| me.go(g))? {
                        return Ok(false);
                    }
                }
                true
            }
            LFormula::NumExists(v, g) => {
                for k in 0..=self.n {
                    if self.with_num(v, k, |me| me.go(g))? {
                        return Ok(true);
                    }
                }
                false
            }
            LFormula::NumForall(v, g) => {
                for k in 0..=self.n {
                    if !self.with_num(v, k, |me| me.go(g))? {
                        return Ok(false);
                    }
                }
                true
            }
            LFormula::Count(mode, t, v, g) => mode.holds(self.count_dom(v, g)?, *t as usize),
            LFormula::CountDom(v, g, k) => {
                let want = self.num_val(k)?;
                self.count_dom(v, g)? as u64 == want
            }
            LFormula::CountNum(v, g, k) => {
                let want = self.num_val(k)?;
                self.count_num(v, g)? == want
            }
            LFormula::Lrec(l) => self.eval_lrec_node(l)?,
        })
    }

    fn eval_lrec_node(&mut self, l: &Lrec) -> Result<bool> {
        let kappa = l.kappa.iter().map(|t| self.num_val(t)).collect::<Result<Vec<_>>>()?;
        let resource = decode_number(&kappa, self.n)?;
        if resource == 0 {
            return Ok(false);
        }
        let x = l.x.iter().map(|v| self.dom_val(v)).collect::<Result<Vec<_>>>()?;
        let key = self.lrec_key(l)?;
        if !self.solved.contains_key(&key) {
            let quotient = self.build_quotient(l)?;
            let inst = XInstance::new(quotient.graph.clone(), quotient.condition())?;
            self.solved.insert(key.clone(), Solved { quotient, x: inst });
        }
        let solved = self.solved.get_mut(&key).expect("inserted above");
        let class = solved.quotient.class_of_tuple(&x);
        let i = i64::try_from(resource).map_err(|_| Error::Overflow(format!("resource {resource}")))?;
        solved.x.compute_x(class, i)
    }

    /// An lrec node together with the values of its parameters.
    fn lrec_key(&self, l: &Lrec) -> Result<(Lrec, Vec<ElemId>, Vec<u64>)> {
        let mut dom = BTreeSet::new();
        let mut num = BTreeSet::new();
        for g in [&l.eq, &l.edge] {
            let fv = g.free_vars();
            dom.extend(fv.domain.into_iter().filter(|v| !l.y1.contains(v) && !l.y2.contains(v)));
            num.extend(fv.number);
        }
        let fv = l.card.free_vars();
        dom.extend(fv.domain.into_iter().filter(|v| !l.y1.contains(v)));
        num.extend(fv.number.into_iter().filter(|v| !l.iota.contains(v)));
        let d = dom.iter().map(|v| self.dom_val(v)).collect::<Result<_>>()?;
        let n = num.iter().map(|v| self.num_val(&NumTerm::Var(v.clone()))).collect::<Result<_>>()?;
        Ok((l.clone(), d, n))
    }

    fn build_quotient(&mut self, l: &Lrec) -> Result<QuotientGraph> {
        let k = l.width();
        if k > MAX_TUPLE_WIDTH {
            return Err(Error::UnsupportedDimension(k));
        }
        if l.iota.len() > MAX_NUMBER_TUPLE {
            return Err(Error::UnsupportedDimension(l.iota.len()));
        }
        let size = self.s.size();
        let count = size
            .checked_pow(k as u32)
            .filter(|&c| c <= 1 << 16)
            .ok_or_else(|| Error::SizeExceeded(format!("{size}^{k} tuples")))?;
        let tuple = |mut idx: usize| -> Vec<ElemId> {
            (0..k)
                .map(|_| {
                    let e = idx % size;
                    idx /= size;
                    e as ElemId
                })
                .collect()
        };
        let tuples: Vec<Vec<ElemId>> = (0..count).map(tuple).collect();

        let mut eq = vec![false; count * count];
        let mut edge = vec![false; count * count];
        for a in 0..count {
            for b in 0..count {
                let (e, q) = self.with_pair(l, &tuples[a], &tuples[b], |me| Ok((me.go(&l.edge)?, me.go(&l.eq)?)))?;
                edge[a * count + b] = e;
                eq[a * count + b] = q;
            }
        }

        let mut parent: Vec<usize> = (0..count).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for a in 0..count {
            for b in 0..count {
                if eq[a * count + b] {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut class_of = vec![0 as ElemId; count];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut rep_class = FxHashMap::default();
        for (a, slot) in class_of.iter_mut().enumerate() {
            let r = find(&mut parent, a);
            let c = *rep_class.entry(r).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[c].push(a);
            *slot = c as ElemId;
        }
        let closure_changed = (0..count)
            .flat_map(|a| (0..count).map(move |b| (a, b)))
            .any(|(a, b)| class_of[a] == class_of[b] && !eq[a * count + b]);
        if closure_changed {
            self.diagnostics.push("the equality formula is not an equivalence; its closure was used".into());
        }

        let mut qedges = BTreeSet::new();
        for a in 0..count {
            for b in 0..count {
                if edge[a * count + b] {
                    qedges.insert((class_of[a], class_of[b]));
                }
            }
        }
        let graph = DiGraph::new(classes.len(), qedges)?;

        let m = l.iota.len();
        let combos =
            (self.n + 1).checked_pow(m as u32).ok_or_else(|| Error::Overflow(format!("(n+1)^{m} number tuples")))?;
        let mut labels = vec![BTreeSet::new(); classes.len()];
        for (a, t) in tuples.iter().enumerate() {
            for code in 0..combos {
                let mut digits = Vec::with_capacity(m);
                let mut c = code;
                for _ in 0..m {
                    digits.push(c % (self.n + 1));
                    c /= self.n + 1;
                }
                let holds = self.with_tuple(&l.y1, t, |me| {
                    let n0 = me.num.len();
                    me.num.extend(l.iota.iter().cloned().zip(digits.iter().copied()));
                    let r = me.go(&l.card);
                    me.num.truncate(n0);
                    r
                })?;
                if holds {
                    labels[class_of[a] as usize].insert(code);
                }
            }
        }
        Ok(QuotientGraph { universe: size, width: k, class_of, classes, graph, labels, closure_changed })
    }

    fn with_tuple<T>(&mut self, vars: &[String], t: &[ElemId], f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let d0 = self.dom.len();
        self.dom.extend(vars.iter().cloned().zip(t.iter().copied()));
        let r = f(self);
        self.dom.truncate(d0);
        r
    }

    fn with_pair<T>(
        &mut self,
        l: &Lrec,
        a: &[ElemId],
        b: &[ElemId],
        f: impl FnOnce(&mut Self) -> Result<T>,
    ) -> Result<T> {
        let d0 = self.dom.len();
        self.dom.extend(l.y1.iter().cloned().zip(a.iter().copied()));
        self.dom.extend(l.y2.iter().cloned().zip(b.iter().copied()));
        let r = f(self);
        self.dom.truncate(d0);
        r
    }
}

/// Evaluates an lrec-free formula.
pub fn eval_fo_c(s: &RelStructure, f: &LFormula, a: &TwoSortedAssignment) -> Result<bool> {
    if f.contains_lrec() {
        return Err(Error::PreconditionViolated("formula contains an lrec operator".into()));
    }
    LrecEvaluator::new(s).eval(f, a)
}

/// Evaluates a formula with `lrec` operators, nested ones included.
pub fn eval_lrec(s: &RelStructure, f: &LFormula, a: &TwoSortedAssignment) -> Result<bool> {
    LrecEvaluator::new(s).eval(f, a)
}

/// The quotient graph of `l` on `s` under `a`.
pub fn build_quotient(s: &RelStructure, a: &TwoSortedAssignment, l: &Lrec) -> Result<QuotientGraph> {
    LrecEvaluator::new(s).quotient(l, a)
}

#[cfg(test)]
mod tests {
    use super::super::parse_lformula;
    use super::*;
    use crate::fixtures::three_class_quotient;
    use crate::structure::Graph;

    fn assign() -> TwoSortedAssignment {
        TwoSortedAssignment::new()
    }

    #[test]
    fn regularity_formula() {
        let f = parse_lformula("(num-exists i (forall x (count-dom y (atom E x y) i)))").unwrap();
        assert!(eval_fo_c(&Graph::cycle(4).to_structure(), &f, &assign()).unwrap());
        assert!(!eval_fo_c(&Graph::star(3).to_structure(), &f, &assign()).unwrap());
    }

    #[test]
    fn number_sort_size() {
        let s = Graph::path(3).to_structure();
        let f = parse_lformula("(count-num i (num-le i i) k)").unwrap();
        assert!(eval_fo_c(&s, &f, &assign().with_num("k", 4)).unwrap());
        assert!(!eval_fo_c(&s, &f, &assign().with_num("k", 3)).unwrap());
        let g =
            parse_lformula("(num-exists i (num-exists j (and (num-max i) (num-succ j i) (not (num-min j)))))").unwrap();
        assert!(eval_fo_c(&s, &g, &assign()).unwrap());
    }

    #[test]
    fn unbound_and_unknown() {
        let s = Graph::path(2).to_structure();
        let f = parse_lformula("(atom E x y)").unwrap();
        assert_eq!(eval_fo_c(&s, &f, &assign().with_dom("x", 0)), Err(Error::UnboundVariable("y".into())));
        let g = parse_lformula("(atom R x)").unwrap();
        assert!(matches!(eval_fo_c(&s, &g, &assign().with_dom("x", 0)), Err(Error::UnknownSymbol(_))));
        let h = parse_lformula("(num-le k 9)").unwrap();
        assert!(matches!(eval_fo_c(&s, &h, &assign().with_num("k", 0)), Err(Error::ComponentOutOfRange { .. })));
    }

    /// The three-class graph as its own structure, with C coded by unary
    /// relations `C0..C3` and the query encoded as an lrec over identity classes.
    fn quotient_structure() -> RelStructure {
        let (g, c) = three_class_quotient();
        let mut rels = vec![("E".to_string(), 2, g.edges().map(|(u, v)| vec![u, v]).collect())];
        for k in 0..=3u32 {
            let members = (0..3).filter(|&v| c.get(v).contains(&k)).map(|v| vec![v]).collect();
            rels.push((format!("C{k}"), 1, members));
        }
        RelStructure::new(3, rels).unwrap().0
    }

    const FIG_QUERY: &str = "(lrec (y1) (y2) (i) (eq y1 y2) (atom E y1 y2) \
        (or (and (num-eq i 0) (atom C0 y1)) (and (num-eq i 1) (atom C1 y1)) \
            (and (num-eq i 2) (atom C2 y1)) (and (num-eq i 3) (atom C3 y1))) (x) (k))";

    #[test]
    fn three_class_example() {
        let s = quotient_structure();
        let f = parse_lformula(FIG_QUERY).unwrap();
        let at = |v, k| assign().with_dom("x", v).with_num("k", k);
        assert!(eval_lrec(&s, &f, &at(0, 3)).unwrap());
        assert!(!eval_lrec(&s, &f, &at(2, 3)).unwrap());
        assert!(eval_lrec(&s, &f, &at(0, 1)).unwrap());
        assert!(!eval_lrec(&s, &f, &at(0, 0)).unwrap());
    }

    #[test]
    fn contracted_instance_matches_three_class_graph() {
        // six elements, pairs {0,3}, {1,4}, {2,5} collapse to a, b, d
        let (g, c) = three_class_quotient();
        let mut edges = Vec::new();
        for (u, v) in g.edges() {
            edges.push(vec![u, v + 3]);
        }
        let mut rels =
            vec![("E".to_string(), 2, edges), ("S".to_string(), 2, (0..6).map(|a| vec![a, (a + 3) % 6]).collect())];
        for k in 0..=3u32 {
            rels.push((format!("C{k}"), 1, (0..3).filter(|&v| c.get(v).contains(&k)).map(|v| vec![v]).collect()));
        }
        let s = RelStructure::new(6, rels).unwrap().0;
        let f = parse_lformula(&FIG_QUERY.replace("(eq y1 y2)", "(or (eq y1 y2) (atom S y1 y2))")).unwrap();
        let LFormula::Lrec(l) = &f else { unreachable!() };
        let q = build_quotient(&s, &assign(), l).unwrap();
        assert_eq!(q.classes, vec![vec![0, 3], vec![1, 4], vec![2, 5]]);
        assert_eq!(q.graph, g);
        assert!(!q.closure_changed);
        let at = |v, k| assign().with_dom("x", v).with_num("k", k);
        assert!(eval_lrec(&s, &f, &at(3, 3)).unwrap());
        assert!(!eval_lrec(&s, &f, &at(5, 3)).unwrap());
    }

    #[test]
    fn quotient_corner_cases() {
        let s = RelStructure::new(2, [("E".to_string(), 2, vec![vec![0, 1]])]).unwrap().0;
        let parse_l = |t: &str| match parse_lformula(t).unwrap() {
            LFormula::Lrec(l) => *l,
            _ => unreachable!(),
        };
        let l = parse_l("(lrec (y1) (y2) (i) (bool t) (atom E y1 y2) (num-min i) (x) (k))");
        let q = build_quotient(&s, &assign(), &l).unwrap();
        assert_eq!(q.classes.len(), 1);
        assert!(q.graph.has_edge(0, 0));
        assert_eq!(q.labels, vec![BTreeSet::from([0])]);
        let l = parse_l("(lrec (y1) (y2) (i) (eq y1 y2) (bool f) (exists z (atom E y1 z)) (x) (k))");
        let q = build_quotient(&s, &assign(), &l).unwrap();
        assert_eq!(q.graph.edge_count(), 0);
        assert_eq!(q.labels, vec![BTreeSet::from([0, 1, 2]), BTreeSet::new()]);
        let l = parse_l("(lrec (y1) (y2) (i) (atom E y1 y2) (bool f) (bool f) (x) (k))");
        let mut ev = LrecEvaluator::new(&s);
        let q = ev.quotient(&l, &assign()).unwrap();
        assert!(q.closure_changed);
        assert_eq!(ev.diagnostics().len(), 1);
        let wide = parse_l("(lrec (a b c d) (e f g h) (i) (bool t) (bool t) (bool t) (p q r s) (k))");
        assert_eq!(build_quotient(&s, &assign(), &wide), Err(Error::UnsupportedDimension(4)));
    }

    #[test]
    fn pair_tuples() {
        let s = Graph::path(2).to_structure();
        let l = match parse_lformula(
            "(lrec (a b) (c d) (i) (and (eq a c) (eq b d)) (and (eq a c) (atom E b d)) (num-min i) (x y) (k))",
        )
        .unwrap()
        {
            LFormula::Lrec(l) => *l,
            _ => unreachable!(),
        };
        let q = build_quotient(&s, &assign(), &l).unwrap();
        assert_eq!(q.classes.len(), 4);
        assert_eq!(q.graph.edge_count(), 4);
        assert_eq!(q.tuple(q.tuple_index(&[1, 0])), vec![1, 0]);
    }
}
