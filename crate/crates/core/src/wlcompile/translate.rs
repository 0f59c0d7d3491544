//! One level of `lrec` compiled into a counting formula over the source
//! structure, for tuple width 1.
//!
//! For each structure size `s ≤ n` the compiled recursion formula is
//! instantiated with quotient-aware primitives: equality becomes the
//! closure `ψ≡` of `φ₌`, `E(z₁,z₂)` becomes
//! `∃e₀∃e₁(ψ≡(e₀,z₁) ∧ ψ≡(e₁,z₂) ∧ ψ_E(e₀,e₁))`, `P_c(z)` becomes
//! `∃e₀(ψ≡(e₀,z) ∧ ψ_C(e₀, ī))` with `⟨ī⟩ = c`, and counting quantifiers
//! count classes through their sizes.

use rustc_hash::FxHashMap;

use super::numelim::{NumberEliminator, NumberValues};
use super::{recursion_budget, CompileParams, Compiler, Signature};
use crate::clogic::{CountMode, FormulaId, FormulaStore, VarId};
use crate::error::{Error, Result};
use crate::lrec::{decode_number, encode_number, LFormula, Lrec};

/// Compiler palette used inside the translation; the `%` prefix keeps it
/// apart from user variable names.
const PALETTE: [&str; 3] = ["%x", "%y", "%z"];

struct QuotientSignature<'l> {
    l: &'l Lrec,
    size: u64,
    params: NumberValues,
    /// Free domain parameters of the subformulas, mapped to themselves.
    outer: Vec<(String, VarId)>,
    /// Intermediates of the closure formula.
    mid: [VarId; 3],
    /// Witnesses `e₀`, `e₁` of lifted atoms.
    wit: [VarId; 2],
    /// Bound variable of class-size formulas.
    size_var: VarId,
    levels: u32,
    psi_e: FormulaId,
    psi_c: Vec<FormulaId>,
    closure: FxHashMap<(u32, VarId, VarId), FormulaId>,
    base: FxHashMap<(VarId, VarId), FormulaId>,
    class_size: FxHashMap<(usize, VarId), FormulaId>,
}

impl<'l> QuotientSignature<'l> {
    fn new(st: &mut FormulaStore, l: &'l Lrec, size: u64, params: NumberValues) -> Result<Self> {
        let mid = [st.var("%e0"), st.var("%e1"), st.var("%e2")];
        let wit = [st.var("%w0"), st.var("%w1")];
        let size_var = st.var("%s");
        let mut levels = 0;
        while (1u64 << levels) + 1 < size {
            levels += 1;
        }
        let mut names = std::collections::BTreeSet::new();
        for g in [&l.eq, &l.edge, &l.card] {
            names.extend(g.free_vars().domain);
        }
        let outer: Vec<(String, VarId)> = names.into_iter().map(|v| (v.clone(), st.var(&v))).collect();
        let with = |extra: &[(String, VarId)]| -> Vec<(String, VarId)> { outer.iter().chain(extra).cloned().collect() };
        let dom_e = with(&[(l.y1[0].clone(), wit[0]), (l.y2[0].clone(), wit[1])]);
        let psi_e = NumberEliminator::new(st, size, "%n").eliminate(&l.edge, &dom_e, &params)?;
        let mut psi_c = Vec::new();
        for c in 0..=size {
            let f = match encode_number(c, size, l.iota.len()) {
                Some(digits) => {
                    let mut nums = params.clone();
                    nums.extend(l.iota.iter().cloned().zip(digits));
                    NumberEliminator::new(st, size, "%n").eliminate(
                        &l.card,
                        &with(&[(l.y1[0].clone(), wit[0])]),
                        &nums,
                    )?
                }
                None => st.bot(),
            };
            psi_c.push(f);
        }
        Ok(QuotientSignature {
            l,
            size,
            params,
            outer,
            mid,
            wit,
            size_var,
            levels,
            psi_e,
            psi_c,
            closure: FxHashMap::default(),
            base: FxHashMap::default(),
            class_size: FxHashMap::default(),
        })
    }

    /// `φ₌(a,b) ∨ φ₌(b,a) ∨ a = b`.
    fn symmetric(&mut self, st: &mut FormulaStore, a: VarId, b: VarId) -> Result<FormulaId> {
        if let Some(&f) = self.base.get(&(a, b)) {
            return Ok(f);
        }
        let (y1, y2) = (self.l.y1[0].clone(), self.l.y2[0].clone());
        let mut el = NumberEliminator::new(st, self.size, "%n");
        let with =
            |extra: [(String, VarId); 2]| -> Vec<(String, VarId)> { self.outer.iter().cloned().chain(extra).collect() };
        let ab = el.eliminate(&self.l.eq, &with([(y1.clone(), a), (y2.clone(), b)]), &self.params)?;
        let ba = el.eliminate(&self.l.eq, &with([(y1, b), (y2, a)]), &self.params)?;
        let same = st.eq(a, b);
        let f = st.or([ab, ba, same]);
        self.base.insert((a, b), f);
        Ok(f)
    }

    /// Pairs joined by a symmetric chain of length at most `2^level`.
    fn closure(&mut self, st: &mut FormulaStore, level: u32, a: VarId, b: VarId) -> Result<FormulaId> {
        if level == 0 {
            return self.symmetric(st, a, b);
        }
        if let Some(&f) = self.closure.get(&(level, a, b)) {
            return Ok(f);
        }
        let c = *self.mid.iter().find(|&&v| v != a && v != b).expect("three intermediates");
        let left = self.closure(st, level - 1, a, c)?;
        let right = self.closure(st, level - 1, c, b)?;
        let both = st.and2(left, right);
        let f = st.exists(c, both);
        self.closure.insert((level, a, b), f);
        Ok(f)
    }

    fn equiv(&mut self, st: &mut FormulaStore, a: VarId, b: VarId) -> Result<FormulaId> {
        self.closure(st, self.levels, a, b)
    }

    /// The class of `a` has exactly `j` members.
    fn class_size(&mut self, st: &mut FormulaStore, j: usize, a: VarId) -> Result<FormulaId> {
        if let Some(&f) = self.class_size.get(&(j, a)) {
            return Ok(f);
        }
        let e = self.equiv(st, a, self.size_var)?;
        let f = st.count(CountMode::Exactly, j as u32, self.size_var, e)?;
        self.class_size.insert((j, a), f);
        Ok(f)
    }
}

/// Tuples `(m_1..m_s)` with `j | m_j`, `Σ m_j ≤ s` and `Σ m_j / j = t`.
fn class_profiles(s: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(
        j: usize,
        s: usize,
        left_elems: usize,
        left_classes: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if j > s {
            if left_classes == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for q in 0..=left_classes.min(left_elems / j) {
            cur.push(q * j);
            rec(j + 1, s, left_elems - q * j, left_classes - q, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, s, s, t, &mut Vec::new(), &mut out);
    out
}

impl Signature for QuotientSignature<'_> {
    fn edge(&mut self, st: &mut FormulaStore, a: VarId, b: VarId) -> Result<FormulaId> {
        let [w0, w1] = self.wit;
        let ea = self.equiv(st, w0, a)?;
        let eb = self.equiv(st, w1, b)?;
        let body = st.and([ea, eb, self.psi_e]);
        let inner = st.exists(w1, body);
        Ok(st.exists(w0, inner))
    }

    fn label(&mut self, st: &mut FormulaStore, c: usize, a: VarId) -> Result<FormulaId> {
        let Some(&pc) = self.psi_c.get(c) else { return Ok(st.bot()) };
        let w0 = self.wit[0];
        let e = self.equiv(st, w0, a)?;
        let body = st.and2(e, pc);
        Ok(st.exists(w0, body))
    }

    fn equal(&mut self, st: &mut FormulaStore, a: VarId, b: VarId) -> Result<FormulaId> {
        self.equiv(st, a, b)
    }

    fn count_exact(&mut self, st: &mut FormulaStore, t: usize, var: VarId, body: FormulaId) -> Result<FormulaId> {
        let s = self.size as usize;
        let mut alts = Vec::new();
        for profile in class_profiles(s, t) {
            let mut parts = Vec::with_capacity(s);
            for (k, &m) in profile.iter().enumerate() {
                let sz = self.class_size(st, k + 1, var)?;
                let sized = st.and2(body, sz);
                parts.push(st.count(CountMode::Exactly, m as u32, var, sized)?);
            }
            alts.push(st.and(parts));
        }
        Ok(st.or(alts))
    }
}

/// Free number variables of the subformulas other than `ῑ` are fixed by
/// `params`.
#[derive(Debug, Clone, Default)]
pub struct TranslateOptions {
    pub params: NumberValues,
}

/// A counting formula, free in `x̄` and the domain parameters of the
/// subformulas, equivalent to `[lrec φ₌, φ_E, φ_C](x̄, m̄)` on every
/// structure with between 1 and `n` elements. Components of `m̄` above the
/// structure size make the formula false.
pub fn translate_lrec_once(
    st: &mut FormulaStore,
    f: &LFormula,
    n: usize,
    m: &[u64],
    opts: &TranslateOptions,
) -> Result<FormulaId> {
    let LFormula::Lrec(l) = f else {
        return Err(Error::PreconditionViolated("expected an lrec formula".into()));
    };
    if [&l.eq, &l.edge, &l.card].iter().any(|g| g.contains_lrec()) {
        return Err(Error::NestedLrec);
    }
    if l.width() != 1 {
        return Err(Error::UnsupportedDimension(l.width()));
    }
    if m.len() != l.kappa.len() {
        return Err(Error::ArityMismatch(format!("{} resource values for {} resource terms", m.len(), l.kappa.len())));
    }
    let r = l.kappa.len() as u32;
    let x = st.var(&l.x[0]);
    let size_var = st.var("%s");
    let mut branches = Vec::new();
    for s in 1..=n as u64 {
        let t = st.top();
        let has_size = st.count(CountMode::Exactly, s as u32, size_var, t)?;
        let resource = match decode_number(m, s) {
            Ok(i) => i,
            Err(Error::ComponentOutOfRange { .. }) => continue,
            Err(e) => return Err(e),
        };
        let sig = QuotientSignature::new(st, l, s, opts.params.clone())?;
        let params = CompileParams::with_budget(s as usize, r, recursion_budget(s as usize, r))?;
        let mut comp = Compiler::with_signature(st, params, sig, &PALETTE)?;
        let phi = comp.compile_x(resource as i64)?;
        let main = comp.main_var();
        let phi = st.rename_free(phi, &[main], &[x]);
        branches.push(st.and2(has_size, phi));
    }
    Ok(st.or(branches))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clogic::{eval, Assignment};
    use crate::fixtures::three_class_quotient;
    use crate::lrec::{eval_lrec, parse_lformula, TwoSortedAssignment};
    use crate::structure::RelStructure;

    const QUERY: &str = "(lrec (y1) (y2) (i) (or (eq y1 y2) (atom S y1 y2)) (atom E y1 y2) \
        (or (and (num-eq i 0) (atom C0 y1)) (and (num-eq i 1) (atom C1 y1)) \
            (and (num-eq i 2) (atom C2 y1)) (and (num-eq i 3) (atom C3 y1))) (x) (k))";

    /// The three-class graph on `copies·3` elements; element `v + 3j` is the
    /// j-th copy of vertex `v`, and copies are related by `S` in a chain.
    fn copies(copies: u32) -> RelStructure {
        let (g, c) = three_class_quotient();
        let n = 3 * copies;
        let edges = g.edges().map(|(u, v)| vec![u, v + 3 * (copies - 1)]).collect();
        let same = (0..n.saturating_sub(3)).map(|a| vec![a, a + 3]).collect();
        let mut rels = vec![("E".to_string(), 2, edges), ("S".to_string(), 2, same)];
        for k in 0..=3u32 {
            rels.push((format!("C{k}"), 1, (0..3).filter(|&v| c.get(v).contains(&k)).map(|v| vec![v]).collect()));
        }
        RelStructure::new(n as usize, rels).unwrap().0
    }

    fn agree(s: &RelStructure, n: usize, resources: &[u64]) {
        let f = parse_lformula(QUERY).unwrap();
        for &m in resources {
            let mut st = FormulaStore::new();
            let t = translate_lrec_once(&mut st, &f, n, &[m], &TranslateOptions::default()).unwrap();
            for v in 0..s.size() as u32 {
                let want = eval_lrec(s, &f, &TwoSortedAssignment::new().with_dom("x", v).with_num("k", m)).unwrap();
                let got = eval(&st, s, t, &Assignment::new().with("x", v)).unwrap();
                assert_eq!(got, want, "size {} v={v} m={m}", s.size());
            }
        }
    }

    #[test]
    fn three_class_query() {
        let s = copies(1);
        let f = parse_lformula(QUERY).unwrap();
        let mut st = FormulaStore::new();
        let t = translate_lrec_once(&mut st, &f, 3, &[3], &TranslateOptions::default()).unwrap();
        assert!(eval(&st, &s, t, &Assignment::new().with("x", 0)).unwrap());
        assert!(!eval(&st, &s, t, &Assignment::new().with("x", 2)).unwrap());
        let z = translate_lrec_once(&mut st, &f, 3, &[0], &TranslateOptions::default()).unwrap();
        assert!(!eval(&st, &s, z, &Assignment::new().with("x", 0)).unwrap());
        agree(&s, 3, &[1, 2, 3]);
    }

    #[test]
    fn contracted_classes() {
        agree(&copies(2), 6, &[1, 3, 5]);
    }

    #[test]
    fn rejections() {
        let mut st = FormulaStore::new();
        let f = parse_lformula(QUERY).unwrap();
        let o = TranslateOptions::default();
        assert!(matches!(translate_lrec_once(&mut st, &f, 3, &[1, 2], &o), Err(Error::ArityMismatch(_))));
        let nested = parse_lformula(
            &QUERY.replace("(atom E y1 y2)", &format!("(and (atom E y1 y2) {})", QUERY.replace("(x)", "(y1)"))),
        )
        .unwrap();
        assert_eq!(translate_lrec_once(&mut st, &nested, 3, &[1], &o), Err(Error::NestedLrec));
        let wide = parse_lformula("(lrec (a b) (c d) (i) (bool t) (bool t) (bool t) (x y) (k))").unwrap();
        assert_eq!(translate_lrec_once(&mut st, &wide, 3, &[1], &o), Err(Error::UnsupportedDimension(2)));
    }

    #[test]
    fn profiles() {
        assert_eq!(class_profiles(3, 0), vec![vec![0, 0, 0]]);
        assert_eq!(class_profiles(3, 1), vec![vec![0, 0, 3], vec![0, 2, 0], vec![1, 0, 0]]);
        assert_eq!(class_profiles(3, 3), vec![vec![3, 0, 0]]);
        assert!(class_profiles(3, 4).is_empty());
        assert_eq!(class_profiles(4, 2).len(), 4);
    }
}
