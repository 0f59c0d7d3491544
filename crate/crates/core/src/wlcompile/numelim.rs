//! Number elimination: an lrec-free FO+C formula, evaluated on structures of
//! one fixed size `s`, becomes a counting formula over the domain sort.
//!
//! Number quantifiers turn into disjunctions over `[0, s]`, `#x φ = κ` into
//! `∃^{=κ} x φ`, `#ι φ = κ` into an exact count over the `s+1` instances of
//! `φ`, and numeric atoms into constants.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use crate::clogic::{CountMode, FormulaId, FormulaStore, VarId};
use crate::error::{Error, Result};
use crate::lrec::{LFormula, NumTerm};

/// Fixed values for number variables.
pub type NumberValues = BTreeMap<String, u64>;

pub struct NumberEliminator<'a> {
    st: &'a mut FormulaStore,
    size: u64,
    prefix: String,
}

impl<'a> NumberEliminator<'a> {
    /// Binders are renamed to `<prefix><depth>`; the prefix must not occur
    /// in names supplied by callers.
    pub fn new(st: &'a mut FormulaStore, size: u64, prefix: &str) -> Self {
        NumberEliminator { st, size, prefix: prefix.into() }
    }

    /// Translates `f` with free domain variables mapped by `dom` and free
    /// number variables fixed by `nums`.
    pub fn eliminate(&mut self, f: &LFormula, dom: &[(String, VarId)], nums: &NumberValues) -> Result<FormulaId> {
        let mut denv: Vec<(String, VarId)> = dom.to_vec();
        let mut nenv: Vec<(String, u64)> = nums.iter().map(|(k, &v)| (k.clone(), v)).collect();
        self.go(f, &mut denv, &mut nenv, 0)
    }

    fn num(&self, t: &NumTerm, nenv: &[(String, u64)]) -> Result<u64> {
        match t {
            NumTerm::Const(c) => Ok(*c),
            NumTerm::Var(v) => nenv
                .iter()
                .rev()
                .find(|(k, _)| k == v)
                .map(|&(_, x)| x)
                .ok_or_else(|| Error::UnboundVariable(v.clone())),
        }
    }

    fn var(denv: &[(String, VarId)], v: &str) -> Result<VarId> {
        denv.iter().rev().find(|(k, _)| k == v).map(|&(_, x)| x).ok_or_else(|| Error::UnboundVariable(v.into()))
    }

    fn bind<T>(
        &mut self,
        v: &str,
        depth: usize,
        denv: &mut Vec<(String, VarId)>,
        f: impl FnOnce(&mut Self, &mut Vec<(String, VarId)>) -> Result<T>,
    ) -> Result<(VarId, T)> {
        let fresh = self.st.var(&format!("{}{depth}", self.prefix));
        denv.push((v.into(), fresh));
        let r = f(self, denv);
        denv.pop();
        Ok((fresh, r?))
    }

    fn go(
        &mut self,
        f: &LFormula,
        denv: &mut Vec<(String, VarId)>,
        nenv: &mut Vec<(String, u64)>,
        depth: usize,
    ) -> Result<FormulaId> {
        Ok(match f {
            LFormula::Bool(b) => self.st.bool(*b),
            LFormula::Eq(a, b) => {
                let (a, b) = (Self::var(denv, a)?, Self::var(denv, b)?);
                self.st.eq(a, b)
            }
            LFormula::Atom(r, args) => {
                let sym = self.st.sym(r, args.len())?;
                let vs = args.iter().map(|a| Self::var(denv, a)).collect::<Result<Vec<_>>>()?;
                self.st.atom(sym, &vs)?
            }
            LFormula::NumRel(r, a, b) => {
                let v = r.holds(self.num(a, nenv)?, self.num(b, nenv)?);
                self.st.bool(v)
            }
            LFormula::NumMin(a) => {
                let v = self.num(a, nenv)? == 0;
                self.st.bool(v)
            }
            LFormula::NumMax(a) => {
                let v = self.num(a, nenv)? == self.size;
                self.st.bool(v)
            }
            LFormula::Not(g) => {
                let g = self.go(g, denv, nenv, depth)?;
                self.st.not(g)
            }
            LFormula::And(gs) | LFormula::Or(gs) => {
                let cs = gs.iter().map(|g| self.go(g, denv, nenv, depth)).collect::<Result<Vec<_>>>()?;
                if matches!(f, LFormula::And(_)) {
                    self.st.and(cs)
                } else {
                    self.st.or(cs)
                }
            }
            LFormula::Exists(v, g) | LFormula::Forall(v, g) => {
                let (x, body) = self.bind(v, depth, denv, |me, denv| me.go(g, denv, nenv, depth + 1))?;
                if matches!(f, LFormula::Exists(..)) {
                    self.st.exists(x, body)
                } else {
                    self.st.forall(x, body)
                }
            }
            LFormula::Count(mode, t, v, g) => {
                let (x, body) = self.bind(v, depth, denv, |me, denv| me.go(g, denv, nenv, depth + 1))?;
                self.st.count(*mode, *t, x, body)?
            }
            LFormula::CountDom(v, g, k) => {
                let want = self.num(k, nenv)?;
                if want > self.size {
                    return Ok(self.st.bot());
                }
                let (x, body) = self.bind(v, depth, denv, |me, denv| me.go(g, denv, nenv, depth + 1))?;
                self.st.count(CountMode::Exactly, want as u32, x, body)?
            }
            LFormula::NumExists(v, g) | LFormula::NumForall(v, g) => {
                let parts = self.instances(v, g, denv, nenv, depth)?;
                if matches!(f, LFormula::NumExists(..)) {
                    self.st.or(parts)
                } else {
                    self.st.and(parts)
                }
            }
            LFormula::CountNum(v, g, k) => {
                let want = self.num(k, nenv)?;
                let parts = self.instances(v, g, denv, nenv, depth)?;
                exactly(self.st, &parts, want as usize)
            }
            LFormula::Lrec(_) => return Err(Error::NestedLrec),
        })
    }

    fn instances(
        &mut self,
        v: &str,
        g: &LFormula,
        denv: &mut Vec<(String, VarId)>,
        nenv: &mut Vec<(String, u64)>,
        depth: usize,
    ) -> Result<Vec<FormulaId>> {
        (0..=self.size)
            .map(|k| {
                nenv.push((v.into(), k));
                let r = self.go(g, denv, nenv, depth);
                nenv.pop();
                r
            })
            .collect()
    }
}

/// Exactly `t` of `parts` hold.
pub fn exactly(st: &mut FormulaStore, parts: &[FormulaId], t: usize) -> FormulaId {
    fn rec(
        st: &mut FormulaStore,
        parts: &[FormulaId],
        t: usize,
        memo: &mut FxHashMap<(usize, usize), FormulaId>,
    ) -> FormulaId {
        if t > parts.len() {
            return st.bot();
        }
        let Some((&head, rest)) = parts.split_first() else {
            return st.top();
        };
        if let Some(&f) = memo.get(&(parts.len(), t)) {
            return f;
        }
        let without = rec(st, rest, t, memo);
        let not_head = st.not(head);
        let skip = st.and2(not_head, without);
        let f = if t == 0 {
            skip
        } else {
            let with = rec(st, rest, t - 1, memo);
            let take = st.and2(head, with);
            st.or2(take, skip)
        };
        memo.insert((parts.len(), t), f);
        f
    }
    rec(st, parts, t, &mut FxHashMap::default())
}
