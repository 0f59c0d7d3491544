//! Two-sorted FO+C with the logspace recursion operator `lrec`.
//!
//! Domain variables range over the structure, number variables over
//! `[0, n]` with `n` the structure size. Sorts are determined by position.

mod eval;

use std::collections::BTreeSet;
use std::fmt;

use crate::clogic::CountMode;
use crate::error::{Error, Result};
use crate::sexpr::{self, is_identifier, parse_usize, Sexpr};

pub use eval::{build_quotient, eval_fo_c, eval_lrec, LrecEvaluator, QuotientGraph, TwoSortedAssignment};

/// Largest tuple width `k` accepted by the evaluator.
pub const MAX_TUPLE_WIDTH: usize = 3;
/// Largest number-tuple length accepted for `ῑ` and `κ̄`.
pub const MAX_NUMBER_TUPLE: usize = 8;

/// A numeric term: a number variable or a literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NumTerm {
    Var(String),
    Const(u64),
}

impl fmt::Display for NumTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumTerm::Var(v) => f.write_str(v),
            NumTerm::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumRel {
    Le,
    Eq,
    /// `S(a, b)`: `b = a + 1`.
    Succ,
}

impl NumRel {
    pub fn holds(self, a: u64, b: u64) -> bool {
        match self {
            NumRel::Le => a <= b,
            NumRel::Eq => a == b,
            NumRel::Succ => b == a + 1,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            NumRel::Le => "num-le",
            NumRel::Eq => "num-eq",
            NumRel::Succ => "num-succ",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LFormula {
    Bool(bool),
    Eq(String, String),
    Atom(String, Vec<String>),
    NumRel(NumRel, NumTerm, NumTerm),
    NumMin(NumTerm),
    NumMax(NumTerm),
    Not(Box<LFormula>),
    And(Vec<LFormula>),
    Or(Vec<LFormula>),
    Exists(String, Box<LFormula>),
    Forall(String, Box<LFormula>),
    NumExists(String, Box<LFormula>),
    NumForall(String, Box<LFormula>),
    /// Counting quantifier with a constant threshold over the domain.
    Count(CountMode, u32, String, Box<LFormula>),
    /// `#x φ = κ`.
    CountDom(String, Box<LFormula>, NumTerm),
    /// `#ι φ = κ`, counting over `[0, n]`.
    CountNum(String, Box<LFormula>, NumTerm),
    Lrec(Box<Lrec>),
}

/// `[lrec_{ȳ₁,ȳ₂,ῑ} φ₌, φ_E, φ_C](x̄, κ̄)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lrec {
    pub y1: Vec<String>,
    pub y2: Vec<String>,
    pub iota: Vec<String>,
    pub eq: LFormula,
    pub edge: LFormula,
    pub card: LFormula,
    pub x: Vec<String>,
    pub kappa: Vec<NumTerm>,
}

impl Lrec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        y1: Vec<String>,
        y2: Vec<String>,
        iota: Vec<String>,
        eq: LFormula,
        edge: LFormula,
        card: LFormula,
        x: Vec<String>,
        kappa: Vec<NumTerm>,
    ) -> Result<Self> {
        let k = y1.len();
        if k == 0 || y2.len() != k || x.len() != k {
            return Err(Error::ArityMismatch(format!(
                "lrec tuples must share one positive width, got {}, {} and {}",
                k,
                y2.len(),
                x.len()
            )));
        }
        if iota.is_empty() || kappa.is_empty() {
            return Err(Error::ArityMismatch("lrec number tuples must be non-empty".into()));
        }
        Ok(Lrec { y1, y2, iota, eq, edge, card, x, kappa })
    }

    pub fn width(&self) -> usize {
        self.y1.len()
    }
}

/// Free variables, split by sort.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreeVars {
    pub domain: BTreeSet<String>,
    pub number: BTreeSet<String>,
}

impl std::ops::Not for LFormula {
    type Output = LFormula;

    fn not(self) -> LFormula {
        LFormula::Not(Box::new(self))
    }
}

impl LFormula {
    pub fn exists(v: &str, f: LFormula) -> Self {
        LFormula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: &str, f: LFormula) -> Self {
        LFormula::Forall(v.into(), Box::new(f))
    }

    pub fn atom(r: &str, args: &[&str]) -> Self {
        LFormula::Atom(r.into(), args.iter().map(|a| a.to_string()).collect())
    }

    pub fn eq(a: &str, b: &str) -> Self {
        LFormula::Eq(a.into(), b.into())
    }

    pub fn lrec(l: Lrec) -> Self {
        LFormula::Lrec(Box::new(l))
    }

    pub fn contains_lrec(&self) -> bool {
        match self {
            LFormula::Lrec(_) => true,
            LFormula::Not(f)
            | LFormula::Exists(_, f)
            | LFormula::Forall(_, f)
            | LFormula::NumExists(_, f)
            | LFormula::NumForall(_, f)
            | LFormula::Count(_, _, _, f)
            | LFormula::CountDom(_, f, _)
            | LFormula::CountNum(_, f, _) => f.contains_lrec(),
            LFormula::And(fs) | LFormula::Or(fs) => fs.iter().any(LFormula::contains_lrec),
            _ => false,
        }
    }

    pub fn free_vars(&self) -> FreeVars {
        let mut out = FreeVars::default();
        self.collect_free(&mut Vec::new(), &mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, dom: &mut Vec<String>, num: &mut Vec<String>, out: &mut FreeVars) {
        let add_dom = |v: &String, dom: &Vec<String>, out: &mut FreeVars| {
            if !dom.contains(v) {
                out.domain.insert(v.clone());
            }
        };
        let add_num = |t: &NumTerm, num: &Vec<String>, out: &mut FreeVars| {
            if let NumTerm::Var(v) = t {
                if !num.contains(v) {
                    out.number.insert(v.clone());
                }
            }
        };
        match self {
            LFormula::Bool(_) => {}
            LFormula::Eq(a, b) => {
                add_dom(a, dom, out);
                add_dom(b, dom, out);
            }
            LFormula::Atom(_, args) => args.iter().for_each(|a| add_dom(a, dom, out)),
            LFormula::NumRel(_, a, b) => {
                add_num(a, num, out);
                add_num(b, num, out);
            }
            LFormula::NumMin(a) | LFormula::NumMax(a) => add_num(a, num, out),
            LFormula::Not(f) => f.collect_free(dom, num, out),
            LFormula::And(fs) | LFormula::Or(fs) => fs.iter().for_each(|f| f.collect_free(dom, num, out)),
            LFormula::Exists(v, f) | LFormula::Forall(v, f) | LFormula::Count(_, _, v, f) => {
                dom.push(v.clone());
                f.collect_free(dom, num, out);
                dom.pop();
            }
            LFormula::NumExists(v, f) | LFormula::NumForall(v, f) => {
                num.push(v.clone());
                f.collect_free(dom, num, out);
                num.pop();
            }
            LFormula::CountDom(v, f, k) => {
                add_num(k, num, out);
                dom.push(v.clone());
                f.collect_free(dom, num, out);
                dom.pop();
            }
            LFormula::CountNum(v, f, k) => {
                add_num(k, num, out);
                num.push(v.clone());
                f.collect_free(dom, num, out);
                num.pop();
            }
            LFormula::Lrec(l) => {
                let d0 = dom.len();
                dom.extend(l.y1.iter().cloned());
                dom.extend(l.y2.iter().cloned());
                l.eq.collect_free(dom, num, out);
                l.edge.collect_free(dom, num, out);
                dom.truncate(d0);
                dom.extend(l.y1.iter().cloned());
                let n0 = num.len();
                num.extend(l.iota.iter().cloned());
                l.card.collect_free(dom, num, out);
                num.truncate(n0);
                dom.truncate(d0);
                l.x.iter().for_each(|v| add_dom(v, dom, out));
                l.kappa.iter().for_each(|t| add_num(t, num, out));
            }
        }
    }

    pub fn to_sexpr(&self) -> String {
        self.to_string()
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[impl fmt::Display]) -> fmt::Result {
    f.write_str("(")?;
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{it}")?;
    }
    f.write_str(")")
}

impl fmt::Display for LFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LFormula::Bool(b) => write!(f, "(bool {})", if *b { "t" } else { "f" }),
            LFormula::Eq(a, b) => write!(f, "(eq {a} {b})"),
            LFormula::Atom(r, args) => {
                write!(f, "(atom {r}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            LFormula::NumRel(r, a, b) => write!(f, "({} {a} {b})", r.keyword()),
            LFormula::NumMin(a) => write!(f, "(num-min {a})"),
            LFormula::NumMax(a) => write!(f, "(num-max {a})"),
            LFormula::Not(g) => write!(f, "(not {g})"),
            LFormula::And(gs) | LFormula::Or(gs) => {
                f.write_str(if matches!(self, LFormula::And(_)) { "(and" } else { "(or" })?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                f.write_str(")")
            }
            LFormula::Exists(v, g) => write!(f, "(exists {v} {g})"),
            LFormula::Forall(v, g) => write!(f, "(forall {v} {g})"),
            LFormula::NumExists(v, g) => write!(f, "(num-exists {v} {g})"),
            LFormula::NumForall(v, g) => write!(f, "(num-forall {v} {g})"),
            LFormula::Count(m, t, v, g) => write!(f, "(count {m} {t} {v} {g})"),
            LFormula::CountDom(v, g, k) => write!(f, "(count-dom {v} {g} {k})"),
            LFormula::CountNum(v, g, k) => write!(f, "(count-num {v} {g} {k})"),
            LFormula::Lrec(l) => {
                f.write_str("(lrec ")?;
                write_list(f, &l.y1)?;
                f.write_str(" ")?;
                write_list(f, &l.y2)?;
                f.write_str(" ")?;
                write_list(f, &l.iota)?;
                write!(f, " {} {} {} ", l.eq, l.edge, l.card)?;
                write_list(f, &l.x)?;
                f.write_str(" ")?;
                write_list(f, &l.kappa)?;
                f.write_str(")")
            }
        }
    }
}

/// `⟨ī⟩ = Σ_j ī_j·(n+1)^(j−1)`, least significant component first.
pub fn decode_number(tuple: &[u64], n: u64) -> Result<u64> {
    let base = n.checked_add(1).ok_or_else(|| Error::Overflow("number base".into()))?;
    let mut acc: u64 = 0;
    for &c in tuple.iter().rev() {
        if c > n {
            return Err(Error::ComponentOutOfRange { value: c, bound: n });
        }
        acc = acc
            .checked_mul(base)
            .and_then(|a| a.checked_add(c))
            .ok_or_else(|| Error::Overflow(format!("number tuple of length {} in base {base}", tuple.len())))?;
    }
    Ok(acc)
}

/// Inverse of [`decode_number`] for a tuple of length `len`.
pub fn encode_number(mut value: u64, n: u64, len: usize) -> Option<Vec<u64>> {
    let base = n + 1;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(value % base);
        value /= base;
    }
    (value == 0).then_some(out)
}

fn malformed(e: &Sexpr, what: &str) -> Error {
    Error::MalformedInput(format!("{what}: `{e}`"))
}

fn ident(e: &Sexpr) -> Result<String> {
    e.as_atom().filter(|a| is_identifier(a)).map(str::to_string).ok_or_else(|| malformed(e, "expected an identifier"))
}

fn num_term(e: &Sexpr) -> Result<NumTerm> {
    match e.as_atom() {
        Some(a) if is_identifier(a) => Ok(NumTerm::Var(a.into())),
        Some(a) => a.parse().map(NumTerm::Const).map_err(|_| malformed(e, "expected a number term")),
        None => Err(malformed(e, "expected a number term")),
    }
}

fn ident_list(e: &Sexpr) -> Result<Vec<String>> {
    e.as_list().ok_or_else(|| malformed(e, "expected a variable list"))?.iter().map(ident).collect()
}

/// Reads the S-expression syntax of [`LFormula`].
pub fn parse_lformula(text: &str) -> Result<LFormula> {
    build(&sexpr::parse(text)?)
}

fn build(e: &Sexpr) -> Result<LFormula> {
    let items = e.as_list().ok_or_else(|| malformed(e, "expected a formula"))?;
    let head = e.head().ok_or_else(|| malformed(e, "expected a formula"))?;
    let args = &items[1..];
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(malformed(e, &format!("`{head}` takes {n} argument(s)")))
        }
    };
    let boxed = |a: &Sexpr| build(a).map(Box::new);
    Ok(match head {
        "bool" => {
            arity(1)?;
            match args[0].as_atom() {
                Some("t" | "true") => LFormula::Bool(true),
                Some("f" | "false") => LFormula::Bool(false),
                _ => return Err(malformed(e, "expected t or f")),
            }
        }
        "eq" => {
            arity(2)?;
            LFormula::Eq(ident(&args[0])?, ident(&args[1])?)
        }
        "atom" => {
            if args.len() < 2 {
                return Err(malformed(e, "atom needs a symbol and arguments"));
            }
            LFormula::Atom(ident(&args[0])?, args[1..].iter().map(ident).collect::<Result<_>>()?)
        }
        "num-le" | "num-eq" | "num-succ" => {
            arity(2)?;
            let r = match head {
                "num-le" => NumRel::Le,
                "num-eq" => NumRel::Eq,
                _ => NumRel::Succ,
            };
            LFormula::NumRel(r, num_term(&args[0])?, num_term(&args[1])?)
        }
        "num-min" | "num-max" => {
            arity(1)?;
            let t = num_term(&args[0])?;
            if head == "num-min" {
                LFormula::NumMin(t)
            } else {
                LFormula::NumMax(t)
            }
        }
        "not" => {
            arity(1)?;
            LFormula::Not(boxed(&args[0])?)
        }
        "and" => LFormula::And(args.iter().map(build).collect::<Result<_>>()?),
        "or" => LFormula::Or(args.iter().map(build).collect::<Result<_>>()?),
        "implies" => {
            arity(2)?;
            LFormula::Or(vec![LFormula::Not(boxed(&args[0])?), build(&args[1])?])
        }
        "exists" | "forall" | "num-exists" | "num-forall" => {
            arity(2)?;
            let v = ident(&args[0])?;
            let b = boxed(&args[1])?;
            match head {
                "exists" => LFormula::Exists(v, b),
                "forall" => LFormula::Forall(v, b),
                "num-exists" => LFormula::NumExists(v, b),
                _ => LFormula::NumForall(v, b),
            }
        }
        "count" => {
            arity(4)?;
            let mode = args[0]
                .as_atom()
                .and_then(CountMode::from_symbol)
                .ok_or_else(|| malformed(e, "expected >=, = or <="))?;
            let t = parse_usize(&args[1], "threshold")?;
            let t = u32::try_from(t).map_err(|_| Error::RangeViolation(format!("threshold {t}")))?;
            LFormula::Count(mode, t, ident(&args[2])?, boxed(&args[3])?)
        }
        "count-dom" | "count-num" => {
            arity(3)?;
            let v = ident(&args[0])?;
            let b = boxed(&args[1])?;
            let k = num_term(&args[2])?;
            if head == "count-dom" {
                LFormula::CountDom(v, b, k)
            } else {
                LFormula::CountNum(v, b, k)
            }
        }
        "lrec" => {
            arity(8)?;
            let kappa = args[7]
                .as_list()
                .ok_or_else(|| malformed(&args[7], "expected a number-term list"))?
                .iter()
                .map(num_term)
                .collect::<Result<_>>()?;
            LFormula::lrec(Lrec::new(
                ident_list(&args[0])?,
                ident_list(&args[1])?,
                ident_list(&args[2])?,
                build(&args[3])?,
                build(&args[4])?,
                build(&args[5])?,
                ident_list(&args[6])?,
                kappa,
            )?)
        }
        other => return Err(malformed(e, &format!("unknown connective `{other}`"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_examples() {
        assert_eq!(decode_number(&[0], 5), Ok(0));
        assert_eq!(decode_number(&[2, 1], 3), Ok(6));
        assert_eq!(decode_number(&[3, 3], 3), Ok(15));
        assert_eq!(decode_number(&[4], 3), Err(Error::ComponentOutOfRange { value: 4, bound: 3 }));
        assert_eq!(encode_number(6, 3, 2), Some(vec![2, 1]));
        assert_eq!(encode_number(16, 3, 2), None);
    }

    #[test]
    fn round_trip() {
        let texts = [
            "(num-exists i (forall x (count-dom y (atom E x y) i)))",
            "(count-num i (num-le i i) 3)",
            "(lrec (y1) (y2) (i) (eq y1 y2) (atom E y1 y2) (and (num-min i) (atom P y1)) (x) (k))",
            "(and (num-succ a b) (num-max b) (not (num-eq a 2)) (count >= 2 x (bool t)))",
        ];
        for t in texts {
            let f = parse_lformula(t).unwrap();
            assert_eq!(f.to_sexpr(), t);
            assert_eq!(parse_lformula(&f.to_sexpr()).unwrap(), f);
        }
    }

    #[test]
    fn free_variables_of_lrec() {
        let f = parse_lformula(
            "(lrec (y1) (y2) (i) (atom R y1 y2 a) (atom E y1 y2) (and (num-le i m) (atom P y1 b)) (x) (k))",
        )
        .unwrap();
        let fv = f.free_vars();
        assert_eq!(fv.domain, ["a", "b", "x"].iter().map(|s| s.to_string()).collect());
        assert_eq!(fv.number, ["k", "m"].iter().map(|s| s.to_string()).collect());
        assert!(f.contains_lrec());
    }

    #[test]
    fn rejections() {
        assert!(matches!(
            parse_lformula("(lrec (y1) (y2 y3) (i) (bool t) (bool t) (bool t) (x) (k))"),
            Err(Error::ArityMismatch(_))
        ));
        assert!(matches!(
            parse_lformula("(lrec (y1) (y2) () (bool t) (bool t) (bool t) (x) (k))"),
            Err(Error::ArityMismatch(_))
        ));
        assert!(parse_lformula("(frob x)").is_err());
        assert!(parse_lformula("(count-dom x (bool t))").is_err());
    }
}
