//! S-expression syntax for counting-logic formulas.
//!
//! Tree form: `(bool t)`, `(eq x y)`, `(atom E x y)`, `(not f)`, `(or f...)`,
//! `(and f...)`, `(count >= 1 x f)`. The reader also accepts the shorthands
//! `(exists x f)`, `(forall x f)` and `(implies f g)`.
//!
//! DAG form, for formulas whose tree expansion is too large to print:
//! `(dag (def 0 f0) (def 1 f1) ... (ref k))`, where each definition may use
//! `(ref j)` for earlier definitions.

use std::fmt::Write;

use rustc_hash::FxHashMap;

use super::{CountMode, FormulaId, FormulaStore, Node};
use crate::error::{Error, Result};
use crate::sexpr::{self, is_identifier, parse_usize, Sexpr};

pub(super) fn to_sexpr(store: &FormulaStore, f: FormulaId) -> String {
    let mut out = String::new();
    write_tree(store, f, &mut out);
    out
}

fn write_tree(store: &FormulaStore, f: FormulaId, out: &mut String) {
    write_node(store, f, out, &mut |c, out| write_tree(store, c, out));
}

fn write_node(store: &FormulaStore, f: FormulaId, out: &mut String, child: &mut dyn FnMut(FormulaId, &mut String)) {
    match store.node(f) {
        Node::Bool(b) => out.push_str(if *b { "(bool t)" } else { "(bool f)" }),
        Node::Eq(a, b) => {
            let _ = write!(out, "(eq {} {})", store.var_name(*a), store.var_name(*b));
        }
        Node::Atom(s, args) => {
            out.push_str("(atom ");
            out.push_str(store.sym_name(*s));
            for &v in args.iter() {
                out.push(' ');
                out.push_str(store.var_name(v));
            }
            out.push(')');
        }
        Node::Not(c) => {
            out.push_str("(not ");
            child(*c, out);
            out.push(')');
        }
        Node::Or(cs) | Node::And(cs) => {
            out.push_str(if matches!(store.node(f), Node::Or(_)) { "(or" } else { "(and" });
            for &c in cs.iter() {
                out.push(' ');
                child(c, out);
            }
            out.push(')');
        }
        Node::Count { mode, threshold, var, body } => {
            let _ = write!(out, "(count {mode} {threshold} {} ", store.var_name(*var));
            child(*body, out);
            out.push(')');
        }
    }
}

fn is_leaf(node: &Node) -> bool {
    matches!(node, Node::Bool(_) | Node::Eq(..) | Node::Atom(..))
}

pub(super) fn to_sexpr_dag(store: &FormulaStore, f: FormulaId) -> String {
    let mut local: FxHashMap<FormulaId, usize> = FxHashMap::default();
    let mut out = String::from("(dag");
    for id in store.reachable(f) {
        if is_leaf(store.node(id)) {
            continue;
        }
        let k = local.len();
        let _ = write!(out, "\n  (def {k} ");
        write_node(store, id, &mut out, &mut |c, out| write_ref(store, &local, c, out));
        out.push(')');
        local.insert(id, k);
    }
    out.push_str("\n  ");
    write_ref(store, &local, f, &mut out);
    out.push(')');
    out
}

fn write_ref(store: &FormulaStore, local: &FxHashMap<FormulaId, usize>, c: FormulaId, out: &mut String) {
    match local.get(&c) {
        Some(k) => {
            let _ = write!(out, "(ref {k})");
        }
        None => write_tree(store, c, out),
    }
}

/// Reads a formula in tree or DAG form into `store`.
pub fn parse_formula(store: &mut FormulaStore, text: &str) -> Result<FormulaId> {
    let e = sexpr::parse(text)?;
    if e.head() == Some("dag") {
        let items = &e.as_list().expect("has head")[1..];
        let (root, defs) = items.split_last().ok_or_else(|| Error::MalformedInput("empty dag".into()))?;
        let mut refs = Vec::with_capacity(defs.len());
        for d in defs {
            let parts = d.as_list().filter(|p| p.len() == 3 && d.head() == Some("def"));
            let parts = parts.ok_or_else(|| Error::MalformedInput(format!("expected (def k f), got `{d}`")))?;
            let k = parse_usize(&parts[1], "definition index")?;
            if k != refs.len() {
                return Err(Error::MalformedInput(format!("definition {k} out of order")));
            }
            let f = build(store, &parts[2], &refs)?;
            refs.push(f);
        }
        build(store, root, &refs)
    } else {
        build(store, &e, &[])
    }
}

fn malformed(e: &Sexpr, what: &str) -> Error {
    Error::MalformedInput(format!("{what}: `{e}`"))
}

fn ident(e: &Sexpr) -> Result<&str> {
    e.as_atom().filter(|a| is_identifier(a)).ok_or_else(|| malformed(e, "expected an identifier"))
}

fn build(store: &mut FormulaStore, e: &Sexpr, refs: &[FormulaId]) -> Result<FormulaId> {
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
    match head {
        "bool" => {
            arity(1)?;
            match args[0].as_atom() {
                Some("t" | "true") => Ok(store.top()),
                Some("f" | "false") => Ok(store.bot()),
                _ => Err(malformed(e, "expected t or f")),
            }
        }
        "eq" => {
            arity(2)?;
            let a = store.var(ident(&args[0])?);
            let b = store.var(ident(&args[1])?);
            Ok(store.eq(a, b))
        }
        "atom" => {
            if args.len() < 2 {
                return Err(malformed(e, "atom needs a symbol and arguments"));
            }
            let name = ident(&args[0])?;
            let sym = store.sym(name, args.len() - 1)?;
            let vars = args[1..].iter().map(|a| ident(a).map(|n| store.var(n))).collect::<Result<Vec<_>>>()?;
            store.atom(sym, &vars)
        }
        "not" => {
            arity(1)?;
            let c = build(store, &args[0], refs)?;
            Ok(store.not(c))
        }
        "or" | "and" => {
            let cs = args.iter().map(|a| build(store, a, refs)).collect::<Result<Vec<_>>>()?;
            Ok(if head == "or" { store.or(cs) } else { store.and(cs) })
        }
        "implies" => {
            arity(2)?;
            let a = build(store, &args[0], refs)?;
            let b = build(store, &args[1], refs)?;
            Ok(store.implies(a, b))
        }
        "count" => {
            arity(4)?;
            let mode = args[0]
                .as_atom()
                .and_then(CountMode::from_symbol)
                .ok_or_else(|| malformed(e, "expected >=, = or <="))?;
            let t = parse_usize(&args[1], "threshold")?;
            let t = u32::try_from(t).map_err(|_| Error::RangeViolation(format!("threshold {t}")))?;
            let v = store.var(ident(&args[2])?);
            let body = build(store, &args[3], refs)?;
            store.count(mode, t, v, body)
        }
        "exists" | "forall" => {
            arity(2)?;
            let v = store.var(ident(&args[0])?);
            let body = build(store, &args[1], refs)?;
            Ok(if head == "exists" { store.exists(v, body) } else { store.forall(v, body) })
        }
        "ref" => {
            arity(1)?;
            let k = parse_usize(&args[0], "reference")?;
            refs.get(k).copied().ok_or_else(|| malformed(e, "reference to an undefined definition"))
        }
        _ => Err(malformed(e, "unknown formula head")),
    }
}
