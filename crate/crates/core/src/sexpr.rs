//! Minimal S-expression reader shared by the formula syntaxes.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

impl Sexpr {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(a) => Some(a),
            Sexpr::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items) => Some(items),
            Sexpr::Atom(_) => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(Sexpr::as_atom)
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(a) => f.write_str(a),
            Sexpr::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub fn parse(text: &str) -> Result<Sexpr> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let expr = parse_at(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::MalformedInput(format!("trailing input after expression: `{}`", tokens[pos])));
    }
    Ok(expr)
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ';' => {
                // comment to end of line
                for d in chars.by_ref() {
                    if d == '\n' {
                        break;
                    }
                }
                flush(&mut cur, &mut out);
            }
            '(' | ')' => {
                flush(&mut cur, &mut out);
                out.push(c.to_string());
            }
            c if c.is_whitespace() => flush(&mut cur, &mut out),
            c => cur.push(c),
        }
    }
    flush(&mut cur, &mut out);
    out
}

fn flush(cur: &mut String, out: &mut Vec<String>) {
    if !cur.is_empty() {
        out.push(std::mem::take(cur));
    }
}

fn parse_at(tokens: &[String], pos: &mut usize) -> Result<Sexpr> {
    // iterative to survive very deep inputs
    let mut stack: Vec<Vec<Sexpr>> = Vec::new();
    loop {
        let tok = tokens.get(*pos).ok_or_else(|| Error::MalformedInput("unexpected end of input".into()))?;
        *pos += 1;
        let done = match tok.as_str() {
            "(" => {
                stack.push(Vec::new());
                None
            }
            ")" => {
                let items = stack.pop().ok_or_else(|| Error::MalformedInput("unbalanced `)`".into()))?;
                Some(Sexpr::List(items))
            }
            a => Some(Sexpr::Atom(a.to_string())),
        };
        if let Some(expr) = done {
            match stack.last_mut() {
                Some(top) => top.push(expr),
                None => return Ok(expr),
            }
        }
    }
}

pub fn parse_usize(s: &Sexpr, what: &str) -> Result<usize> {
    s.as_atom()
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| Error::MalformedInput(format!("expected a natural number for {what}, got `{s}`")))
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_' || c == '%')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '\'' | '%' | '.'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists() {
        let e = parse("(a (b c) ())").unwrap();
        assert_eq!(e.to_string(), "(a (b c) ())");
        assert_eq!(e.head(), Some("a"));
    }

    #[test]
    fn errors() {
        assert!(parse("(a").is_err());
        assert!(parse(")").is_err());
        assert!(parse("(a) b").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(parse("; hi\n(x ; y\n z)").unwrap().to_string(), "(x z)");
    }
}
