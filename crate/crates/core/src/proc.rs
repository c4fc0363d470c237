//! Process terms: `nil | a.P | nu a (P) | P + P | P || P | rec x (P) | x`.
//!
//! Concrete grammar, loosest to tightest: `+` then `||` (both
//! left-associative), then the right-associative prefix `a.P`. Restriction
//! and recursion always parenthesize their body.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syncalg::{is_identifier, Action, SyncAlgebra};

/// A recursion variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Abstract syntax of process names. Children are shared, so cloning is cheap.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcTerm {
    Nil,
    Prefix(Action, Arc<ProcTerm>),
    Sum(Arc<ProcTerm>, Arc<ProcTerm>),
    Par(Arc<ProcTerm>, Arc<ProcTerm>),
    Restrict(Action, Arc<ProcTerm>),
    Rec(Var, Arc<ProcTerm>),
    Var(Var),
}

impl ProcTerm {
    pub fn prefix(a: impl Into<Action>, body: ProcTerm) -> ProcTerm {
        ProcTerm::Prefix(a.into(), Arc::new(body))
    }

    pub fn sum(l: ProcTerm, r: ProcTerm) -> ProcTerm {
        ProcTerm::Sum(Arc::new(l), Arc::new(r))
    }

    pub fn par(l: ProcTerm, r: ProcTerm) -> ProcTerm {
        ProcTerm::Par(Arc::new(l), Arc::new(r))
    }

    pub fn restrict(a: impl Into<Action>, body: ProcTerm) -> ProcTerm {
        ProcTerm::Restrict(a.into(), Arc::new(body))
    }

    pub fn rec(x: &str, body: ProcTerm) -> ProcTerm {
        ProcTerm::Rec(Var::new(x), Arc::new(body))
    }

    pub fn var(x: &str) -> ProcTerm {
        ProcTerm::Var(Var::new(x))
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            ProcTerm::Nil | ProcTerm::Var(_) => 1,
            ProcTerm::Prefix(_, p) | ProcTerm::Restrict(_, p) | ProcTerm::Rec(_, p) => 1 + p.size(),
            ProcTerm::Sum(l, r) | ProcTerm::Par(l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Every action mentioned by a prefix or a restriction, in order of
    /// first appearance.
    pub fn actions(&self) -> Vec<Action> {
        fn walk(t: &ProcTerm, out: &mut Vec<Action>) {
            match t {
                ProcTerm::Nil | ProcTerm::Var(_) => {}
                ProcTerm::Prefix(a, p) | ProcTerm::Restrict(a, p) => {
                    if !out.contains(a) {
                        out.push(a.clone());
                    }
                    walk(p, out);
                }
                ProcTerm::Rec(_, p) => walk(p, out),
                ProcTerm::Sum(l, r) | ProcTerm::Par(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        fn walk(t: &ProcTerm, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
            match t {
                ProcTerm::Nil => {}
                ProcTerm::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                ProcTerm::Prefix(_, p) | ProcTerm::Restrict(_, p) => walk(p, bound, out),
                ProcTerm::Rec(x, p) => {
                    bound.push(x.clone());
                    walk(p, bound, out);
                    bound.pop();
                }
                ProcTerm::Sum(l, r) | ProcTerm::Par(l, r) => {
                    walk(l, bound, out);
                    walk(r, bound, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Replaces the free occurrences of `x` by `value`. `value` is expected
    /// to be closed, so no capture can occur.
    pub fn substitute(&self, x: &Var, value: &ProcTerm) -> ProcTerm {
        match self {
            ProcTerm::Nil => ProcTerm::Nil,
            ProcTerm::Var(y) if y == x => value.clone(),
            ProcTerm::Var(_) => self.clone(),
            ProcTerm::Prefix(a, p) => ProcTerm::Prefix(a.clone(), Arc::new(p.substitute(x, value))),
            ProcTerm::Restrict(a, p) => ProcTerm::Restrict(a.clone(), Arc::new(p.substitute(x, value))),
            ProcTerm::Rec(y, _) if y == x => self.clone(),
            ProcTerm::Rec(y, p) => ProcTerm::Rec(y.clone(), Arc::new(p.substitute(x, value))),
            ProcTerm::Sum(l, r) => ProcTerm::Sum(Arc::new(l.substitute(x, value)), Arc::new(r.substitute(x, value))),
            ProcTerm::Par(l, r) => ProcTerm::Par(Arc::new(l.substitute(x, value)), Arc::new(r.substitute(x, value))),
        }
    }

    /// `P(rec x P)` for a term `rec x P`; `None` otherwise.
    pub fn unfold(&self) -> Option<ProcTerm> {
        match self {
            ProcTerm::Rec(x, body) => Some(body.substitute(x, self)),
            _ => None,
        }
    }

    /// The first `rec` binder whose variable occurs free but unguarded in
    /// its body, if any.
    pub fn unguarded_binder(&self) -> Option<Var> {
        match self {
            ProcTerm::Nil | ProcTerm::Var(_) => None,
            ProcTerm::Prefix(_, p) | ProcTerm::Restrict(_, p) => p.unguarded_binder(),
            ProcTerm::Sum(l, r) | ProcTerm::Par(l, r) => l.unguarded_binder().or_else(|| r.unguarded_binder()),
            ProcTerm::Rec(x, p) => {
                if occurs_unguarded(x, p) {
                    Some(x.clone())
                } else {
                    p.unguarded_binder()
                }
            }
        }
    }

    pub fn is_guarded(&self) -> bool {
        self.unguarded_binder().is_none()
    }
}

fn occurs_unguarded(x: &Var, t: &ProcTerm) -> bool {
    match t {
        ProcTerm::Nil | ProcTerm::Prefix(..) => false,
        ProcTerm::Var(y) => y == x,
        ProcTerm::Restrict(_, p) => occurs_unguarded(x, p),
        ProcTerm::Rec(y, _) if y == x => false,
        ProcTerm::Rec(_, p) => occurs_unguarded(x, p),
        ProcTerm::Sum(l, r) | ProcTerm::Par(l, r) => occurs_unguarded(x, l) || occurs_unguarded(x, r),
    }
}

// Precedence levels used by the printer.
const SUM: u8 = 0;
const PAR: u8 = 1;
const PREFIX: u8 = 2;

fn write_term(t: &ProcTerm, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = match t {
        ProcTerm::Sum(..) => ctx > SUM,
        ProcTerm::Par(..) => ctx > PAR,
        _ => false,
    };
    if paren {
        f.write_str("(")?;
    }
    match t {
        ProcTerm::Nil => f.write_str("nil")?,
        ProcTerm::Var(x) => write!(f, "{x}")?,
        ProcTerm::Prefix(a, p) => {
            write!(f, "{a}.")?;
            write_term(p, PREFIX, f)?;
        }
        ProcTerm::Restrict(a, p) => {
            write!(f, "nu {a} (")?;
            write_term(p, SUM, f)?;
            f.write_str(")")?;
        }
        ProcTerm::Rec(x, p) => {
            write!(f, "rec {x} (")?;
            write_term(p, SUM, f)?;
            f.write_str(")")?;
        }
        ProcTerm::Sum(l, r) => {
            write_term(l, SUM, f)?;
            f.write_str(" + ")?;
            write_term(r, PAR, f)?;
        }
        ProcTerm::Par(l, r) => {
            write_term(l, PAR, f)?;
            f.write_str(" || ")?;
            write_term(r, PREFIX, f)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for ProcTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, SUM, f)
    }
}

impl fmt::Debug for ProcTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Minimal-parenthesis rendering; `parse(&format(t))` gives back `t`.
pub fn format(term: &ProcTerm) -> String {
    term.to_string()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("action `{0}` is not in the algebra's alphabet")]
    UnknownAction(String),
    #[error("variable `{0}` is not bound by any enclosing rec")]
    UnboundVariable(String),
    #[error("variable of `rec {0}` occurs unguarded in its body")]
    UnguardedVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nil,
    Rec,
    Nu,
    Dot,
    Plus,
    Bar2,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Nil => "`nil`".into(),
            Tok::Rec => "`rec`".into(),
            Tok::Nu => "`nu`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Bar2 => "`||`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'.' => Tok::Dot,
            b'+' => Tok::Plus,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'|' if bytes.get(i + 1) == Some(&b'|') => {
                i += 1;
                Tok::Bar2
            }
            c if c.is_ascii_alphabetic() => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                match &text[start..=i] {
                    "nil" => Tok::Nil,
                    "rec" => Tok::Rec,
                    "nu" => Tok::Nu,
                    s => Tok::Ident(s.to_string()),
                }
            }
            _ => {
                let found = text[start..].chars().next().unwrap_or(' ');
                return Err(ParseError::Syntax {
                    pos: start,
                    expected: "a term".into(),
                    found: format!("`{found}`"),
                });
            }
        };
        i += 1;
        out.push((start, tok));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    bound: Vec<Var>,
    alphabet: Option<&'a SyncAlgebra>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].1
    }

    fn error(&self, expected: &str) -> ParseError {
        let (pos, tok) = &self.toks[self.pos];
        ParseError::Syntax {
            pos: *pos,
            expected: expected.to_string(),
            found: tok.describe(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(expected)),
        }
    }

    fn action(&self, name: &str) -> Result<Action, ParseError> {
        let a = Action::new(name);
        match self.alphabet {
            Some(alg) if !alg.contains(&a) => Err(ParseError::UnknownAction(name.to_string())),
            _ => Ok(a),
        }
    }

    fn sum(&mut self) -> Result<ProcTerm, ParseError> {
        let mut left = self.par()?;
        while *self.peek() == Tok::Plus {
            self.pos += 1;
            let right = self.par()?;
            left = ProcTerm::sum(left, right);
        }
        Ok(left)
    }

    fn par(&mut self) -> Result<ProcTerm, ParseError> {
        let mut left = self.prefix()?;
        while *self.peek() == Tok::Bar2 {
            self.pos += 1;
            let right = self.prefix()?;
            left = ProcTerm::par(left, right);
        }
        Ok(left)
    }

    fn prefix(&mut self) -> Result<ProcTerm, ParseError> {
        if let (Tok::Ident(name), Tok::Dot) = (self.peek().clone(), self.peek2().clone()) {
            let a = self.action(&name)?;
            self.pos += 2;
            let body = self.prefix()?;
            return Ok(ProcTerm::Prefix(a, Arc::new(body)));
        }
        self.atom()
    }

    fn body(&mut self) -> Result<ProcTerm, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let t = self.sum()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(t)
    }

    fn atom(&mut self) -> Result<ProcTerm, ParseError> {
        match self.peek().clone() {
            Tok::Nil => {
                self.pos += 1;
                Ok(ProcTerm::Nil)
            }
            Tok::LParen => self.body(),
            Tok::Nu => {
                self.pos += 1;
                let name = self.ident("an action name after `nu`")?;
                let a = self.action(&name)?;
                let body = self.body()?;
                Ok(ProcTerm::Restrict(a, Arc::new(body)))
            }
            Tok::Rec => {
                self.pos += 1;
                let name = self.ident("a variable name after `rec`")?;
                let x = Var::new(&name);
                self.bound.push(x.clone());
                let body = self.body();
                self.bound.pop();
                let body = body?;
                if occurs_unguarded(&x, &body) {
                    return Err(ParseError::UnguardedVariable(name));
                }
                Ok(ProcTerm::Rec(x, Arc::new(body)))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                let x = Var::new(&name);
                if !self.bound.contains(&x) {
                    return Err(ParseError::UnboundVariable(name));
                }
                Ok(ProcTerm::Var(x))
            }
            _ => Err(self.error("`nil`, `nu`, `rec`, `(`, an action prefix or a variable")),
        }
    }
}

fn parse_with(text: &str, alphabet: Option<&SyncAlgebra>) -> Result<ProcTerm, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        bound: Vec::new(),
        alphabet,
    };
    let t = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.error("`+`, `||` or end of input"));
    }
    Ok(t)
}

/// Parses a closed, guarded term whose actions all lie in `alg`'s alphabet.
pub fn parse(text: &str, alg: &SyncAlgebra) -> Result<ProcTerm, ParseError> {
    parse_with(text, Some(alg))
}

/// Parses without checking actions against an alphabet (used to discover
/// the alphabet of a term before choosing an algebra).
pub fn parse_term(text: &str) -> Result<ProcTerm, ParseError> {
    parse_with(text, None)
}

/// True if `name` can be used as an action or variable.
pub fn is_name(name: &str) -> bool {
    is_identifier(name) && !matches!(name, "nil" | "rec" | "nu")
}
