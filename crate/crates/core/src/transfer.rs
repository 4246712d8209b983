//! Bounded-quantifier propositions, the star transform, a linter for
//! second-order bounds, and evaluation in finite models.
//!
//! ASCII grammar (Unicode aliases `∀ ∃ ∈ ∧ ∨ ¬ → ≤ ≥ ⟨ ⟩` are accepted):
//!
//! ```text
//! prop    := or ("->" prop)?
//! or      := and ("or" and)*
//! and     := unary ("and" unary)*
//! unary   := "not" unary | quant unary | "[" prop "]" | "(" prop ")" | atom
//! quant   := "(" ("forall" | "exists") var ("," var)* "in" term ")"
//! atom    := term (rel term)?            -- a bare term must be an application
//! rel     := "=" | "in" | "<" | ">" | "<=" | ">="
//! term    := product ("+" product)*
//! product := primary ("*" primary)*
//! primary := number | var | ["*"] constant | head "(" term ")"
//!          | "<" term "," term ">" | "(" term ")"
//! ```
//!
//! Variables are single lowercase letters, optionally followed by digits or
//! primes, or any name bound by an enclosing quantifier. Every other name is a
//! constant symbol; a constant may carry a bracketed suffix such as `C[x]`.
//! Numerals, relation symbols and the infix operations are not starred.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value as Json;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransferError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbounded quantifier at offset {0}: every quantifier needs an `in` bound")]
    UnboundedQuantifier(usize),
    #[error("free variable `{0}`")]
    FreeVariable(String),
    #[error("variable `{0}` occurs in its own bound")]
    VariableInBound(String),
    #[error("constant `{0}` is already starred")]
    AlreadyStarred(String),
    #[error("constant `{0}` has no interpretation in the model")]
    UninterpretedConstant(String),
    #[error("bound `{0}` does not evaluate to a finite set")]
    NonSetBound(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("invalid model: {0}")]
    Model(String),
}

type Result<T> = std::result::Result<T, TransferError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const { name: String, starred: bool },
    Num(i64),
    Pair(Box<Term>, Box<Term>),
    /// `head(arg)`: function application, written `head ↾ arg` in the formal
    /// language.
    App(Box<Term>, Box<Term>),
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    In,
    Lt,
    Gt,
    Le,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::In => "in",
            Rel::Lt => "<",
            Rel::Gt => ">",
            Rel::Le => "<=",
            Rel::Ge => ">=",
        }
    }
}

/// `forall` is stored as `not exists not`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Prop {
    Rel(Rel, Term, Term),
    /// A predicate application such as `bounded(S)`.
    Holds(Term),
    Not(Box<Prop>),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
    Implies(Box<Prop>, Box<Prop>),
    Exists { vars: Vec<String>, bound: Term, body: Box<Prop> },
}

impl Prop {
    pub fn forall(vars: Vec<String>, bound: Term, body: Prop) -> Prop {
        Prop::Not(Box::new(Prop::Exists { vars, bound, body: Box::new(Prop::Not(Box::new(body))) }))
    }

    pub fn parse(src: &str) -> Result<Prop> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0, scope: Vec::new(), len: src.len() };
        let prop = p.prop()?;
        if p.pos < p.tokens.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(prop)
    }

    /// Stars every constant symbol.
    pub fn star_transform(&self) -> Result<Prop> {
        self.map_terms(&mut |t| t.star())
    }

    fn map_terms(&self, f: &mut dyn FnMut(&Term) -> Result<Term>) -> Result<Prop> {
        Ok(match self {
            Prop::Rel(r, a, b) => Prop::Rel(*r, f(a)?, f(b)?),
            Prop::Holds(t) => Prop::Holds(f(t)?),
            Prop::Not(p) => Prop::Not(Box::new(p.map_terms(f)?)),
            Prop::And(a, b) => Prop::And(Box::new(a.map_terms(f)?), Box::new(b.map_terms(f)?)),
            Prop::Or(a, b) => Prop::Or(Box::new(a.map_terms(f)?), Box::new(b.map_terms(f)?)),
            Prop::Implies(a, b) => Prop::Implies(Box::new(a.map_terms(f)?), Box::new(b.map_terms(f)?)),
            Prop::Exists { vars, bound, body } => {
                Prop::Exists { vars: vars.clone(), bound: f(bound)?, body: Box::new(body.map_terms(f)?) }
            }
        })
    }

    /// Number of proposition and term nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Prop::Rel(_, a, b) => 1 + a.node_count() + b.node_count(),
            Prop::Holds(t) => 1 + t.node_count(),
            Prop::Not(p) => 1 + p.node_count(),
            Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => 1 + a.node_count() + b.node_count(),
            Prop::Exists { bound, body, .. } => 1 + bound.node_count() + body.node_count(),
        }
    }

    /// Quantifier bounds that range over power sets `P(...)`.
    pub fn lint(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.lint_into(&mut out);
        out
    }

    fn lint_into(&self, out: &mut Vec<String>) {
        match self {
            Prop::Rel(..) | Prop::Holds(_) => {}
            Prop::Not(p) => p.lint_into(out),
            Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => {
                a.lint_into(out);
                b.lint_into(out);
            }
            Prop::Exists { vars, bound, body } => {
                if let Term::App(head, arg) = bound {
                    if matches!(head.as_ref(), Term::Const { name, .. } if name == "P") {
                        out.push(format!(
                            "`{} in {bound}` quantifies over all subsets of {arg}; its starred form ranges over *P({arg}), the internal subsets, which is smaller than P(*{arg}), so transferring this statement does not give the claim about every subset",
                            vars.join(", ")
                        ));
                    }
                }
                body.lint_into(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Prop::Implies(..) => 1,
            Prop::Or(..) => 2,
            Prop::And(..) => 3,
            Prop::Not(inner) if !matches!(inner.as_ref(), Prop::Exists { body, .. } if matches!(body.as_ref(), Prop::Not(_))) => 4,
            _ => 5,
        }
    }

    fn write_min(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "[{self}]")
        } else {
            write!(f, "{self}")
        }
    }

    fn write_body(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_quantifier() {
            Some(_) => write!(f, "{self}"),
            None => write!(f, "[{self}]"),
        }
    }

    fn as_quantifier(&self) -> Option<(&'static str, &[String], &Term, &Prop)> {
        match self {
            Prop::Exists { vars, bound, body } => Some(("exists", vars, bound, body)),
            Prop::Not(inner) => match inner.as_ref() {
                Prop::Exists { vars, bound, body } => match body.as_ref() {
                    Prop::Not(b) => Some(("forall", vars, bound, b)),
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((q, vars, bound, body)) = self.as_quantifier() {
            write!(f, "({q} {} in {bound})", vars.join(", "))?;
            return body.write_body(f);
        }
        match self {
            Prop::Rel(r, a, b) => write!(f, "{a} {} {b}", r.symbol()),
            Prop::Holds(t) => write!(f, "{t}"),
            Prop::Not(p) => {
                f.write_str("not ")?;
                p.write_min(f, 4)
            }
            Prop::Implies(a, b) => {
                a.write_min(f, 2)?;
                f.write_str(" -> ")?;
                b.write_min(f, 1)
            }
            Prop::Or(a, b) => {
                a.write_min(f, 2)?;
                f.write_str(" or ")?;
                b.write_min(f, 3)
            }
            Prop::And(a, b) => {
                a.write_min(f, 3)?;
                f.write_str(" and ")?;
                b.write_min(f, 4)
            }
            Prop::Exists { .. } => unreachable!("handled as a quantifier"),
        }
    }
}

impl std::str::FromStr for Prop {
    type Err = TransferError;

    fn from_str(s: &str) -> Result<Self> {
        Prop::parse(s)
    }
}

impl Term {
    fn star(&self) -> Result<Term> {
        Ok(match self {
            Term::Const { starred: true, name } => return Err(TransferError::AlreadyStarred(name.clone())),
            Term::Const { name, .. } => Term::Const { name: name.clone(), starred: true },
            Term::Var(_) | Term::Num(_) => self.clone(),
            Term::Pair(a, b) => Term::Pair(Box::new(a.star()?), Box::new(b.star()?)),
            Term::App(a, b) => Term::App(Box::new(a.star()?), Box::new(b.star()?)),
            Term::Add(a, b) => Term::Add(Box::new(a.star()?), Box::new(b.star()?)),
            Term::Mul(a, b) => Term::Mul(Box::new(a.star()?), Box::new(b.star()?)),
        })
    }

    fn node_count(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const { .. } | Term::Num(_) => 1,
            Term::Pair(a, b) | Term::App(a, b) | Term::Add(a, b) | Term::Mul(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    fn mentions(&self, var: &str) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::Const { .. } | Term::Num(_) => false,
            Term::Pair(a, b) | Term::App(a, b) | Term::Add(a, b) | Term::Mul(a, b) => a.mentions(var) || b.mentions(var),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Term::Add(..) => 1,
            Term::Mul(..) => 2,
            _ => 3,
        }
    }

    fn write_min(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const { name, starred } => write!(f, "{}{name}", if *starred { "*" } else { "" }),
            Term::Num(n) => write!(f, "{n}"),
            Term::Pair(a, b) => write!(f, "<{a}, {b}>"),
            Term::App(h, a) => write!(f, "{h}({a})"),
            Term::Add(a, b) => {
                a.write_min(f, 1)?;
                f.write_str(" + ")?;
                b.write_min(f, 2)
            }
            Term::Mul(a, b) => {
                a.write_min(f, 2)?;
                f.write_str("*")?;
                b.write_min(f, 3)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Star,
    Plus,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Arrow,
    Num(i64),
    Ident(String),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            '*' => Some(Tok::Star),
            '+' => Some(Tok::Plus),
            '=' => Some(Tok::Eq),
            '⟨' => Some(Tok::Lt),
            '⟩' => Some(Tok::Gt),
            '≤' => Some(Tok::Le),
            '≥' => Some(Tok::Ge),
            '→' | '⇒' => Some(Tok::Arrow),
            '∀' => Some(Tok::Ident("forall".into())),
            '∃' => Some(Tok::Ident("exists".into())),
            '∈' => Some(Tok::Ident("in".into())),
            '∧' => Some(Tok::Ident("and".into())),
            '∨' => Some(Tok::Ident("or".into())),
            '¬' => Some(Tok::Ident("not".into())),
            _ => None,
        };
        if let Some(t) = single {
            chars.next();
            out.push((i, t));
            continue;
        }
        match c {
            '<' | '>' | '-' => {
                chars.next();
                let eq = chars.peek().map(|&(_, n)| n);
                let tok = match (c, eq) {
                    ('<', Some('=')) => Tok::Le,
                    ('>', Some('=')) => Tok::Ge,
                    ('-', Some('>')) => Tok::Arrow,
                    ('<', _) => Tok::Lt,
                    ('>', _) => Tok::Gt,
                    _ => return Err(TransferError::Syntax { offset: i, message: "unexpected `-`".into() }),
                };
                if matches!(tok, Tok::Le | Tok::Ge | Tok::Arrow) {
                    chars.next();
                }
                out.push((i, tok));
            }
            d if d.is_ascii_digit() => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    end = j + 1;
                    chars.next();
                }
                let n = src[i..end]
                    .parse()
                    .map_err(|_| TransferError::Syntax { offset: i, message: "numeral out of range".into() })?;
                out.push((i, Tok::Num(n)));
            }
            a if a.is_alphabetic() || a == '_' => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if !(d.is_alphanumeric() || d == '_' || d == '\'') {
                        break;
                    }
                    end = j + d.len_utf8();
                    chars.next();
                }
                let mut name = src[i..end].to_string();
                if let Some(suffix) = bracket_suffix(&src[end..]) {
                    name.push_str(suffix);
                    for _ in 0..suffix.chars().count() {
                        chars.next();
                    }
                }
                out.push((i, Tok::Ident(name)));
            }
            other => return Err(TransferError::Syntax { offset: i, message: format!("unexpected `{other}`") }),
        }
    }
    Ok(out)
}

/// A `[x]` suffix directly attached to a constant name, as in `C[x]`.
fn bracket_suffix(rest: &str) -> Option<&str> {
    let inner = rest.strip_prefix('[')?;
    let close = inner.find(']')?;
    let body = &inner[..close];
    (!body.is_empty() && body.chars().all(|c| c.is_alphanumeric())).then(|| &rest[..close + 2])
}

const KEYWORDS: [&str; 6] = ["forall", "exists", "in", "and", "or", "not"];

fn looks_like_variable(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_digit() || c == '\'')
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    scope: Vec<String>,
    len: usize,
}

impl Parser {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |(o, _)| *o)
    }

    fn err(&self, msg: &str) -> TransferError {
        TransferError::Syntax { offset: self.offset(), message: msg.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|(_, t)| t)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn prop(&mut self) -> Result<Prop> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            return Ok(Prop::Implies(Box::new(lhs), Box::new(self.prop()?)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Prop> {
        let mut lhs = self.and()?;
        while self.eat_kw("or") {
            lhs = Prop::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Prop> {
        let mut lhs = self.unary()?;
        while self.eat_kw("and") {
            lhs = Prop::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Prop> {
        if self.eat_kw("not") {
            return Ok(Prop::Not(Box::new(self.unary()?)));
        }
        if self.peek() == Some(&Tok::LParen)
            && matches!(self.peek_at(1), Some(Tok::Ident(k)) if k == "forall" || k == "exists")
        {
            return self.quantifier();
        }
        if self.eat(&Tok::LBrack) {
            let p = self.prop()?;
            self.expect(&Tok::RBrack, "`]`")?;
            return Ok(p);
        }
        if self.peek() == Some(&Tok::LParen) {
            let save = self.pos;
            self.pos += 1;
            if let Ok(p) = self.prop() {
                let continues_term = matches!(
                    self.peek_at(1),
                    Some(Tok::Eq | Tok::Lt | Tok::Gt | Tok::Le | Tok::Ge | Tok::Star | Tok::Plus)
                ) || matches!(self.peek_at(1), Some(Tok::Ident(k)) if k == "in");
                if self.peek() == Some(&Tok::RParen) && !continues_term {
                    self.pos += 1;
                    return Ok(p);
                }
            }
            self.pos = save;
        }
        self.atom()
    }

    fn quantifier(&mut self) -> Result<Prop> {
        let start = self.offset();
        self.expect(&Tok::LParen, "`(`")?;
        let universal = self.eat_kw("forall");
        if !universal && !self.eat_kw("exists") {
            return Err(self.err("expected `forall` or `exists`"));
        }
        let mut vars = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Ident(v)) if !KEYWORDS.contains(&v.as_str()) => {
                    vars.push(v.clone());
                    self.pos += 1;
                }
                _ => return Err(self.err("expected a variable")),
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        if !self.eat_kw("in") {
            return Err(if self.peek() == Some(&Tok::RParen) {
                TransferError::UnboundedQuantifier(start)
            } else {
                self.err("expected `in`")
            });
        }
        let depth = self.scope.len();
        self.scope.extend(vars.iter().cloned());
        let bound = self.term();
        self.scope.truncate(depth);
        let bound = bound?;
        if let Some(v) = vars.iter().find(|v| bound.mentions(v)) {
            return Err(TransferError::VariableInBound(v.clone()));
        }
        self.expect(&Tok::RParen, "`)`")?;
        self.scope.extend(vars.iter().cloned());
        let body = self.unary();
        self.scope.truncate(depth);
        let body = body?;
        Ok(if universal {
            Prop::forall(vars, bound, body)
        } else {
            Prop::Exists { vars, bound, body: Box::new(body) }
        })
    }

    fn atom(&mut self) -> Result<Prop> {
        let lhs = self.term()?;
        let rel = match self.peek() {
            Some(Tok::Eq) => Some(Rel::Eq),
            Some(Tok::Lt) => Some(Rel::Lt),
            Some(Tok::Gt) => Some(Rel::Gt),
            Some(Tok::Le) => Some(Rel::Le),
            Some(Tok::Ge) => Some(Rel::Ge),
            Some(Tok::Ident(k)) if k == "in" => Some(Rel::In),
            _ => None,
        };
        match rel {
            Some(r) => {
                self.pos += 1;
                Ok(Prop::Rel(r, lhs, self.term()?))
            }
            None if matches!(lhs, Term::App(..)) => Ok(Prop::Holds(lhs)),
            None => Err(self.err("expected a relation")),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let mut lhs = self.product()?;
        while self.eat(&Tok::Plus) {
            lhs = Term::Add(Box::new(lhs), Box::new(self.product()?));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Term> {
        let mut lhs = self.primary()?;
        while self.eat(&Tok::Star) {
            lhs = Term::Mul(Box::new(lhs), Box::new(self.primary()?));
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Term> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Term::Num(n))
            }
            Some(Tok::Lt) => {
                self.pos += 1;
                let a = self.term()?;
                self.expect(&Tok::Comma, "`,`")?;
                let b = self.term()?;
                self.expect(&Tok::Gt, "`>`")?;
                Ok(Term::Pair(Box::new(a), Box::new(b)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(t)
            }
            Some(Tok::Star) => {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::Ident(name)) if !KEYWORDS.contains(&name.as_str()) && !self.scope.contains(&name) => {
                        self.pos += 1;
                        self.application(Term::Const { name, starred: true })
                    }
                    _ => Err(self.err("expected a constant after `*`")),
                }
            }
            Some(Tok::Ident(name)) if !KEYWORDS.contains(&name.as_str()) => {
                self.pos += 1;
                let head = if self.scope.contains(&name) {
                    Term::Var(name)
                } else if self.peek() != Some(&Tok::LParen) && looks_like_variable(&name) {
                    return Err(TransferError::FreeVariable(name));
                } else {
                    Term::Const { name, starred: false }
                };
                self.application(head)
            }
            _ => Err(self.err("expected a term")),
        }
    }

    fn application(&mut self, head: Term) -> Result<Term> {
        if !self.eat(&Tok::LParen) {
            return Ok(head);
        }
        let arg = self.term()?;
        self.expect(&Tok::RParen, "`)`")?;
        Ok(Term::App(Box::new(head), Box::new(arg)))
    }
}

/// A value in a finite model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Sym(String),
    Pair(Box<Value>, Box<Value>),
    /// Sorted and deduplicated.
    Set(Vec<Value>),
    Func(Vec<(Value, Value)>),
}

impl Value {
    fn set(mut items: Vec<Value>) -> Value {
        items.sort();
        items.dedup();
        Value::Set(items)
    }

    fn from_json(j: &Json) -> Result<Value> {
        match j {
            Json::Number(n) => n.as_i64().map(Value::Int).ok_or_else(|| TransferError::Model(format!("{n} is not an integer"))),
            Json::String(s) => Ok(Value::Sym(s.clone())),
            Json::Array(a) if a.len() == 2 => Ok(Value::Pair(Box::new(Value::from_json(&a[0])?), Box::new(Value::from_json(&a[1])?))),
            other => Err(TransferError::Model(format!("unsupported element {other}"))),
        }
    }
}

/// Interpretations of constant symbols; a starred constant falls back to the
/// interpretation of its unstarred name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub constants: BTreeMap<String, Value>,
    /// Arithmetic for `+` and `*` is modulo this number when set.
    pub modulus: Option<i64>,
}

impl Model {
    /// Reads `{"C": {"set": [...]}, "R": {"relation": [[a, b], ...]},
    /// "f": {"function": [[x, y], ...]}, "modulus": 5}`.
    pub fn from_json(src: &str) -> Result<Model> {
        let root: Json = serde_json::from_str(src).map_err(|e| TransferError::Model(e.to_string()))?;
        let Json::Object(map) = root else { return Err(TransferError::Model("expected a JSON object".into())) };
        let mut model = Model::default();
        for (name, spec) in map {
            if name == "modulus" {
                model.modulus = Some(spec.as_i64().filter(|m| *m > 0).ok_or_else(|| TransferError::Model("modulus must be a positive integer".into()))?);
                continue;
            }
            let Json::Object(spec) = spec else { return Err(TransferError::Model(format!("`{name}` must be an object"))) };
            let items = |key: &str| -> Result<Option<Vec<Value>>> {
                match spec.get(key) {
                    None => Ok(None),
                    Some(Json::Array(a)) => a.iter().map(Value::from_json).collect::<Result<Vec<_>>>().map(Some),
                    Some(_) => Err(TransferError::Model(format!("`{name}.{key}` must be an array"))),
                }
            };
            let value = if let Some(v) = items("set")? {
                Value::set(v)
            } else if let Some(v) = items("relation")? {
                if !v.iter().all(|p| matches!(p, Value::Pair(..))) {
                    return Err(TransferError::Model(format!("`{name}.relation` must contain pairs")));
                }
                Value::set(v)
            } else if let Some(v) = items("function")? {
                let mut pairs = Vec::new();
                for p in v {
                    let Value::Pair(a, b) = p else { return Err(TransferError::Model(format!("`{name}.function` must contain pairs"))) };
                    pairs.push((*a, *b));
                }
                Value::Func(pairs)
            } else {
                return Err(TransferError::Model(format!("`{name}` needs one of set, relation, function")));
            };
            model.constants.insert(name, value);
        }
        Ok(model)
    }

    fn constant(&self, name: &str, starred: bool) -> Result<&Value> {
        let starred_name = format!("*{name}");
        (if starred { self.constants.get(&starred_name) } else { None })
            .or_else(|| self.constants.get(name))
            .ok_or_else(|| TransferError::UninterpretedConstant(if starred { starred_name } else { name.to_string() }))
    }

    fn arith(&self, a: Value, b: Value, op: char) -> Result<Value> {
        let (Value::Int(x), Value::Int(y)) = (&a, &b) else {
            return Err(TransferError::Type(format!("`{op}` needs integers")));
        };
        let r = if op == '+' { x.checked_add(*y) } else { x.checked_mul(*y) }
            .ok_or_else(|| TransferError::Type("integer overflow".into()))?;
        Ok(Value::Int(match self.modulus {
            Some(m) => r.rem_euclid(m),
            None => r,
        }))
    }

    fn term(&self, t: &Term, env: &[(String, Value)]) -> Result<Value> {
        Ok(match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(k, _)| k == v)
                .map(|(_, x)| x.clone())
                .ok_or_else(|| TransferError::FreeVariable(v.clone()))?,
            Term::Const { name, starred } => self.constant(name, *starred)?.clone(),
            Term::Num(n) => Value::Int(match self.modulus {
                Some(m) => n.rem_euclid(m),
                None => *n,
            }),
            Term::Pair(a, b) => Value::Pair(Box::new(self.term(a, env)?), Box::new(self.term(b, env)?)),
            Term::Add(a, b) => self.arith(self.term(a, env)?, self.term(b, env)?, '+')?,
            Term::Mul(a, b) => self.arith(self.term(a, env)?, self.term(b, env)?, '*')?,
            Term::App(h, a) => {
                let arg = self.term(a, env)?;
                match self.term(h, env)? {
                    Value::Func(pairs) => pairs
                        .iter()
                        .find(|(k, _)| *k == arg)
                        .map(|(_, v)| v.clone())
                        .ok_or_else(|| TransferError::Type(format!("{h} is not defined at the argument of {t}")))?,
                    _ => return Err(TransferError::Type(format!("{h} is not a function"))),
                }
            }
        })
    }

    fn holds(&self, p: &Prop, env: &mut Vec<(String, Value)>) -> Result<bool> {
        Ok(match p {
            Prop::Rel(r, a, b) => {
                let (x, y) = (self.term(a, env)?, self.term(b, env)?);
                match r {
                    Rel::Eq => x == y,
                    Rel::In => match y {
                        Value::Set(items) => items.contains(&x),
                        _ => return Err(TransferError::Type(format!("{b} is not a set"))),
                    },
                    _ => {
                        let (Value::Int(x), Value::Int(y)) = (x, y) else {
                            return Err(TransferError::Type(format!("`{}` needs integers", r.symbol())));
                        };
                        match r {
                            Rel::Lt => x < y,
                            Rel::Gt => x > y,
                            Rel::Le => x <= y,
                            _ => x >= y,
                        }
                    }
                }
            }
            Prop::Holds(Term::App(h, a)) => {
                let arg = self.term(a, env)?;
                match self.term(h, env)? {
                    Value::Set(items) => items.contains(&arg),
                    Value::Func(pairs) => pairs.iter().any(|(k, v)| *k == arg && *v != Value::Int(0)),
                    _ => return Err(TransferError::Type(format!("{h} is not a predicate"))),
                }
            }
            Prop::Holds(t) => return Err(TransferError::Type(format!("{t} is not a predicate application"))),
            Prop::Not(q) => !self.holds(q, env)?,
            Prop::And(a, b) => self.holds(a, env)? && self.holds(b, env)?,
            Prop::Or(a, b) => self.holds(a, env)? || self.holds(b, env)?,
            Prop::Implies(a, b) => !self.holds(a, env)? || self.holds(b, env)?,
            Prop::Exists { vars, bound, body } => {
                let Value::Set(domain) = self.term(bound, env)? else {
                    return Err(TransferError::NonSetBound(bound.to_string()));
                };
                self.exists(vars, &domain, body, env)?
            }
        })
    }

    fn exists(&self, vars: &[String], domain: &[Value], body: &Prop, env: &mut Vec<(String, Value)>) -> Result<bool> {
        let Some((first, rest)) = vars.split_first() else { return self.holds(body, env) };
        for v in domain {
            env.push((first.clone(), v.clone()));
            let found = self.exists(rest, domain, body, env);
            env.pop();
            if found? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Tarskian truth of a closed proposition, with quantifiers ranging over
    /// the interpreted finite bounds.
    pub fn eval(&self, p: &Prop) -> Result<bool> {
        self.holds(p, &mut Vec::new())
    }
}
