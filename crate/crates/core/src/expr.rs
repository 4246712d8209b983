//! Function expressions in the point variable `x` and the index variable `n`.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := atom ("^" exponent)?
//! exponent := "-" exponent | power
//! atom     := number | "x" | "n" | "d" | func "(" expr ")" | "(" expr ")"
//! func     := "exp" | "ln" | "sin" | "cos" | "sqrt" | "abs"
//! number   := digits ("." digits)?
//! ```
//!
//! `d` is the canonical infinitesimal. `^` binds tighter than unary minus and
//! associates to the right. Decimal literals denote exact rationals.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::context::Context;
use crate::decimal::parse_decimal_rational;
use crate::error::{Error, Result};
use crate::functions::{apply, pow_general, Func};
use crate::number::LcNumber;
use crate::value::{rational_to_exponent, LcValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    N,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::N => "n",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Non-negative rational literal.
    Num(BigRational),
    Var(Var),
    /// The canonical infinitesimal `d`.
    Rho,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub x: Option<LcValue>,
    pub n: Option<LcValue>,
}

impl Env {
    pub fn with_x(x: LcValue) -> Self {
        Env { x: Some(x), n: None }
    }

    pub fn with_n(n: LcValue) -> Self {
        Env { x: None, n: Some(n) }
    }

    pub fn set(&mut self, var: Var, value: LcValue) {
        match var {
            Var::X => self.x = Some(value),
            Var::N => self.n = Some(value),
        }
    }

    pub fn get(&self, var: Var) -> Option<&LcValue> {
        match var {
            Var::X => self.x.as_ref(),
            Var::N => self.n.as_ref(),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        Parser::new(src).parse()
    }

    pub fn num(i: i64) -> Expr {
        if i < 0 {
            Expr::Neg(Box::new(Expr::num(-i)))
        } else {
            Expr::Num(BigRational::from_integer(i.into()))
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Num(_) | Expr::Rho => {}
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// The exact value of a variable-free, function-free subexpression.
    pub fn constant_value(&self) -> Option<BigRational> {
        match self {
            Expr::Num(q) => Some(q.clone()),
            Expr::Var(_) | Expr::Rho | Expr::Call(..) => None,
            Expr::Neg(a) => Some(-a.constant_value()?),
            Expr::Add(a, b) => Some(a.constant_value()? + b.constant_value()?),
            Expr::Sub(a, b) => Some(a.constant_value()? - b.constant_value()?),
            Expr::Mul(a, b) => Some(a.constant_value()? * b.constant_value()?),
            Expr::Div(a, b) => {
                let d = b.constant_value()?;
                (!d.is_zero()).then(|| a.constant_value().map(|n| n / d))?
            }
            Expr::Pow(a, b) => {
                let base = a.constant_value()?;
                let e = b.constant_value()?;
                if !e.is_integer() || (base.is_zero() && e.is_negative()) {
                    return None;
                }
                let k = e.to_integer().to_i32()?;
                Some(num_traits::pow::Pow::pow(base, k))
            }
        }
    }

    pub fn eval(&self, env: &Env, ctx: &Context) -> Result<LcValue> {
        self.eval_at(env, ctx, "root")
    }

    fn eval_at(&self, env: &Env, ctx: &Context, path: &str) -> Result<LcValue> {
        let sub = |e: &Expr, step: &str| e.eval_at(env, ctx, &format!("{path}.{step}"));
        let here = |err: Error| match err {
            Error::Eval { .. } => err,
            other => Error::Eval { path: format!("{path} `{self}`"), source: Box::new(other) },
        };
        let value = match self {
            Expr::Num(q) => Ok(LcValue::Series(LcNumber::rational(q.clone(), ctx.backend, ctx.bound()))),
            Expr::Rho => Ok(LcValue::Series(LcNumber::rho(ctx.backend, ctx.bound()))),
            Expr::Var(v) => env.get(*v).cloned().ok_or_else(|| Error::UnboundVariable(v.name().into())),
            Expr::Neg(a) => Ok(sub(a, "operand")?.neg()),
            Expr::Add(a, b) => sub(a, "lhs")?.add(&sub(b, "rhs")?),
            Expr::Sub(a, b) => sub(a, "lhs")?.sub(&sub(b, "rhs")?),
            Expr::Mul(a, b) => sub(a, "lhs")?.mul(&sub(b, "rhs")?),
            Expr::Div(a, b) => sub(a, "lhs")?.div(&sub(b, "rhs")?),
            Expr::Call(f, a) => apply(*f, &sub(a, "arg")?),
            Expr::Pow(a, b) => {
                let base = sub(a, "base")?;
                match b.constant_value().as_ref().and_then(rational_to_exponent) {
                    Some(q) => base.pow_rational(q),
                    None => pow_general(&base, &sub(b, "exponent")?),
                }
            }
        };
        value.map_err(here)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_min(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.write(f)?;
            f.write_str(")")
        } else {
            self.write(f)
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => write_literal(f, q),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Rho => f.write_str("d"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_min(f, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_min(f, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                b.write_min(f, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.write_min(f, 2)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                b.write_min(f, 3)
            }
            Expr::Pow(a, b) => {
                a.write_min(f, 5)?;
                f.write_str("^")?;
                b.write_min(f, 3)
            }
            Expr::Call(func, a) => {
                write!(f, "{func}(")?;
                a.write(f)?;
                f.write_str(")")
            }
        }
    }
}

/// Integers and terminating decimals print as literals; other rationals as a
/// parenthesized quotient.
fn write_literal(f: &mut fmt::Formatter<'_>, q: &BigRational) -> fmt::Result {
    if q.is_integer() {
        return write!(f, "{}", q.numer());
    }
    let mut d = q.denom().clone();
    let mut digits = 0usize;
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut twos = 0usize;
    let mut fives = 0usize;
    while d.is_multiple_of(&two) {
        d /= &two;
        twos += 1;
    }
    while d.is_multiple_of(&five) {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return write!(f, "({}/{})", q.numer(), q.denom());
    }
    digits += twos.max(fives);
    let scaled = (q * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits))).to_integer();
    let s = format!("{:0>width$}", scaled.abs(), width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    write!(f, "{int}.{frac}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err(&self, at: usize, msg: impl Into<String>) -> Error {
        Error::Syntax { offset: at, message: msg.into() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<Expr> {
        if self.peek().is_none() {
            return Err(self.err(self.pos, "empty expression"));
        }
        let e = self.expr()?;
        match self.peek() {
            None => Ok(e),
            Some(c) => Err(self.err(self.pos, format!("unexpected `{c}`"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            Ok(Expr::Pow(Box::new(base), Box::new(self.exponent()?)))
        } else {
            Ok(base)
        }
    }

    fn exponent(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.exponent()?)))
        } else {
            self.power()
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let start = self.pos;
        match self.peek() {
            None => Err(self.err(self.pos, "unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err(self.pos, "expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let rest = &self.src[self.pos..];
                let len = rest.find(|ch: char| !(ch.is_ascii_digit() || ch == '.')).unwrap_or(rest.len());
                let lit = &rest[..len];
                let q = parse_decimal_rational(lit).map_err(|_| self.err(start, format!("bad number `{lit}`")))?;
                self.pos += len;
                Ok(Expr::Num(q))
            }
            Some(c) if c.is_alphabetic() => {
                let rest = &self.src[self.pos..];
                let len = rest.find(|ch: char| !ch.is_alphanumeric() && ch != '_').unwrap_or(rest.len());
                let name = &rest[..len];
                self.pos += len;
                match name {
                    "x" => Ok(Expr::Var(Var::X)),
                    "n" => Ok(Expr::Var(Var::N)),
                    "d" | "ρ" => Ok(Expr::Rho),
                    _ => {
                        let func: Func = name.parse()?;
                        if !self.eat('(') {
                            return Err(self.err(self.pos, format!("expected `(` after `{name}`")));
                        }
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return Err(self.err(self.pos, "expected `)`"));
                        }
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                }
            }
            Some(c) => Err(self.err(self.pos, format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{ExtReal, NumberClass, Sign};
    use crate::Coeff;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn parses_with_precedence() {
        assert_eq!(p("x/(1+x)"), Expr::Div(b(Expr::Var(Var::X)), b(Expr::Add(b(Expr::num(1)), b(Expr::Var(Var::X))))));
        assert_eq!(
            p("sin(n*x)/n"),
            Expr::Div(b(Expr::Call(Func::Sin, b(Expr::Mul(b(Expr::Var(Var::N)), b(Expr::Var(Var::X)))))), b(Expr::Var(Var::N)))
        );
        assert_eq!(p("-x^2"), Expr::Neg(b(Expr::Pow(b(Expr::Var(Var::X)), b(Expr::num(2))))));
        assert_eq!(p("2^3^2").constant_value().unwrap(), BigRational::from_integer(512.into()));
        assert_eq!(p("x^-1"), Expr::Pow(b(Expr::Var(Var::X)), b(Expr::Neg(b(Expr::num(1))))));
        assert_eq!(p("1-2-3").constant_value().unwrap(), BigRational::from_integer((-4).into()));
        assert_eq!(p("0.5"), Expr::Num(BigRational::new(1.into(), 2.into())));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(Expr::parse("x/(1+"), Err(Error::Syntax { offset: 5, message: "unexpected end of input".into() }));
        assert!(matches!(Expr::parse("tan(x)"), Err(Error::UnknownIdentifier(_))));
        assert!(matches!(Expr::parse("x y"), Err(Error::Syntax { offset: 2, .. })));
    }

    #[test]
    fn prints_minimal_parentheses() {
        for s in ["x/(1 + x)", "-x^2", "(-x)^2", "x^-1", "2^3^2", "(2^3)^2", "1 - (2 - 3)", "sin(n*x)/n", "exp(-(x - n)^2)", "x/(y)".replace("y", "n*x").as_str(), "0.25*d", "-(x*n)"] {
            let e = p(s);
            assert_eq!(e.to_string(), s);
            assert_eq!(p(&e.to_string()), e);
        }
    }

    #[test]
    fn evaluates_sample_expressions() {
        let ctx = Context::exact();
        let x = p("1 + d").eval(&Env::default(), &ctx).unwrap();
        let v = p("x/(1+x)").eval(&Env::with_x(x), &ctx).unwrap();
        assert_eq!(v.standard_part().unwrap(), ExtReal::Real(Coeff::Exact(BigRational::new(1.into(), 2.into()))));
        let two = p("2").eval(&Env::default(), &ctx).unwrap();
        assert_eq!(p("x^3").eval(&Env::with_x(two), &ctx).unwrap().standard_part().unwrap(), ExtReal::Real(Coeff::from_int(8, ctx.backend)));
        let nu = p("1/d").eval(&Env::default(), &ctx).unwrap();
        let env = Env { x: Some(nu.clone()), n: Some(nu) };
        let one = p("exp(-(x-n)^2)").eval(&env, &ctx).unwrap();
        assert_eq!(one.standard_part().unwrap(), ExtReal::Real(Coeff::from_int(1, ctx.backend)));
        assert_eq!(p("(4+d^2)/(3+d)").eval(&Env::default(), &ctx).unwrap().classify().unwrap(), NumberClass::FiniteAppreciable(Sign::Positive));
    }

    #[test]
    fn errors_report_the_failing_node() {
        let err = p("1 + ln(x)").eval(&Env::with_x(LcValue::zero()), &Context::exact()).unwrap_err();
        match &err {
            Error::Eval { path, source } => {
                assert_eq!(path, "root.rhs `ln(x)`");
                assert!(source.is_domain());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(p("x").eval(&Env::default(), &Context::exact()).unwrap_err().root(), Error::UnboundVariable(_)));
    }
}
