//! Truncated Puiseux series in the canonical infinitesimal ρ.
//!
//! An [`LcNumber`] is a finite sum `Σ cᵢ·ρ^{eᵢ}` with strictly increasing
//! rational exponents, plus an order bound `b` meaning the value is only known
//! modulo `O(ρ^b)`. The bound travels with the value through every operation,
//! so cancellation shows up as a shrinking bound instead of a silently wrong
//! coefficient. The canonical zero has no terms and an exact bound.

use std::cmp::Ordering;
use std::fmt;

use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::coeff::{Backend, Coeff};
use crate::error::{Error, Result};

pub type Exponent = Ratio<i64>;

/// Default order bound for constructors: values are known modulo `O(ρ^16)`.
pub const DEFAULT_ORDER: i64 = 16;

/// Relative precision used when inverting a multi-term series that has no
/// order bound of its own.
const EXACT_INVERSE_CUTOFF: i64 = DEFAULT_ORDER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    /// Known modulo `O(ρ^e)`.
    At(Exponent),
    /// No truncation error.
    Exact,
}

impl Bound {
    pub fn plus(self, e: Exponent) -> Bound {
        match self {
            Bound::At(b) => Bound::At(b + e),
            Bound::Exact => Bound::Exact,
        }
    }

    pub fn finite(self) -> Option<Exponent> {
        match self {
            Bound::At(b) => Some(b),
            Bound::Exact => None,
        }
    }

    fn admits(self, e: Exponent) -> bool {
        match self {
            Bound::At(b) => e < b,
            Bound::Exact => true,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::At(b) => write!(f, "{}", fmt_exponent(*b)),
            Bound::Exact => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Positive,
    /// Sign not determined; only used for oscillating values bounded by an
    /// infinitesimal.
    Indefinite,
}

impl Sign {
    pub fn from_i8(s: i8) -> Sign {
        if s < 0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Positive => Sign::Negative,
            Sign::Indefinite => Sign::Indefinite,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Indefinite, _) | (_, Sign::Indefinite) => Sign::Indefinite,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Negative => "-",
            Sign::Positive => "+",
            Sign::Indefinite => "±",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NumberClass {
    Zero,
    Infinitesimal(Sign),
    FiniteAppreciable(Sign),
    Infinite(Sign),
}

impl NumberClass {
    pub fn is_finite(self) -> bool {
        !matches!(self, NumberClass::Infinite(_))
    }

    /// Zero or infinitesimal.
    pub fn is_negligible(self) -> bool {
        matches!(self, NumberClass::Zero | NumberClass::Infinitesimal(_))
    }
}

impl fmt::Display for NumberClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumberClass::Zero => f.write_str("Zero"),
            NumberClass::Infinitesimal(s) => write!(f, "Infinitesimal({})", s.symbol()),
            NumberClass::FiniteAppreciable(s) => write!(f, "FiniteAppreciable({})", s.symbol()),
            NumberClass::Infinite(s) => write!(f, "Infinite({})", s.symbol()),
        }
    }
}

/// A standard real or a signed infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtReal {
    Real(Coeff),
    PosInf,
    NegInf,
}

impl ExtReal {
    /// Equality with decimal noise tolerance on the real case.
    pub fn same(&self, other: &ExtReal) -> bool {
        match (self, other) {
            (ExtReal::Real(a), ExtReal::Real(b)) => a.sub(b).is_zero(),
            (ExtReal::PosInf, ExtReal::PosInf) | (ExtReal::NegInf, ExtReal::NegInf) => true,
            _ => false,
        }
    }

    /// Equality up to an absolute tolerance on the real case.
    pub fn within(&self, other: &ExtReal, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::Real(a), ExtReal::Real(b)) => a.sub(b).abs().to_f64() <= tol,
            _ => self.same(other),
        }
    }

    pub fn real(&self) -> Option<&Coeff> {
        match self {
            ExtReal::Real(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Real(c) => write!(f, "{c}"),
            ExtReal::PosInf => f.write_str("+inf"),
            ExtReal::NegInf => f.write_str("-inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LcNumber {
    terms: Vec<(Exponent, Coeff)>,
    bound: Bound,
}

impl LcNumber {
    /// Builds a normalized series: sorted, merged, zero-free, truncated.
    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, Coeff)>, bound: Bound) -> Self {
        let mut raw: Vec<(Exponent, Coeff)> =
            terms.into_iter().filter(|(e, _)| bound.admits(*e)).collect();
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Exponent, Coeff)> = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc = lc.add(&c),
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        LcNumber { terms: out, bound }
    }

    pub fn zero() -> Self {
        LcNumber { terms: Vec::new(), bound: Bound::Exact }
    }

    /// `O(ρ^b)`: a value indistinguishable from zero at order `b`.
    pub fn big_o(b: Exponent) -> Self {
        LcNumber { terms: Vec::new(), bound: Bound::At(b) }
    }

    pub fn constant(c: Coeff, bound: Bound) -> Self {
        Self::from_terms([(Exponent::zero(), c)], bound)
    }

    pub fn rational(q: BigRational, backend: Backend, bound: Bound) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self::constant(Coeff::from_rational(q, backend), bound)
    }

    pub fn integer(i: i64, backend: Backend, bound: Bound) -> Self {
        Self::rational(BigRational::from_integer(i.into()), backend, bound)
    }

    /// `c·ρ^e`.
    pub fn term(c: Coeff, e: Exponent, bound: Bound) -> Self {
        Self::from_terms([(e, c)], bound)
    }

    pub fn rho(backend: Backend, bound: Bound) -> Self {
        Self::term(Coeff::from_int(1, backend), Exponent::one(), bound)
    }

    pub fn terms(&self) -> &[(Exponent, Coeff)] {
        &self.terms
    }

    pub fn order_bound(&self) -> Bound {
        self.bound
    }

    pub fn with_bound(&self, bound: Bound) -> Self {
        Self::from_terms(self.terms.iter().cloned(), bound.min(self.bound))
    }

    pub fn leading(&self) -> Option<&(Exponent, Coeff)> {
        self.terms.first()
    }

    /// Leading exponent, or the order bound when no term is known.
    pub fn valuation(&self) -> Bound {
        match self.terms.first() {
            Some((e, _)) => Bound::At(*e),
            None => self.bound,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.bound == Bound::Exact
    }

    /// No known terms (canonical zero or `O(ρ^b)`).
    pub fn is_indistinguishable_from_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn backend(&self) -> Option<Backend> {
        self.terms.first().map(|(_, c)| c.backend())
    }

    /// Sign of the leading term; `None` when no term is known.
    pub fn sign(&self) -> Option<Sign> {
        self.terms.first().map(|(_, c)| Sign::from_i8(c.signum()))
    }

    /// Coefficient of `ρ^e`, provided `e` is below the order bound.
    pub fn coefficient(&self, e: Exponent) -> Result<Option<&Coeff>> {
        if !self.bound.admits(e) {
            return Err(Error::precision(format!(
                "coefficient of d^{} requested but value is only known modulo O(d^{})",
                fmt_exponent(e),
                self.bound
            )));
        }
        Ok(self.terms.iter().find(|(te, _)| *te == e).map(|(_, c)| c))
    }

    /// True when the series is a single constant term.
    pub fn as_constant(&self) -> Option<&Coeff> {
        match self.terms.as_slice() {
            [(e, c)] if e.is_zero() => Some(c),
            _ => None,
        }
    }

    /// Splits into the purely infinite part (negative exponents, exact) and
    /// the finite remainder.
    pub fn split_infinite(&self) -> Result<(LcNumber, LcNumber)> {
        if let Bound::At(b) = self.bound {
            if b <= Exponent::zero() {
                return Err(Error::precision("infinite part of a value known only modulo O(d^0)"));
            }
        }
        let (neg, rest): (Vec<_>, Vec<_>) =
            self.terms.iter().cloned().partition(|(e, _)| *e < Exponent::zero());
        Ok((
            LcNumber { terms: neg, bound: Bound::Exact },
            LcNumber { terms: rest, bound: self.bound },
        ))
    }

    pub fn neg(&self) -> LcNumber {
        LcNumber {
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
            bound: self.bound,
        }
    }

    pub fn add(&self, other: &LcNumber) -> LcNumber {
        let bound = self.bound.min(other.bound);
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).cloned(), bound)
    }

    pub fn sub(&self, other: &LcNumber) -> LcNumber {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &LcNumber) -> LcNumber {
        if self.is_exact_zero() || other.is_exact_zero() {
            return LcNumber::zero();
        }
        let bound = match (self.valuation(), other.valuation()) {
            (Bound::At(vx), Bound::At(vy)) => self.bound.plus(vy).min(other.bound.plus(vx)),
            _ => unreachable!("non-zero values have a finite valuation"),
        };
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea + eb;
                if bound.admits(e) {
                    terms.push((e, ca.mul(cb)));
                }
            }
        }
        Self::from_terms(terms, bound)
    }

    pub fn scale(&self, c: &Coeff) -> LcNumber {
        if c.is_zero() {
            return match self.bound {
                Bound::Exact => LcNumber::zero(),
                Bound::At(b) => LcNumber::big_o(b),
            };
        }
        Self::from_terms(self.terms.iter().map(|(e, k)| (*e, k.mul(c))), self.bound)
    }

    /// Multiplies by `ρ^e`.
    pub fn shift(&self, e: Exponent) -> LcNumber {
        LcNumber {
            terms: self.terms.iter().map(|(te, c)| (te + e, c.clone())).collect(),
            bound: self.bound.plus(e),
        }
    }

    /// Factors `c·ρ^e·(1 + t)`; `t` has strictly positive exponents and is
    /// known modulo `O(ρ^{bound - e})`.
    pub fn factor_leading(&self) -> Result<(Exponent, Coeff, LcNumber)> {
        let (e, c) = match self.terms.first() {
            Some(t) => t.clone(),
            None if self.bound == Bound::Exact => return Err(Error::DivisionByZero),
            None => {
                return Err(Error::precision(format!(
                    "value is indistinguishable from zero: O(d^{})",
                    self.bound
                )))
            }
        };
        let mut rel = self.bound.plus(-e);
        if rel == Bound::Exact && self.terms.len() > 1 {
            rel = Bound::At(Exponent::from_integer(EXACT_INVERSE_CUTOFF));
        }
        let cinv = c.recip()?;
        let tail = self.terms[1..].iter().map(|(te, tc)| (te - e, tc.mul(&cinv)));
        Ok((e, c, Self::from_terms(tail, rel)))
    }

    /// `Σ coeffs[k]·t^k` truncated at the bound of `t`, for infinitesimal `t`
    /// whose coefficient generator is `coeff(k)`.
    pub fn power_series(
        t: &LcNumber,
        backend: Backend,
        mut coeff: impl FnMut(usize) -> Result<Coeff>,
    ) -> Result<LcNumber> {
        let target = match t.bound {
            Bound::Exact if !t.terms.is_empty() => Bound::At(Exponent::from_integer(EXACT_INVERSE_CUTOFF)),
            b => b,
        };
        let mut acc = LcNumber::constant(coeff(0)?, target);
        if t.terms.is_empty() {
            return Ok(acc);
        }
        let mut power = LcNumber::constant(Coeff::from_int(1, backend), Bound::Exact);
        let mut k = 1usize;
        loop {
            power = power.mul(t);
            if power.valuation() >= target {
                break;
            }
            let c = coeff(k)?;
            acc = acc.add(&power.scale(&c));
            k += 1;
        }
        Ok(acc)
    }

    pub fn recip(&self) -> Result<LcNumber> {
        let (e, c, t) = self.factor_leading()?;
        let backend = c.backend();
        let inv = Self::power_series(&t, backend, |k| {
            Ok(Coeff::from_int(if k % 2 == 0 { 1 } else { -1 }, backend))
        })?;
        Ok(inv.scale(&c.recip()?).shift(-e))
    }

    pub fn div(&self, other: &LcNumber) -> Result<LcNumber> {
        if other.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_exact_zero() {
            return Ok(LcNumber::zero());
        }
        Ok(self.mul(&other.recip()?))
    }

    /// `self^q` for rational `q`, via the binomial series on the factored
    /// infinitesimal tail.
    pub fn pow_rational(&self, q: Exponent) -> Result<LcNumber> {
        if q.is_zero() {
            let backend = self.backend().unwrap_or_default();
            return Ok(LcNumber::constant(Coeff::from_int(1, backend), self.bound.max(Bound::At(Exponent::zero()))));
        }
        if self.terms.is_empty() {
            return match self.bound {
                Bound::Exact if q > Exponent::zero() => Ok(LcNumber::zero()),
                Bound::Exact => Err(Error::DivisionByZero),
                Bound::At(b) if q > Exponent::zero() && (q.denom() % 2 == 1 || b > Exponent::zero()) => {
                    if q.denom() % 2 == 0 {
                        return Err(Error::precision("sign of O(d^b) base undetermined for an even root"));
                    }
                    Ok(LcNumber::big_o(b * q))
                }
                Bound::At(_) => Err(Error::precision("power of a value indistinguishable from zero")),
            };
        }
        let (e, c, t) = self.factor_leading()?;
        let backend = c.backend();
        let lead = c.pow_rational(&q)?;
        let qr = BigRational::new((*q.numer()).into(), (*q.denom()).into());
        let mut binom = BigRational::one();
        let series = Self::power_series(&t, backend, |k| {
            if k > 0 {
                let kk = BigRational::from_integer((k as i64).into());
                binom = &binom * (&qr - &kk + BigRational::one()) / kk;
            }
            Ok(Coeff::from_rational(binom.clone(), backend))
        })?;
        Ok(series.scale(&lead).shift(e * q))
    }

    pub fn compare(&self, other: &LcNumber) -> Result<Ordering> {
        let diff = self.sub(other);
        match diff.sign() {
            Some(Sign::Negative) => Ok(Ordering::Less),
            Some(_) => Ok(Ordering::Greater),
            None if diff.bound == Bound::Exact => Ok(Ordering::Equal),
            None => Err(Error::precision(format!(
                "difference is O(d^{}); cannot decide the order",
                diff.bound
            ))),
        }
    }

    pub fn classify(&self) -> Result<NumberClass> {
        match self.terms.first() {
            Some((e, c)) => {
                let s = Sign::from_i8(c.signum());
                Ok(match e.cmp(&Exponent::zero()) {
                    Ordering::Greater => NumberClass::Infinitesimal(s),
                    Ordering::Equal => NumberClass::FiniteAppreciable(s),
                    Ordering::Less => NumberClass::Infinite(s),
                })
            }
            None => match self.bound {
                Bound::Exact => Ok(NumberClass::Zero),
                Bound::At(b) if b > Exponent::zero() => Ok(NumberClass::Zero),
                Bound::At(b) => Err(Error::precision(format!(
                    "O(d^{}) may be appreciable or infinite",
                    fmt_exponent(b)
                ))),
            },
        }
    }

    pub fn standard_part(&self) -> Result<ExtReal> {
        match self.classify()? {
            NumberClass::Infinite(Sign::Negative) => Ok(ExtReal::NegInf),
            NumberClass::Infinite(_) => Ok(ExtReal::PosInf),
            NumberClass::FiniteAppreciable(_) => Ok(ExtReal::Real(self.terms[0].1.clone())),
            _ => {
                let backend = self.backend().unwrap_or_default();
                Ok(ExtReal::Real(Coeff::from_int(0, backend)))
            }
        }
    }

    pub fn approx(&self, other: &LcNumber) -> Result<bool> {
        Ok(self.sub(other).classify()?.is_negligible())
    }

    /// Equal up to the common order bound: the difference has no known term.
    pub fn same_value(&self, other: &LcNumber) -> bool {
        self.sub(other).terms.is_empty()
    }

    /// The standard real `st(self)` embedded back as a constant series.
    pub fn embed_standard(c: &Coeff, bound: Bound) -> LcNumber {
        if c.is_zero() {
            return LcNumber::zero();
        }
        LcNumber::constant(c.clone(), bound)
    }
}

pub(crate) fn fmt_exponent(e: Exponent) -> String {
    if e.is_integer() && !e.is_negative() {
        e.to_string()
    } else {
        format!("({e})")
    }
}

impl fmt::Display for LcNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let negative = c.signum() < 0;
            let mag = if negative { c.neg() } else { c.clone() };
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.to_string() == "1";
            if e.is_zero() {
                write!(f, "{mag}")?;
                continue;
            }
            if !unit {
                write!(f, "{mag}*")?;
            }
            if e.is_one() {
                f.write_str("d")?;
            } else {
                write!(f, "d^{}", fmt_exponent(*e))?;
            }
        }
        if let Bound::At(b) = self.bound {
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "O(d^{})", fmt_exponent(b))?;
        }
        Ok(())
    }
}

mod text {
    use super::*;
    use crate::decimal::parse_decimal_rational;

    struct Cursor<'a> {
        src: &'a str,
        pos: usize,
    }

    impl<'a> Cursor<'a> {
        fn err(&self, msg: &str) -> Error {
            Error::Syntax { offset: self.pos, message: msg.to_string() }
        }

        fn skip_ws(&mut self) {
            while self.src[self.pos..].starts_with(' ') {
                self.pos += 1;
            }
        }

        fn eat(&mut self, s: &str) -> bool {
            self.skip_ws();
            if self.src[self.pos..].starts_with(s) {
                self.pos += s.len();
                true
            } else {
                false
            }
        }

        fn at_end(&mut self) -> bool {
            self.skip_ws();
            self.pos == self.src.len()
        }

        fn number(&mut self) -> Result<BigRational> {
            self.skip_ws();
            let rest = &self.src[self.pos..];
            let len = rest
                .char_indices()
                .find(|(_, ch)| !(ch.is_ascii_digit() || *ch == '.' || *ch == '/'))
                .map_or(rest.len(), |(i, _)| i);
            if len == 0 {
                return Err(self.err("expected a number"));
            }
            let lit = &rest[..len];
            let value = match lit.split_once('/') {
                Some((n, d)) => {
                    let n: num_bigint::BigInt = n.parse().map_err(|_| self.err("bad numerator"))?;
                    let d: num_bigint::BigInt = d.parse().map_err(|_| self.err("bad denominator"))?;
                    if d.is_zero() {
                        return Err(self.err("zero denominator"));
                    }
                    BigRational::new(n, d)
                }
                None => parse_decimal_rational(lit).map_err(|_| self.err("bad number"))?,
            };
            self.pos += len;
            Ok(value)
        }

        fn exponent(&mut self) -> Result<Exponent> {
            let paren = self.eat("(");
            let neg = paren && self.eat("-");
            let q = self.number()?;
            if paren && !self.eat(")") {
                return Err(self.err("expected `)`"));
            }
            let to_i64 = |b: &num_bigint::BigInt| i64::try_from(b).ok();
            match (to_i64(q.numer()), to_i64(q.denom())) {
                (Some(n), Some(d)) => {
                    let e = Exponent::new(n, d);
                    Ok(if neg { -e } else { e })
                }
                _ => Err(self.err("exponent out of range")),
            }
        }

        fn power_of_d(&mut self) -> Result<Exponent> {
            if self.eat("^") {
                self.exponent()
            } else {
                Ok(Exponent::one())
            }
        }
    }

    pub fn parse(src: &str, backend: Backend) -> Result<LcNumber> {
        let mut cur = Cursor { src, pos: 0 };
        if cur.eat("0") && cur.at_end() {
            return Ok(LcNumber::zero());
        }
        cur.pos = 0;
        let mut terms = Vec::new();
        let mut bound = Bound::Exact;
        let mut first = true;
        loop {
            let negative = if first {
                cur.eat("-")
            } else if cur.eat("+") {
                false
            } else if cur.eat("-") {
                true
            } else {
                return Err(cur.err("expected `+` or `-`"));
            };
            first = false;
            if cur.eat("O(") {
                if negative || !cur.eat("d") {
                    return Err(cur.err("malformed O-term"));
                }
                let b = cur.power_of_d()?;
                if !cur.eat(")") {
                    return Err(cur.err("expected `)`"));
                }
                bound = Bound::At(b);
                if !cur.at_end() {
                    return Err(cur.err("O-term must come last"));
                }
                break;
            }
            let (coeff, exp) = if cur.eat("d") {
                (BigRational::one(), cur.power_of_d()?)
            } else {
                let c = cur.number()?;
                if cur.eat("*") {
                    if !cur.eat("d") {
                        return Err(cur.err("expected `d`"));
                    }
                    (c, cur.power_of_d()?)
                } else {
                    (c, Exponent::zero())
                }
            };
            let coeff = if negative { -coeff } else { coeff };
            terms.push((exp, Coeff::from_rational(coeff, backend)));
            if cur.at_end() {
                break;
            }
        }
        Ok(LcNumber::from_terms(terms, bound))
    }
}

impl LcNumber {
    /// Parses the `c1*d^e1 + c2*d^e2 + O(d^b)` text form.
    pub fn parse(src: &str, backend: Backend) -> Result<LcNumber> {
        text::parse(src.trim(), backend)
    }
}

impl std::str::FromStr for LcNumber {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LcNumber::parse(s, Backend::Exact)
    }
}
