//! Finite unions of real intervals, membership of non-standard values in
//! their extensions, and monad-based topological reports.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::coeff::Backend;
use crate::decimal::parse_rational;
use crate::error::{Error, Result};
use crate::number::{Bound, Exponent, LcNumber, NumberClass, Sign};
use crate::value::LcValue;

/// An interval endpoint on the extended rational line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    NegInf,
    Finite(BigRational),
    PosInf,
}

impl Endpoint {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Endpoint::Finite(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => f.write_str("-inf"),
            Endpoint::PosInf => f.write_str("inf"),
            Endpoint::Finite(q) => write!(f, "{q}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Endpoint,
    pub lo_closed: bool,
    pub hi: Endpoint,
    pub hi_closed: bool,
}

impl Interval {
    /// Builds an interval; infinite endpoints are forced open. `None` when
    /// the interval is empty.
    pub fn new(lo: Endpoint, lo_closed: bool, hi: Endpoint, hi_closed: bool) -> Option<Interval> {
        let lo_closed = lo_closed && matches!(lo, Endpoint::Finite(_));
        let hi_closed = hi_closed && matches!(hi, Endpoint::Finite(_));
        let nonempty = match lo.cmp(&hi) {
            Ordering::Less => true,
            Ordering::Equal => lo_closed && hi_closed,
            Ordering::Greater => false,
        };
        nonempty.then_some(Interval { lo, lo_closed, hi, hi_closed })
    }

    pub fn closed(lo: BigRational, hi: BigRational) -> Option<Interval> {
        Interval::new(Endpoint::Finite(lo), true, Endpoint::Finite(hi), true)
    }

    pub fn open(lo: Endpoint, hi: Endpoint) -> Option<Interval> {
        Interval::new(lo, false, hi, false)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        let p = Endpoint::Finite(q.clone());
        let above = match self.lo.cmp(&p) {
            Ordering::Less => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Greater => false,
        };
        let below = match p.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    fn star_contains(&self, x: &LcValue, class: NumberClass) -> Result<bool> {
        if let NumberClass::Infinite(sign) = class {
            return Ok(match sign {
                Sign::Positive => self.hi == Endpoint::PosInf,
                Sign::Negative => self.lo == Endpoint::NegInf,
                Sign::Indefinite => return Err(Error::precision("sign of an infinite value is not determined")),
            });
        }
        let side = |e: &Endpoint, closed: bool, want: Ordering| -> Result<bool> {
            let Endpoint::Finite(q) = e else { return Ok(true) };
            let ord = x.compare(&standard(q))?;
            Ok(ord == want || (closed && ord == Ordering::Equal))
        };
        Ok(side(&self.lo, self.lo_closed, Ordering::Greater)? && side(&self.hi, self.hi_closed, Ordering::Less)?)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

fn standard(q: &BigRational) -> LcValue {
    LcValue::Series(LcNumber::rational(q.clone(), Backend::Exact, Bound::Exact))
}

/// A normalized finite union of intervals: sorted, disjoint, and with no two
/// components that could merge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalSet {
    components: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn reals() -> Self {
        IntervalSet::from(Interval::open(Endpoint::NegInf, Endpoint::PosInf).unwrap())
    }

    pub fn new(components: impl IntoIterator<Item = Interval>) -> Self {
        let mut parts: Vec<Interval> = components.into_iter().collect();
        parts.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Interval> = Vec::with_capacity(parts.len());
        for iv in parts {
            if let Some(last) = out.last_mut() {
                let touches = match last.hi.cmp(&iv.lo) {
                    Ordering::Greater => true,
                    Ordering::Equal => last.hi_closed || iv.lo_closed,
                    Ordering::Less => false,
                };
                if touches {
                    match iv.hi.cmp(&last.hi) {
                        Ordering::Greater => {
                            last.hi = iv.hi;
                            last.hi_closed = iv.hi_closed;
                        }
                        Ordering::Equal => last.hi_closed |= iv.hi_closed,
                        Ordering::Less => {}
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        IntervalSet { components: out }
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        self.components.iter().any(|c| c.contains(q))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::new(self.components.iter().chain(&other.components).cloned())
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut parts = Vec::new();
        for a in &self.components {
            for b in &other.components {
                let (lo, lo_closed) = match a.lo.cmp(&b.lo) {
                    Ordering::Greater => (a.lo.clone(), a.lo_closed),
                    Ordering::Less => (b.lo.clone(), b.lo_closed),
                    Ordering::Equal => (a.lo.clone(), a.lo_closed && b.lo_closed),
                };
                let (hi, hi_closed) = match a.hi.cmp(&b.hi) {
                    Ordering::Less => (a.hi.clone(), a.hi_closed),
                    Ordering::Greater => (b.hi.clone(), b.hi_closed),
                    Ordering::Equal => (a.hi.clone(), a.hi_closed && b.hi_closed),
                };
                parts.extend(Interval::new(lo, lo_closed, hi, hi_closed));
            }
        }
        IntervalSet::new(parts)
    }

    /// Complement within the reals.
    pub fn complement(&self) -> IntervalSet {
        let mut parts = Vec::new();
        let mut lo = Endpoint::NegInf;
        let mut lo_closed = false;
        for c in &self.components {
            parts.extend(Interval::new(lo, lo_closed, c.lo.clone(), !c.lo_closed));
            lo = c.hi.clone();
            lo_closed = !c.hi_closed;
        }
        if lo != Endpoint::PosInf {
            parts.extend(Interval::new(lo, lo_closed, Endpoint::PosInf, false));
        }
        IntervalSet::new(parts)
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        self.intersect(&other.complement())
    }

    pub fn is_subset(&self, other: &IntervalSet) -> bool {
        self.difference(other).is_empty()
    }

    /// Finite endpoints of all components, ascending and without repeats.
    pub fn finite_endpoints(&self) -> Vec<BigRational> {
        let mut out: Vec<BigRational> = Vec::new();
        for c in &self.components {
            for e in [&c.lo, &c.hi] {
                if let Endpoint::Finite(q) = e {
                    if out.last() != Some(q) {
                        out.push(q.clone());
                    }
                }
            }
        }
        out
    }

    /// Standard points inside the set: midpoints of bounded components and
    /// points one unit inside unbounded ones.
    pub fn interior_samples(&self) -> Vec<BigRational> {
        let one = BigRational::one();
        self.components
            .iter()
            .map(|c| match (&c.lo, &c.hi) {
                (Endpoint::Finite(a), Endpoint::Finite(b)) => (a + b) / BigRational::from_integer(2.into()),
                (Endpoint::Finite(a), _) => a + &one,
                (_, Endpoint::Finite(b)) => b - &one,
                _ => BigRational::zero(),
            })
            .collect()
    }

    pub fn is_bounded_above(&self) -> bool {
        self.components.last().is_none_or(|c| c.hi != Endpoint::PosInf)
    }

    pub fn is_bounded_below(&self) -> bool {
        self.components.first().is_none_or(|c| c.lo != Endpoint::NegInf)
    }

    /// Whether every neighbourhood of `c` meets the set away from `c`.
    pub fn is_cluster_point(&self, c: &BigRational) -> bool {
        let p = Endpoint::Finite(c.clone());
        self.components.iter().any(|iv| !iv.is_degenerate() && iv.lo <= p && p <= iv.hi)
    }

    pub fn parse(src: &str) -> Result<IntervalSet> {
        SetParser { src, pos: 0 }.parse()
    }
}

impl From<Interval> for IntervalSet {
    fn from(iv: Interval) -> Self {
        IntervalSet { components: vec![iv] }
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str("{}");
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(" U ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for IntervalSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IntervalSet::parse(s)
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

struct SetParser<'a> {
    src: &'a str,
    pos: usize,
}

impl SetParser<'_> {
    fn err(&self, at: usize, msg: impl Into<String>) -> Error {
        Error::Syntax { offset: at, message: msg.into() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    fn parse(mut self) -> Result<IntervalSet> {
        if self.eat("{}") || self.eat("empty") {
            return if self.at_end() { Ok(IntervalSet::empty()) } else { Err(self.err(self.pos, "trailing input")) };
        }
        let mut parts = Vec::new();
        loop {
            let start = self.pos;
            if self.eat("R") {
                parts.push(Interval::open(Endpoint::NegInf, Endpoint::PosInf).unwrap());
            } else {
                let lo_closed = if self.eat("[") {
                    true
                } else if self.eat("(") {
                    false
                } else {
                    return Err(self.err(self.pos, "expected `(` or `[`"));
                };
                let lo = self.endpoint()?;
                if !self.eat(",") {
                    return Err(self.err(self.pos, "expected `,`"));
                }
                let hi = self.endpoint()?;
                let hi_closed = if self.eat("]") {
                    true
                } else if self.eat(")") {
                    false
                } else {
                    return Err(self.err(self.pos, "expected `)` or `]`"));
                };
                if (lo_closed && lo == Endpoint::NegInf) || (hi_closed && hi == Endpoint::PosInf) {
                    return Err(self.err(start, "infinite endpoints must be open"));
                }
                match Interval::new(lo, lo_closed, hi, hi_closed) {
                    Some(iv) => parts.push(iv),
                    None => return Err(self.err(start, "empty interval")),
                }
            }
            if self.at_end() {
                break;
            }
            if !(self.eat("U") || self.eat("u") || self.eat("∪")) {
                return Err(self.err(self.pos, "expected `U`"));
            }
        }
        Ok(IntervalSet::new(parts))
    }

    fn endpoint(&mut self) -> Result<Endpoint> {
        self.skip_ws();
        let start = self.pos;
        for (tok, e) in [("-inf", Endpoint::NegInf), ("+inf", Endpoint::PosInf), ("inf", Endpoint::PosInf), ("-∞", Endpoint::NegInf), ("∞", Endpoint::PosInf)] {
            if self.eat(tok) {
                return Ok(e);
            }
        }
        let rest = &self.src[self.pos..];
        let len = rest.find(|c: char| !(c.is_ascii_digit() || matches!(c, '-' | '.' | '/'))).unwrap_or(rest.len());
        let lit = &rest[..len];
        let bad = || Error::Syntax { offset: start, message: format!("bad endpoint `{lit}`") };
        let q = parse_rational(lit).map_err(|_| bad())?;
        self.pos += len;
        Ok(Endpoint::Finite(q))
    }
}

/// Whether `x` lies in the extension `*S`.
pub fn star_member(x: &LcValue, set: &IntervalSet) -> Result<bool> {
    if x.is_exact_zero() {
        return Ok(set.contains(&BigRational::zero()));
    }
    let class = x.classify()?;
    for c in &set.components {
        if c.star_contains(x, class)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetReport {
    pub open: bool,
    pub closed: bool,
    pub bounded: bool,
    pub compact: bool,
    pub closure: IntervalSet,
    pub interior: IntervalSet,
}

fn rho(sign: i64) -> LcNumber {
    LcNumber::term(crate::coeff::Coeff::from_int(sign, Backend::Exact), Exponent::one(), Bound::Exact)
}

fn shifted(s: &BigRational, sign: i64) -> LcValue {
    LcValue::Series(LcNumber::rational(s.clone(), Backend::Exact, Bound::Exact).add(&rho(sign)))
}

fn big(sign: i64) -> LcValue {
    LcValue::Series(LcNumber::term(crate::coeff::Coeff::from_int(sign, Backend::Exact), -Exponent::one(), Bound::Exact))
}

fn member(x: &LcValue, set: &IntervalSet) -> bool {
    star_member(x, set).expect("exact probes always have decidable membership")
}

/// Topological report derived from membership of monad probes `s`, `s ± d`
/// and `±1/d` in the extension of the set.
pub fn set_report(set: &IntervalSet) -> SetReport {
    let mut closure = set.clone();
    let mut interior = set.clone();
    let mut open = true;
    let mut closed = true;
    for s in set.finite_endpoints() {
        let inside = member(&standard(&s), set);
        let left = member(&shifted(&s, -1), set);
        let right = member(&shifted(&s, 1), set);
        if inside && !(left && right) {
            open = false;
            interior = interior.difference(&IntervalSet::from(Interval::closed(s.clone(), s.clone()).unwrap()));
        }
        if !inside && (left || right) {
            closed = false;
            closure = closure.union(&IntervalSet::from(Interval::closed(s.clone(), s).unwrap()));
        }
    }
    let bounded = !member(&big(1), set) && !member(&big(-1), set);
    SetReport { open, closed, bounded, compact: closed && bounded, closure, interior }
}

/// Compactness re-derived as `*S ⊆ μ(S)`: every probe in the extension has a
/// finite standard part that lies in the set.
pub fn compact_by_monads(set: &IntervalSet) -> bool {
    let mut probes = vec![big(1), big(-1)];
    for s in set.finite_endpoints().iter().chain(&set.interior_samples()) {
        probes.extend([standard(s), shifted(s, 1), shifted(s, -1)]);
    }
    probes.iter().filter(|x| member(x, set)).all(|x| match x.standard_part() {
        Ok(crate::number::ExtReal::Real(c)) => set.contains(&c.to_rational()),
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: &str) -> IntervalSet {
        s.parse().unwrap()
    }

    fn val(s: &str) -> LcValue {
        LcValue::Series(s.parse().unwrap())
    }

    #[test]
    fn parses_and_normalizes() {
        assert_eq!(set("(0,1) U [2,3]").components().len(), 2);
        assert_eq!(set("[0,1]").to_string(), "[0, 1]");
        assert_eq!(set("[1,2) U [0,1)").to_string(), "[0, 2)");
        assert_eq!(set("(0,1) U (1,2)").components().len(), 2);
        assert_eq!(set("(-inf, 1/2] U (0.25, inf)").to_string(), "(-inf, inf)");
        assert!(matches!(IntervalSet::parse("(1,0)"), Err(Error::Syntax { .. })));
        assert!(matches!(IntervalSet::parse("[-inf,0]"), Err(Error::Syntax { .. })));
        assert!(matches!(IntervalSet::parse("[0,1] V [2,3]"), Err(Error::Syntax { offset: 6, .. })));
    }

    #[test]
    fn membership_examples() {
        let unit = set("(0,1)");
        assert!(star_member(&val("d"), &unit).unwrap());
        assert!(!star_member(&val("1 + d"), &unit).unwrap());
        assert!(star_member(&val("1 - d"), &unit).unwrap());
        assert!(star_member(&val("d^(-1)"), &set("(0,inf)")).unwrap());
        assert!(star_member(&val("1"), &set("[0,1]")).unwrap());
        assert!(!star_member(&val("-d^(-1)"), &set("(0,inf)")).unwrap());
        assert!(star_member(&val("1 + O(d^3)"), &set("[0,1]")).unwrap_err().is_precision());
    }

    #[test]
    fn report_examples() {
        let r = set_report(&set("[0,1]"));
        assert_eq!((r.open, r.closed, r.bounded, r.compact), (false, true, true, true));
        let r = set_report(&set("(0,1)"));
        assert_eq!((r.open, r.closed, r.compact), (true, false, false));
        assert_eq!(r.closure, set("[0,1]"));
        let r = set_report(&set("(-inf,inf)"));
        assert_eq!((r.open, r.closed, r.bounded, r.compact), (true, true, false, false));
        let r = set_report(&set("[2,2] U (3,4]"));
        assert_eq!(r.interior, set("(3,4)"));
        assert_eq!(r.closure, set("[2,2] U [3,4]"));
        assert!(compact_by_monads(&set("[0,1] U [2,2]")));
        assert!(!compact_by_monads(&set("[0,1)")));
    }

    #[test]
    fn boolean_operations() {
        let a = set("(0,2]");
        let b = set("[1,3)");
        assert_eq!(a.intersect(&b), set("[1,2]"));
        assert_eq!(a.union(&b), set("(0,3)"));
        assert_eq!(a.difference(&b), set("(0,1)"));
        assert_eq!(a.complement(), set("(-inf,0] U (2,inf)"));
        assert_eq!(IntervalSet::empty().complement(), IntervalSet::reals());
        assert!(set("[2,2] U (0,1)").is_cluster_point(&BigRational::one()));
        assert!(!set("[2,2] U (0,1)").is_cluster_point(&BigRational::from_integer(2.into())));
    }
}
