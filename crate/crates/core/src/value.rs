//! Values: a series, or an escape form for quantities outside the power
//! scale of ρ (`e^{1/ρ}`, `ln ρ`, `sin(1/ρ)`, ...).
//!
//! Escape forms keep as much structure as the rule table can use:
//!
//! * `Exp { arg, factor }` is `factor · e^arg` with `arg` purely infinite.
//! * `Log { log_coeff, rest }` is `log_coeff · ln ρ + rest`.
//! * `Osc { waves, offset }` is `offset + Σ (a·sin P + b·cos P)` with each
//!   phase `P` purely infinite and positive.
//! * `Opaque` only records a sign and a magnitude scale.
//!
//! When two operands share a form the result is computed exactly (factors of
//! equal exponentials add, equal phases merge, products of waves expand to
//! sums). Otherwise the operand of strictly larger magnitude absorbs the other
//! into its order bound, and operands of equal magnitude fall back to an
//! opaque asymptotic. Combinations with no determined magnitude are refused.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::coeff::{Backend, Coeff};
use crate::error::{Error, Result};
use crate::number::{fmt_exponent, Bound, Exponent, ExtReal, LcNumber, NumberClass, Sign, DEFAULT_ORDER};

/// Bound slack used when absorbing `ρ^e·|ln ρ|`, which is `O(ρ^{e-ε})` for
/// every `ε > 0` but not `O(ρ^e)`.
const LOG_SLACK: (i64, i64) = (1, 1024);

/// Logarithmic nudge of a power scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tilt {
    /// Divided by a power of `|ln ρ|`.
    Down,
    Flat,
    /// Multiplied by a power of `|ln ρ|`.
    Up,
}

impl Tilt {
    fn combine(self, other: Tilt) -> Option<Tilt> {
        match (self, other) {
            (Tilt::Flat, t) | (t, Tilt::Flat) => Some(t),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }

    fn flip(self) -> Tilt {
        match self {
            Tilt::Down => Tilt::Up,
            Tilt::Flat => Tilt::Flat,
            Tilt::Up => Tilt::Down,
        }
    }
}

/// Magnitude of a value measured against the powers of ρ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scale {
    /// Smaller than every positive power of ρ.
    BelowAllPowers,
    Power(Exponent, Tilt),
    /// Larger than every negative power of ρ.
    AboveAllPowers,
}

impl Scale {
    pub fn power(e: Exponent) -> Scale {
        Scale::Power(e, Tilt::Flat)
    }

    /// `Greater` when `self` is the larger magnitude.
    pub fn cmp_magnitude(&self, other: &Scale) -> Ordering {
        use Scale::*;
        match (self, other) {
            (AboveAllPowers, AboveAllPowers) | (BelowAllPowers, BelowAllPowers) => Ordering::Equal,
            (AboveAllPowers, _) | (_, BelowAllPowers) => Ordering::Greater,
            (_, AboveAllPowers) | (BelowAllPowers, _) => Ordering::Less,
            (Power(a, ta), Power(b, tb)) => b.cmp(a).then(ta.cmp(tb)),
        }
    }

    pub fn mul(self, other: Scale) -> Result<Scale> {
        use Scale::*;
        match (self, other) {
            (AboveAllPowers, BelowAllPowers) | (BelowAllPowers, AboveAllPowers) => Err(Error::unsupported(
                "product of a super-polynomially large and a super-polynomially small value",
            )),
            (AboveAllPowers, _) | (_, AboveAllPowers) => Ok(AboveAllPowers),
            (BelowAllPowers, _) | (_, BelowAllPowers) => Ok(BelowAllPowers),
            (Power(a, ta), Power(b, tb)) => ta.combine(tb).map(|t| Power(a + b, t)).ok_or_else(|| {
                Error::unsupported("product of logarithmically large and logarithmically small factors")
            }),
        }
    }

    pub fn recip(self) -> Scale {
        match self {
            Scale::BelowAllPowers => Scale::AboveAllPowers,
            Scale::AboveAllPowers => Scale::BelowAllPowers,
            Scale::Power(e, t) => Scale::Power(-e, t.flip()),
        }
    }

    pub fn pow(self, q: Exponent) -> Scale {
        if q.is_negative() {
            return self.pow(-q).recip();
        }
        match self {
            Scale::Power(e, t) => Scale::Power(e * q, t),
            other => other,
        }
    }

    pub fn is_infinitesimal(&self) -> bool {
        match self {
            Scale::BelowAllPowers => true,
            Scale::AboveAllPowers => false,
            Scale::Power(e, t) => e.is_positive() || (e.is_zero() && *t == Tilt::Down),
        }
    }

    pub fn is_infinite(&self) -> bool {
        match self {
            Scale::BelowAllPowers => false,
            Scale::AboveAllPowers => true,
            Scale::Power(e, t) => e.is_negative() || (e.is_zero() && *t == Tilt::Up),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scale::BelowAllPowers => f.write_str("below all powers of d"),
            Scale::AboveAllPowers => f.write_str("above all powers of d"),
            Scale::Power(e, Tilt::Flat) => write!(f, "d^{}", fmt_exponent(*e)),
            Scale::Power(e, Tilt::Up) => write!(f, "d^{}*|ln d|", fmt_exponent(*e)),
            Scale::Power(e, Tilt::Down) => write!(f, "d^{}/|ln d|", fmt_exponent(*e)),
        }
    }
}

/// Sign and magnitude of a non-zero value. An `Indefinite` sign means the
/// scale is only an upper bound on the magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Asymptotic {
    pub sign: Sign,
    pub scale: Scale,
}

impl Asymptotic {
    fn definite(&self) -> bool {
        self.sign != Sign::Indefinite
    }

    fn neg(self) -> Self {
        Asymptotic { sign: self.sign.flip(), scale: self.scale }
    }

    pub fn class(&self) -> Result<NumberClass> {
        let s = self.sign;
        if self.scale.is_infinitesimal() {
            return Ok(NumberClass::Infinitesimal(s));
        }
        if s == Sign::Indefinite {
            return Err(Error::Undecidable(format!(
                "value of undetermined sign with magnitude up to {}",
                self.scale
            )));
        }
        Ok(if self.scale.is_infinite() {
            NumberClass::Infinite(s)
        } else {
            NumberClass::FiniteAppreciable(s)
        })
    }

    fn sum(a: Option<Asymptotic>, b: Option<Asymptotic>) -> Option<Asymptotic> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(match a.scale.cmp_magnitude(&b.scale) {
                Ordering::Greater => a,
                Ordering::Less => b,
                Ordering::Equal if a.sign == b.sign => a,
                Ordering::Equal => Asymptotic { sign: Sign::Indefinite, scale: a.scale },
            }),
        }
    }

    fn product(a: Asymptotic, b: Asymptotic) -> Result<Asymptotic> {
        Ok(Asymptotic { sign: a.sign.times(b.sign), scale: a.scale.mul(b.scale)? })
    }
}

/// Magnitude classes of escape values, as reported to users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Magnitude {
    SuperPolyInfinite,
    SubPolyInfinite,
    SubPolyInfinitesimal,
    BoundedOscillation { lo: Coeff, hi: Coeff },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscapeToken {
    pub sign: Sign,
    pub magnitude: Magnitude,
}

impl fmt::Display for EscapeToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.magnitude {
            Magnitude::BoundedOscillation { lo, hi } => write!(f, "BoundedOscillation([{lo}, {hi}])"),
            m => write!(f, "Escape({}, {:?})", self.sign.symbol(), m),
        }
    }
}

/// One oscillating component `a·sin(phase) + b·cos(phase)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wave {
    pub phase: LcNumber,
    pub sin_coeff: LcNumber,
    pub cos_coeff: LcNumber,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Escape {
    Exp { arg: LcNumber, factor: LcNumber },
    Log { log_coeff: LcNumber, rest: LcNumber },
    Osc { waves: Vec<Wave>, offset: LcNumber },
    Opaque(Asymptotic),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LcValue {
    Series(LcNumber),
    Escape(Escape),
}

impl From<LcNumber> for LcValue {
    fn from(n: LcNumber) -> Self {
        LcValue::Series(n)
    }
}

fn lead_positive(n: &LcNumber) -> bool {
    n.leading().is_some_and(|(_, c)| c.signum() > 0)
}

fn series_asymptotic(n: &LcNumber) -> Option<Asymptotic> {
    match n.leading() {
        Some((e, c)) => Some(Asymptotic { sign: Sign::from_i8(c.signum()), scale: Scale::power(*e) }),
        None => n.order_bound().finite().map(|b| Asymptotic { sign: Sign::Indefinite, scale: Scale::power(b) }),
    }
}

/// Loosens the order bound of `n` so that it also covers a quantity of the
/// given scale.
pub(crate) fn absorb_series(n: &LcNumber, scale: Scale) -> LcNumber {
    match scale {
        Scale::BelowAllPowers => match n.order_bound() {
            Bound::Exact => {
                let last = n.terms().last().map_or(Exponent::zero(), |(e, _)| *e);
                let b = Exponent::from_integer(DEFAULT_ORDER).max(last + Exponent::one());
                n.with_bound(Bound::At(b))
            }
            Bound::At(_) => n.clone(),
        },
        Scale::Power(e, Tilt::Up) => n.with_bound(Bound::At(e - Exponent::new(LOG_SLACK.0, LOG_SLACK.1))),
        Scale::Power(e, _) => n.with_bound(Bound::At(e)),
        Scale::AboveAllPowers => {
            debug_assert!(false, "a series cannot absorb a super-polynomial quantity");
            n.clone()
        }
    }
}

/// `n · (1 + r)` where `r` has the given (infinitesimal) scale.
fn with_relative_error(n: &LcNumber, rel: Scale) -> LcNumber {
    let backend = n.backend().unwrap_or_default();
    let one = LcNumber::constant(Coeff::from_int(1, backend), Bound::Exact);
    n.mul(&absorb_series(&one, rel))
}

fn wave(phase: LcNumber, sin_coeff: LcNumber, cos_coeff: LcNumber) -> Wave {
    if lead_positive(&phase) {
        Wave { phase, sin_coeff, cos_coeff }
    } else {
        Wave { phase: phase.neg(), sin_coeff: sin_coeff.neg(), cos_coeff }
    }
}

pub(crate) fn exp_form(arg: LcNumber, factor: LcNumber) -> LcValue {
    if factor.is_exact_zero() {
        return LcValue::zero();
    }
    if arg.is_indistinguishable_from_zero() {
        return LcValue::Series(factor);
    }
    LcValue::Escape(Escape::Exp { arg, factor })
}

pub(crate) fn log_form(log_coeff: LcNumber, rest: LcNumber) -> LcValue {
    if log_coeff.is_exact_zero() {
        return LcValue::Series(rest);
    }
    LcValue::Escape(Escape::Log { log_coeff, rest })
}

pub(crate) fn osc_form(waves: Vec<Wave>, mut offset: LcNumber) -> LcValue {
    let mut merged: Vec<Wave> = Vec::with_capacity(waves.len());
    for w in waves {
        if w.phase.is_indistinguishable_from_zero() {
            offset = offset.add(&w.cos_coeff);
            continue;
        }
        match merged.iter_mut().find(|m| m.phase.sub(&w.phase).is_exact_zero()) {
            Some(m) => {
                m.sin_coeff = m.sin_coeff.add(&w.sin_coeff);
                m.cos_coeff = m.cos_coeff.add(&w.cos_coeff);
            }
            None => merged.push(w),
        }
    }
    merged.retain(|w| !(w.sin_coeff.is_exact_zero() && w.cos_coeff.is_exact_zero()));
    if merged.is_empty() {
        return LcValue::Series(offset);
    }
    LcValue::Escape(Escape::Osc { waves: merged, offset })
}

/// Amplitude summary of a set of waves: the smallest valuation among the
/// coefficients, the sum of absolute leading coefficients at that valuation,
/// and whether some coefficient at that valuation is only known as `O(ρ^v)`.
struct Amplitude {
    valuation: Exponent,
    lead_sum: Option<Coeff>,
}

fn amplitude(waves: &[Wave]) -> Amplitude {
    let mut items: Vec<(Exponent, Option<Coeff>)> = Vec::new();
    for w in waves {
        for c in [&w.sin_coeff, &w.cos_coeff] {
            if let Some((e, k)) = c.leading() {
                items.push((*e, Some(k.abs())));
            } else if let Bound::At(b) = c.order_bound() {
                items.push((b, None));
            }
        }
    }
    let valuation = items.iter().map(|(e, _)| *e).min().expect("oscillation has a wave");
    let mut lead_sum: Option<Coeff> = None;
    let mut uncertain = false;
    for (_, k) in items.into_iter().filter(|(e, _)| *e == valuation) {
        match k {
            Some(k) => lead_sum = Some(lead_sum.map_or(k.clone(), |s| s.add(&k))),
            None => uncertain = true,
        }
    }
    Amplitude { valuation, lead_sum: if uncertain { None } else { lead_sum } }
}

impl LcValue {
    pub fn zero() -> Self {
        LcValue::Series(LcNumber::zero())
    }

    pub fn opaque(sign: Sign, scale: Scale) -> Self {
        LcValue::Escape(Escape::Opaque(Asymptotic { sign, scale }))
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, LcValue::Series(n) if n.is_exact_zero())
    }

    pub fn as_series(&self) -> Option<&LcNumber> {
        match self {
            LcValue::Series(n) => Some(n),
            LcValue::Escape(_) => None,
        }
    }

    pub fn is_escape(&self) -> bool {
        matches!(self, LcValue::Escape(_))
    }

    pub fn backend(&self) -> Backend {
        let pick = |ns: &[&LcNumber]| ns.iter().find_map(|n| n.backend()).unwrap_or_default();
        match self {
            LcValue::Series(n) => pick(&[n]),
            LcValue::Escape(Escape::Exp { arg, factor }) => pick(&[factor, arg]),
            LcValue::Escape(Escape::Log { log_coeff, rest }) => pick(&[rest, log_coeff]),
            LcValue::Escape(Escape::Osc { waves, offset }) => {
                let mut all = vec![offset];
                for w in waves {
                    all.extend([&w.sin_coeff, &w.cos_coeff, &w.phase]);
                }
                pick(&all)
            }
            LcValue::Escape(Escape::Opaque(_)) => Backend::Exact,
        }
    }

    /// Sign and magnitude; `None` for the exact zero.
    pub fn asymptotic(&self) -> Option<Asymptotic> {
        match self {
            LcValue::Series(n) => series_asymptotic(n),
            LcValue::Escape(Escape::Exp { arg, factor }) => {
                let sign = series_asymptotic(factor).map_or(Sign::Indefinite, |a| a.sign);
                let scale = if lead_positive(arg) { Scale::AboveAllPowers } else { Scale::BelowAllPowers };
                Some(Asymptotic { sign, scale })
            }
            LcValue::Escape(Escape::Log { log_coeff, rest }) => {
                let log_term = series_asymptotic(log_coeff).map(|a| {
                    let Scale::Power(v, _) = a.scale else { unreachable!() };
                    Asymptotic { sign: a.sign.flip(), scale: Scale::Power(v, Tilt::Up) }
                });
                Asymptotic::sum(log_term, series_asymptotic(rest))
            }
            LcValue::Escape(Escape::Osc { waves, offset }) => {
                let amp = amplitude(waves);
                let wave_scale = Scale::power(amp.valuation);
                let bounded = Asymptotic { sign: Sign::Indefinite, scale: wave_scale };
                let Some(off) = series_asymptotic(offset) else { return Some(bounded) };
                Some(match off.scale.cmp_magnitude(&wave_scale) {
                    Ordering::Greater => off,
                    Ordering::Less => bounded,
                    Ordering::Equal => {
                        let lead = offset.leading().map(|(_, c)| c.abs());
                        match (lead, amp.lead_sum) {
                            (Some(c), Some(m)) if off.definite() && c.cmp_value(&m) == Ordering::Greater => off,
                            _ => bounded,
                        }
                    }
                })
            }
            LcValue::Escape(Escape::Opaque(a)) => Some(*a),
        }
    }

    pub fn classify(&self) -> Result<NumberClass> {
        match self {
            LcValue::Series(n) => n.classify(),
            _ => self.asymptotic().map_or(Ok(NumberClass::Zero), |a| a.class()),
        }
    }

    /// The magnitude token of an escape value, when it has one of the named
    /// magnitude classes.
    pub fn escape_token(&self) -> Option<EscapeToken> {
        let LcValue::Escape(esc) = self else { return None };
        if let Escape::Osc { waves, offset } = esc {
            let amp = amplitude(waves);
            if amp.valuation.is_zero() && offset.valuation() >= Bound::At(Exponent::zero()) {
                let centre = offset.standard_part().ok()?;
                let m = amp.lead_sum?;
                let c = centre.real()?.clone();
                return Some(EscapeToken {
                    sign: Sign::Indefinite,
                    magnitude: Magnitude::BoundedOscillation { lo: c.sub(&m), hi: c.add(&m) },
                });
            }
        }
        let a = self.asymptotic()?;
        let magnitude = match a.scale {
            Scale::AboveAllPowers => Magnitude::SuperPolyInfinite,
            Scale::BelowAllPowers => Magnitude::SubPolyInfinitesimal,
            Scale::Power(e, Tilt::Up) if e.is_zero() => Magnitude::SubPolyInfinite,
            Scale::Power(e, Tilt::Down) if e.is_zero() => Magnitude::SubPolyInfinitesimal,
            _ => return None,
        };
        Some(EscapeToken { sign: a.sign, magnitude })
    }

    pub fn standard_part(&self) -> Result<ExtReal> {
        if let LcValue::Series(n) = self {
            return n.standard_part();
        }
        let zero = || ExtReal::Real(Coeff::from_int(0, self.backend()));
        let class = match self.classify() {
            Err(Error::Undecidable(_)) if matches!(self, LcValue::Escape(Escape::Osc { .. })) => {
                return Err(Error::Undefined(format!("{self} oscillates without settling")))
            }
            other => other?,
        };
        match class {
            NumberClass::Zero | NumberClass::Infinitesimal(_) => Ok(zero()),
            NumberClass::Infinite(Sign::Negative) => Ok(ExtReal::NegInf),
            NumberClass::Infinite(_) => Ok(ExtReal::PosInf),
            NumberClass::FiniteAppreciable(_) => match self {
                LcValue::Escape(Escape::Log { rest, .. }) => rest.standard_part(),
                LcValue::Escape(Escape::Osc { waves, offset }) if amplitude(waves).valuation.is_positive() => {
                    offset.standard_part()
                }
                LcValue::Escape(Escape::Osc { .. }) => {
                    Err(Error::Undefined(format!("{self} oscillates without settling")))
                }
                _ => Err(Error::Undefined(format!("{self} has no computable standard part"))),
            },
        }
    }

    pub fn approx(&self, other: &LcValue) -> Result<bool> {
        Ok(self.sub(other)?.classify()?.is_negligible())
    }

    pub fn compare(&self, other: &LcValue) -> Result<Ordering> {
        let diff = self.sub(other)?;
        if let LcValue::Series(d) = &diff {
            return d.compare(&LcNumber::zero());
        }
        match diff.asymptotic() {
            None => Ok(Ordering::Equal),
            Some(Asymptotic { sign: Sign::Positive, .. }) => Ok(Ordering::Greater),
            Some(Asymptotic { sign: Sign::Negative, .. }) => Ok(Ordering::Less),
            Some(_) => Err(Error::Undecidable(format!("sign of {diff} is not determined"))),
        }
    }

    pub fn neg(&self) -> LcValue {
        match self {
            LcValue::Series(n) => LcValue::Series(n.neg()),
            LcValue::Escape(Escape::Exp { arg, factor }) => exp_form(arg.clone(), factor.neg()),
            LcValue::Escape(Escape::Log { log_coeff, rest }) => log_form(log_coeff.neg(), rest.neg()),
            LcValue::Escape(Escape::Osc { waves, offset }) => osc_form(
                waves
                    .iter()
                    .map(|w| Wave {
                        phase: w.phase.clone(),
                        sin_coeff: w.sin_coeff.neg(),
                        cos_coeff: w.cos_coeff.neg(),
                    })
                    .collect(),
                offset.neg(),
            ),
            LcValue::Escape(Escape::Opaque(a)) => LcValue::Escape(Escape::Opaque(a.neg())),
        }
    }

    /// Folds a quantity of smaller magnitude into this value's precision.
    fn absorb(&self, scale: Scale) -> LcValue {
        match self {
            LcValue::Series(n) => LcValue::Series(absorb_series(n, scale)),
            LcValue::Escape(Escape::Exp { arg, factor }) => {
                exp_form(arg.clone(), absorb_series(factor, Scale::BelowAllPowers))
            }
            LcValue::Escape(Escape::Log { log_coeff, rest }) => {
                log_form(log_coeff.clone(), absorb_series(rest, scale))
            }
            LcValue::Escape(Escape::Osc { waves, offset }) => osc_form(waves.clone(), absorb_series(offset, scale)),
            LcValue::Escape(Escape::Opaque(_)) => self.clone(),
        }
    }

    /// Splits `self = s + r` where `s` is a series strictly dominating `r`;
    /// returns `s` and the scale of `r`.
    pub(crate) fn dominant_series(&self) -> Option<(LcNumber, Scale)> {
        match self {
            LcValue::Series(n) => Some((n.clone(), Scale::BelowAllPowers)),
            LcValue::Escape(Escape::Log { log_coeff, rest }) => {
                let (e, _) = rest.leading()?;
                let v = log_coeff.valuation().finite()?;
                (v > *e).then(|| (rest.clone(), Scale::Power(v, Tilt::Up)))
            }
            LcValue::Escape(Escape::Osc { waves, offset }) => {
                let (e, _) = offset.leading()?;
                let v = amplitude(waves).valuation;
                (v > *e).then(|| (offset.clone(), Scale::power(v)))
            }
            _ => None,
        }
    }

    pub fn add(&self, other: &LcValue) -> Result<LcValue> {
        use Escape::*;
        use LcValue::{Escape as E, Series as S};
        if self.is_exact_zero() {
            return Ok(other.clone());
        }
        if other.is_exact_zero() {
            return Ok(self.clone());
        }
        Ok(match (self, other) {
            (S(a), S(b)) => S(a.add(b)),
            (E(Exp { arg: a1, factor: f1 }), E(Exp { arg: a2, factor: f2 })) => {
                let d = a1.sub(a2);
                if d.is_indistinguishable_from_zero() {
                    exp_form(a1.clone(), f1.add(f2))
                } else if lead_positive(&d) {
                    self.absorb(Scale::BelowAllPowers)
                } else {
                    other.absorb(Scale::BelowAllPowers)
                }
            }
            (E(Log { log_coeff: a1, rest: b1 }), E(Log { log_coeff: a2, rest: b2 })) => {
                log_form(a1.add(a2), b1.add(b2))
            }
            (E(Log { log_coeff, rest }), S(s)) | (S(s), E(Log { log_coeff, rest })) => {
                log_form(log_coeff.clone(), rest.add(s))
            }
            (E(Osc { waves: w1, offset: o1 }), E(Osc { waves: w2, offset: o2 })) => {
                osc_form(w1.iter().chain(w2.iter()).cloned().collect(), o1.add(o2))
            }
            (E(Osc { waves, offset }), S(s)) | (S(s), E(Osc { waves, offset })) => {
                osc_form(waves.clone(), offset.add(s))
            }
            _ => {
                let ax = self.asymptotic().expect("non-zero");
                let ay = other.asymptotic().expect("non-zero");
                match ax.scale.cmp_magnitude(&ay.scale) {
                    Ordering::Greater => self.absorb(ay.scale),
                    Ordering::Less => other.absorb(ax.scale),
                    Ordering::Equal => {
                        let sum = Asymptotic::sum(Some(ax), Some(ay)).expect("non-zero");
                        LcValue::Escape(Opaque(sum))
                    }
                }
            }
        })
    }

    pub fn sub(&self, other: &LcValue) -> Result<LcValue> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &LcValue) -> Result<LcValue> {
        use Escape::*;
        use LcValue::{Escape as E, Series as S};
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(LcValue::zero());
        }
        Ok(match (self, other) {
            (S(a), S(b)) => S(a.mul(b)),
            (S(s), E(Exp { arg, factor })) | (E(Exp { arg, factor }), S(s)) => exp_form(arg.clone(), factor.mul(s)),
            (E(Exp { arg: a1, factor: f1 }), E(Exp { arg: a2, factor: f2 })) => {
                exp_form(a1.add(a2), f1.mul(f2))
            }
            (S(s), E(Log { log_coeff, rest })) | (E(Log { log_coeff, rest }), S(s)) => {
                log_form(log_coeff.mul(s), rest.mul(s))
            }
            (S(s), E(Osc { waves, offset })) | (E(Osc { waves, offset }), S(s)) => osc_form(
                waves
                    .iter()
                    .map(|w| Wave {
                        phase: w.phase.clone(),
                        sin_coeff: w.sin_coeff.mul(s),
                        cos_coeff: w.cos_coeff.mul(s),
                    })
                    .collect(),
                offset.mul(s),
            ),
            (E(Osc { waves: w1, offset: o1 }), E(Osc { waves: w2, offset: o2 })) => osc_product(w1, o1, w2, o2),
            _ => {
                let ax = self.asymptotic().expect("non-zero");
                let ay = other.asymptotic().expect("non-zero");
                LcValue::Escape(Opaque(Asymptotic::product(ax, ay)?))
            }
        })
    }

    pub fn recip(&self) -> Result<LcValue> {
        match self {
            LcValue::Series(n) => Ok(LcValue::Series(n.recip()?)),
            LcValue::Escape(Escape::Exp { arg, factor }) => Ok(exp_form(arg.neg(), factor.recip()?)),
            _ => {
                if let Some((s, r)) = self.dominant_series() {
                    let rel = relative_scale(&s, r)?;
                    return Ok(LcValue::Series(with_relative_error(&s.recip()?, rel)));
                }
                let a = self.asymptotic().expect("non-zero");
                if !a.definite() {
                    return Err(Error::Undecidable(format!("reciprocal of {self}, whose sign is not determined")));
                }
                Ok(LcValue::opaque(a.sign, a.scale.recip()))
            }
        }
    }

    pub fn div(&self, other: &LcValue) -> Result<LcValue> {
        if other.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_exact_zero() {
            return Ok(LcValue::zero());
        }
        self.mul(&other.recip()?)
    }

    pub fn pow_rational(&self, q: Exponent) -> Result<LcValue> {
        match self {
            LcValue::Series(n) => Ok(LcValue::Series(n.pow_rational(q)?)),
            LcValue::Escape(Escape::Exp { arg, factor }) => {
                let qc = Coeff::Exact(BigRational::new((*q.numer()).into(), (*q.denom()).into()));
                let scaled = LcNumber::from_terms(arg.terms().iter().map(|(e, c)| (*e, c.mul(&qc))), Bound::Exact);
                Ok(exp_form(scaled, factor.pow_rational(q)?))
            }
            _ if q.is_zero() => Ok(LcValue::Series(LcNumber::constant(Coeff::from_int(1, self.backend()), Bound::Exact))),
            LcValue::Escape(Escape::Osc { .. }) if q.is_integer() && q > Exponent::zero() && *q.numer() <= 8 => {
                let mut acc = self.clone();
                for _ in 1..*q.numer() {
                    acc = acc.mul(self)?;
                }
                Ok(acc)
            }
            _ => {
                if let Some((s, r)) = self.dominant_series() {
                    let rel = relative_scale(&s, r)?;
                    return Ok(LcValue::Series(with_relative_error(&s.pow_rational(q)?, rel)));
                }
                let a = self.asymptotic().expect("non-zero");
                let even_root = q.denom() % 2 == 0;
                let sign = match a.sign {
                    Sign::Negative if even_root => return Err(Error::NegativeBase),
                    Sign::Negative if q.numer() % 2 == 0 => Sign::Positive,
                    Sign::Indefinite if even_root => {
                        return Err(Error::Undecidable(format!("even root of {self}, whose sign is not determined")))
                    }
                    s => s,
                };
                Ok(LcValue::opaque(sign, a.scale.pow(q)))
            }
        }
    }
}

/// Scale of `r / s` for a series `s` dominating a remainder of scale `r`.
fn relative_scale(s: &LcNumber, r: Scale) -> Result<Scale> {
    let (e, _) = s.leading().ok_or_else(|| Error::precision("dominant part has no known term"))?;
    r.mul(Scale::power(-*e))
}

fn half(n: &LcNumber) -> LcNumber {
    n.scale(&Coeff::Exact(BigRational::new(1.into(), 2.into())))
}

fn osc_product(w1: &[Wave], o1: &LcNumber, w2: &[Wave], o2: &LcNumber) -> LcValue {
    let mut waves = Vec::new();
    let mut offset = o1.mul(o2);
    for w in w1 {
        waves.push(Wave { phase: w.phase.clone(), sin_coeff: w.sin_coeff.mul(o2), cos_coeff: w.cos_coeff.mul(o2) });
    }
    for v in w2 {
        waves.push(Wave { phase: v.phase.clone(), sin_coeff: v.sin_coeff.mul(o1), cos_coeff: v.cos_coeff.mul(o1) });
    }
    for w in w1 {
        for v in w2 {
            let (a, b, c, d) = (&w.sin_coeff, &w.cos_coeff, &v.sin_coeff, &v.cos_coeff);
            let (ac, ad, bc, bd) = (a.mul(c), a.mul(d), b.mul(c), b.mul(d));
            waves.push(wave(w.phase.add(&v.phase), half(&ad.add(&bc)), half(&bd.sub(&ac))));
            let diff = w.phase.sub(&v.phase);
            if diff.is_indistinguishable_from_zero() {
                offset = offset.add(&half(&ac.add(&bd)));
            } else {
                waves.push(wave(diff, half(&ad.sub(&bc)), half(&ac.add(&bd))));
            }
        }
    }
    osc_form(waves, offset)
}

fn factor_text(n: &LcNumber) -> String {
    let s = n.to_string();
    if n.terms().len() == 1 && n.order_bound() == Bound::Exact && !s.starts_with('-') {
        s
    } else {
        format!("({s})")
    }
}

impl fmt::Display for LcValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LcValue::Series(n) => write!(f, "{n}"),
            LcValue::Escape(Escape::Exp { arg, factor }) => {
                if factor.as_constant().is_some_and(|c| c.to_rational().is_one()) && factor.order_bound() == Bound::Exact {
                    write!(f, "exp({arg})")
                } else {
                    write!(f, "exp({arg})*{}", factor_text(factor))
                }
            }
            LcValue::Escape(Escape::Log { log_coeff, rest }) => {
                if log_coeff.as_constant().is_some_and(|c| c.to_rational().is_one()) && log_coeff.order_bound() == Bound::Exact {
                    f.write_str("ln(d)")?;
                } else {
                    write!(f, "{}*ln(d)", factor_text(log_coeff))?;
                }
                if !rest.is_exact_zero() {
                    write!(f, " + {}", factor_text(rest))?;
                }
                Ok(())
            }
            LcValue::Escape(Escape::Osc { waves, offset }) => {
                let mut parts = Vec::new();
                if !offset.is_exact_zero() {
                    parts.push(factor_text(offset));
                }
                for w in waves {
                    for (c, name) in [(&w.sin_coeff, "sin"), (&w.cos_coeff, "cos")] {
                        if !c.is_exact_zero() {
                            parts.push(format!("{}*{name}({})", factor_text(c), w.phase));
                        }
                    }
                }
                f.write_str(&parts.join(" + "))
            }
            LcValue::Escape(Escape::Opaque(a)) => match self.escape_token() {
                Some(t) => write!(f, "{t}"),
                None => write!(f, "Escape({}, ~{})", a.sign.symbol(), a.scale),
            },
        }
    }
}

/// Converts an exact rational to an exponent when it fits.
pub fn rational_to_exponent(q: &BigRational) -> Option<Exponent> {
    Some(Exponent::new(q.numer().to_i64()?, q.denom().to_i64()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Exponent {
        Exponent::new(n, d)
    }

    fn s(text: &str) -> LcValue {
        LcValue::Series(text.parse().unwrap())
    }

    fn exp_of(arg: &str, factor: &str) -> LcValue {
        exp_form(arg.parse().unwrap(), factor.parse().unwrap())
    }

    #[test]
    fn scale_order() {
        let above = Scale::AboveAllPowers;
        let big = Scale::power(q(-3, 1));
        let log = Scale::Power(q(0, 1), Tilt::Up);
        let one = Scale::power(q(0, 1));
        assert_eq!(above.cmp_magnitude(&big), Ordering::Greater);
        assert_eq!(big.cmp_magnitude(&log), Ordering::Greater);
        assert_eq!(log.cmp_magnitude(&one), Ordering::Greater);
        assert!(log.is_infinite() && !one.is_infinite());
        assert!(Scale::AboveAllPowers.mul(Scale::BelowAllPowers).is_err());
    }

    #[test]
    fn growing_exponential_is_infinite() {
        let v = exp_of("d^(-1)", "1");
        assert_eq!(v.classify().unwrap(), NumberClass::Infinite(Sign::Positive));
        assert_eq!(v.escape_token().unwrap().magnitude, Magnitude::SuperPolyInfinite);
        assert_eq!(v.mul(&s("d")).unwrap().classify().unwrap(), NumberClass::Infinite(Sign::Positive));
        assert_eq!(v.recip().unwrap().classify().unwrap(), NumberClass::Infinitesimal(Sign::Positive));
    }

    #[test]
    fn exponential_difference_keeps_factor() {
        let a = exp_of("d^(-1)", "1 + d + 1/2*d^2 + O(d^3)");
        let b = exp_of("d^(-1)", "1");
        let diff = a.sub(&b).unwrap();
        assert_eq!(diff.to_string(), "exp(d^(-1))*(d + 1/2*d^2 + O(d^3))");
        assert!(!a.approx(&b).unwrap());
        let small = exp_of("-d^(-1)", "1");
        assert!(small.approx(&LcValue::zero()).unwrap());
        assert_eq!(s("5 + O(d^4)").add(&small).unwrap(), s("5 + O(d^4)"));
    }

    #[test]
    fn logarithm_magnitudes() {
        let ln_rho = log_form("1".parse().unwrap(), LcNumber::zero());
        assert_eq!(ln_rho.classify().unwrap(), NumberClass::Infinite(Sign::Negative));
        assert_eq!(ln_rho.escape_token().unwrap().magnitude, Magnitude::SubPolyInfinite);
        let rho_ln = ln_rho.mul(&s("d + O(d^16)")).unwrap();
        assert_eq!(rho_ln.classify().unwrap(), NumberClass::Infinitesimal(Sign::Negative));
        assert!(ln_rho.sub(&ln_rho).unwrap().is_exact_zero());
        let inv = ln_rho.recip().unwrap();
        assert_eq!(inv.classify().unwrap(), NumberClass::Infinitesimal(Sign::Negative));
        assert_eq!(ln_rho.mul(&exp_of("d^(-1)", "1")).unwrap().classify().unwrap(), NumberClass::Infinite(Sign::Negative));
    }

    #[test]
    fn oscillation_rules() {
        let sin = osc_form(vec![wave("d^(-1)".parse().unwrap(), "1".parse().unwrap(), LcNumber::zero())], LcNumber::zero());
        let token = sin.escape_token().unwrap();
        assert_eq!(token.to_string(), "BoundedOscillation([-1, 1])");
        assert!(matches!(sin.classify(), Err(Error::Undecidable(_))));
        assert!(matches!(sin.standard_part(), Err(Error::Undefined(_))));
        let damped = sin.mul(&s("d + O(d^16)")).unwrap();
        assert_eq!(damped.classify().unwrap(), NumberClass::Infinitesimal(Sign::Indefinite));
        assert_eq!(damped.standard_part().unwrap(), ExtReal::Real(Coeff::from_int(0, Backend::Exact)));
        let shifted = sin.add(&s("3")).unwrap();
        assert_eq!(shifted.classify().unwrap(), NumberClass::FiniteAppreciable(Sign::Positive));
        assert!(sin.sub(&sin).unwrap().is_exact_zero());
    }

    #[test]
    fn squares_of_sine_and_cosine_sum_to_one() {
        let phase: LcNumber = "d^(-1)".parse().unwrap();
        let sin = osc_form(vec![wave(phase.clone(), "1".parse().unwrap(), LcNumber::zero())], LcNumber::zero());
        let cos = osc_form(vec![wave(phase, LcNumber::zero(), "1".parse().unwrap())], LcNumber::zero());
        let total = sin.mul(&sin).unwrap().add(&cos.mul(&cos).unwrap()).unwrap();
        assert_eq!(total, s("1"));
    }

    #[test]
    fn indeterminate_products_are_refused() {
        let up = exp_of("d^(-1)", "1");
        let down = log_form("1".parse().unwrap(), LcNumber::zero()).mul(&exp_of("-d^(-1)", "1")).unwrap();
        assert!(matches!(up.mul(&down), Err(Error::UnsupportedEscape(_))));
    }
}
