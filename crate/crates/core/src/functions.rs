//! Elementary functions extended to [`LcValue`].
//!
//! Finite series arguments are expanded as Taylor series about their standard
//! part, to the depth the argument's order bound supports. Infinite arguments
//! are split into a purely infinite part `A` and a finite remainder `F`:
//! `exp(A + F) = e^A·exp(F)` becomes an exponential escape, `sin(A + F)` and
//! `cos(A + F)` expand by angle addition into oscillation escapes, and
//! `ln(c·ρ^e·(1 + t)) = e·ln ρ + ln c + ln(1 + t)` becomes a logarithmic
//! escape.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::coeff::{Backend, Coeff};
use crate::error::{Error, Result};
use crate::number::{Bound, Exponent, LcNumber, NumberClass, Sign};
use crate::value::{absorb_series, exp_form, log_form, osc_form, rational_to_exponent, Escape, LcValue, Scale, Tilt, Wave};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Exp, Func::Ln, Func::Sin, Func::Cos, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Func {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Func::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownIdentifier(s.to_string()))
    }
}

pub fn apply(func: Func, x: &LcValue) -> Result<LcValue> {
    match func {
        Func::Exp => exp(x),
        Func::Ln => ln(x),
        Func::Sin => sin_cos(x).map(|(s, _)| s),
        Func::Cos => sin_cos(x).map(|(_, c)| c),
        Func::Sqrt => sqrt(x),
        Func::Abs => abs(x),
    }
}

fn factorial_inv(k: usize) -> BigRational {
    let f: BigInt = (1..=k as u64).map(BigInt::from).product();
    BigRational::new(BigInt::one(), f)
}

/// Splits a finite series into its constant coefficient and infinitesimal
/// remainder.
fn split_standard(f: &LcNumber) -> Result<(Option<Coeff>, LcNumber)> {
    let c = f.coefficient(Exponent::zero())?.cloned();
    if let Some((e, _)) = f.leading() {
        if *e < Exponent::zero() {
            return Err(Error::Domain("finite argument expected".into()));
        }
    }
    let t = LcNumber::from_terms(f.terms().iter().filter(|(e, _)| !e.is_zero()).cloned(), f.order_bound());
    Ok((c, t))
}

fn exp_finite(f: &LcNumber) -> Result<LcNumber> {
    let backend = f.backend().unwrap_or_default();
    let (c, t) = split_standard(f)?;
    let series = LcNumber::power_series(&t, backend, |k| Ok(Coeff::from_rational(factorial_inv(k), backend)))?;
    match c {
        Some(c) => Ok(series.scale(&c.exp()?)),
        None => Ok(series),
    }
}

/// `(sin F, cos F)` for a finite series `F`.
fn sin_cos_finite(f: &LcNumber) -> Result<(LcNumber, LcNumber)> {
    let backend = f.backend().unwrap_or_default();
    let (c, t) = split_standard(f)?;
    let signed = |k: usize, parity: usize| -> Coeff {
        if k % 2 != parity {
            return Coeff::from_int(0, backend);
        }
        let q = factorial_inv(k);
        let q = if (k / 2) % 2 == 1 { -q } else { q };
        Coeff::from_rational(q, backend)
    };
    let st = LcNumber::power_series(&t, backend, |k| Ok(signed(k, 1)))?;
    let ct = LcNumber::power_series(&t, backend, |k| Ok(signed(k, 0)))?;
    match c {
        None => Ok((st, ct)),
        Some(c) => {
            let (sc, cc) = c.sin_cos()?;
            Ok((st.scale(&cc).add(&ct.scale(&sc)), ct.scale(&cc).sub(&st.scale(&sc))))
        }
    }
}

/// `ln(1 + t)` for infinitesimal `t`.
fn ln1p(t: &LcNumber, backend: Backend) -> Result<LcNumber> {
    LcNumber::power_series(t, backend, |k| {
        if k == 0 {
            return Ok(Coeff::from_int(0, backend));
        }
        let q = BigRational::new(BigInt::one(), BigInt::from(k as u64));
        Ok(Coeff::from_rational(if k % 2 == 0 { -q } else { q }, backend))
    })
}

fn exp(x: &LcValue) -> Result<LcValue> {
    match x {
        LcValue::Series(n) => {
            let (a, f) = n.split_infinite()?;
            Ok(exp_form(a, exp_finite(&f)?))
        }
        LcValue::Escape(Escape::Exp { arg, .. }) if !arg.leading().is_some_and(|(_, c)| c.signum() > 0) => {
            let one = LcNumber::constant(Coeff::from_int(1, x.backend()), Bound::Exact);
            Ok(LcValue::Series(absorb_series(&one, Scale::BelowAllPowers)))
        }
        LcValue::Escape(Escape::Log { log_coeff, rest }) => {
            if let Some(Coeff::Exact(q)) = log_coeff.as_constant() {
                if let Some(a) = rational_to_exponent(q) {
                    let power = exp(&LcValue::Series(rest.clone()))?;
                    let rel = match log_coeff.order_bound() {
                        Bound::Exact => Scale::BelowAllPowers,
                        Bound::At(b) => Scale::Power(b, Tilt::Up),
                    };
                    return power
                        .mul(&LcValue::Series(LcNumber::term(Coeff::from_int(1, x.backend()), a, Bound::Exact)))?
                        .mul(&relative_one(x.backend(), rel));
                }
            }
            let log_term = log_form(log_coeff.clone(), LcNumber::zero());
            exp_by_magnitude(x, Some((rest, &log_term)))
        }
        LcValue::Escape(Escape::Osc { waves, offset }) => {
            let amp = amplitude_valuation(waves);
            if amp > Exponent::zero() {
                return exp(&LcValue::Series(offset.clone()))?.mul(&relative_one(x.backend(), Scale::power(amp)));
            }
            Err(Error::unsupported(format!("exp of the oscillating value {x}")))
        }
        _ => exp_by_magnitude(x, None),
    }
}

/// Fallback for `exp` driven only by the sign and magnitude of the argument.
/// `split` optionally separates the argument into a series part and a small
/// escape part.
fn exp_by_magnitude(x: &LcValue, split: Option<(&LcNumber, &LcValue)>) -> Result<LcValue> {
    if let Some((series, small)) = split {
        if small.classify()?.is_negligible() {
            let scale = small.asymptotic().map_or(Scale::BelowAllPowers, |a| a.scale);
            return exp(&LcValue::Series(series.clone()))?.mul(&relative_one(x.backend(), scale));
        }
    }
    match x.classify()? {
        NumberClass::Infinite(Sign::Positive) => Ok(LcValue::opaque(Sign::Positive, Scale::AboveAllPowers)),
        NumberClass::Infinite(_) => Ok(LcValue::opaque(Sign::Positive, Scale::BelowAllPowers)),
        NumberClass::Zero | NumberClass::Infinitesimal(_) => {
            let scale = x.asymptotic().map_or(Scale::BelowAllPowers, |a| a.scale);
            Ok(relative_one(x.backend(), scale))
        }
        NumberClass::FiniteAppreciable(_) => Err(Error::unsupported(format!("exp of {x}"))),
    }
}

/// `1 + O(r)` for a quantity `r` of the given scale.
fn relative_one(backend: Backend, scale: Scale) -> LcValue {
    let one = LcNumber::constant(Coeff::from_int(1, backend), Bound::Exact);
    LcValue::Series(absorb_series(&one, scale))
}

fn amplitude_valuation(waves: &[Wave]) -> Exponent {
    waves
        .iter()
        .flat_map(|w| [&w.sin_coeff, &w.cos_coeff])
        .filter_map(|c| c.valuation().finite())
        .min()
        .expect("oscillation has a wave")
}

fn ln(x: &LcValue) -> Result<LcValue> {
    match x {
        LcValue::Series(n) => {
            if n.is_exact_zero() {
                return Err(Error::Domain("ln of 0".into()));
            }
            match n.sign() {
                None => return Err(Error::precision(format!("ln of {n}, which is indistinguishable from 0"))),
                Some(Sign::Negative) => return Err(Error::Domain(format!("ln of negative value {n}"))),
                _ => {}
            }
            let (e, c, t) = n.factor_leading()?;
            let backend = c.backend();
            let rest = ln1p(&t, backend)?;
            let rest = if c.to_rational().is_one() && c.is_exact() {
                rest
            } else {
                rest.add(&LcNumber::constant(c.ln()?, Bound::Exact))
            };
            let a = LcNumber::constant(Coeff::Exact(BigRational::new((*e.numer()).into(), (*e.denom()).into())), Bound::Exact);
            Ok(log_form(a, rest))
        }
        LcValue::Escape(Escape::Exp { arg, factor }) => {
            let lf = ln(&LcValue::Series(factor.clone()))?;
            lf.add(&LcValue::Series(arg.clone()))
        }
        _ => {
            if let Some((s, r)) = x.dominant_series() {
                let lead = s.leading().map(|(e, _)| *e).unwrap_or_default();
                let rel = r.mul(Scale::power(-lead))?;
                let base = ln(&LcValue::Series(s))?;
                return base.add(&LcValue::Series(absorb_series(&LcNumber::zero(), rel)));
            }
            let a = x.asymptotic().ok_or_else(|| Error::Domain("ln of 0".into()))?;
            match a.sign {
                Sign::Negative => return Err(Error::Domain(format!("ln of negative value {x}"))),
                Sign::Indefinite => return Err(Error::Undecidable(format!("sign of {x} is not determined"))),
                Sign::Positive => {}
            }
            match a.scale {
                Scale::Power(e, _) if e.is_negative() => Ok(LcValue::opaque(Sign::Positive, Scale::Power(Exponent::zero(), Tilt::Up))),
                Scale::Power(e, _) if e.is_positive() => Ok(LcValue::opaque(Sign::Negative, Scale::Power(Exponent::zero(), Tilt::Up))),
                Scale::Power(_, Tilt::Up) => Ok(LcValue::opaque(Sign::Positive, Scale::Power(Exponent::zero(), Tilt::Up))),
                Scale::Power(_, Tilt::Down) => Ok(LcValue::opaque(Sign::Negative, Scale::Power(Exponent::zero(), Tilt::Up))),
                _ => Err(Error::unsupported(format!("ln of {x}"))),
            }
        }
    }
}

fn sin_cos(x: &LcValue) -> Result<(LcValue, LcValue)> {
    match x {
        LcValue::Series(n) => {
            let (a, f) = n.split_infinite()?;
            let (sf, cf) = sin_cos_finite(&f)?;
            if a.is_indistinguishable_from_zero() {
                return Ok((LcValue::Series(sf), LcValue::Series(cf)));
            }
            // sin(A+F) = sin A cos F + cos A sin F; cos(A+F) = cos A cos F - sin A sin F
            let sin = osc_form(vec![make_wave(a.clone(), cf.clone(), sf.clone())], LcNumber::zero());
            let cos = osc_form(vec![make_wave(a, sf.neg(), cf)], LcNumber::zero());
            Ok((sin, cos))
        }
        LcValue::Escape(Escape::Osc { waves, offset }) if amplitude_valuation(waves) > Exponent::zero() => {
            let (s, c) = sin_cos(&LcValue::Series(offset.clone()))?;
            let err = LcValue::Series(LcNumber::big_o(amplitude_valuation(waves)));
            Ok((s.add(&err)?, c.add(&err)?))
        }
        _ => match x.classify()? {
            NumberClass::Zero | NumberClass::Infinitesimal(_) => {
                let a = x.asymptotic().expect("non-zero escape");
                let cube = a.scale.mul(a.scale)?.mul(a.scale)?;
                let sin = x.add(&LcValue::Series(absorb_series(&LcNumber::zero(), cube)))?;
                let cos = relative_one(x.backend(), a.scale.mul(a.scale)?);
                Ok((sin, cos))
            }
            NumberClass::Infinite(_) => {
                let bounded = LcValue::opaque(Sign::Indefinite, Scale::power(Exponent::zero()));
                Ok((bounded.clone(), bounded))
            }
            NumberClass::FiniteAppreciable(_) => Err(Error::unsupported(format!("sin/cos of {x}"))),
        },
    }
}

fn make_wave(phase: LcNumber, sin_coeff: LcNumber, cos_coeff: LcNumber) -> Wave {
    if phase.leading().is_some_and(|(_, c)| c.signum() < 0) {
        Wave { phase: phase.neg(), sin_coeff: sin_coeff.neg(), cos_coeff }
    } else {
        Wave { phase, sin_coeff, cos_coeff }
    }
}

fn sqrt(x: &LcValue) -> Result<LcValue> {
    if x.is_exact_zero() {
        return Ok(LcValue::zero());
    }
    match x.pow_rational(Exponent::new(1, 2)) {
        Err(Error::NegativeBase) => Err(Error::Domain(format!("sqrt of negative value {x}"))),
        other => other,
    }
}

fn abs(x: &LcValue) -> Result<LcValue> {
    if let LcValue::Series(n) = x {
        if n.is_exact_zero() {
            return Ok(x.clone());
        }
        return match n.sign() {
            Some(Sign::Negative) => Ok(x.neg()),
            Some(_) => Ok(x.clone()),
            None => Err(Error::precision(format!("sign of {n} is not determined"))),
        };
    }
    match x.asymptotic() {
        None => Ok(x.clone()),
        Some(a) => match a.sign {
            Sign::Negative => Ok(x.neg()),
            Sign::Positive => Ok(x.clone()),
            Sign::Indefinite => Ok(LcValue::opaque(Sign::Indefinite, a.scale)),
        },
    }
}

/// `x^y = exp(y·ln x)`, with exact handling of zero bases and of exponents
/// that are rational constants.
pub fn pow_general(x: &LcValue, y: &LcValue) -> Result<LcValue> {
    if y.is_exact_zero() {
        return Ok(LcValue::Series(LcNumber::constant(Coeff::from_int(1, x.backend()), Bound::Exact)));
    }
    if x.is_exact_zero() {
        return match y.classify()? {
            NumberClass::Zero => Err(Error::precision("0^y with y indistinguishable from 0")),
            NumberClass::Infinitesimal(Sign::Positive) | NumberClass::FiniteAppreciable(Sign::Positive) | NumberClass::Infinite(Sign::Positive) => {
                Ok(LcValue::zero())
            }
            NumberClass::Infinitesimal(Sign::Indefinite) => Err(Error::Undecidable("0^y with y of undetermined sign".into())),
            _ => Err(Error::DivisionByZero),
        };
    }
    if let (LcValue::Series(base), LcValue::Series(exp_)) = (x, y) {
        if let Some(Coeff::Exact(q)) = exp_.as_constant() {
            if let Some(q) = rational_to_exponent(q) {
                let raw = base.pow_rational(q)?;
                let rel = match exp_.order_bound() {
                    Bound::Exact => return Ok(LcValue::Series(raw)),
                    Bound::At(b) if base.valuation() == Bound::At(Exponent::zero()) => Scale::power(b),
                    Bound::At(b) => Scale::Power(b, Tilt::Up),
                };
                return LcValue::Series(raw).mul(&relative_one(x.backend(), rel));
            }
        }
    }
    exp(&y.mul(&ln(x)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::ExtReal;
    use crate::value::Magnitude;

    fn exact(s: &str) -> LcValue {
        LcValue::Series(s.parse().unwrap())
    }

    fn dec(s: &str) -> LcValue {
        LcValue::Series(LcNumber::parse(s, Backend::decimal()).unwrap())
    }

    #[test]
    fn sine_of_rho() {
        let s = apply(Func::Sin, &exact("d + O(d^5)")).unwrap();
        assert_eq!(s.to_string(), "d - 1/6*d^3 + O(d^5)");
        assert_eq!(s.classify().unwrap(), NumberClass::Infinitesimal(Sign::Positive));
    }

    #[test]
    fn escapes_from_infinite_arguments() {
        let e = apply(Func::Exp, &exact("d^(-1) + O(d^16)")).unwrap();
        let t = e.escape_token().unwrap();
        assert_eq!((t.sign, t.magnitude), (Sign::Positive, Magnitude::SuperPolyInfinite));
        let l = apply(Func::Ln, &exact("d + O(d^16)")).unwrap();
        let t = l.escape_token().unwrap();
        assert_eq!((t.sign, t.magnitude), (Sign::Negative, Magnitude::SubPolyInfinite));
        assert_eq!(l.classify().unwrap(), NumberClass::Infinite(Sign::Negative));
        let s = apply(Func::Sin, &exact("d^(-1) + O(d^16)")).unwrap();
        assert_eq!(s.escape_token().unwrap().to_string(), "BoundedOscillation([-1, 1])");
    }

    #[test]
    fn rho_log_rho_is_negative_infinitesimal() {
        let r = exact("d + O(d^16)");
        let v = r.mul(&apply(Func::Ln, &r).unwrap()).unwrap();
        assert_eq!(v.classify().unwrap(), NumberClass::Infinitesimal(Sign::Negative));
    }

    #[test]
    fn sqrt_difference_quotient() {
        let x = dec("1 + d + O(d^16)");
        let q = apply(Func::Sqrt, &x).unwrap().sub(&dec("1")).unwrap().div(&dec("d")).unwrap();
        let st = q.standard_part().unwrap();
        assert!(st.within(&ExtReal::Real(Coeff::from_rational(BigRational::new(1.into(), 2.into()), Backend::decimal())), 1e-40));
    }

    #[test]
    fn exact_mode_refuses_irrational_values() {
        assert!(matches!(apply(Func::Exp, &exact("1 + d + O(d^8)")), Err(Error::IrrationalCoefficient(_))));
        assert_eq!(apply(Func::Exp, &exact("d + O(d^3)")).unwrap().to_string(), "1 + d + 1/2*d^2 + O(d^3)");
        assert!(matches!(apply(Func::Ln, &exact("-1")), Err(Error::Domain(_))));
        assert!(matches!(apply(Func::Sqrt, &exact("-1")), Err(Error::Domain(_))));
        assert!(apply(Func::Abs, &exact("O(d^3)")).unwrap_err().is_precision());
    }

    #[test]
    fn exp_of_log_power() {
        // (ρ)^(1/2) through exp(ln ρ / 2)
        let half = exact("1/2");
        let v = pow_general(&exact("d + O(d^16)"), &half).unwrap();
        assert_eq!(v.as_series().unwrap().leading().unwrap().0, Exponent::new(1, 2));
        let ln = apply(Func::Ln, &exact("d")).unwrap();
        let back = apply(Func::Exp, &ln.mul(&exact("3")).unwrap()).unwrap();
        assert_eq!(back.as_series().unwrap().leading().unwrap().0, Exponent::new(3, 1));
    }

    #[test]
    fn zero_base_powers() {
        assert!(pow_general(&LcValue::zero(), &exact("d")).unwrap().is_exact_zero());
        assert_eq!(pow_general(&LcValue::zero(), &LcValue::zero()).unwrap(), exact("1"));
        assert_eq!(pow_general(&LcValue::zero(), &exact("-1")), Err(Error::DivisionByZero));
    }

    #[test]
    fn boundary_power_tends_to_inverse_e() {
        let x = dec("1 - d + O(d^16)");
        let n = dec("d^(-1) + O(d^16)");
        let v = pow_general(&x, &n).unwrap();
        let e_inv = Coeff::from_int(-1, Backend::decimal()).exp().unwrap();
        assert!(v.standard_part().unwrap().within(&ExtReal::Real(e_inv), 1e-30));
        let tiny = pow_general(&dec("9/10"), &n).unwrap();
        assert_eq!(tiny.classify().unwrap(), NumberClass::Infinitesimal(Sign::Positive));
        let tinier = pow_general(&dec("d + O(d^16)"), &n).unwrap();
        assert_eq!(tinier.classify().unwrap(), NumberClass::Infinitesimal(Sign::Positive));
    }

    #[test]
    fn sine_difference_at_infinity_is_infinitesimal() {
        let a = apply(Func::Sin, &dec("d^(-1) + O(d^16)")).unwrap();
        let b = apply(Func::Sin, &dec("d^(-1) + d + O(d^16)")).unwrap();
        assert!(a.approx(&b).unwrap());
        let s2 = a.mul(&a).unwrap();
        let c = apply(Func::Cos, &dec("d^(-1) + O(d^16)")).unwrap();
        let one = s2.add(&c.mul(&c).unwrap()).unwrap();
        assert!(one.approx(&dec("1")).unwrap());
    }
}
