//! Series coefficients: exact rationals or fixed-point decimals.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;
use crate::error::{Error, Result};

/// Which number system coefficients live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Backend {
    Exact,
    Decimal { digits: u32 },
}

impl Backend {
    pub const DEFAULT_DIGITS: u32 = 50;

    pub fn decimal() -> Self {
        Backend::Decimal { digits: Self::DEFAULT_DIGITS }
    }
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Exact
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Coeff {
    Exact(BigRational),
    Decimal(Decimal),
}

fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    let r = n.nth_root(k);
    (num_traits::pow(r.clone(), k as usize) == *n).then_some(r)
}

impl Coeff {
    pub fn from_rational(q: BigRational, backend: Backend) -> Self {
        match backend {
            Backend::Exact => Coeff::Exact(q),
            Backend::Decimal { digits } => Coeff::Decimal(Decimal::from_rational(&q, digits)),
        }
    }

    pub fn from_int(i: i64, backend: Backend) -> Self {
        Self::from_rational(BigRational::from_integer(i.into()), backend)
    }

    pub fn zero_like(&self) -> Self {
        match self {
            Coeff::Exact(_) => Coeff::Exact(BigRational::zero()),
            Coeff::Decimal(d) => Coeff::Decimal(Decimal::zero(d.digits())),
        }
    }

    pub fn one_like(&self) -> Self {
        match self {
            Coeff::Exact(_) => Coeff::Exact(BigRational::one()),
            Coeff::Decimal(d) => Coeff::Decimal(Decimal::one(d.digits())),
        }
    }

    pub fn rational_like(&self, q: BigRational) -> Self {
        Self::from_rational(q, self.backend())
    }

    pub fn backend(&self) -> Backend {
        match self {
            Coeff::Exact(_) => Backend::Exact,
            Coeff::Decimal(d) => Backend::Decimal { digits: d.digits() },
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Exact(_))
    }

    /// Zero test; decimals compare against the noise threshold.
    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Exact(q) => q.is_zero(),
            Coeff::Decimal(d) => d.is_negligible(),
        }
    }

    pub fn signum(&self) -> i8 {
        match self {
            Coeff::Exact(q) => {
                if q.is_zero() {
                    0
                } else if q.is_negative() {
                    -1
                } else {
                    1
                }
            }
            Coeff::Decimal(d) => d.signum(),
        }
    }

    /// The rational value: exact, or the stored decimal expansion.
    pub fn to_rational(&self) -> BigRational {
        match self {
            Coeff::Exact(q) => q.clone(),
            Coeff::Decimal(d) => d.to_rational(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coeff::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Coeff::Decimal(d) => d.to_f64(),
        }
    }

    fn to_decimal(&self, digits: u32) -> Decimal {
        match self {
            Coeff::Exact(q) => Decimal::from_rational(q, digits),
            Coeff::Decimal(d) => d.clone(),
        }
    }

    fn binary(
        &self,
        other: &Coeff,
        exact: impl FnOnce(&BigRational, &BigRational) -> BigRational,
        dec: impl FnOnce(&Decimal, &Decimal) -> Decimal,
    ) -> Coeff {
        match (self, other) {
            (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(exact(a, b)),
            (Coeff::Decimal(a), Coeff::Decimal(b)) => Coeff::Decimal(dec(a, b)),
            (Coeff::Decimal(a), b) => Coeff::Decimal(dec(a, &b.to_decimal(a.digits()))),
            (a, Coeff::Decimal(b)) => Coeff::Decimal(dec(&a.to_decimal(b.digits()), b)),
        }
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        self.binary(other, |a, b| a + b, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Coeff) -> Coeff {
        self.binary(other, |a, b| a - b, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        self.binary(other, |a, b| a * b, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Exact(q) => Coeff::Exact(-q),
            Coeff::Decimal(d) => Coeff::Decimal(d.neg()),
        }
    }

    pub fn abs(&self) -> Coeff {
        match self {
            Coeff::Exact(q) => Coeff::Exact(q.abs()),
            Coeff::Decimal(d) => Coeff::Decimal(d.abs()),
        }
    }

    pub fn div(&self, other: &Coeff) -> Result<Coeff> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match (self, other) {
            (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(a / b),
            _ => {
                let digits = match (self, other) {
                    (Coeff::Decimal(a), _) => a.digits(),
                    (_, Coeff::Decimal(b)) => b.digits(),
                    _ => unreachable!(),
                };
                let a = self.to_decimal(digits);
                let b = other.to_decimal(digits);
                Coeff::Decimal(a.div(&b).ok_or(Error::DivisionByZero)?)
            }
        })
    }

    pub fn recip(&self) -> Result<Coeff> {
        self.one_like().div(self)
    }

    pub fn scale(&self, q: &BigRational) -> Coeff {
        self.mul(&self.rational_like(q.clone()))
    }

    /// Total order on values (decimal values within noise compare equal).
    pub fn cmp_value(&self, other: &Coeff) -> Ordering {
        match self.sub(other).signum() {
            0 => Ordering::Equal,
            s if s < 0 => Ordering::Less,
            _ => Ordering::Greater,
        }
    }

    pub fn powi(&self, n: i64) -> Result<Coeff> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut acc = self.one_like();
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// `self^q` for rational `q`; in exact mode the result must be rational.
    pub fn pow_rational(&self, q: &Ratio<i64>) -> Result<Coeff> {
        if q.is_integer() {
            return self.powi(*q.numer());
        }
        let (p, r) = (*q.numer(), *q.denom());
        let s = self.signum();
        if s < 0 && r % 2 == 0 {
            return Err(Error::NegativeBase);
        }
        if s == 0 {
            return if p > 0 { Ok(self.zero_like()) } else { Err(Error::DivisionByZero) };
        }
        match self {
            Coeff::Exact(c) => {
                let base = c.abs();
                let num = exact_root(base.numer(), r as u32);
                let den = exact_root(base.denom(), r as u32);
                match (num, den) {
                    (Some(n), Some(d)) => {
                        let root = Coeff::Exact(BigRational::new(n, d));
                        let root = if s < 0 { root.neg() } else { root };
                        root.powi(p)
                    }
                    _ => Err(Error::IrrationalCoefficient(format!("({c})^({q})"))),
                }
            }
            Coeff::Decimal(d) => {
                let digits = d.digits();
                let ln = d.abs().ln().ok_or(Error::DivisionByZero)?;
                let qd = Decimal::from_rational(&BigRational::new(p.into(), r.into()), digits);
                let mag = ln.mul(&qd).exp();
                Ok(Coeff::Decimal(if s < 0 { mag.neg() } else { mag }))
            }
        }
    }

    pub fn exp(&self) -> Result<Coeff> {
        match self {
            Coeff::Exact(q) if q.is_zero() => Ok(self.one_like()),
            Coeff::Exact(q) => Err(Error::IrrationalCoefficient(format!("exp({q})"))),
            Coeff::Decimal(d) => Ok(Coeff::Decimal(d.exp())),
        }
    }

    pub fn ln(&self) -> Result<Coeff> {
        if self.signum() <= 0 {
            return Err(Error::Domain(format!("ln of non-positive value {self}")));
        }
        match self {
            Coeff::Exact(q) if q.is_one() => Ok(self.zero_like()),
            Coeff::Exact(q) => Err(Error::IrrationalCoefficient(format!("ln({q})"))),
            Coeff::Decimal(d) => Ok(Coeff::Decimal(d.ln().expect("positive"))),
        }
    }

    pub fn sin_cos(&self) -> Result<(Coeff, Coeff)> {
        match self {
            Coeff::Exact(q) if q.is_zero() => Ok((self.zero_like(), self.one_like())),
            Coeff::Exact(q) => Err(Error::IrrationalCoefficient(format!("sin/cos({q})"))),
            Coeff::Decimal(d) => {
                let (s, c) = d.sin_cos();
                Ok((Coeff::Decimal(s), Coeff::Decimal(c)))
            }
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Exact(q) => write!(f, "{q}"),
            Coeff::Decimal(d) => write!(f, "{d}"),
        }
    }
}
