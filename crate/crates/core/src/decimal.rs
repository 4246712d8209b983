//! Fixed-point decimal numbers for the high-precision coefficient backend.
//!
//! A [`Decimal`] stores `mantissa * 10^-digits`. All values taking part in one
//! computation share the same `digits`; mixed operands are rescaled to the
//! larger one. Transcendental functions are evaluated with guard digits and
//! rounded back.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Number of low-order digits treated as noise when testing for zero.
pub const NOISE_DIGITS: u32 = 10;

const GUARD: u32 = 12;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: BigInt,
    digits: u32,
}

fn pow10(n: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), n as usize)
}

/// Integer division rounding half away from zero.
fn div_round(n: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.div_rem(d);
    if (r.abs() * 2u32) >= d.abs() {
        if (n.sign() == Sign::Minus) ^ (d.sign() == Sign::Minus) {
            q - 1u32
        } else {
            q + 1u32
        }
    } else {
        q
    }
}

fn rescale(m: &BigInt, from: u32, to: u32) -> BigInt {
    match from.cmp(&to) {
        Ordering::Equal => m.clone(),
        Ordering::Less => m * pow10(to - from),
        Ordering::Greater => div_round(m, &pow10(from - to)),
    }
}

impl Decimal {
    pub fn zero(digits: u32) -> Self {
        Decimal { mantissa: BigInt::zero(), digits }
    }

    pub fn one(digits: u32) -> Self {
        Decimal { mantissa: pow10(digits), digits }
    }

    pub fn from_rational(r: &BigRational, digits: u32) -> Self {
        let n = r.numer() * pow10(digits);
        Decimal { mantissa: div_round(&n, r.denom()), digits }
    }

    pub fn from_int(i: i64, digits: u32) -> Self {
        Decimal { mantissa: BigInt::from(i) * pow10(digits), digits }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// The exact rational value of the stored mantissa.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), pow10(self.digits))
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }

    /// True when `|self| < 10^-(digits - NOISE_DIGITS)`.
    pub fn is_negligible(&self) -> bool {
        let noise = self.digits.min(NOISE_DIGITS);
        self.mantissa.abs() < pow10(noise)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Sign with negligible values reported as zero.
    pub fn signum(&self) -> i8 {
        if self.is_negligible() {
            0
        } else if self.mantissa.is_negative() {
            -1
        } else {
            1
        }
    }

    fn aligned(&self, other: &Decimal) -> (BigInt, BigInt, u32) {
        let d = self.digits.max(other.digits);
        (
            rescale(&self.mantissa, self.digits, d),
            rescale(&other.mantissa, other.digits, d),
            d,
        )
    }

    pub fn add(&self, other: &Decimal) -> Decimal {
        let (a, b, d) = self.aligned(other);
        Decimal { mantissa: a + b, digits: d }
    }

    pub fn sub(&self, other: &Decimal) -> Decimal {
        let (a, b, d) = self.aligned(other);
        Decimal { mantissa: a - b, digits: d }
    }

    pub fn neg(&self) -> Decimal {
        Decimal { mantissa: -&self.mantissa, digits: self.digits }
    }

    pub fn abs(&self) -> Decimal {
        Decimal { mantissa: self.mantissa.abs(), digits: self.digits }
    }

    pub fn mul(&self, other: &Decimal) -> Decimal {
        let (a, b, d) = self.aligned(other);
        Decimal { mantissa: div_round(&(a * b), &pow10(d)), digits: d }
    }

    /// `None` when the divisor is exactly zero.
    pub fn div(&self, other: &Decimal) -> Option<Decimal> {
        let (a, b, d) = self.aligned(other);
        if b.is_zero() {
            return None;
        }
        Some(Decimal { mantissa: div_round(&(a * pow10(d)), &b), digits: d })
    }

    pub fn cmp_value(&self, other: &Decimal) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }

    pub fn sqrt(&self) -> Option<Decimal> {
        if self.mantissa.is_negative() {
            return None;
        }
        let n = &self.mantissa * pow10(self.digits);
        Some(Decimal { mantissa: n.sqrt(), digits: self.digits })
    }

    pub fn exp(&self) -> Decimal {
        let w = self.digits + GUARD;
        let x = rescale(&self.mantissa, self.digits, w);
        Decimal { mantissa: rescale(&exp_fixed(&x, w), w, self.digits), digits: self.digits }
    }

    /// Natural logarithm; `None` for non-positive arguments.
    pub fn ln(&self) -> Option<Decimal> {
        if !self.mantissa.is_positive() {
            return None;
        }
        let w = self.digits + GUARD;
        let x = rescale(&self.mantissa, self.digits, w);
        Some(Decimal { mantissa: rescale(&ln_fixed(&x, w), w, self.digits), digits: self.digits })
    }

    pub fn sin(&self) -> Decimal {
        let (s, _) = self.sin_cos();
        s
    }

    pub fn cos(&self) -> Decimal {
        let (_, c) = self.sin_cos();
        c
    }

    pub fn sin_cos(&self) -> (Decimal, Decimal) {
        let magnitude = (&self.mantissa / pow10(self.digits)).abs().to_string().len() as u32;
        let w = self.digits + GUARD + magnitude;
        let x = rescale(&self.mantissa, self.digits, w);
        let (s, c) = sin_cos_fixed(&x, w);
        (
            Decimal { mantissa: rescale(&s, w, self.digits), digits: self.digits },
            Decimal { mantissa: rescale(&c, w, self.digits), digits: self.digits },
        )
    }

    pub fn pi(digits: u32) -> Decimal {
        let w = digits + GUARD;
        Decimal { mantissa: rescale(&pi_fixed(w), w, digits), digits }
    }
}

fn exp_fixed(x: &BigInt, w: u32) -> BigInt {
    let one = pow10(w);
    if x.is_negative() {
        let e = exp_fixed(&-x, w);
        return div_round(&(&one * &one), &e);
    }
    // halve until |r| < 2^-10, sum the series, square back up
    let int_bits = (x / &one).bits();
    let k = int_bits + 10;
    let w2 = w + (k as u32) * 3 / 10 + 6;
    let one2 = pow10(w2);
    let r = div_round(&rescale(x, w, w2), &(BigInt::one() << k));
    let mut sum = one2.clone();
    let mut term = one2.clone();
    let mut i = 1u32;
    loop {
        term = div_round(&(&term * &r), &(&one2 * i));
        if term.is_zero() {
            break;
        }
        sum += &term;
        i += 1;
    }
    for _ in 0..k {
        sum = div_round(&(&sum * &sum), &one2);
    }
    rescale(&sum, w2, w)
}

fn atanh_fixed(t: &BigInt, one: &BigInt) -> BigInt {
    let t2 = div_round(&(t * t), one);
    let mut power = t.clone();
    let mut sum = t.clone();
    let mut i = 1u32;
    loop {
        power = div_round(&(&power * &t2), one);
        let term = &power / (2 * i + 1);
        if term.is_zero() {
            break;
        }
        sum += term;
        i += 1;
    }
    sum
}

fn ln_fixed(x: &BigInt, w: u32) -> BigInt {
    let w2 = w + 10;
    let one = pow10(w2);
    let two = &one * 2u32;
    let mut y = rescale(x, w, w2);
    let mut e: i64 = 0;
    while y >= two {
        y = div_round(&y, &BigInt::from(2u32));
        e += 1;
    }
    while y < one {
        y *= 2u32;
        e -= 1;
    }
    let t = div_round(&((&y - &one) * &one), &(&y + &one));
    let ln_y = atanh_fixed(&t, &one) * 2u32;
    let ln2 = atanh_fixed(&div_round(&one, &BigInt::from(3u32)), &one) * 2u32;
    rescale(&(ln_y + ln2 * e), w2, w)
}

fn atan_inv_fixed(n: u32, one: &BigInt) -> BigInt {
    let n2 = BigInt::from(n) * n;
    let mut power = one / n;
    let mut sum = power.clone();
    let mut i = 1u32;
    loop {
        power = &power / &n2;
        let term = &power / (2 * i + 1);
        if term.is_zero() {
            break;
        }
        if i % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        i += 1;
    }
    sum
}

fn pi_fixed(w: u32) -> BigInt {
    let w2 = w + 5;
    let one = pow10(w2);
    let pi = atan_inv_fixed(5, &one) * 16u32 - atan_inv_fixed(239, &one) * 4u32;
    rescale(&pi, w2, w)
}

fn sin_cos_fixed(x: &BigInt, w: u32) -> (BigInt, BigInt) {
    let one = pow10(w);
    let two_pi = pi_fixed(w) * 2u32;
    let k = div_round(x, &two_pi);
    let r = x - k * &two_pi;
    let mut sin = BigInt::zero();
    let mut cos = BigInt::zero();
    let mut term = one.clone();
    let mut n = 0u32;
    loop {
        match n % 4 {
            0 => cos += &term,
            1 => sin += &term,
            2 => cos -= &term,
            _ => sin -= &term,
        }
        n += 1;
        term = div_round(&(&term * &r), &(&one * n));
        if term.is_zero() {
            break;
        }
    }
    (sin, cos)
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.mantissa.is_negative();
        let digits = self.mantissa.abs().to_string();
        let scale = self.digits as usize;
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int, frac) = padded.split_at(padded.len() - scale);
        let frac = frac.trim_end_matches('0');
        if neg {
            f.write_str("-")?;
        }
        if frac.is_empty() {
            write!(f, "{int}")
        } else {
            write!(f, "{int}.{frac}")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDecimalError;

impl fmt::Display for ParseDecimalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid decimal literal")
    }
}

/// Parses a plain decimal literal into the exact rational it denotes.
pub fn parse_decimal_rational(s: &str) -> Result<BigRational, ParseDecimalError> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(ParseDecimalError);
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(ParseDecimalError);
    }
    let all = format!("{int}{frac}");
    let mantissa: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| ParseDecimalError)? };
    let mantissa = if neg { -mantissa } else { mantissa };
    Ok(BigRational::new(mantissa, pow10(frac.len() as u32)))
}

/// Parses `p/q` or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseDecimalError> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_decimal_rational(d.trim())?;
            if d.is_zero() {
                return Err(ParseDecimalError);
            }
            Ok(parse_decimal_rational(n.trim())? / d)
        }
        None => parse_decimal_rational(s),
    }
}

impl Decimal {
    pub fn parse_with_digits(s: &str, digits: u32) -> Result<Decimal, ParseDecimalError> {
        parse_decimal_rational(s).map(|r| Decimal::from_rational(&r, digits))
    }
}

impl FromStr for Decimal {
    type Err = ParseDecimalError;

    /// Uses the number of fractional digits in the literal as the precision.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let frac = s.split_once('.').map_or(0, |(_, f)| f.len() as u32);
        Decimal::parse_with_digits(s, frac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        Decimal::parse_with_digits(s, 50).unwrap()
    }

    fn close(a: &Decimal, b: &str, tol_digits: u32) {
        let diff = a.sub(&d(b)).abs();
        let tol = Decimal::from_rational(&BigRational::new(1.into(), pow10(tol_digits)), 50);
        assert!(diff.cmp_value(&tol) == Ordering::Less, "{a} vs {b}");
    }

    const E: &str = "2.71828182845904523536028747135266249775724709369995";
    const PI: &str = "3.14159265358979323846264338327950288419716939937510";
    const LN2: &str = "0.69314718055994530941723212145817656807550013436025";

    #[test]
    fn constants_to_fifty_digits() {
        close(&Decimal::one(50).exp(), E, 48);
        close(&Decimal::pi(50), PI, 49);
        close(&Decimal::from_int(2, 50).ln().unwrap(), LN2, 48);
    }

    #[test]
    fn exp_ln_inverse() {
        for s in ["0.001", "0.5", "3", "-7.25", "40"] {
            let x = d(s);
            close(&x.exp().ln().unwrap(), s, 40);
        }
    }

    #[test]
    fn trig_identities() {
        let x = d("123.456");
        let (s, c) = x.sin_cos();
        close(&s.mul(&s).add(&c.mul(&c)), "1", 45);
        close(&Decimal::pi(50).sin(), "0", 45);
        close(&d("0.5").sin(), "0.47942553860420300027328793521557138808180336794060", 48);
    }

    #[test]
    fn sqrt_and_display() {
        close(&d("2").sqrt().unwrap(), "1.41421356237309504880168872420969807856967187537694", 49);
        assert_eq!(d("-0.125").to_string(), "-0.125");
        assert_eq!(d("42").to_string(), "42");
        assert!(d("-1").sqrt().is_none());
    }

    #[test]
    fn negligible_threshold() {
        assert!(d("0.00000000000000000000000000000000000000000009").is_negligible());
        assert!(!d("0.0000000000000000000000000000000000000002").is_negligible());
    }
}
