#![allow(dead_code)]

use hypercalc_core::{Backend, Bound, Coeff, Exponent, LcNumber};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn lit(r: &BigRational) -> String {
    if r.is_integer() {
        format!("({})", r.numer())
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

/// Dense polynomial with rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<BigRational>);

impl Poly {
    pub fn random(rng: &mut ChaCha8Rng, max_degree: usize) -> Poly {
        let deg = rng.gen_range(0..=max_degree);
        let mut c: Vec<BigRational> = (0..=deg).map(|_| q(rng.gen_range(-5..=5), 1)).collect();
        if c[deg].is_zero() {
            c[deg] = q(1, 1);
        }
        Poly(c)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![BigRational::zero()]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| c * q(k as i64, 1)).collect())
    }

    /// Source text in `x`, or in whatever `var` is substituted.
    pub fn to_expr_in(&self, var: &str) -> String {
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => lit(c),
                1 => format!("{}*{var}", lit(c)),
                _ => format!("{}*{var}^{k}", lit(c)),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    pub fn to_expr(&self) -> String {
        self.to_expr_in("x")
    }
}

/// `num / den`.
#[derive(Debug, Clone)]
pub struct RationalFn {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFn {
    pub fn random(rng: &mut ChaCha8Rng) -> RationalFn {
        RationalFn { num: Poly::random(rng, 4), den: Poly::random(rng, 4) }
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.num.eval(x) / self.den.eval(x)
    }

    /// Quotient rule.
    pub fn derivative_at(&self, x: &BigRational) -> BigRational {
        let (p, dp) = (self.num.eval(x), self.num.derivative().eval(x));
        let (r, dr) = (self.den.eval(x), self.den.derivative().eval(x));
        (dp * &r - p * dr) / (&r * &r)
    }

    pub fn to_expr(&self) -> String {
        format!("({})/({})", self.num.to_expr(), self.den.to_expr())
    }

    /// A random point with `|den(c)| >= 1`.
    pub fn safe_point(&self, rng: &mut ChaCha8Rng) -> BigRational {
        loop {
            let c = q(rng.gen_range(-40..=40), rng.gen_range(1..=8));
            if self.den.eval(&c).abs() >= BigRational::one() {
                return c;
            }
        }
    }
}

/// `(f(c + h) - f(c - h)) / 2h` in rational arithmetic.
pub fn central_difference(f: impl Fn(&BigRational) -> BigRational, c: &BigRational, h: &BigRational) -> BigRational {
    (f(&(c + h)) - f(&(c - h))) / (h * q(2, 1))
}

pub fn to_f64(r: &BigRational) -> f64 {
    let s = 1e12;
    let scaled = (r * q(1_000_000_000_000, 1)).round();
    scaled.numer().to_string().parse::<f64>().unwrap() / s
}

/// One raw interval with optional (infinite) endpoints.
#[derive(Debug, Clone)]
pub struct RawInterval {
    pub lo: Option<BigRational>,
    pub lo_closed: bool,
    pub hi: Option<BigRational>,
    pub hi_closed: bool,
}

impl RawInterval {
    pub fn contains(&self, x: &BigRational) -> bool {
        let above = match &self.lo {
            None => true,
            Some(lo) => x > lo || (self.lo_closed && x == lo),
        };
        let below = match &self.hi {
            None => true,
            Some(hi) => x < hi || (self.hi_closed && x == hi),
        };
        above && below
    }

    pub fn text(&self) -> String {
        let lo = self.lo.as_ref().map_or("-inf".to_string(), |v| format!("{}/{}", v.numer(), v.denom()));
        let hi = self.hi.as_ref().map_or("inf".to_string(), |v| format!("{}/{}", v.numer(), v.denom()));
        format!("{}{lo}, {hi}{}", if self.lo_closed { "[" } else { "(" }, if self.hi_closed { "]" } else { ")" })
    }
}

/// An unnormalized union of intervals, checked with ordinary real analysis.
#[derive(Debug, Clone)]
pub struct RawSet(pub Vec<RawInterval>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub open: bool,
    pub closed: bool,
    pub bounded: bool,
    pub compact: bool,
}

impl RawSet {
    pub fn random(rng: &mut ChaCha8Rng) -> RawSet {
        let k = rng.gen_range(0..=4);
        let mut out = Vec::new();
        while out.len() < k {
            let mut a = q(rng.gen_range(-20..=20), 2);
            let mut b = q(rng.gen_range(-20..=20), 2);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            let lo = if rng.gen_ratio(1, 8) { None } else { Some(a) };
            let hi = if rng.gen_ratio(1, 8) { None } else { Some(b) };
            let lo_closed = lo.is_some() && rng.gen_bool(0.5);
            let hi_closed = hi.is_some() && rng.gen_bool(0.5);
            if let (Some(l), Some(h)) = (&lo, &hi) {
                if l == h && !(lo_closed && hi_closed) {
                    continue;
                }
            }
            out.push(RawInterval { lo, lo_closed, hi, hi_closed });
        }
        RawSet(out)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.0.iter().any(|i| i.contains(x))
    }

    pub fn text(&self) -> String {
        if self.0.is_empty() {
            return "{}".into();
        }
        self.0.iter().map(RawInterval::text).collect::<Vec<_>>().join(" U ")
    }

    /// Boundary behaviour can only change at endpoints; between two
    /// consecutive endpoints the set is locally constant, so probing each
    /// endpoint at distance smaller than the smallest gap decides openness
    /// and closedness.
    pub fn flags(&self) -> Flags {
        let mut pts: Vec<BigRational> = self.0.iter().flat_map(|i| [i.lo.clone(), i.hi.clone()]).flatten().collect();
        pts.sort();
        pts.dedup();
        let gap = pts.windows(2).map(|w| &w[1] - &w[0]).min().unwrap_or_else(BigRational::one);
        let eps = gap / q(4, 1);
        let mut open = true;
        let mut closed = true;
        for s in &pts {
            let inside = self.contains(s);
            let left = self.contains(&(s - &eps));
            let right = self.contains(&(s + &eps));
            if inside && !(left && right) {
                open = false;
            }
            if !inside && (left || right) {
                closed = false;
            }
        }
        let bounded = self.0.iter().all(|i| i.lo.is_some() && i.hi.is_some());
        Flags { open, closed, bounded, compact: closed && bounded }
    }
}

pub fn random_exponent(rng: &mut ChaCha8Rng, min_num: i64) -> Exponent {
    let den = if rng.gen_ratio(1, 4) { 2 } else { 1 };
    Exponent::new(rng.gen_range(min_num..=3), den)
}

/// A random series with up to four terms, small rational coefficients and
/// leading exponent at least `min_num / 2`.
pub fn random_number(rng: &mut ChaCha8Rng, min_num: i64, bound: Bound) -> LcNumber {
    let k = rng.gen_range(1..=4);
    let terms: Vec<(Exponent, Coeff)> = (0..k)
        .map(|_| {
            let c = q(rng.gen_range(-9..=9), rng.gen_range(1..=4));
            (random_exponent(rng, min_num), Coeff::from_rational(c, Backend::Exact))
        })
        .collect();
    LcNumber::from_terms(terms, bound)
}

pub fn random_nonzero(rng: &mut ChaCha8Rng, min_num: i64, bound: Bound) -> LcNumber {
    loop {
        let x = random_number(rng, min_num, bound);
        if !x.is_exact_zero() && x.leading().is_some() {
            return x;
        }
    }
}

pub fn random_finite(rng: &mut ChaCha8Rng, bound: Bound) -> LcNumber {
    random_number(rng, 0, bound)
}

pub fn random_infinitesimal(rng: &mut ChaCha8Rng, bound: Bound) -> LcNumber {
    let k = rng.gen_range(1..=3);
    let terms: Vec<(Exponent, Coeff)> = (0..k)
        .map(|_| {
            let e = Exponent::new(rng.gen_range(1..=6), rng.gen_range(1..=2));
            (e, Coeff::from_rational(q(rng.gen_range(-9..=9), rng.gen_range(1..=4)), Backend::Exact))
        })
        .collect();
    LcNumber::from_terms(terms, bound)
}

/// Random proposition text over a set `B`, a relation `R` and a function `F`.
pub fn random_prop(rng: &mut ChaCha8Rng) -> String {
    let mut scope = Vec::new();
    prop(rng, &mut scope, 3)
}

const NAMES: [&str; 4] = ["x", "y", "z", "w"];

fn prop(rng: &mut ChaCha8Rng, scope: &mut Vec<&'static str>, depth: u32) -> String {
    let choice = if depth == 0 { 0 } else { rng.gen_range(0..7) };
    match choice {
        0 => atom(rng, scope),
        1 => format!("not [{}]", prop(rng, scope, depth - 1)),
        2 => format!("[{}] and [{}]", prop(rng, scope, depth - 1), prop(rng, scope, depth - 1)),
        3 => format!("[{}] or [{}]", prop(rng, scope, depth - 1), prop(rng, scope, depth - 1)),
        4 => format!("[{}] -> [{}]", prop(rng, scope, depth - 1), prop(rng, scope, depth - 1)),
        _ => {
            if scope.len() == NAMES.len() {
                return atom(rng, scope);
            }
            let v = NAMES[scope.len()];
            let q = if rng.gen_bool(0.5) { "forall" } else { "exists" };
            scope.push(v);
            let body = prop(rng, scope, depth - 1);
            scope.pop();
            format!("({q} {v} in B)[{body}]")
        }
    }
}

fn term(rng: &mut ChaCha8Rng, scope: &[&'static str]) -> String {
    let simple = |rng: &mut ChaCha8Rng| {
        if scope.is_empty() || rng.gen_ratio(1, 4) {
            rng.gen_range(0..5).to_string()
        } else {
            scope[rng.gen_range(0..scope.len())].to_string()
        }
    };
    match rng.gen_range(0..5) {
        0 => format!("F({})", simple(rng)),
        1 => format!("{} + {}", simple(rng), simple(rng)),
        2 => format!("{}*{}", simple(rng), simple(rng)),
        _ => simple(rng),
    }
}

fn atom(rng: &mut ChaCha8Rng, scope: &[&'static str]) -> String {
    match rng.gen_range(0..5) {
        0 => format!("{} = {}", term(rng, scope), term(rng, scope)),
        1 => format!("{} < {}", term(rng, scope), term(rng, scope)),
        2 => format!("{} in B", term(rng, scope)),
        3 => format!("<{}, {}> in R", term(rng, scope), term(rng, scope)),
        _ => format!("{} >= {}", term(rng, scope), term(rng, scope)),
    }
}

/// Random model JSON over the universe `0..5` with arithmetic mod 5.
pub fn random_model(rng: &mut ChaCha8Rng) -> String {
    let b: Vec<i64> = (0..5).filter(|_| rng.gen_bool(0.6)).collect();
    let r: Vec<[i64; 2]> = (0..5).flat_map(|a| (0..5).map(move |c| [a, c])).filter(|_| rng.gen_ratio(1, 3)).collect();
    let f: Vec<[i64; 2]> = (0..5).map(|a| [a, rng.gen_range(0..5)]).collect();
    serde_json::json!({
        "B": {"set": b},
        "R": {"relation": r},
        "F": {"function": f},
        "modulus": 5
    })
    .to_string()
}
