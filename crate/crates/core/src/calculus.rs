//! Derivatives, limits, continuity and convergence decided on concrete
//! infinitesimal and infinite probes.
//!
//! Probe searches are semi-decision procedures: a refutation carries a genuine
//! non-standard witness, while a positive verdict only means that no
//! counterexample was found among the probes tried.
//!
//! Sequence limits substitute the real infinite probes (`1/d`, ...) for
//! infinite hypernaturals. This is sound when the sequence is the restriction
//! of a real function of `n`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::coeff::{Backend, Coeff};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var};
use crate::number::{Bound, Exponent, ExtReal, LcNumber, NumberClass, Sign};
use crate::topology::{star_member, IntervalSet};
use crate::value::{Escape, LcValue};

/// Infinitesimal and infinite probe values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeCatalog {
    pub infinitesimals: Vec<LcNumber>,
    pub infinite: Vec<LcNumber>,
}

fn mono(c: i64, e: Exponent, backend: Backend) -> LcNumber {
    LcNumber::term(Coeff::from_int(c, backend), e, Bound::Exact)
}

fn int(n: i64) -> Exponent {
    Exponent::from_integer(n)
}

impl ProbeCatalog {
    /// `d, -d, d^2, -d^2, d^(1/2), d + d^2` and `1/d, 1/d + d, 2/d, 1/d^2`.
    pub fn standard(backend: Backend) -> Self {
        let m = |c, e| mono(c, e, backend);
        ProbeCatalog {
            infinitesimals: vec![
                m(1, int(1)),
                m(-1, int(1)),
                m(1, int(2)),
                m(-1, int(2)),
                m(1, Exponent::new(1, 2)),
                m(1, int(1)).add(&m(1, int(2))),
            ],
            infinite: vec![m(1, int(-1)), m(1, int(-1)).add(&m(1, int(1))), m(2, int(-1)), m(1, int(-2))],
        }
    }

    /// Parses `{"infinitesimals": [...], "infinite": [...]}` with series in
    /// text form, and checks that every probe has the advertised class.
    pub fn from_json(src: &str, backend: Backend) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            infinitesimals: Vec<String>,
            infinite: Vec<String>,
        }
        let raw: Raw = serde_json::from_str(src)
            .map_err(|e| Error::Syntax { offset: e.column().saturating_sub(1), message: e.to_string() })?;
        let parse = |v: &[String]| -> Result<Vec<LcNumber>> {
            v.iter().map(|s| LcNumber::parse(s, backend)).collect()
        };
        let catalog = ProbeCatalog { infinitesimals: parse(&raw.infinitesimals)?, infinite: parse(&raw.infinite)? };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn validate(&self) -> Result<()> {
        if self.infinitesimals.is_empty() || self.infinite.is_empty() {
            return Err(Error::Domain("probe catalog must have infinitesimal and infinite probes".into()));
        }
        for p in &self.infinitesimals {
            if !matches!(p.classify()?, NumberClass::Infinitesimal(_)) {
                return Err(Error::Domain(format!("probe {p} is not a nonzero infinitesimal")));
            }
        }
        for p in &self.infinite {
            if p.classify()? != NumberClass::Infinite(Sign::Positive) {
                return Err(Error::Domain(format!("probe {p} is not positive infinite")));
            }
        }
        Ok(())
    }

    fn single_terms(&self) -> impl Iterator<Item = (&LcNumber, &Coeff, Exponent)> {
        self.infinitesimals.iter().filter_map(|p| match p.terms() {
            [(e, c)] => Some((p, c, *e)),
            _ => None,
        })
    }
}

/// Variable bindings and computed values that exhibit a failure.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Witness {
    pub bindings: Vec<(String, String)>,
    pub values: Vec<(String, String)>,
}

impl Witness {
    fn bind(mut self, name: &str, v: impl fmt::Display) -> Self {
        self.bindings.push((name.into(), v.to_string()));
        self
    }

    fn value(mut self, name: &str, v: impl fmt::Display) -> Self {
        self.values.push((name.into(), v.to_string()));
        self
    }

    pub fn binding(&self, name: &str) -> Option<&str> {
        self.bindings.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.bindings.iter().chain(&self.values).map(|(k, v)| format!("{k} = {v}")).collect();
        f.write_str(&parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds { probes: usize, message: String },
    Refuted { probes: usize, witness: Witness },
    Inconclusive { probes: usize, reason: String },
}

impl Verdict {
    fn holds(probes: usize, what: &str) -> Verdict {
        Verdict::Holds { probes, message: format!("no counterexample found among {probes} {what}") }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Holds { .. } => "Holds",
            Verdict::Refuted { .. } => "Refuted",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }

    pub fn probes(&self) -> usize {
        match self {
            Verdict::Holds { probes, .. } | Verdict::Refuted { probes, .. } | Verdict::Inconclusive { probes, .. } => *probes,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Refuted { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn to_json(&self) -> Json {
        let mut out = json!({ "schema": 1, "kind": self.kind(), "probes": self.probes() });
        match self {
            Verdict::Holds { message, .. } => out["message"] = json!(message),
            Verdict::Inconclusive { reason, .. } => out["message"] = json!(reason),
            Verdict::Refuted { witness, .. } => {
                let pairs = |v: &[(String, String)]| {
                    Json::Object(v.iter().map(|(k, v)| (k.clone(), json!(v))).collect())
                };
                out["witness"] = pairs(&witness.bindings);
                out["values"] = pairs(&witness.values);
            }
        }
        out
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds { message, .. } => write!(f, "Holds: {message}"),
            Verdict::Refuted { witness, .. } => write!(f, "Refuted: {witness}"),
            Verdict::Inconclusive { reason, .. } => write!(f, "Inconclusive: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivativeOutcome {
    Value(ExtReal),
    /// Two probes disagree; each witness pairs a probe with what it produced.
    NoDerivative { witnesses: Vec<(String, String)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitOutcome {
    Value(ExtReal),
    NoLimit { witnesses: Vec<(String, ExtReal)> },
    Inconclusive(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Both,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitTarget {
    Point(BigRational, Side),
    PosInf,
    NegInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Pointwise,
    Uniform,
}

/// Function expressions analysed on a probe catalog under one context.
#[derive(Debug, Clone)]
pub struct Analyzer {
    pub ctx: Context,
    pub catalog: ProbeCatalog,
}

enum Gap {
    Negligible,
    Appreciable(LcValue),
    Undecided(String),
}

const STANDARD_SAMPLES: [(i64, i64); 8] = [(0, 1), (1, 1), (-1, 1), (1, 2), (-1, 2), (2, 1), (-2, 1), (3, 1)];

fn is_undecided(e: &Error) -> bool {
    matches!(e.root(), Error::Undecidable(_) | Error::UnsupportedEscape(_))
}

impl Analyzer {
    pub fn new(ctx: Context) -> Self {
        Analyzer { ctx, catalog: ProbeCatalog::standard(ctx.backend) }
    }

    pub fn with_catalog(ctx: Context, catalog: ProbeCatalog) -> Self {
        Analyzer { ctx, catalog }
    }

    fn point(&self, q: &BigRational) -> LcNumber {
        LcNumber::rational(q.clone(), self.ctx.backend, Bound::Exact)
    }

    fn eval1(&self, f: &Expr, var: Var, at: &LcNumber) -> Result<LcValue> {
        let mut env = Env::default();
        env.set(var, at.clone().into());
        f.eval(&env, &self.ctx)
    }

    fn eval2(&self, f: &Expr, x: &LcNumber, n: &LcNumber) -> Result<LcValue> {
        f.eval(&Env { x: Some(x.clone().into()), n: Some(n.clone().into()) }, &self.ctx)
    }

    fn gap(&self, a: &LcValue, b: &LcValue) -> Result<Gap> {
        let diff = match a.sub(b) {
            Ok(d) => d,
            Err(e) if is_undecided(&e) => return Ok(Gap::Undecided(e.to_string())),
            Err(e) => return Err(e),
        };
        match diff.classify() {
            Ok(c) if c.is_negligible() => Ok(Gap::Negligible),
            Ok(_) => {
                if let (Ok(ExtReal::Real(x)), Ok(ExtReal::Real(y))) = (a.standard_part(), b.standard_part()) {
                    if self.ctx.agree(&ExtReal::Real(x), &ExtReal::Real(y)) {
                        return Ok(Gap::Negligible);
                    }
                }
                Ok(Gap::Appreciable(diff))
            }
            Err(e) if is_undecided(&e) => Ok(Gap::Undecided(e.to_string())),
            Err(e) => Err(e),
        }
    }

    fn member(&self, x: &LcNumber, domain: &IntervalSet) -> Result<bool> {
        star_member(&x.clone().into(), domain)
    }

    /// The `n`-th derivative of `f` (a function of `x`) at the standard point `c`.
    pub fn derivative(&self, f: &Expr, c: &BigRational, n: u32) -> Result<DerivativeOutcome> {
        if n == 0 {
            return Err(Error::Domain("derivative order must be positive".into()));
        }
        if self.ctx.order < int(i64::from(n) + 1) {
            return Err(Error::InsufficientPrecision(format!("order bound must be at least {}", n + 1)));
        }
        let c0 = self.point(c);
        if n == 1 {
            let fc = self.eval1(f, Var::X, &c0)?;
            let mut seen: Option<(String, ExtReal)> = None;
            for dx in &self.catalog.infinitesimals {
                let fx = self.eval1(f, Var::X, &c0.add(dx))?;
                let q = fx.sub(&fc)?.div(&dx.clone().into())?;
                let st = match q.standard_part() {
                    Ok(s) => s,
                    Err(Error::Undefined(_)) => {
                        return Ok(DerivativeOutcome::NoDerivative {
                            witnesses: vec![(dx.to_string(), format!("{q} has no standard part"))],
                        })
                    }
                    Err(e) => return Err(e),
                };
                match &seen {
                    None => seen = Some((dx.to_string(), st)),
                    Some((p, s)) if !self.ctx.agree(s, &st) => {
                        return Ok(DerivativeOutcome::NoDerivative {
                            witnesses: vec![(p.clone(), s.to_string()), (dx.to_string(), st.to_string())],
                        })
                    }
                    Some(_) => {}
                }
            }
            return Ok(DerivativeOutcome::Value(seen.expect("catalog is nonempty").1));
        }
        let mut seen: Option<(String, ExtReal)> = None;
        let mut factorial = BigRational::one();
        for k in 2..=n {
            factorial *= BigRational::from_integer(BigInt::from(k));
        }
        for (dx, s, e) in self.catalog.single_terms() {
            let cutoff = e * int(i64::from(n));
            let fx = self.eval1(f, Var::X, &c0.add(dx))?;
            let no = |why: String| DerivativeOutcome::NoDerivative { witnesses: vec![(dx.to_string(), why)] };
            let Some(series) = regular_part(&fx, cutoff) else {
                return Ok(no(format!("{fx} is not a power series up to d^{cutoff}")));
            };
            if let Some((bad, _)) = series.terms().iter().find(|(t, _)| *t <= cutoff && !(*t / e).is_integer()) {
                return Ok(no(format!("term d^{bad} breaks the Taylor pattern")));
            }
            let coeff = series.coefficient(cutoff)?.cloned().unwrap_or_else(|| s.zero_like());
            let value = coeff.scale(&factorial).div(&s.powi(i64::from(n))?)?;
            let st = ExtReal::Real(value);
            match &seen {
                None => seen = Some((dx.to_string(), st)),
                Some((p, prev)) if !self.ctx.agree(prev, &st) => {
                    return Ok(DerivativeOutcome::NoDerivative {
                        witnesses: vec![(p.clone(), prev.to_string()), (dx.to_string(), st.to_string())],
                    })
                }
                Some(_) => {}
            }
        }
        seen.map(|(_, v)| DerivativeOutcome::Value(v))
            .ok_or_else(|| Error::Domain("no single-term infinitesimal probe in the catalog".into()))
    }

    /// Limit of `f` in the variable `x` over the given domain.
    pub fn limit(&self, f: &Expr, target: &LimitTarget, domain: &IntervalSet) -> Result<LimitOutcome> {
        self.limit_in(f, Var::X, target, domain)
    }

    /// Limit of the sequence `a` in the index variable `n` as `n` grows.
    pub fn seq_limit(&self, a: &Expr) -> Result<LimitOutcome> {
        self.limit_in(a, Var::N, &LimitTarget::PosInf, &IntervalSet::reals())
    }

    /// In exact mode a probe whose value needs irrational coefficients is
    /// skipped; the error is reported only when every probe needs them.
    pub fn limit_in(&self, f: &Expr, var: Var, target: &LimitTarget, domain: &IntervalSet) -> Result<LimitOutcome> {
        let probes: Vec<LcNumber> = match target {
            LimitTarget::Point(c, side) => {
                if !domain.is_cluster_point(c) {
                    return Err(Error::Domain(format!("{c} is not a cluster point of {domain}")));
                }
                let c0 = self.point(c);
                self.catalog
                    .infinitesimals
                    .iter()
                    .filter(|dx| match side {
                        Side::Both => true,
                        Side::Right => dx.sign() == Some(Sign::Positive),
                        Side::Left => dx.sign() == Some(Sign::Negative),
                    })
                    .map(|dx| c0.add(dx))
                    .collect()
            }
            LimitTarget::PosInf => self.catalog.infinite.clone(),
            LimitTarget::NegInf => self.catalog.infinite.iter().map(LcNumber::neg).collect(),
        };
        let mut seen: Option<(String, ExtReal)> = None;
        let mut irrational = None;
        for x in probes {
            if !self.member(&x, domain)? {
                continue;
            }
            let fx = match self.eval1(f, var, &x) {
                Ok(v) => v,
                Err(e) if e.is_domain() => continue,
                Err(e) if matches!(e.root(), Error::IrrationalCoefficient(_)) => {
                    irrational = irrational.or(Some(e));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let st = match fx.standard_part() {
                Ok(s) => s,
                Err(Error::Undefined(why)) => return Ok(LimitOutcome::Inconclusive(format!("at {x}: {why}"))),
                Err(e) if is_undecided(&e) => return Ok(LimitOutcome::Inconclusive(format!("at {x}: {e}"))),
                Err(e) => return Err(e),
            };
            match &seen {
                None => seen = Some((x.to_string(), st)),
                Some((p, s)) if !self.ctx.agree(s, &st) => {
                    return Ok(LimitOutcome::NoLimit { witnesses: vec![(p.clone(), s.clone()), (x.to_string(), st)] })
                }
                Some(_) => {}
            }
        }
        match (seen, irrational) {
            (Some((_, v)), _) => Ok(LimitOutcome::Value(v)),
            (None, Some(e)) => Err(e),
            (None, None) => Err(Error::Domain("no probe lies in the domain of the function".into())),
        }
    }

    /// Whether `f(c + dx) ≈ f(c)` for every catalog infinitesimal `dx` with
    /// `c + dx` in the extended domain.
    pub fn continuity_at(&self, f: &Expr, c: &BigRational, domain: &IntervalSet) -> Result<Verdict> {
        if !domain.contains(c) {
            return Err(Error::Domain(format!("{c} is not in {domain}")));
        }
        let c0 = self.point(c);
        let fc = self.eval1(f, Var::X, &c0).map_err(|e| {
            if e.is_domain() {
                Error::Domain(format!("the function is undefined at {c}: {}", e.root()))
            } else {
                e
            }
        })?;
        let mut probes = 0;
        let mut undecided = None;
        for dx in &self.catalog.infinitesimals {
            let x = c0.add(dx);
            if !self.member(&x, domain)? {
                continue;
            }
            let fx = match self.eval1(f, Var::X, &x) {
                Ok(v) => v,
                Err(e) if e.is_domain() => continue,
                Err(e) => return Err(e),
            };
            probes += 1;
            match self.gap(&fx, &fc)? {
                Gap::Negligible => {}
                Gap::Undecided(why) => undecided = undecided.or(Some(format!("at x = {x}: {why}"))),
                Gap::Appreciable(diff) => {
                    let witness = Witness::default().bind("x", &x).value("f(x)", &fx).value("f(c)", &fc).value("gap", diff);
                    return Ok(Verdict::Refuted { probes, witness });
                }
            }
        }
        if probes == 0 {
            return Err(Error::Domain(format!("no probe near {c} lies in the domain")));
        }
        Ok(match undecided {
            Some(reason) => Verdict::Inconclusive { probes, reason },
            None => Verdict::holds(probes, "probes"),
        })
    }

    fn anchors(&self, domain: &IntervalSet) -> Vec<LcNumber> {
        let mut standard: Vec<BigRational> = domain.finite_endpoints();
        for (p, q) in STANDARD_SAMPLES {
            let s = BigRational::new(p.into(), q.into());
            if !standard.contains(&s) {
                standard.push(s);
            }
        }
        let mut out: Vec<LcNumber> = standard.iter().map(|q| self.point(q)).collect();
        for p in &self.catalog.infinite {
            out.push(p.clone());
            out.push(p.neg());
        }
        out
    }

    /// Searches pairs of infinitely close points of the extended domain whose
    /// images are not infinitely close.
    pub fn uniform_continuity(&self, f: &Expr, domain: &IntervalSet) -> Result<Verdict> {
        let mut pairs = 0;
        let mut undecided = None;
        let mut cache: Vec<(LcNumber, Option<LcValue>)> = Vec::new();
        let mut eval = |x: &LcNumber| -> Result<Option<LcValue>> {
            if let Some((_, v)) = cache.iter().find(|(k, _)| k == x) {
                return Ok(v.clone());
            }
            let v = match self.eval1(f, Var::X, x) {
                Ok(v) => Some(v),
                Err(e) if e.is_domain() => None,
                Err(e) => return Err(e),
            };
            cache.push((x.clone(), v.clone()));
            Ok(v)
        };
        for a in self.anchors(domain) {
            let mut candidates = Vec::new();
            if self.member(&a, domain)? {
                for dx in &self.catalog.infinitesimals {
                    candidates.push((a.clone(), a.add(dx)));
                }
            }
            let near = &self.catalog.infinitesimals;
            for i in 0..near.len() {
                for j in i + 1..near.len() {
                    candidates.push((a.add(&near[i]), a.add(&near[j])));
                }
            }
            for (p, q) in candidates {
                if !self.member(&p, domain)? || !self.member(&q, domain)? {
                    continue;
                }
                let (Some(fp), Some(fq)) = (eval(&p)?, eval(&q)?) else { continue };
                pairs += 1;
                match self.gap(&fq, &fp)? {
                    Gap::Negligible => {}
                    Gap::Undecided(why) => undecided = undecided.or(Some(format!("at ({p}, {q}): {why}"))),
                    Gap::Appreciable(diff) => {
                        let witness = Witness::default()
                            .bind("x", &p)
                            .bind("y", &q)
                            .value("f(x)", &fp)
                            .value("f(y)", &fq)
                            .value("gap", diff);
                        return Ok(Verdict::Refuted { probes: pairs, witness });
                    }
                }
            }
        }
        if pairs == 0 {
            return Err(Error::Domain(format!("no probe pair lies in the extension of {domain}")));
        }
        Ok(match undecided {
            Some(reason) => Verdict::Inconclusive { probes: pairs, reason },
            None => Verdict::holds(pairs, "probe pairs"),
        })
    }

    fn convergence_points(&self, domain: &IntervalSet, mode: Mode) -> Result<Vec<LcNumber>> {
        let mut standard: Vec<BigRational> = Vec::new();
        let mut push = |q: BigRational| {
            if !standard.contains(&q) {
                standard.push(q);
            }
        };
        let endpoints = domain.finite_endpoints();
        for e in &endpoints {
            push(e.clone());
        }
        for (p, q) in STANDARD_SAMPLES {
            push(BigRational::new(p.into(), q.into()));
        }
        for s in domain.interior_samples() {
            push(s);
        }
        let mut out: Vec<LcNumber> = standard.iter().filter(|q| domain.contains(q)).map(|q| self.point(q)).collect();
        if mode == Mode::Uniform {
            for s in &standard {
                for dx in &self.catalog.infinitesimals {
                    let x = self.point(s).add(dx);
                    if self.member(&x, domain)? {
                        out.push(x);
                    }
                }
            }
            for p in &self.catalog.infinite {
                for x in [p.clone(), p.neg()] {
                    if self.member(&x, domain)? {
                        out.push(x);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Checks `f_n(x) ≈ f(x)` for infinite `n` and standard `x` (pointwise) or
    /// every probed `x` in the extended domain (uniform).
    pub fn convergence(&self, family: &Expr, domain: &IntervalSet, limit: &Expr, mode: Mode) -> Result<Verdict> {
        let mut probes = 0;
        let mut undecided = None;
        for x in self.convergence_points(domain, mode)? {
            let fx = match self.eval1(limit, Var::X, &x) {
                Ok(v) => v,
                Err(e) if e.is_domain() => continue,
                Err(e) => return Err(e),
            };
            for n in &self.catalog.infinite {
                let v = match self.eval2(family, &x, n) {
                    Ok(v) => v,
                    Err(e) if e.is_domain() => continue,
                    Err(e) => return Err(e),
                };
                probes += 1;
                match self.gap(&v, &fx)? {
                    Gap::Negligible => {}
                    Gap::Undecided(why) => undecided = undecided.or(Some(format!("at x = {x}, n = {n}: {why}"))),
                    Gap::Appreciable(diff) => {
                        let mut witness = Witness::default().bind("n", n).bind("x", &x).value("f_n(x)", &v);
                        if let Ok(st) = v.standard_part() {
                            witness = witness.value("st(f_n(x))", st);
                        }
                        witness = witness.value("f(x)", &fx).value("gap", diff);
                        return Ok(Verdict::Refuted { probes, witness });
                    }
                }
            }
        }
        if probes == 0 {
            return Err(Error::Domain(format!("no probe lies in the extension of {domain}")));
        }
        Ok(match undecided {
            Some(reason) => Verdict::Inconclusive { probes, reason },
            None => Verdict::holds(probes, "(x, n) probes"),
        })
    }
}

/// The power-series part of a value below `cutoff`: escape parts whose
/// contribution is smaller than every power up to `cutoff` are dropped.
fn regular_part(v: &LcValue, cutoff: Exponent) -> Option<LcNumber> {
    let beyond = |n: &LcNumber| n.valuation() > Bound::At(cutoff);
    match v {
        LcValue::Series(n) => Some(n.clone()),
        LcValue::Escape(Escape::Log { log_coeff, rest }) if beyond(log_coeff) => Some(rest.clone()),
        LcValue::Escape(Escape::Osc { waves, offset })
            if waves.iter().all(|w| beyond(&w.sin_coeff) && beyond(&w.cos_coeff)) =>
        {
            Some(offset.clone())
        }
        LcValue::Escape(Escape::Exp { arg, .. }) if arg.leading().is_some_and(|(_, c)| c.signum() < 0) => {
            Some(LcNumber::zero())
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn exact(n: i64, d: i64) -> ExtReal {
        ExtReal::Real(Coeff::Exact(q(n, d)))
    }

    #[test]
    fn catalog_is_valid() {
        ProbeCatalog::standard(Backend::Exact).validate().unwrap();
        let c = ProbeCatalog::from_json(r#"{"infinitesimals": ["d^3"], "infinite": ["d^(-3)"]}"#, Backend::Exact).unwrap();
        assert_eq!(c.infinite[0].to_string(), "d^(-3)");
        assert!(ProbeCatalog::from_json(r#"{"infinitesimals": ["1"], "infinite": ["d^(-1)"]}"#, Backend::Exact).is_err());
    }

    #[test]
    fn derivatives() {
        let a = Analyzer::new(Context::exact());
        assert_eq!(a.derivative(&p("x^3"), &q(2, 1), 1).unwrap(), DerivativeOutcome::Value(exact(12, 1)));
        assert_eq!(a.derivative(&p("sin(x)"), &q(0, 1), 1).unwrap(), DerivativeOutcome::Value(exact(1, 1)));
        assert_eq!(a.derivative(&p("7"), &q(-3, 4), 1).unwrap(), DerivativeOutcome::Value(exact(0, 1)));
        assert!(matches!(a.derivative(&p("abs(x)"), &q(0, 1), 1).unwrap(), DerivativeOutcome::NoDerivative { .. }));
        assert_eq!(a.derivative(&p("x^3"), &q(2, 1), 2).unwrap(), DerivativeOutcome::Value(exact(12, 1)));
        assert_eq!(a.derivative(&p("1/x"), &q(1, 2), 3).unwrap(), DerivativeOutcome::Value(exact(-96, 1)));
        assert_eq!(a.derivative(&p("abs(x)^3"), &q(0, 1), 2).unwrap(), DerivativeOutcome::Value(exact(0, 1)));
        assert!(matches!(a.derivative(&p("abs(x)^3"), &q(0, 1), 3).unwrap(), DerivativeOutcome::NoDerivative { .. }));
        assert!(matches!(a.derivative(&p("x*sin(1/x)"), &q(0, 1), 1), Ok(DerivativeOutcome::NoDerivative { .. }) | Err(_)));
        assert!(matches!(a.derivative(&p("sin(x)"), &q(1, 1), 1).unwrap_err().root(), Error::IrrationalCoefficient(_)));
    }

    #[test]
    fn limits() {
        let a = Analyzer::new(Context::exact());
        let r = IntervalSet::reals();
        assert_eq!(a.limit(&p("x/(1+x)"), &LimitTarget::Point(q(1, 1), Side::Both), &r).unwrap(), LimitOutcome::Value(exact(1, 2)));
        assert_eq!(a.limit(&p("sin(x)/x"), &LimitTarget::PosInf, &r).unwrap(), LimitOutcome::Value(exact(0, 1)));
        assert_eq!(a.limit(&p("x"), &LimitTarget::Point(q(0, 1), Side::Both), &r).unwrap(), LimitOutcome::Value(exact(0, 1)));
        match a.limit(&p("1/x"), &LimitTarget::Point(q(0, 1), Side::Both), &r).unwrap() {
            LimitOutcome::NoLimit { witnesses } => {
                assert_eq!(witnesses, vec![("d".to_string(), ExtReal::PosInf), ("-d".to_string(), ExtReal::NegInf)]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(a.limit(&p("1/x"), &LimitTarget::Point(q(0, 1), Side::Right), &r).unwrap(), LimitOutcome::Value(ExtReal::PosInf));
        assert!(matches!(a.limit(&p("sin(1/x)"), &LimitTarget::Point(q(0, 1), Side::Both), &r).unwrap(), LimitOutcome::Inconclusive(_)));
        assert_eq!(a.seq_limit(&p("(n+5)/(n+3)")).unwrap(), LimitOutcome::Value(exact(1, 1)));
        assert_eq!(a.seq_limit(&p("sqrt(n+1)/n")).unwrap(), LimitOutcome::Value(exact(0, 1)));
        assert_eq!(a.seq_limit(&p("5")).unwrap(), LimitOutcome::Value(exact(5, 1)));
        let isolated: IntervalSet = "[2,2] U (3,4)".parse().unwrap();
        assert!(a.limit(&p("x"), &LimitTarget::Point(q(2, 1), Side::Both), &isolated).unwrap_err().is_domain());
    }

    #[test]
    fn continuity() {
        let a = Analyzer::new(Context::exact());
        let r = IntervalSet::reals();
        assert!(a.continuity_at(&p("x"), &q(5, 3), &r).unwrap().is_holds());
        assert!(a.continuity_at(&p("1/x"), &q(2, 1), &r).unwrap().is_holds());
        assert!(a.continuity_at(&p("x/abs(x)"), &q(0, 1), &r).unwrap_err().is_domain());
        let v = a.continuity_at(&p("0^(x^2)"), &q(0, 1), &r).unwrap();
        assert_eq!(v.witness().unwrap().binding("x"), Some("d"));
    }

    #[test]
    fn uniform_continuity_witnesses() {
        let a = Analyzer::new(Context::exact());
        let v = a.uniform_continuity(&p("1/x"), &"(0,inf)".parse().unwrap()).unwrap();
        let w = v.witness().unwrap();
        assert_eq!((w.binding("x"), w.binding("y")), (Some("d"), Some("d^2")));
        let v = Analyzer::new(Context::decimal()).uniform_continuity(&p("exp(x)"), &IntervalSet::reals()).unwrap();
        let w = v.witness().unwrap();
        assert_eq!((w.binding("x"), w.binding("y")), (Some("d^(-1)"), Some("d^(-1) + d")));
    }

    #[test]
    fn convergence_examples() {
        let a = Analyzer::new(Context::decimal());
        let v = a.convergence(&p("x^n"), &"[0,1)".parse().unwrap(), &p("0"), Mode::Uniform).unwrap();
        assert_eq!(v.witness().unwrap().binding("x"), Some("1 - d"));
        assert!(a.convergence(&p("x^n"), &"[0,0.9]".parse().unwrap(), &p("0"), Mode::Uniform).unwrap().is_holds());
        assert!(a.convergence(&p("x^n"), &"[0,1)".parse().unwrap(), &p("0"), Mode::Pointwise).unwrap().is_holds());
    }
}
