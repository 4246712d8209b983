mod common;

use common::*;
use hypercalc_core::filters::{all_ultrafilters, SetFamily};
use hypercalc_core::topology::set_report;
use hypercalc_core::transfer::{Prop, TransferError};
use hypercalc_core::*;
use num_rational::BigRational;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0i64..100).prop_map(|i| Expr::Num(q(i, 1))),
        (1i64..100).prop_map(|i| Expr::Num(q(i, 4))),
        Just(Expr::Var(Var::X)),
        Just(Expr::Var(Var::N)),
        Just(Expr::Rho),
    ]
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            inner.clone().prop_map(move |a| Expr::Neg(b(a))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Div(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Pow(b(x), b(y))),
            (0..Func::ALL.len(), inner).prop_map(move |(k, a)| Expr::Call(Func::ALL[k], b(a))),
        ]
    })
}

fn series(seed: u64) -> LcNumber {
    random_number(&mut rng(seed), -4, Bound::At(Exponent::from_integer(16)))
}

fn exact_series(seed: u64) -> LcNumber {
    random_number(&mut rng(seed), -4, Bound::Exact)
}

fn raw_set(seed: u64) -> (RawSet, IntervalSet) {
    let raw = RawSet::random(&mut rng(seed));
    let set = raw.text().parse().unwrap();
    (raw, set)
}

fn member(x: &LcNumber, s: &IntervalSet) -> bool {
    star_member(&LcValue::Series(x.clone()), s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_expressions_parse_back(e in expr_tree()) {
        let text = e.to_string();
        let back = Expr::parse(&text).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
    }

    #[test]
    fn series_text_round_trips(seed in any::<u64>()) {
        let x = series(seed);
        let back: LcNumber = x.to_string().parse().unwrap();
        prop_assert!(back.same_value(&x));
        prop_assert_eq!(back.order_bound(), x.order_bound());
    }

    #[test]
    fn ring_laws(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (series(a), series(b), series(c));
        prop_assert!(x.mul(&y.sub(&z)).same_value(&x.mul(&y).sub(&x.mul(&z))));
        prop_assert!(x.sub(&y).add(&y).same_value(&x));
        prop_assert!(x.mul(&y).neg().same_value(&x.neg().mul(&y)));
    }

    #[test]
    fn division_undoes_multiplication(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (series(a), series(b));
        prop_assume!(y.leading().is_some());
        prop_assert!(x.mul(&y).div(&y).unwrap().same_value(&x));
    }

    #[test]
    fn order_is_total_on_exact_values(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (exact_series(a), exact_series(b), exact_series(c));
        let xy = x.compare(&y).unwrap();
        let yz = y.compare(&z).unwrap();
        if xy == yz {
            prop_assert_eq!(x.compare(&z).unwrap(), xy);
        }
        if z.sign() == Some(Sign::Positive) {
            prop_assert_eq!(x.mul(&z).compare(&y.mul(&z)).unwrap(), xy);
        }
    }

    #[test]
    fn standard_points_follow_classical_membership(seed in any::<u64>(), n in -22i64..22) {
        let (raw, set) = raw_set(seed);
        let s = q(n, 2);
        let x = LcNumber::rational(s.clone(), Backend::Exact, Bound::Exact);
        prop_assert_eq!(member(&x, &set), raw.contains(&s));
    }

    #[test]
    fn extension_respects_boolean_operations(a in any::<u64>(), b in any::<u64>(), p in any::<u64>()) {
        let (_, s) = raw_set(a);
        let (_, t) = raw_set(b);
        let mut g = rng(p);
        let x = if p % 3 == 0 {
            random_number(&mut g, -2, Bound::Exact)
        } else {
            let s = q((p % 41) as i64 - 20, 2);
            LcNumber::rational(s, Backend::Exact, Bound::Exact).add(&random_infinitesimal(&mut g, Bound::Exact))
        };
        prop_assert_eq!(member(&x, &s.union(&t)), member(&x, &s) || member(&x, &t));
        prop_assert_eq!(member(&x, &s.intersect(&t)), member(&x, &s) && member(&x, &t));
        prop_assert_eq!(member(&x, &s.complement()), !member(&x, &s));
    }

    #[test]
    fn open_and_closed_are_dual(seed in any::<u64>()) {
        let (_, s) = raw_set(seed);
        let r = set_report(&s);
        let c = set_report(&s.complement());
        prop_assert_eq!(r.open, c.closed);
        prop_assert_eq!(r.closed, c.open);
        prop_assert!(r.interior.is_subset(&s) && s.is_subset(&r.closure));
        prop_assert_eq!(r.open, r.interior == s);
        prop_assert_eq!(r.closed, r.closure == s);
        prop_assert!(set_report(&r.closure).closed);
        prop_assert!(set_report(&r.interior).open);
    }

    #[test]
    fn interval_text_round_trips(seed in any::<u64>()) {
        let (_, s) = raw_set(seed);
        let back: IntervalSet = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn propositions_print_and_star_consistently(seed in any::<u64>()) {
        let text = random_prop(&mut rng(seed));
        let p = Prop::parse(&text).unwrap();
        prop_assert_eq!(Prop::parse(&p.to_string()).unwrap(), p.clone());
        let starred = p.star_transform().unwrap();
        prop_assert_eq!(starred.node_count(), p.node_count());
        prop_assert_eq!(Prop::parse(&starred.to_string()).unwrap(), starred.clone());
        if ["*B", "*R", "*F"].iter().any(|c| starred.to_string().contains(c)) {
            prop_assert!(matches!(starred.star_transform(), Err(TransferError::AlreadyStarred(_))));
        }
    }

    #[test]
    fn principal_families_are_ultrafilters(n in 1u32..=8, i in 1u32..=8) {
        prop_assume!(i <= n);
        let u = SetFamily::principal(n, i).unwrap();
        prop_assert!(u.is_ultrafilter().unwrap());
        prop_assert_eq!(u.principal_element(), Some(i));
    }
}

#[test]
fn every_small_ultrafilter_is_principal() {
    for n in 1..=4 {
        let all = all_ultrafilters(n).unwrap();
        assert_eq!(all.len(), n as usize);
        assert!(all.iter().all(|u| u.principal_element().is_some()));
    }
}

#[test]
fn standard_points_of_a_set_are_not_shifted() {
    let s: IntervalSet = "[0,1)".parse().unwrap();
    let one = LcNumber::rational(BigRational::from_integer(1.into()), Backend::Exact, Bound::Exact);
    assert!(!member(&one, &s));
    assert!(member(&one.sub(&"d".parse().unwrap()), &s));
}
