//! Property tests for the order predicates, reductions, and closed forms,
//! run in exact rational arithmetic unless stated otherwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use stochorder::{
    alternating_identity_residual, compare, fosd_bracket, fosd_dominance_probability, fosd_leq, fosd_reduce,
    knuth_power_sum, knuth_power_sum_expected, mlr_dominance_probability, mlr_dominance_probability_restricted,
    mlr_dominance_probability_restricted_in_segment, mlr_leq, mlr_reduce, segment_bounds, OrderKind, OrderRelation,
    SimplexPoint,
};

type Q = BigRational;

fn q(p: i64, d: i64) -> Q {
    Q::new(p.into(), d.into())
}

fn point_from_weights(w: &[u32], u: &Q) -> SimplexPoint<Q> {
    let total: u64 = w.iter().map(|&x| x as u64).sum();
    let coords = w.iter().map(|&x| Q::new(BigInt::from(x), BigInt::from(total)) * u.clone()).collect();
    SimplexPoint::new(coords, u.clone()).unwrap()
}

/// Interior rational point with `len` coordinates summing to 1.
fn interior(len: usize) -> impl Strategy<Value = SimplexPoint<Q>> {
    prop::collection::vec(1u32..500, len).prop_map(|w| point_from_weights(&w, &Q::one()))
}

/// Rational point that may sit on the boundary.
fn any_point(len: usize) -> impl Strategy<Value = SimplexPoint<Q>> {
    prop::collection::vec(0u32..6, len)
        .prop_filter("nonzero mass", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| point_from_weights(&w, &Q::one()))
}

/// Moves a fraction of the mass at `from` to a later index, which can only
/// raise tail sums.
fn shift_up(x: &SimplexPoint<Q>, from: usize, to: usize, frac: &Q) -> SimplexPoint<Q> {
    let mut c = x.coords().to_vec();
    let moved = c[from].clone() * frac.clone();
    c[from] -= moved.clone();
    c[to] += moved;
    SimplexPoint::new(c, x.u().clone()).unwrap()
}

/// Multiplies coordinates by a nondecreasing sequence and renormalizes, which
/// yields an MLR-larger point.
fn tilt_up(x: &SimplexPoint<Q>, steps: &[u32]) -> SimplexPoint<Q> {
    let mut g = 1u64;
    let raw: Vec<Q> = x
        .coords()
        .iter()
        .zip(steps)
        .map(|(c, &s)| {
            g += s as u64;
            c.clone() * Q::from_integer(g.into())
        })
        .collect();
    let total = raw.iter().fold(Q::zero(), |a, b| a + b);
    SimplexPoint::new(raw.into_iter().map(|c| c / total.clone()).collect(), Q::one()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn both_orders_are_reflexive(x in (1usize..7).prop_flat_map(|n| any_point(n + 1))) {
        prop_assert!(fosd_leq(&x, &x).unwrap());
        prop_assert!(mlr_leq(&x, &x).unwrap());
        prop_assert_eq!(compare(&x, &x, OrderKind::Fosd).unwrap(), OrderRelation::Equal);
        prop_assert_eq!(compare(&x, &x, OrderKind::Mlr).unwrap(), OrderRelation::Equal);
    }

    #[test]
    fn fosd_is_antisymmetric(
        (x, y) in (1usize..6).prop_flat_map(|n| (any_point(n + 1), any_point(n + 1)))
    ) {
        if fosd_leq(&x, &y).unwrap() && fosd_leq(&y, &x).unwrap() {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn mlr_is_antisymmetric(
        (x, y) in (1usize..6).prop_flat_map(|n| (any_point(n + 1), any_point(n + 1)))
    ) {
        if mlr_leq(&x, &y).unwrap() && mlr_leq(&y, &x).unwrap() {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn fosd_chains_are_transitive(
        (x, moves) in (2usize..7).prop_flat_map(|n| (
            any_point(n + 1),
            prop::collection::vec((0..n, 1..=n, 1i64..=4), 2),
        ))
    ) {
        let mut chain = vec![x];
        for &(from, to_off, num) in &moves {
            let last = chain.last().unwrap();
            let to = (from + to_off).min(last.n());
            let next = if to > from { shift_up(last, from, to, &q(num, 4)) } else { last.clone() };
            chain.push(next);
        }
        prop_assert!(fosd_leq(&chain[0], &chain[1]).unwrap());
        prop_assert!(fosd_leq(&chain[1], &chain[2]).unwrap());
        prop_assert!(fosd_leq(&chain[0], &chain[2]).unwrap());
    }

    #[test]
    fn mlr_chains_are_transitive_and_imply_fosd(
        (x, s1, s2) in (1usize..7).prop_flat_map(|n| (
            any_point(n + 1),
            prop::collection::vec(0u32..4, n + 1),
            prop::collection::vec(0u32..4, n + 1),
        ))
    ) {
        let y = tilt_up(&x, &s1);
        let z = tilt_up(&y, &s2);
        prop_assert!(mlr_leq(&x, &y).unwrap());
        prop_assert!(mlr_leq(&y, &z).unwrap());
        prop_assert!(mlr_leq(&x, &z).unwrap());
        prop_assert!(fosd_leq(&x, &y).unwrap());
        prop_assert!(fosd_leq(&x, &z).unwrap());
    }

    #[test]
    fn random_triples_respect_transitivity(
        (x, y, z) in (1usize..4).prop_flat_map(|n| (any_point(n + 1), any_point(n + 1), any_point(n + 1)))
    ) {
        for order in [OrderKind::Fosd, OrderKind::Mlr] {
            let leq = |a: &SimplexPoint<Q>, b: &SimplexPoint<Q>| stochorder::leq(a, b, order).unwrap();
            if leq(&x, &y) && leq(&y, &z) {
                prop_assert!(leq(&x, &z));
            }
        }
    }

    #[test]
    fn mlr_implies_fosd_on_random_pairs(
        (x, y) in (1usize..7).prop_flat_map(|n| (any_point(n + 1), any_point(n + 1)))
    ) {
        if mlr_leq(&x, &y).unwrap() {
            prop_assert!(fosd_leq(&x, &y).unwrap());
        }
    }

    #[test]
    fn orders_coincide_on_the_segment((x, y) in (any_point(2), any_point(2))) {
        prop_assert_eq!(
            compare(&x, &y, OrderKind::Fosd).unwrap(),
            compare(&x, &y, OrderKind::Mlr).unwrap()
        );
    }

    #[test]
    fn fosd_reduction_is_equivalent(
        (a, x) in (2usize..7).prop_flat_map(|len| (interior(len + 1), interior(len + 1)))
    ) {
        let top = a.n();
        let x_last = x.coord(top).clone();
        let prefix = x.head().unwrap();
        match fosd_bracket(&a, &x_last) {
            Some(k) => {
                let r = fosd_reduce(&a, &x_last, k).unwrap();
                prop_assert_eq!(&r.target_u, prefix.u());
                prop_assert_eq!(fosd_leq(&a, &x).unwrap(), fosd_leq(&r.reduced, &prefix).unwrap());
            }
            None => prop_assert!(!fosd_leq(&a, &x).unwrap()),
        }
    }

    #[test]
    fn mlr_reduction_is_equivalent(
        (a, x) in (2usize..7).prop_flat_map(|len| (interior(len + 1), interior(len + 1)))
    ) {
        let r = mlr_reduce(&a, &x).unwrap();
        prop_assert_eq!(
            mlr_leq(&a, &x).unwrap(),
            r.extra_condition && mlr_leq(&r.scaled, &r.prefix).unwrap()
        );
    }

    #[test]
    fn mlr_reduction_holds_along_tilted_pairs(
        (a, steps) in (2usize..7).prop_flat_map(|len| (interior(len + 1), prop::collection::vec(0u32..3, len + 1)))
    ) {
        let x = tilt_up(&a, &steps);
        let r = mlr_reduce(&a, &x).unwrap();
        prop_assert!(r.extra_condition);
        prop_assert!(mlr_leq(&r.scaled, &r.prefix).unwrap());
    }

    #[test]
    fn fosd_probability_is_monotone(
        (a, from, to_off, num) in (1usize..5).prop_flat_map(|n| (any_point(n + 1), 0..n, 1..=n, 1i64..=4))
    ) {
        let to = (from + to_off).min(a.n());
        let b = shift_up(&a, from, to, &q(num, 4));
        prop_assert!(fosd_leq(&a, &b).unwrap());
        prop_assert!(fosd_dominance_probability(&a).unwrap() >= fosd_dominance_probability(&b).unwrap());
    }

    #[test]
    fn mlr_probability_is_below_fosd(a in (1usize..6).prop_flat_map(|n| interior(n + 1))) {
        let mlr = mlr_dominance_probability(&a).unwrap().value;
        let fosd = fosd_dominance_probability(&a).unwrap();
        prop_assert!(mlr <= fosd);
        prop_assert!(mlr > Q::zero() && fosd <= Q::one());
    }

    #[test]
    fn restricted_is_exact_at_u_and_continuous_across_segments(
        a in (1usize..7).prop_flat_map(|n| interior(n + 1))
    ) {
        let n = a.n();
        prop_assert_eq!(
            mlr_dominance_probability_restricted(&a, a.u()).unwrap(),
            mlr_dominance_probability(&a).unwrap().value
        );
        for m in 1..n {
            let (_, edge) = segment_bounds(&a, m).unwrap();
            let below = mlr_dominance_probability_restricted_in_segment(&a, &edge, m).unwrap();
            let above = mlr_dominance_probability_restricted_in_segment(&a, &edge, m + 1).unwrap();
            prop_assert_eq!(below, above);
        }
    }

    #[test]
    fn restricted_is_monotone_in_b(
        (a, cuts) in (1usize..6).prop_flat_map(|n| (interior(n + 1), prop::collection::vec(0u32..=1000, 2..8)))
    ) {
        let n = a.n();
        let lo = a.coord(n).clone();
        let width = a.u().clone() - lo.clone();
        let mut cuts = cuts;
        cuts.sort_unstable();
        let mut prev = Q::zero();
        for c in cuts {
            let b = lo.clone() + width.clone() * q(c as i64, 1000);
            let v = mlr_dominance_probability_restricted(&a, &b).unwrap();
            prop_assert!(v >= prev);
            prev = v;
        }
        prop_assert!(prev <= mlr_dominance_probability(&a).unwrap().value);
    }

    #[test]
    fn alternating_identity_vanishes(a in (2usize..8).prop_flat_map(|len| prop::collection::vec((1i64..200, 1i64..50), len))) {
        let a: Vec<Q> = a.into_iter().map(|(p, d)| q(p, d)).collect();
        prop_assert_eq!(alternating_identity_residual(&a).unwrap(), Q::zero());
    }

    #[test]
    fn knuth_power_sum_contract(xs in prop::collection::btree_set(-300i64..300, 1..8)) {
        let xs: Vec<Q> = xs.into_iter().map(|v| q(v, 7)).collect();
        for r in 0..=xs.len() as u32 {
            prop_assert_eq!(knuth_power_sum(&xs, r).unwrap(), knuth_power_sum_expected(&xs, r));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn float_predicates_agree_with_exact_on_interior_points(
        (x, y) in (1usize..6).prop_flat_map(|n| (interior(n + 1), interior(n + 1)))
    ) {
        let (fx, fy) = (x.to_f64(), y.to_f64());
        for order in [OrderKind::Fosd, OrderKind::Mlr] {
            prop_assert_eq!(compare(&fx, &fy, order).unwrap(), compare(&x, &y, order).unwrap());
        }
    }

    #[test]
    fn float_fosd_probability_matches_rational(a in (1usize..7).prop_flat_map(|n| interior(n + 1))) {
        let exact = fosd_dominance_probability(&a).unwrap();
        let float = fosd_dominance_probability(&a.to_f64()).unwrap();
        let exact = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        prop_assert!((exact - float).abs() <= 1e-13);
    }
}
