use ospcone_core::diagram::validate;
use ospcone_core::flags::{
    component_of, coordinate_flags, duals_equivalent, fiber_sample, is_self_orthogonal, respects, Component,
    FlagKind, IsotropicFlag, Side,
};
use ospcone_core::osp::{
    act, adjoint_identity_holds, characteristic_transfer, is_nilpotent_odd, make_space, nilpotency_pair,
    random_group_element, random_odd_element, Algebra,
};
use ospcone_core::weights::{dominance_leq, Weight};
use ospcone_core::*;
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = GaussianRational> {
    (-9i64..=9, 1i64..=5, -9i64..=9, 1i64..=5).prop_map(|(a, b, c, d)| {
        &GaussianRational::from_frac(a, b) + &(&GaussianRational::i() * &GaussianRational::from_frac(c, d))
    })
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=6, 1usize..=3)
}

fn small_matrix() -> impl Strategy<Value = Mat> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-2i64..=2, r * c).prop_map(move |v| {
            Mat::from_vec(r, c, v.into_iter().map(GaussianRational::from_int).collect())
        })
    })
}

fn weight(m: usize, n: usize) -> impl Strategy<Value = Weight> {
    (proptest::collection::vec(-3i64..=3, m / 2), proptest::collection::vec(-3i64..=3, n))
        .prop_map(move |(eps, delta)| Weight { m, n, eps, delta })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn field_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
        let text = format!("{a}");
        prop_assert_eq!(text.parse::<GaussianRational>().unwrap(), a);
    }

    #[test]
    fn rank_nullity(m in small_matrix()) {
        prop_assert_eq!(kernel(&m).dim() + rank(&m), m.cols());
        prop_assert_eq!(image(&m).dim(), rank(&m));
    }

    #[test]
    fn modular_dimension_law(a in small_matrix(), b in small_matrix()) {
        if a.rows() == b.rows() {
            let (u, w) = (image(&a), image(&b));
            let meet = u.intersect(&w).unwrap();
            let join = u.sum(&w).unwrap();
            prop_assert_eq!(u.dim() + w.dim(), meet.dim() + join.dim());
        }
    }

    #[test]
    fn adjoint_and_transfer((m, n) in shape(), seed in 0u64..1000) {
        let x = random_odd_element(&make_space(m, n).unwrap(), seed);
        prop_assert!(adjoint_identity_holds(&x));
        let (l, r) = characteristic_transfer(&x);
        prop_assert_eq!(l, r);
        let (p, q) = nilpotency_pair(&x);
        prop_assert_eq!(p, q);
    }

    #[test]
    fn round_trip_and_equivariance((m, n) in shape(), pick in 0usize..1000, seed in 0u64..1000) {
        let all = enumerate_diagrams(m, n, 64).unwrap();
        let d = &all[pick % all.len()];
        prop_assert!(validate(d).is_empty());
        let rep = representative(d).unwrap();
        prop_assert!(is_nilpotent_odd(&rep.x));
        prop_assert_eq!(&classify(&rep.x).unwrap(), d);
        let s = &rep.x.space;
        let y = act(&rep.x, &random_group_element(s, Algebra::So, seed), &random_group_element(s, Algebra::Sp, seed + 1));
        prop_assert_eq!(&classify(&y).unwrap(), d);
    }

    #[test]
    fn compatibility_is_equivariant_and_self_dual((m, n) in shape(), seed in 0u64..1000, sparse in any::<bool>()) {
        let s = make_space(m, n).unwrap();
        let (f0, f1, case) = coordinate_flags(&s);
        let x = if sparse { fiber_sample(&s, &f0, &f1, case, seed).unwrap() } else { random_odd_element(&s, seed) };
        prop_assert!(duals_equivalent(&x, &f0, &f1, case).unwrap());
        let g0 = random_group_element(&s, Algebra::So, seed);
        let g1 = random_group_element(&s, Algebra::Sp, seed + 7);
        let (h0, h1) = (f0.transform(&g0), f1.transform(&g1));
        prop_assert!(is_self_orthogonal(&h0) && is_self_orthogonal(&h1));
        prop_assert_eq!(respects(&x, &f0, &f1, case).unwrap(), respects(&act(&x, &g0, &g1), &h0, &h1, case).unwrap());
    }

    #[test]
    fn fiber_samples_are_nilpotent((m, n) in shape(), seed in 0u64..1000) {
        let s = make_space(m, n).unwrap();
        let (f0, f1, case) = coordinate_flags(&s);
        let x = fiber_sample(&s, &f0, &f1, case, seed).unwrap();
        prop_assert!(is_nilpotent_odd(&x));
        prop_assert!(respects(&x, &f0, &f1, case).unwrap());
        prop_assert!(validate(&classify(&x).unwrap()).is_empty());
    }

    #[test]
    fn component_is_connected(h in 1usize..=3, seed in 0u64..1000) {
        let s = make_space(2 * h, 1).unwrap();
        let f = IsotropicFlag::coordinate(Side::V0, &s, FlagKind::Complete);
        let g = random_group_element(&s, Algebra::So, seed);
        prop_assert_eq!(component_of(&f.transform(&g)).unwrap(), Component::Plus);
    }

    #[test]
    fn dominance_is_a_partial_order(
        (a, k1, k2) in shape().prop_flat_map(|(m, n)| {
            let r = simple_roots(m, n).len();
            (weight(m, n), proptest::collection::vec(0i64..=2, r), proptest::collection::vec(0i64..=2, r))
        }),
        other in shape().prop_flat_map(|(m, n)| weight(m, n)),
    ) {
        let roots = simple_roots(a.m, a.n);
        let b = &a + &combine(&roots, &k1, &a);
        let c = &b + &combine(&roots, &k2, &a);
        prop_assert!(dominance_leq(&a, &a).unwrap());
        prop_assert!(dominance_leq(&a, &b).unwrap() && dominance_leq(&b, &c).unwrap());
        prop_assert!(dominance_leq(&a, &c).unwrap());
        prop_assert_eq!(dominance_leq(&b, &a).unwrap(), a == b);
        if other.m == a.m && other.n == a.n && dominance_leq(&a, &other).unwrap() && dominance_leq(&other, &a).unwrap() {
            prop_assert_eq!(&a, &other);
        }
    }
}

fn simple_roots(m: usize, n: usize) -> Vec<Weight> {
    let h = m / 2;
    let e = |i: usize| Weight::eps(m, n, i);
    let d = |i: usize| Weight::delta(m, n, i);
    let mut out = Vec::new();
    if m >= 3 {
        for i in 1..h {
            if m % 2 == 0 && i == h - 1 {
                break;
            }
            out.push(&e(i) - &e(i + 1));
        }
        if m % 2 == 1 {
            out.push(e(h));
        } else {
            out.push(&e(h - 1) - &e(h));
            out.push(&e(h - 1) + &e(h));
        }
    }
    for i in 1..n {
        out.push(&d(i) - &d(i + 1));
    }
    out.push(d(n).scale(2));
    out
}

fn combine(roots: &[Weight], k: &[i64], like: &Weight) -> Weight {
    roots.iter().zip(k).fold(Weight::zero(like.m, like.n), |acc, (r, &c)| &acc + &r.scale(c))
}
