use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use singfol::flow::{FlowStep, FlowWord, NumericOptions};
use singfol::modalg::combine;
use singfol::{
    contains, fiber_dim, flow, lie_bracket, module_groebner, parse_vector_field, singular_locus,
    syzygy_basis, tangent_dim, word_compose, word_inverse, FoliationSpec, Monomial, Poly,
    RationalPoint, VectorField,
};

const NAMES: [&str; 3] = ["x", "y", "z"];

fn names(n: usize) -> Vec<String> {
    NAMES[..n].iter().map(|s| s.to_string()).collect()
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=3).prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn monomial(n: usize, max_deg: u32) -> impl Strategy<Value = Monomial> {
    proptest::collection::vec(0..=max_deg, n)
        .prop_filter("total degree bound", move |e| e.iter().sum::<u32>() <= max_deg)
        .prop_map(Monomial::from_exponents)
}

fn poly(n: usize, max_deg: u32) -> impl Strategy<Value = Poly> {
    proptest::collection::vec((monomial(n, max_deg), rational()), 0..=4)
        .prop_map(move |terms| Poly::from_terms(n, terms))
}

fn field(n: usize, max_deg: u32) -> impl Strategy<Value = VectorField> {
    proptest::collection::vec(poly(n, max_deg), n).prop_map(|c| VectorField::new(c).unwrap())
}

fn point(n: usize) -> impl Strategy<Value = RationalPoint> {
    proptest::collection::vec(rational(), n).prop_map(RationalPoint::new)
}

/// A small foliation: up to three generators of degree at most two.
fn spec() -> impl Strategy<Value = FoliationSpec> {
    (1usize..=2)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(field(n, 2), 1..=3)))
        .prop_map(|(n, gens)| FoliationSpec::new(names(n), gens).unwrap())
}

fn n_fields(count: usize) -> impl Strategy<Value = Vec<VectorField>> {
    (1usize..=3).prop_flat_map(move |n| proptest::collection::vec(field(n, 3), count))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_parse_round_trip(x in (1usize..=3).prop_flat_map(|n| field(n, 4))) {
        let vars = names(x.nvars());
        let text = x.display(&vars).to_string();
        prop_assert_eq!(parse_vector_field(&text, &vars).unwrap(), x);
    }

    #[test]
    fn bracket_is_antisymmetric(v in n_fields(2)) {
        let xy = lie_bracket(&v[0], &v[1]).unwrap();
        let yx = lie_bracket(&v[1], &v[0]).unwrap();
        prop_assert!(xy.try_add(&yx).unwrap().is_zero());
    }

    #[test]
    fn jacobi_identity(v in n_fields(3)) {
        let b = |a: &VectorField, c: &VectorField| lie_bracket(a, c).unwrap();
        let sum = b(&v[0], &b(&v[1], &v[2]))
            .try_add(&b(&v[1], &b(&v[2], &v[0])))
            .unwrap()
            .try_add(&b(&v[2], &b(&v[0], &v[1])))
            .unwrap();
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn leibniz_rule(
        (x, y, f) in (1usize..=3).prop_flat_map(|n| (field(n, 2), field(n, 2), poly(n, 2)))
    ) {
        let lhs = lie_bracket(&x, &y.scale(&f)).unwrap();
        let rhs = y
            .scale(&x.apply(&f).unwrap())
            .try_add(&lie_bracket(&x, &y).unwrap().scale(&f))
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn syzygies_annihilate_and_dims_are_ordered(s in spec(), pts in proptest::collection::vec(point(2), 4)) {
        let syz = syzygy_basis(&s).unwrap();
        for rel in syz.relations() {
            prop_assert!(combine(&s, rel).is_zero());
        }
        for p in pts {
            let p = RationalPoint::new(p.coords[..s.nvars()].to_vec());
            let fd = fiber_dim(&s, &p).unwrap();
            let td = tangent_dim(&s, &p).unwrap();
            prop_assert!(fd >= td);
            prop_assert!(fd <= s.num_generators());
            prop_assert!(td <= s.nvars());
        }
    }

    #[test]
    fn singular_locus_is_where_rank_drops(s in spec(), pts in proptest::collection::vec(point(2), 4)) {
        let locus = singular_locus(&s);
        for p in pts {
            let p = RationalPoint::new(p.coords[..s.nvars()].to_vec());
            let on_locus = locus.minors.iter().all(|m| m.eval(&p.coords).is_zero());
            let drops = tangent_dim(&s, &p).unwrap() < locus.generic_rank;
            prop_assert_eq!(on_locus, drops);
        }
    }

    #[test]
    fn combinations_are_members_with_valid_certificates(
        (s, coeffs) in spec().prop_flat_map(|s| {
            let n = s.nvars();
            let k = s.num_generators();
            (Just(s), proptest::collection::vec(poly(n, 2), k))
        })
    ) {
        let target = combine(&s, &coeffs);
        let gb = module_groebner(&s).unwrap();
        let m = contains(&gb, &target).unwrap();
        prop_assert!(m.member);
        let cert = m.certificate.unwrap();
        prop_assert_eq!(combine(&s, &cert), target);
    }
}

fn sl2() -> FoliationSpec {
    FoliationSpec::parse(&["x", "y"], &["x*dx - y*dy", "y*dx", "x*dy"]).unwrap()
}

fn sl2_word() -> impl Strategy<Value = Vec<(Vec<i64>, f64)>> {
    proptest::collection::vec((proptest::collection::vec(-2i64..=2, 3), -0.5f64..0.5), 0..=3)
}

fn to_word(spec: &FoliationSpec, raw: &[(Vec<i64>, f64)]) -> FlowWord {
    let steps = raw
        .iter()
        .map(|(c, t)| FlowStep::new(c.iter().map(|&v| BigRational::from_integer(v.into())).collect(), *t))
        .collect();
    FlowWord::new(spec, steps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn flow_group_property(a in sl2_word(), b in sl2_word(), x in (-1.0f64..1.0, -1.0f64..1.0)) {
        let s = sl2();
        let opts = NumericOptions::with_step(1e-2);
        let (w1, w2) = (to_word(&s, &a), to_word(&s, &b));
        let x0 = [x.0, x.1];
        let composed = flow(&s, &word_compose(&w1, &w2).unwrap(), &x0, &opts).unwrap();
        let stepwise = flow(&s, &w1, &flow(&s, &w2, &x0, &opts).unwrap(), &opts).unwrap();
        for (p, q) in composed.iter().zip(&stepwise) {
            prop_assert!((p - q).abs() < 1e-9, "{composed:?} vs {stepwise:?}");
        }
        let back = flow(&s, &word_inverse(&w1), &flow(&s, &w1, &x0, &opts).unwrap(), &opts).unwrap();
        for (p, q) in back.iter().zip(&x0) {
            prop_assert!((p - q).abs() < 1e-6, "{back:?} vs {x0:?}");
        }
    }
}
