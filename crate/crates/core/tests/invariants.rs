use proptest::prelude::*;

use treewalk_core::affine::{decompose, elem_norm, is_horocyclic, recompose};
use treewalk_core::lamplighter::{LampEnd, LampTree, Lamps};
use treewalk_core::law::StepLaw;
use treewalk_core::padic::{PrecisionBudget, Qp};
use treewalk_core::padic_tree::{Affine, PAdicTree};
use treewalk_core::rng::StreamFamily;
use treewalk_core::tree::{theta, AffineTree, End, Norm, Point};
use treewalk_core::walk::run_right;
use treewalk_core::Rational;

fn padic(p: u32) -> PAdicTree {
    PAdicTree::new(Qp::new(p, PrecisionBudget::default()).unwrap())
}

/// A unit-numerator rational `p^k u / w` with `u, w` prime to `p`.
fn unit_ratio(p: u32) -> impl Strategy<Value = (i128, i128)> {
    let p = p as i128;
    (-3i64..=3, 0i128..40, 1..p, 0i128..40, 1..p).prop_map(move |(k, j1, r1, j2, r2)| {
        let (u, w) = (p * j1 + r1, p * j2 + r2);
        if k >= 0 {
            (u * p.pow(k as u32), w)
        } else {
            (u, w * p.pow((-k) as u32))
        }
    })
}

fn rational(p: u32) -> impl Strategy<Value = (i128, i128)> {
    (-500i128..500, 0u32..4, 1i128..30).prop_map(move |(n, k, m)| (n, (p as i128).pow(k) * m))
}

fn affine(p: u32) -> impl Strategy<Value = (i128, i128, i128, i128)> {
    (rational(p), unit_ratio(p)).prop_map(|((tn, td), (an, ad))| (tn, td, an, ad))
}

fn make(t: &PAdicTree, e: (i128, i128, i128, i128)) -> Affine {
    t.element_from_rationals((e.0, e.1), (e.2, e.3)).unwrap()
}

fn lamp_elem() -> impl Strategy<Value = (i64, Vec<(i64, i64)>)> {
    (-3i64..=3, prop::collection::vec((-6i64..6, 0i64..2), 0..5))
}

fn lamp_end() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-6i64..12, 0i64..2), 0..8)
}

fn exact_lamp_end(q: u32, pairs: &[(i64, i64)]) -> LampEnd {
    LampEnd {
        lamps: Lamps::from_pairs(q, pairs),
        known_to: i64::MAX,
    }
}

fn check_group_axioms<T: AffineTree>(t: &T, g: &T::Elem, h: &T::Elem, k: &T::Elem) {
    let gh_k = t.compose(&t.compose(g, h).unwrap(), k).unwrap();
    let g_hk = t.compose(g, &t.compose(h, k).unwrap()).unwrap();
    assert!(t.same_element(&gh_k, &g_hk), "associativity: {gh_k} vs {g_hk}");
    let id = t.identity();
    assert!(t.same_element(&t.compose(g, &id).unwrap(), g));
    assert!(t.same_element(&t.compose(&id, g).unwrap(), g));
    let inv = t.invert(g).unwrap();
    assert!(t.same_element(&t.compose(g, &inv).unwrap(), &id));
    assert!(t.same_element(&t.compose(&inv, g).unwrap(), &id));
    assert_eq!(t.phi(&t.compose(g, h).unwrap()), t.phi(g) + t.phi(h));
}

fn check_decomposition<T: AffineTree>(t: &T, g: &T::Elem) {
    let (b, n) = decompose(t, g).unwrap();
    assert!(is_horocyclic(t, &b));
    assert_eq!(n, t.phi(g));
    assert!(t.same_element(&recompose(t, &b, n).unwrap(), g));
}

fn check_meet_equivariance<T: AffineTree>(t: &T, g: &T::Elem, x: &T::Vertex, y: &T::Vertex) {
    let m = t.meet_vertices(x, y);
    let gm = t.act_vertex(g, &m).unwrap();
    let gx = t.act_vertex(g, x).unwrap();
    let gy = t.act_vertex(g, y).unwrap();
    assert_eq!(gm, t.meet_vertices(&gx, &gy));
}

fn check_theta_scaling<T: AffineTree>(t: &T, g: &T::Elem, a: &T::Boundary, b: &T::Boundary) {
    let p = |e: &T::Boundary| Point::End(End::Bottom(e.clone()));
    let before = theta(t, &p(a), &p(b)).unwrap();
    let ga = t.act_boundary(g, a).unwrap();
    let gb = t.act_boundary(g, b).unwrap();
    let after = theta(t, &p(&ga), &p(&gb)).unwrap();
    match (before.value, after.value) {
        (Norm::Power { exponent: e0, .. }, Norm::Power { exponent: e1, .. }) => {
            assert_eq!(e1, e0 - t.phi(g));
        }
        (Norm::Zero, Norm::Zero) => {}
        other => panic!("{other:?}"),
    }
}

fn check_norm<T: AffineTree>(t: &T, g: &T::Elem, h: &T::Elem) {
    let ng = elem_norm(t, g).unwrap();
    assert_eq!(elem_norm(t, &t.invert(g).unwrap()).unwrap(), ng);
    let gh = t.compose(g, h).unwrap();
    assert!(elem_norm(t, &gh).unwrap() <= ng + elem_norm(t, h).unwrap());
}

fn padic_vertex(t: &PAdicTree, c: (i128, i128), h: i64) -> treewalk_core::padic_tree::Disc {
    t.disc(&t.field().from_rational(c.0, c.1).unwrap(), h).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn padic_group_axioms(
        (p, g, h, k) in prop::sample::select(vec![2u32, 3])
            .prop_flat_map(|p| (Just(p), affine(p), affine(p), affine(p)))
    ) {
        let t = padic(p);
        check_group_axioms(&t, &make(&t, g), &make(&t, h), &make(&t, k));
    }

    #[test]
    fn padic_decomposition_round_trips(g in affine(2), h in affine(3)) {
        let t2 = padic(2);
        check_decomposition(&t2, &make(&t2, g));
        let t3 = padic(3);
        check_decomposition(&t3, &make(&t3, h));
    }

    #[test]
    fn padic_meets_are_equivariant(g in affine(3), c1 in rational(3), c2 in rational(3), h1 in -4i64..8, h2 in -4i64..8) {
        let t = padic(3);
        check_meet_equivariance(&t, &make(&t, g), &padic_vertex(&t, c1, h1), &padic_vertex(&t, c2, h2));
    }

    #[test]
    fn padic_theta_scales_with_phi(g in affine(2), a in rational(2), b in rational(2)) {
        prop_assume!(a.0 * b.1 != b.0 * a.1);
        let t = padic(2);
        let f = t.field();
        check_theta_scaling(&t, &make(&t, g), &f.from_rational(a.0, a.1).unwrap(), &f.from_rational(b.0, b.1).unwrap());
    }

    #[test]
    fn padic_norm_is_symmetric_and_subadditive(g in affine(3), h in affine(3)) {
        let t = padic(3);
        check_norm(&t, &make(&t, g), &make(&t, h));
    }

    #[test]
    fn theta_is_the_padic_distance(p in prop::sample::select(vec![2u32, 3]), a in rational(3), b in rational(3)) {
        prop_assume!(a.0 * b.1 != b.0 * a.1);
        let t = padic(p);
        let f = t.field();
        let (x, y) = (f.from_rational(a.0, a.1).unwrap(), f.from_rational(b.0, b.1).unwrap());
        let th = theta(&t, &Point::End(End::Bottom(x)), &Point::End(End::Bottom(y))).unwrap();
        prop_assert_eq!(th, f.norm(&f.sub(&x, &y).unwrap()));
    }

    #[test]
    fn lamplighter_group_axioms(g in lamp_elem(), h in lamp_elem(), k in lamp_elem()) {
        let t = LampTree::new(2).unwrap();
        check_group_axioms(&t, &t.element(g.0, &g.1), &t.element(h.0, &h.1), &t.element(k.0, &k.1));
    }

    #[test]
    fn lamplighter_decomposition_round_trips(g in lamp_elem()) {
        let t = LampTree::new(2).unwrap();
        check_decomposition(&t, &t.element(g.0, &g.1));
    }

    #[test]
    fn lamplighter_meets_are_equivariant(g in lamp_elem(), a in lamp_end(), b in lamp_end(), h1 in -4i64..8, h2 in -4i64..8) {
        let t = LampTree::new(2).unwrap();
        let x = t.boundary_vertex(&exact_lamp_end(2, &a), h1).unwrap();
        let y = t.boundary_vertex(&exact_lamp_end(2, &b), h2).unwrap();
        check_meet_equivariance(&t, &t.element(g.0, &g.1), &x, &y);
    }

    #[test]
    fn lamplighter_theta_scales_with_phi(g in lamp_elem(), a in lamp_end(), b in lamp_end()) {
        let t = LampTree::new(2).unwrap();
        check_theta_scaling(&t, &t.element(g.0, &g.1), &exact_lamp_end(2, &a), &exact_lamp_end(2, &b));
    }

    #[test]
    fn lamplighter_norm_is_symmetric_and_subadditive(g in lamp_elem(), h in lamp_elem()) {
        let t = LampTree::new(2).unwrap();
        check_norm(&t, &t.element(g.0, &g.1), &t.element(h.0, &h.1));
    }

    #[test]
    fn heights_telescope(seed in any::<u64>(), horizon in 0u64..200) {
        let t = padic(2);
        let law = StepLaw::new(
            &t,
            vec![
                (t.element_from_rationals((0, 1), (2, 1)).unwrap(), Rational::new(3, 4)),
                (t.element_from_rationals((1, 1), (1, 2)).unwrap(), Rational::new(1, 4)),
            ],
            false,
        )
        .unwrap();
        let mut prev = 0i64;
        let mut stream = StreamFamily::new(seed, 0).stream(0);
        run_right(&t, &law, horizon, &mut stream, |obs| {
            assert_eq!(obs.height, t.phi(obs.element));
            assert!(obs.step == 0 || (obs.height - prev).abs() == 1);
            prev = obs.height;
            Ok(core::ops::ControlFlow::Continue(()))
        })
        .unwrap();
    }
}
