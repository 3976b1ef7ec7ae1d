use nilfix::flows::{
    integrate, jet_of_vf, lie_bracket, make_example_fields, x1_field, y1_field, FlowError, FlowLeaf, IntegratorConfig,
    PolyVF,
};
use nilfix::geom::Point;
use nilfix::poly::{rat, Poly};
use proptest::prelude::*;

fn polar(r: f64, a: f64) -> Point {
    Point::new(r * a.cos(), r * a.sin())
}

fn poly_strategy() -> impl Strategy<Value = Poly> {
    proptest::collection::vec(((0u32..3, 0u32..3), -3i64..=3), 0..5)
        .prop_map(|ts| Poly::from_terms(ts.into_iter().map(|(e, c)| (e, rat(c, 1)))))
}

fn field_strategy() -> impl Strategy<Value = PolyVF> {
    (poly_strategy(), poly_strategy()).prop_map(|(p, q)| PolyVF::new(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric(a in field_strategy(), b in field_strategy()) {
        prop_assert_eq!(lie_bracket(&a, &b), lie_bracket(&b, &a).scale(&rat(-1, 1)));
    }

    #[test]
    fn jacobi_identity(a in field_strategy(), b in field_strategy(), c in field_strategy()) {
        let s = lie_bracket(&a, &lie_bracket(&b, &c))
            .add(&lie_bracket(&b, &lie_bracket(&c, &a)))
            .add(&lie_bracket(&c, &lie_bracket(&a, &b)));
        prop_assert!(s.is_zero());
    }

    #[test]
    fn x1_and_y1_flows_commute(r in 0.5f64..1.2, a in 0.0f64..std::f64::consts::TAU, s in -0.3f64..0.3, t in -0.3f64..0.3) {
        let cfg = IntegratorConfig::default();
        let x1 = x1_field(1, 1).to_float();
        let y1 = y1_field(1, 1).to_float();
        let z = polar(r, a);
        let xy = integrate(&x1, integrate(&y1, z, t, &cfg).unwrap(), s, &cfg).unwrap();
        let yx = integrate(&y1, integrate(&x1, z, s, &cfg).unwrap(), t, &cfg).unwrap();
        prop_assert!(xy.dist(yx) <= 1e-6, "{}", xy.dist(yx));
    }

    #[test]
    fn x1_flow_keeps_circles(r in 0.3f64..1.5, a in 0.0f64..std::f64::consts::TAU, t in -1.0f64..1.0) {
        let w = integrate(&x1_field(1, 1).to_float(), polar(r, a), t, &IntegratorConfig::default()).unwrap();
        prop_assert!((w.norm() - r).abs() <= 1e-8);
    }
}

#[test]
fn flow_and_backward_flow_cancel() {
    let ex = make_example_fields(1, 2, 2).unwrap();
    let cfg = IntegratorConfig::default();
    for field in ex.basis() {
        let leaf = FlowLeaf::with_eps(field, 0.4, cfg, 0.0);
        for i in 0..20 {
            let z = polar(0.3 + 0.05 * i as f64, 0.7 * i as f64);
            let back = leaf.apply_inverse(leaf.apply(z).unwrap()).unwrap();
            assert!(back.dist(z) <= 1e-8, "seed {i}: {}", back.dist(z));
        }
    }
}

/// On the unit circle `X1 = x^2 (-y, x)`, so the angle obeys `theta' = cos^2 theta`.
#[test]
fn x1_angle_matches_closed_form() {
    let t: f64 = 0.05;
    let w = integrate(&x1_field(1, 1).to_float(), Point::new(1.0, 0.0), t, &IntegratorConfig::default()).unwrap();
    assert!((w.y.atan2(w.x) - t.atan()).abs() <= 1e-9);
}

#[test]
fn jets_of_example_fields() {
    // X1 for p = 2 is homogeneous of degree 5.
    assert!(jet_of_vf(&x1_field(1, 2), 4).unwrap().is_zero());
    let j = jet_of_vf(&x1_field(1, 2), 5).unwrap();
    assert_eq!((j.p, j.q), (x1_field(1, 2).p, x1_field(1, 2).q));

    let ex = make_example_fields(1, 2, 2).unwrap();
    let ax = &ex.alpha_x[1];
    let j = jet_of_vf(ax, 3).unwrap();
    assert_eq!((&j.p, &j.q), (&ax.p, &ax.q));

    let constant = PolyVF::new(Poly::one(), Poly::zero());
    assert!(matches!(jet_of_vf(&constant, 4), Err(FlowError::OrderTooLow { order: 0 })));
}
