use nilfix::geom::{BoxRegion, Point};
use nilfix::lipcalc::rules::commutator_bound;
use nilfix::lipcalc::sample::random_expression;
use nilfix::lipcalc::{
    displacement_floor_check, estimate_lip_identity, isotopy_stage, max_ball_angle, CertifiedMap, MapExpr,
};
use proptest::prelude::*;

fn map(seed: u64, max_bound: f64) -> CertifiedMap {
    CertifiedMap::new(random_expression(seed, 3, 0.12, max_bound)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_quotients_respect_propagated_bounds(seed in any::<u64>()) {
        let f = map(seed, 0.9);
        let est = estimate_lip_identity(&f, &BoxRegion::centered(10.0), 2000, seed).unwrap();
        prop_assert!(est <= f.eps + 1e-9, "{} > {}", est, f.eps);
    }

    #[test]
    fn inverse_residual(seed in any::<u64>(), x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let f = map(seed, 0.9);
        let inv = f.inverse().unwrap();
        let target = Point::new(x, y);
        let z = inv.evaluate(target, 1e-10).unwrap();
        prop_assert!(f.evaluate(z, 1e-12).unwrap().dist(target) <= 1e-9);
    }

    #[test]
    fn isotopy_scales_the_bound(seed in any::<u64>()) {
        let f = map(seed, 0.9);
        for t in [0.25, 0.5, 0.75] {
            let ft = isotopy_stage(&f, t).unwrap();
            let est = estimate_lip_identity(&ft, &BoxRegion::centered(10.0), 1000, seed).unwrap();
            prop_assert!(est <= t * f.eps + 1e-9);
        }
    }

    #[test]
    fn commutator_rule_below_six_max(a in 0.0f64..=1.0 / 9.0, b in 0.0f64..=1.0 / 9.0) {
        prop_assert!(commutator_bound(a, b).unwrap() <= 6.0 * a.max(b) + 1e-15);
    }

    #[test]
    fn fixed_point_exclusion_and_angles(seed in any::<u64>(), px in -3.0f64..3.0, py in -3.0f64..3.0) {
        let f = map(seed, 0.125);
        let p = Point::new(px, py);
        prop_assume!(f.displacement(p, 1e-13).unwrap().norm() > 1e-6);
        let rec = displacement_floor_check(&f, p, 60).unwrap();
        prop_assert!(rec.pass, "{}", rec.summary());
        let ang = max_ball_angle(&f, p, 200, seed).unwrap();
        prop_assert!(ang.angle <= std::f64::consts::FRAC_PI_3 + 1e-9);
    }
}

#[test]
fn shear_inverse_recovers_preimage() {
    let f = CertifiedMap::new(MapExpr::Trig(nilfix::lipcalc::TrigMap::shear(0.1, 1.0))).unwrap();
    let inv = f.inverse().unwrap();
    let y = Point::new(1.0 + 0.1 * 1f64.sin(), 1.0);
    let z = inv.evaluate(y, 1e-10).unwrap();
    assert!(f.evaluate(z, 1e-12).unwrap().dist(y) <= 1e-10);
}
