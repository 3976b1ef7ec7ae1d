use std::f64::consts::{PI, TAU};

use nilfix::geom::{BoxRegion, Point};
use nilfix::lipcalc::{isotopy_stage, rotation_about, rotation_map, translation_map, CertifiedMap, MapExpr};
use nilfix::orbits::{
    attainment_sets, build_gamma, capital_point_check, convex_hull, curve_separation, detect_recurrence,
    displacement_index, extract_simple_loop, fixed_point_candidates, iterate_orbit, winding_number, IndexConfig,
    OrbitError, PolyLoop,
};
use proptest::prelude::*;

const THETA: f64 = 0.12;

/// Total turning of `v - q` along the loop, in turns.
fn angle_sum(lp: &PolyLoop, q: Point) -> f64 {
    let n = lp.vertices.len();
    (0..n)
        .map(|i| {
            let a = lp.vertices[i] - q;
            let b = lp.vertices[(i + 1) % n] - q;
            a.cross(b).atan2(a.dot(b))
        })
        .sum::<f64>()
        / TAU
}

/// Quadratic scan over non-adjacent edge pairs with strict crossings and
/// collinear overlaps both counted as intersections.
fn brute_simple(lp: &PolyLoop) -> bool {
    let v = &lp.vertices;
    let n = v.len();
    let orient = |a: Point, b: Point, c: Point| (b - a).cross(c - a);
    let on_seg = |a: Point, b: Point, c: Point| {
        orient(a, b, c) == 0.0
            && c.x >= a.x.min(b.x)
            && c.x <= a.x.max(b.x)
            && c.y >= a.y.min(b.y)
            && c.y <= a.y.max(b.y)
    };
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b, c, d) = (v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]);
            let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
            if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
                return false;
            }
            if on_seg(a, b, c) || on_seg(a, b, d) || on_seg(c, d, a) || on_seg(c, d, b) {
                return false;
            }
        }
    }
    true
}

fn circle(r: f64, n: usize) -> PolyLoop {
    PolyLoop::new(
        (0..n)
            .map(|i| Point::new(r * (TAU * i as f64 / n as f64).cos(), r * (TAU * i as f64 / n as f64).sin()))
            .collect(),
    )
}

#[test]
fn rotation_recurrence_and_index() {
    let f = rotation_map(THETA);
    let p = Point::new(1.0, 0.0);
    let orbit = iterate_orbit(&f, p, 200, 1e3).unwrap();
    let first = detect_recurrence(&orbit, 0.05).unwrap()[0];
    assert_eq!(first.n, 52);
    let chord = 2.0 * ((52.0 * THETA - TAU).abs() / 2.0).sin();
    assert!((first.distance - chord).abs() < 1e-12);

    let g = build_gamma(&f, p, 52).unwrap();
    assert_eq!(winding_number(&g, Point::ORIGIN, 1e-9).unwrap(), 1);
    assert_eq!(angle_sum(&g, Point::ORIGIN).round(), 1.0);
}

#[test]
fn simple_loop_of_m105() {
    let f = rotation_map(THETA);
    let g = build_gamma(&f, Point::new(1.0, 0.0), 105).unwrap();
    assert!(!brute_simple(&g));
    let s = extract_simple_loop(&g).unwrap();
    assert!(brute_simple(&s.lp));
    assert!(s.lp.is_simple());
    assert!(s.angle_condition);
    assert_eq!(displacement_index(&f, &s.lp, &IndexConfig::default()).unwrap(), 1);
}

#[test]
fn translation_escapes() {
    let f = translation_map(Point::new(1.0, 0.0));
    let o = iterate_orbit(&f, Point::ORIGIN, 50, 10.0).unwrap();
    assert!(o.escaped);
    assert_eq!(o.iterates.len(), 11);
    assert!(matches!(detect_recurrence(&o, 0.1), Err(OrbitError::UnboundedOrbit { step: 10, .. })));
}

fn star_loop() -> impl Strategy<Value = PolyLoop> {
    proptest::collection::vec((0.3f64..2.0, 0.0f64..1.0), 3..12).prop_map(|rs| {
        let n = rs.len();
        PolyLoop::new(
            rs.iter()
                .enumerate()
                .map(|(i, &(r, jitter))| {
                    let a = TAU * (i as f64 + 0.8 * jitter) / n as f64;
                    Point::new(r * a.cos(), r * a.sin())
                })
                .collect(),
        )
    })
}

proptest! {
    #[test]
    fn winding_matches_angle_sum(lp in star_loop(), qx in -2.5f64..2.5, qy in -2.5f64..2.5, rev in any::<bool>()) {
        let lp = if rev { PolyLoop::new(lp.vertices.iter().rev().copied().collect()) } else { lp };
        let q = Point::new(qx, qy);
        prop_assume!(lp.distance_to(q) > 1e-6);
        let w = winding_number(&lp, q, 1e-9).unwrap();
        prop_assert_eq!(w as f64, angle_sum(&lp, q).round());
    }

    #[test]
    fn linear_index_is_det_sign(a in -0.1f64..0.1, b in -0.1f64..0.1, c in -0.1f64..0.1, d in -0.1f64..0.1) {
        let det = a * d - b * c;
        prop_assume!(det.abs() > 1e-4);
        let f = CertifiedMap::new(MapExpr::Affine {
            linear: [[a, b], [c, d]],
            offset: Point::ORIGIN,
        })
        .unwrap();
        let idx = displacement_index(&f, &circle(1.0, 64), &IndexConfig::default()).unwrap();
        prop_assert_eq!(idx, det.signum() as i64);
    }
}

#[test]
fn circle_points_are_all_hull_vertices() {
    let lp = circle(1.0, 100);
    let h = convex_hull(&lp.vertices);
    assert_eq!(h.len(), 100);
    let area: f64 = (0..100).map(|i| h[i].cross(h[(i + 1) % 100])).sum::<f64>() / 2.0;
    assert!(area > 0.0);
    assert!((area - 50.0 * (TAU / 100.0).sin()).abs() < 1e-12);
}

#[test]
fn concentric_separation() {
    let n = 128;
    // Matching inner and outer edges are parallel, at radii cos(pi/n) and 2 cos(pi/n).
    let want = (PI / n as f64).cos();
    let got = curve_separation(&circle(1.0, n), &circle(2.0, n));
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn gamma_curves_of_rotations_about_distinct_centers() {
    // Rotations about distinct centers do not commute, so this takes the two
    // curves separately. Each Gamma is a 52-gon inscribed in a unit circle,
    // and the circles are 3 apart, so the curves are at least 3 and at most
    // one chord length more than 3 apart.
    let (c1, c2) = (Point::ORIGIN, Point::new(5.0, 0.0));
    let f = rotation_about(THETA, c1);
    let g = rotation_about(THETA, c2);
    let gf = build_gamma(&f, Point::new(1.0, 0.0), 52).unwrap();
    let gg = build_gamma(&g, Point::new(6.0, 0.0), 52).unwrap();
    let r = 2.0 * (THETA / 2.0).sin();
    for (h, lp) in [(&f, &gf), (&g, &gg)] {
        for &v in &lp.vertices {
            assert!(h.displacement(v, 1e-14).unwrap().norm() >= r - 1e-12);
        }
    }
    let d = curve_separation(&gf, &gg);
    assert!(d >= r);
    assert!((3.0..=3.0 + r).contains(&d), "{d}");
}

#[test]
fn capital_index_survives_conjugation() {
    let c = Point::new(0.5, 0.2);
    let f = rotation_about(THETA, c);
    let h = rotation_map(0.7);
    let conj = h.compose(&f.compose(&h.inverse().unwrap()).unwrap()).unwrap();
    let p = Point::new(1.5, 0.2);
    let hp = h.evaluate(p, 1e-14).unwrap();
    let hc = h.evaluate(c, 1e-14).unwrap();
    let a = capital_point_check(&iterate_orbit(&f, p, 120, 1e3).unwrap(), c, &[52, 105], 1e-9).unwrap();
    let b = capital_point_check(&iterate_orbit(&conj, hp, 120, 1e3).unwrap(), hc, &[52, 105], 1e-9).unwrap();
    assert!(a.capital && b.capital);
    assert_eq!(a.indices.iter().map(|x| x.1).collect::<Vec<_>>(), b.indices.iter().map(|x| x.1).collect::<Vec<_>>());
}

/// Index along a fixed loop is unchanged along `Id + t (f - Id)`, which has the
/// same fixed points for every `t > 0`.
#[test]
fn index_stable_along_isotopy() {
    let f = rotation_map(THETA);
    let lp = circle(0.8, 40);
    for t in [0.1, 0.5, 1.0] {
        let ft = isotopy_stage(&f, t).unwrap();
        assert_eq!(displacement_index(&ft, &lp, &IndexConfig::default()).unwrap(), 1);
    }
}

#[test]
fn rotation_fixed_point_is_isolated() {
    let c = fixed_point_candidates(&rotation_map(THETA), &BoxRegion::centered(1.3), 30, 1e-6).unwrap();
    assert_eq!(c.len(), 1);
    assert!(c[0].norm() < 1e-5);
}

#[test]
fn attainment_for_two_rotations() {
    let (a, b) = (0.1f64, 0.07f64);
    let maps = [rotation_map(a), rotation_map(b)];
    // Words up to length ~32 are needed for the chords to go all the way round.
    let s = attainment_sets(&maps, &maps[0], Point::new(1.0, 0.0), 3000, 160).unwrap();
    let want = (a / 2.0).cos();
    assert!((s.eps_g - want).abs() <= 1e-6, "{} vs {}", s.eps_g, want);
    assert!(!s.fix_empty);
    let err = s.resolution_error;
    for k in 0..32 {
        let ang = TAU * k as f64 / 32.0;
        let dir = Point::new(ang.cos(), ang.sin());
        assert!(s.b_mask.contains(dir * (want - err)));
        assert!(!s.b_mask.contains(dir * (1.0 + 2.0 * err)));
    }
}
