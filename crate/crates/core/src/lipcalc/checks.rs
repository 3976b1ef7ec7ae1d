//! Sampled verification of the geometric consequences of a small `Lip(f - Id)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CertifiedMap, LipError, Result};
use crate::geom::{BoxRegion, Point};
use crate::report::CheckRecord;

/// Evaluation tolerance for sampled checks; far below any reported slack.
const SAMPLE_TOL: f64 = 1e-13;
const ANGLE_SLACK: f64 = 1e-9;

/// `Cone(vertex, axis, half_angle) = { vertex + u : Ang(u, axis) <= half_angle }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub vertex: Point,
    pub axis: Point,
    pub half_angle: f64,
}

impl ConeSpec {
    pub fn new(vertex: Point, axis: Point, half_angle: f64) -> Result<Self> {
        if ((axis.norm() - 1.0).abs()) > 1e-12 {
            return Err(LipError::DegenerateInput(format!("cone axis has norm {}", axis.norm())));
        }
        if !(half_angle > 0.0 && half_angle < FRAC_PI_2) {
            return Err(LipError::DegenerateInput(format!("cone half-angle {half_angle} outside (0, pi/2)")));
        }
        Ok(Self { vertex, axis, half_angle })
    }

    /// Angle between `pt - vertex` and the axis; the vertex itself has angle 0.
    pub fn angle_of(&self, pt: Point) -> f64 {
        let u = pt - self.vertex;
        if u.norm() == 0.0 {
            0.0
        } else {
            u.angle_to(self.axis)
        }
    }

    pub fn contains(&self, pt: Point, slack: f64) -> bool {
        self.angle_of(pt) <= self.half_angle + slack
    }
}

/// Largest sampled `|(f - Id)(x) - (f - Id)(y)| / |x - y|` over `pairs` pairs.
///
/// Even-indexed pairs are uniform in `region`; odd-indexed pairs are short
/// chords (length up to a tenth of the diagonal) which probe local stretching.
pub fn estimate_lip_identity(map: &CertifiedMap, region: &BoxRegion, pairs: usize, seed: u64) -> Result<f64> {
    if region.is_degenerate() {
        return Err(LipError::DegenerateInput("sampling region is degenerate".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = |rng: &mut ChaCha8Rng| {
        Point::new(rng.gen_range(region.min.x..=region.max.x), rng.gen_range(region.min.y..=region.max.y))
    };
    let diag = region.diag();
    let samples: Vec<(Point, Point)> = (0..pairs)
        .map(|i| {
            let x = uniform(&mut rng);
            let y = if i % 2 == 0 {
                uniform(&mut rng)
            } else {
                let r = rng.gen_range(1e-3..=0.1) * diag;
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                let y = x + Point::new(a.cos(), a.sin()) * r;
                Point::new(y.x.clamp(region.min.x, region.max.x), y.y.clamp(region.min.y, region.max.y))
            };
            (x, y)
        })
        .collect();
    let quotients: Vec<Result<f64>> = samples
        .par_iter()
        .map(|&(x, y)| {
            let d = x.dist(y);
            if d == 0.0 {
                return Ok(0.0);
            }
            let dx = map.displacement(x, SAMPLE_TOL)?;
            let dy = map.displacement(y, SAMPLE_TOL)?;
            Ok(dx.dist(dy) / d)
        })
        .collect();
    let mut best = 0.0f64;
    for q in quotients {
        best = best.max(q?);
    }
    Ok(best)
}

fn require_u(map: &CertifiedMap) -> Result<()> {
    if map.eps > 0.125 {
        return Err(LipError::PreconditionViolated(format!("bound {} exceeds 1/8", map.eps)));
    }
    Ok(())
}

fn base_displacement(map: &CertifiedMap, p: Point) -> Result<f64> {
    let d = map.displacement(p, SAMPLE_TOL)?.norm();
    if d <= 1e-14 * (1.0 + p.norm()) {
        return Err(LipError::DegenerateInput(format!("point {p:?} is fixed")));
    }
    Ok(d)
}

/// Grid check that `f` has no point of displacement below half of `|f(p) - p|`
/// in the ball `B[p, 4 |f(p) - p|]`.
///
/// `grid` is the number of samples per side of the enclosing square. The bound
/// is lowered by the cell diagonal times `1 + eps`, which covers the variation
/// of the displacement between neighbouring samples.
pub fn displacement_floor_check(map: &CertifiedMap, p: Point, grid: usize) -> Result<CheckRecord> {
    require_u(map)?;
    let d = base_displacement(map, p)?;
    let n = grid.max(2);
    let radius = 4.0 * d;
    let h = 2.0 * radius / (n - 1) as f64;
    let slack = h * std::f64::consts::SQRT_2 * (1.0 + map.eps);
    let rows: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut m = f64::INFINITY;
            for j in 0..n {
                let x = Point::new(p.x - radius + i as f64 * h, p.y - radius + j as f64 * h);
                if x.dist(p) <= radius {
                    m = m.min(map.displacement(x, SAMPLE_TOL)?.norm());
                }
            }
            Ok(m)
        })
        .collect();
    let mut measured = f64::INFINITY;
    for r in rows {
        measured = measured.min(r?);
    }
    let bound = 0.5 * d - slack;
    Ok(CheckRecord::new(
        "displacement_floor",
        json!({"p": p, "grid": n, "eps": map.eps, "base_displacement": d, "slack": slack}),
        measured,
        bound,
        measured >= bound,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleReport {
    pub angle: f64,
    /// `min(pi/3, 2 arcsin(4 eps))`.
    pub bound: f64,
    pub pass: bool,
}

impl AngleReport {
    pub fn record(&self, inputs: serde_json::Value) -> CheckRecord {
        CheckRecord::new("displacement_angle", inputs, self.angle, self.bound, self.pass)
    }
}

fn angle_bound(eps: f64) -> f64 {
    FRAC_PI_3.min(2.0 * (4.0 * eps).min(1.0).asin())
}

/// Angle between the displacement directions at `z1` and `z2`, both in
/// `B[p, 4 |f(p) - p|]`.
pub fn displacement_angle_check(map: &CertifiedMap, p: Point, z1: Point, z2: Point) -> Result<AngleReport> {
    require_u(map)?;
    let d = base_displacement(map, p)?;
    for z in [z1, z2] {
        if z.dist(p) > 4.0 * d * (1.0 + 1e-12) {
            return Err(LipError::PreconditionViolated(format!("{z:?} outside the ball of radius {}", 4.0 * d)));
        }
    }
    let v1 = map.displacement(z1, SAMPLE_TOL)?;
    let v2 = map.displacement(z2, SAMPLE_TOL)?;
    if v1.norm() == 0.0 || v2.norm() == 0.0 {
        return Err(LipError::DegenerateInput("vanishing displacement".into()));
    }
    let angle = v1.angle_to(v2);
    let bound = angle_bound(map.eps);
    Ok(AngleReport { angle, bound, pass: angle <= bound + ANGLE_SLACK })
}

/// Worst displacement angle over `count` random pairs in the 4-ball around `p`.
pub fn max_ball_angle(map: &CertifiedMap, p: Point, count: usize, seed: u64) -> Result<AngleReport> {
    let d = base_displacement(map, p)?;
    let r = 4.0 * d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_ball = |rng: &mut ChaCha8Rng| {
        let rho = r * rng.gen::<f64>().sqrt();
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        p + Point::new(a.cos(), a.sin()) * rho
    };
    let pairs: Vec<(Point, Point)> = (0..count).map(|_| (in_ball(&mut rng), in_ball(&mut rng))).collect();
    let reports: Vec<Result<AngleReport>> =
        pairs.par_iter().map(|&(a, b)| displacement_angle_check(map, p, a, b)).collect();
    let mut worst = AngleReport { angle: 0.0, bound: angle_bound(map.eps), pass: true };
    for rep in reports {
        let rep = rep?;
        if rep.angle > worst.angle {
            worst.angle = rep.angle;
        }
        worst.pass &= rep.pass;
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub samples: usize,
    pub half_angle: f64,
    /// Largest angle of a sampled image point in either cone.
    pub max_cone_angle: f64,
    pub cones_pass: bool,
    /// `max |f(lambda) - f(p)| / |f(q) - f(p)|` when the ball check ran.
    pub max_ratio: Option<f64>,
    pub ball_pass: Option<bool>,
}

impl SegmentReport {
    pub fn pass(&self) -> bool {
        self.cones_pass && self.ball_pass.unwrap_or(true)
    }

    pub fn records(&self, inputs: serde_json::Value) -> Vec<CheckRecord> {
        let mut out = vec![CheckRecord::new(
            "segment_cones",
            inputs.clone(),
            self.max_cone_angle,
            self.half_angle,
            self.cones_pass,
        )];
        if let (Some(r), Some(ok)) = (self.max_ratio, self.ball_pass) {
            out.push(CheckRecord::new("segment_ball", inputs, r, 1.0, ok));
        }
        out
    }
}

/// Samples `f` on `[p, q]` and checks that the image stays inside both cones
/// of half-angle `2 arctan(eps / (1 - eps))` at `f(p)` and `f(q)`, and, when
/// `ball_check` is set, inside the ball of radius `|f(q) - f(p)|` about `f(p)`.
pub fn segment_image_checks(
    map: &CertifiedMap,
    p: Point,
    q: Point,
    samples: usize,
    ball_check: bool,
) -> Result<SegmentReport> {
    if p == q {
        return Err(LipError::DegenerateInput("segment endpoints coincide".into()));
    }
    let eps = map.eps;
    if eps >= 0.5 {
        return Err(LipError::PreconditionViolated(format!("cone checks need eps < 1/2, got {eps}")));
    }
    let ball_threshold = 1.0 / (1.0 + 3f64.sqrt());
    if ball_check && eps >= ball_threshold {
        return Err(LipError::PreconditionViolated(format!("ball check needs eps < {ball_threshold}, got {eps}")));
    }
    let fp = map.evaluate(p, SAMPLE_TOL)?;
    let fq = map.evaluate(q, SAMPLE_TOL)?;
    let w = fq - fp;
    let wn = w.norm();
    let axis = w * (1.0 / wn);
    // A zero bound degenerates the cone to a ray; keep it a valid open cone.
    let half_angle = (2.0 * (eps / (1.0 - eps)).atan()).max(1e-12);
    let c1 = ConeSpec { vertex: fp, axis, half_angle };
    let c2 = ConeSpec { vertex: fq, axis: -axis, half_angle };
    let n = samples.max(2);
    let mut max_angle = 0.0f64;
    let mut max_ratio = 0.0f64;
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let img = map.evaluate(p + (q - p) * t, SAMPLE_TOL)?;
        max_angle = max_angle.max(c1.angle_of(img)).max(c2.angle_of(img));
        max_ratio = max_ratio.max(img.dist(fp) / wn);
    }
    Ok(SegmentReport {
        samples: n,
        half_angle,
        max_cone_angle: max_angle,
        cones_pass: max_angle <= half_angle + ANGLE_SLACK,
        max_ratio: ball_check.then_some(max_ratio),
        ball_pass: ball_check.then_some(max_ratio <= 1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipcalc::{rotation_map, translation_map, MapExpr};

    fn u_rotation() -> CertifiedMap {
        rotation_map(2.0 * (1.0f64 / 16.0).asin())
    }

    #[test]
    fn estimates_for_trivial_maps() {
        let region = BoxRegion::centered(10.0);
        assert_eq!(estimate_lip_identity(&CertifiedMap::identity(), &region, 100, 1).unwrap(), 0.0);
        let t = translation_map(Point::new(2.0, -1.0));
        assert!(estimate_lip_identity(&t, &region, 100, 1).unwrap() < 1e-12);
    }

    #[test]
    fn rotation_estimate_below_operator_norm() {
        let r = rotation_map(0.12);
        let est = estimate_lip_identity(&r, &BoxRegion::centered(10.0), 10_000, 7).unwrap();
        assert!(est <= 2.0 * 0.06f64.sin() + 1e-12);
        // Every quotient equals the operator norm for a rotation.
        assert!(est >= 2.0 * 0.06f64.sin() - 1e-9);
    }

    #[test]
    fn estimate_is_deterministic() {
        let f = CertifiedMap::new(MapExpr::Trig(crate::lipcalc::TrigMap::shear(0.1, 1.0))).unwrap();
        let r = BoxRegion::centered(3.0);
        assert_eq!(estimate_lip_identity(&f, &r, 500, 3).unwrap(), estimate_lip_identity(&f, &r, 500, 3).unwrap());
    }

    #[test]
    fn floor_check_rotation() {
        let rec = displacement_floor_check(&u_rotation(), Point::new(1.0, 0.0), 200).unwrap();
        assert!(rec.pass, "{rec:?}");
    }

    #[test]
    fn floor_check_translation_measures_constant() {
        let t = translation_map(Point::new(0.3, 0.4));
        let rec = displacement_floor_check(&t, Point::new(5.0, 5.0), 50).unwrap();
        assert!(rec.pass);
        assert!((rec.measured.as_f64().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn floor_check_rejects_fixed_point() {
        let err = displacement_floor_check(&CertifiedMap::identity(), Point::new(1.0, 1.0), 20);
        assert!(matches!(err, Err(LipError::DegenerateInput(_))));
    }

    #[test]
    fn angle_checks() {
        let t = translation_map(Point::new(1.0, 1.0));
        let rep = displacement_angle_check(&t, Point::ORIGIN, Point::new(1.0, 0.0), Point::new(0.0, 1.0)).unwrap();
        assert_eq!(rep.angle, 0.0);
        let f = u_rotation();
        let p = Point::new(1.0, 0.0);
        let rep = displacement_angle_check(&f, p, p, p + Point::new(0.2, 0.0)).unwrap();
        assert!(rep.pass);
        // (R - I) z is z rotated by a fixed angle and scaled, so the angle between
        // displacements equals the angle between the base points.
        let z2 = p + Point::new(0.2, 0.0);
        assert!((rep.angle - p.angle_to(z2)).abs() < 1e-12);
        let same = displacement_angle_check(&f, p, z2, z2).unwrap();
        assert_eq!(same.angle, 0.0);
        let worst = max_ball_angle(&f, p, 1000, 11).unwrap();
        assert!(worst.pass && worst.angle <= FRAC_PI_3 + 1e-9);
    }

    #[test]
    fn segment_checks() {
        let id = CertifiedMap::identity();
        let rep = segment_image_checks(&id, Point::ORIGIN, Point::new(1.0, 1.0), 50, true).unwrap();
        assert!(rep.pass());
        let r = rotation_map(0.12);
        let rep = segment_image_checks(&r, Point::new(1.0, 0.0), Point::new(2.0, 0.0), 100, true).unwrap();
        assert!(rep.pass(), "{rep:?}");
        let wide =
            CertifiedMap::new(MapExpr::Affine { linear: [[0.4, 0.0], [0.0, 0.0]], offset: Point::ORIGIN }).unwrap();
        let err = segment_image_checks(&wide, Point::ORIGIN, Point::new(1.0, 0.0), 10, true);
        assert!(matches!(err, Err(LipError::PreconditionViolated(_))));
        assert!(segment_image_checks(&wide, Point::ORIGIN, Point::new(1.0, 0.0), 10, false).is_ok());
    }

    #[test]
    fn cone_validation() {
        assert!(ConeSpec::new(Point::ORIGIN, Point::new(1.0, 0.0), 0.3).is_ok());
        assert!(ConeSpec::new(Point::ORIGIN, Point::new(2.0, 0.0), 0.3).is_err());
        assert!(ConeSpec::new(Point::ORIGIN, Point::new(1.0, 0.0), 2.0).is_err());
        let c = ConeSpec::new(Point::ORIGIN, Point::new(1.0, 0.0), 0.3).unwrap();
        assert!(c.contains(Point::new(1.0, 0.2), 0.0));
        assert!(!c.contains(Point::new(1.0, 0.5), 0.0));
    }
}
