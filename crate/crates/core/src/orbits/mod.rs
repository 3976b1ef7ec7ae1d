//! Orbits of plane maps, the closed polygonal curves through them, winding
//! numbers, and the search for fixed points enclosed by an orbit.

mod attain;
mod locate;
mod loops;

pub use attain::{attainment_sets, sample_group_orbit, AttainmentSets, Raster};
pub use locate::{
    capital_point_check, fixed_point_candidates, locate_fixed_point, locate_global_fixed_point, refine_fixed_point,
    CapitalReport, Certificate, GlobalConfig, GlobalLocate, LocateConfig, Located, StageReport,
};
pub use loops::{displacement_index, extract_simple_loop, IndexConfig, SimpleLoop};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{orient, point_segment_dist, segment_segment_dist, Point};
use crate::lipcalc::{CertifiedMap, LipError};

/// Tolerance used when evaluating maps along an orbit.
pub const EVAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("orbit left the disc of radius {radius} at step {step}")]
    UnboundedOrbit { step: usize, radius: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("query point is {distance} from the curve, within the guard {guard}")]
    OnCurve { distance: f64, guard: f64 },
    #[error("loop has no self-intersection")]
    AlreadySimple,
    #[error("displacement {displacement} at {point:?} is below the floor {floor}")]
    FixedPointOnCurve { point: Point, displacement: f64, floor: f64 },
    #[error("refinement exceeded the cap of {cap}")]
    RefinementCap { cap: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("search failed: {0}")]
    SearchFailed(String),
    #[error("stage {stage} failed: {detail}")]
    StageFailed { stage: usize, detail: String },
    #[error(transparent)]
    Lip(#[from] LipError),
}

pub type Result<T, E = OrbitError> = std::result::Result<T, E>;

/// `f^0(p), ..., f^N(p)`, possibly cut short by an escape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub base: Point,
    pub iterates: Vec<Point>,
    pub escaped: bool,
    /// Hash of the map expression, for matching artifacts to configs.
    pub map_id: String,
}

impl OrbitRecord {
    /// Largest distance between two iterates, up to a factor of two.
    pub fn diameter(&self) -> f64 {
        let p = self.base;
        2.0 * self.iterates.iter().map(|z| z.dist(p)).fold(0.0, f64::max)
    }

    fn require_bounded(&self) -> Result<()> {
        if self.escaped {
            return Err(OrbitError::UnboundedOrbit {
                step: self.iterates.len() - 1,
                radius: self.iterates.last().map(|z| z.norm()).unwrap_or(0.0),
            });
        }
        Ok(())
    }
}

/// FNV-1a over the JSON form of the expression.
pub fn map_id(f: &CertifiedMap) -> String {
    let json = serde_json::to_string(&f.expr).unwrap_or_default();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in json.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Iterates `f` from `p` up to `n` times, stopping once an iterate reaches
/// norm `escape_radius`.
pub fn iterate_orbit(f: &CertifiedMap, p: Point, n: usize, escape_radius: f64) -> Result<OrbitRecord> {
    if n == 0 {
        return Err(OrbitError::DegenerateInput("orbit length must be at least 1".into()));
    }
    let mut iterates = Vec::with_capacity(n + 1);
    iterates.push(p);
    let mut z = p;
    let mut escaped = false;
    for _ in 0..n {
        z = f.evaluate(z, EVAL_TOL)?;
        iterates.push(z);
        if !z.is_finite() || z.norm() >= escape_radius {
            escaped = true;
            break;
        }
    }
    Ok(OrbitRecord { base: p, iterates, escaped, map_id: map_id(f) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceEvent {
    pub n: usize,
    pub distance: f64,
}

/// All `n >= 1` with `|f^n(p) - p| <= tol`.
pub fn detect_recurrence(orbit: &OrbitRecord, tol: f64) -> Result<Vec<RecurrenceEvent>> {
    orbit.require_bounded()?;
    let p = orbit.base;
    Ok(orbit
        .iterates
        .iter()
        .enumerate()
        .skip(1)
        .filter_map(|(n, z)| {
            let d = z.dist(p);
            (d <= tol).then_some(RecurrenceEvent { n, distance: d })
        })
        .collect())
}

/// A closed polygon; the last vertex connects back to the first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyLoop {
    pub vertices: Vec<Point>,
    /// Whether the signed area is positive.
    pub ccw: bool,
}

impl PolyLoop {
    pub fn new(vertices: Vec<Point>) -> Self {
        let mut l = Self { vertices, ccw: false };
        l.ccw = l.signed_area() > 0.0;
        l
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges `(v_i, v_(i+1))` including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        self.edges().map(|(a, b)| a.cross(b)).sum::<f64>() / 2.0
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn distance_to(&self, q: Point) -> f64 {
        self.edges().map(|(a, b)| point_segment_dist(q, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Brute-force test that no two non-adjacent edges meet.
    pub fn is_simple(&self) -> bool {
        let n = self.len();
        if n < 3 {
            return false;
        }
        let e: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if crate::geom::segments_intersect(e[i].0, e[i].1, e[j].0, e[j].1) {
                    return false;
                }
            }
        }
        true
    }
}

/// The loop through `f(p), ..., f^m(p)` from a recorded orbit.
pub fn gamma_from_orbit(orbit: &OrbitRecord, m: usize) -> Result<PolyLoop> {
    if m < 2 {
        return Err(OrbitError::DegenerateInput(format!("need m >= 2, got {m}")));
    }
    if orbit.iterates.len() <= m {
        return Err(OrbitError::DegenerateInput(format!(
            "orbit has {} iterates, need {}",
            orbit.iterates.len() - 1,
            m
        )));
    }
    if orbit.iterates[1] == orbit.base {
        return Err(OrbitError::DegenerateInput("base point is fixed".into()));
    }
    Ok(PolyLoop::new(orbit.iterates[1..=m].to_vec()))
}

/// `Gamma_(p, m)`: vertices `f(p), ..., f^m(p)`, closed by `[f^m(p), f(p)]`.
pub fn build_gamma(f: &CertifiedMap, p: Point, m: usize) -> Result<PolyLoop> {
    if m < 2 {
        return Err(OrbitError::DegenerateInput(format!("need m >= 2, got {m}")));
    }
    let orbit = iterate_orbit(f, p, m, f64::INFINITY)?;
    gamma_from_orbit(&orbit, m)
}

/// Winding number of `lp` around `q` by signed crossings of the horizontal
/// ray to the right of `q`.
///
/// Each edge counts when its endpoints lie on opposite sides of the ray, with
/// vertices on the ray treated as lying below it; this half-open rule is a
/// consistent symbolic perturbation, and the side of `q` is decided by the
/// exact orientation predicate.
pub fn winding_number(lp: &PolyLoop, q: Point, guard: f64) -> Result<i64> {
    let d = lp.distance_to(q);
    if d <= guard {
        return Err(OrbitError::OnCurve { distance: d, guard });
    }
    let mut w = 0i64;
    for (a, b) in lp.edges() {
        if a.y <= q.y {
            if b.y > q.y && orient(a, b, q) > 0.0 {
                w += 1;
            }
        } else if b.y <= q.y && orient(a, b, q) < 0.0 {
            w -= 1;
        }
    }
    Ok(w)
}

/// Monotone-chain convex hull, counter-clockwise, without collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Whether `q` lies strictly inside a counter-clockwise convex polygon.
pub fn strictly_inside(hull: &[Point], q: Point) -> bool {
    let n = hull.len();
    n >= 3 && (0..n).all(|i| orient(hull[i], hull[(i + 1) % n], q) > 0.0)
}

/// Distance from `q` to the hull boundary when outside, zero when inside or on it.
pub fn hull_excess(hull: &[Point], q: Point) -> f64 {
    let n = hull.len();
    match n {
        0 => f64::INFINITY,
        1 => q.dist(hull[0]),
        2 => point_segment_dist(q, hull[0], hull[1]),
        _ => {
            if (0..n).all(|i| orient(hull[i], hull[(i + 1) % n], q) >= 0.0) {
                0.0
            } else {
                hull_boundary_dist(hull, q)
            }
        }
    }
}

/// Distance from `q` to the boundary of the polygon `hull`.
pub fn hull_boundary_dist(hull: &[Point], q: Point) -> f64 {
    let n = hull.len();
    (0..n).map(|i| point_segment_dist(q, hull[i], hull[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}

/// Minimum distance between two closed polygonal curves.
pub fn curve_separation(a: &PolyLoop, b: &PolyLoop) -> f64 {
    let eb: Vec<_> = b.edges().collect();
    a.edges()
        .map(|(p, q)| eb.iter().map(|&(r, s)| segment_segment_dist(p, q, r, s)).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipcalc::{rotation_map, translation_map};

    fn square() -> PolyLoop {
        PolyLoop::new(vec![Point::new(-1.0, -1.0), Point::new(1.0, -1.0), Point::new(1.0, 1.0), Point::new(-1.0, 1.0)])
    }

    #[test]
    fn orbit_basics() {
        let o = iterate_orbit(&CertifiedMap::identity(), Point::new(0.3, 0.4), 5, 10.0).unwrap();
        assert!(o.iterates.iter().all(|&z| z == Point::new(0.3, 0.4)));
        let t = iterate_orbit(&translation_map(Point::new(1.0, 0.0)), Point::ORIGIN, 50, 10.0).unwrap();
        assert!(t.escaped);
        assert_eq!(t.iterates.len() - 1, 10);
        assert!(matches!(detect_recurrence(&t, 0.1), Err(OrbitError::UnboundedOrbit { .. })));
    }

    #[test]
    fn square_winding() {
        assert!(square().ccw);
        assert_eq!(winding_number(&square(), Point::ORIGIN, 1e-9).unwrap(), 1);
        assert_eq!(winding_number(&square(), Point::new(5.0, 5.0), 1e-9).unwrap(), 0);
        // An edge lying along the ray, and a vertex on the ray.
        assert_eq!(winding_number(&square(), Point::new(-2.0, -1.0), 1e-9).unwrap(), 0);
        let diamond = PolyLoop::new(vec![
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(-1.0, 0.0),
            Point::new(0.0, -1.0),
        ]);
        assert_eq!(winding_number(&diamond, Point::ORIGIN, 1e-9).unwrap(), 1);
        assert_eq!(winding_number(&diamond, Point::new(-3.0, 0.0), 1e-9).unwrap(), 0);
        assert!(matches!(winding_number(&square(), Point::new(1.0, 0.0), 1e-9), Err(OrbitError::OnCurve { .. })));
    }

    #[test]
    fn gamma_of_rotation() {
        let f = rotation_map(0.12);
        let g = build_gamma(&f, Point::new(1.0, 0.0), 52).unwrap();
        assert_eq!(g.len(), 52);
        assert!(g.ccw);
        assert!(g.vertices.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        assert!(matches!(build_gamma(&f, Point::ORIGIN, 5), Err(OrbitError::DegenerateInput(_))));
        assert_eq!(build_gamma(&f, Point::new(1.0, 0.0), 2).unwrap().len(), 2);
    }

    #[test]
    fn hull_of_square_with_interior() {
        let mut pts = square().vertices;
        pts.extend([Point::new(0.1, 0.2), Point::new(-0.5, 0.3), Point::new(0.0, -1.0)]);
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!(strictly_inside(&h, Point::ORIGIN));
        assert!(!strictly_inside(&h, Point::new(1.0, 0.0)));
        assert_eq!(hull_excess(&h, Point::new(3.0, 0.0)), 2.0);
        assert_eq!(convex_hull(&[Point::ORIGIN]), vec![Point::ORIGIN]);
    }

    #[test]
    fn separation_of_squares() {
        let a = square();
        let b = PolyLoop::new(a.vertices.iter().map(|&v| v * 2.0).collect());
        assert_eq!(curve_separation(&a, &b), 1.0);
        assert_eq!(curve_separation(&a, &a), 0.0);
    }
}
