//! Simple sub-loops of self-intersecting curves and the index of the
//! displacement field along a loop.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::{OrbitError, PolyLoop, Result};
use crate::geom::{intersection_param, segments_intersect, Point};
use crate::lipcalc::CertifiedMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimpleLoop {
    pub lp: PolyLoop,
    /// Indices `(i, j)` of the two input edges meeting at the cut point.
    pub cut: (usize, usize),
    /// Largest turning angle between consecutive input edges before the cut.
    pub max_turn: f64,
    /// Whether `max_turn < pi / 2`.
    pub angle_condition: bool,
}

/// Cuts out the loop closed by the first self-intersection.
///
/// Edges are scanned in order; `j` is the first edge meeting an earlier
/// non-adjacent edge and `i` the latest such edge. The returned loop runs
/// from the crossing point through `v_(i+1), ..., v_j` and back.
pub fn extract_simple_loop(lp: &PolyLoop) -> Result<SimpleLoop> {
    let n = lp.len();
    if n < 3 {
        return Err(OrbitError::DegenerateInput(format!("loop has {n} vertices, need 3")));
    }
    let e: Vec<(Point, Point)> = lp.edges().collect();
    for j in 2..n {
        let hit = (0..j - 1)
            .rev()
            .filter(|&i| !(i == 0 && j == n - 1))
            .find(|&i| segments_intersect(e[i].0, e[i].1, e[j].0, e[j].1));
        let Some(i) = hit else { continue };
        let (a, b) = e[i];
        let t = intersection_param(a, b, e[j].0, e[j].1);
        let x = a + (b - a) * t;
        let mut vs = vec![x];
        vs.extend_from_slice(&lp.vertices[i + 1..=j]);
        vs.dedup();
        if vs.len() > 1 && vs[vs.len() - 1] == vs[0] {
            vs.pop();
        }
        let max_turn = (i..j)
            .map(|k| {
                let (u, v) = (e[k].1 - e[k].0, e[k + 1].1 - e[k + 1].0);
                u.angle_to(v)
            })
            .fold(0.0, f64::max);
        return Ok(SimpleLoop { lp: PolyLoop::new(vs), cut: (i, j), max_turn, angle_condition: max_turn < FRAC_PI_2 });
    }
    Err(OrbitError::AlreadySimple)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexConfig {
    /// Initial number of sample points along the loop.
    pub samples: usize,
    /// Displacements at or below this count as fixed points on the loop.
    pub floor: f64,
    /// Maximum number of bisections.
    pub max_refine: usize,
    pub eval_tol: f64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self { samples: 256, floor: 1e-9, max_refine: 1 << 16, eval_tol: 1e-12 }
    }
}

/// Degree of `x -> f(x) - x` along `lp`.
///
/// The loop is sampled densely and every pair of neighbouring samples whose
/// displacement vectors differ by a quarter turn or more is bisected, so the
/// summed angle increments are unambiguous.
pub fn displacement_index(f: &CertifiedMap, lp: &PolyLoop, cfg: &IndexConfig) -> Result<i64> {
    if lp.len() < 2 {
        return Err(OrbitError::DegenerateInput("loop needs two vertices".into()));
    }
    let per = lp.perimeter();
    if per == 0.0 {
        return Err(OrbitError::DegenerateInput("loop has zero length".into()));
    }
    let disp = |x: Point| -> Result<Point> {
        let d = f.displacement(x, cfg.eval_tol)?;
        let m = d.norm();
        if m.is_nan() || m <= cfg.floor {
            return Err(OrbitError::FixedPointOnCurve { point: x, displacement: m, floor: cfg.floor });
        }
        Ok(d)
    };
    let mut total = 0.0;
    let mut refinements = 0usize;
    for (a, b) in lp.edges() {
        let len = a.dist(b);
        if len == 0.0 {
            continue;
        }
        let pieces = ((cfg.samples as f64 * len / per).ceil() as usize).max(1);
        let mut prev = (0.0, disp(a)?);
        for s in 1..=pieces {
            let t = s as f64 / pieces as f64;
            let next = (t, disp(a + (b - a) * t)?);
            // Bisect until both ends of each piece turn by less than a quarter.
            let mut stack = vec![next];
            while let Some(&(t1, d1)) = stack.last() {
                let (t0, d0) = prev;
                let turn = d0.signed_angle_to(d1);
                if turn.abs() < FRAC_PI_2 {
                    total += turn;
                    prev = (t1, d1);
                    stack.pop();
                } else {
                    refinements += 1;
                    if refinements > cfg.max_refine {
                        return Err(OrbitError::RefinementCap { cap: cfg.max_refine });
                    }
                    let tm = (t0 + t1) / 2.0;
                    stack.push((tm, disp(a + (b - a) * tm)?));
                }
            }
        }
    }
    Ok((total / TAU).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipcalc::{rotation_map, translation_map, CertifiedMap, MapExpr};

    fn circle(r: f64, n: usize) -> PolyLoop {
        PolyLoop::new(
            (0..n)
                .map(|i| {
                    let a = TAU * i as f64 / n as f64;
                    Point::new(r * a.cos(), r * a.sin())
                })
                .collect(),
        )
    }

    #[test]
    fn figure_eight_gives_a_lobe() {
        let p = Point::new;
        let eight = PolyLoop::new(vec![p(0.0, 0.0), p(1.0, 1.0), p(1.0, -1.0), p(-1.0, 1.0), p(-1.0, -1.0)]);
        let s = extract_simple_loop(&eight).unwrap();
        assert!(s.lp.is_simple());
        assert_eq!(s.lp.len(), 3);
        assert!(matches!(extract_simple_loop(&circle(1.0, 12)), Err(OrbitError::AlreadySimple)));
    }

    #[test]
    fn index_of_rotation_and_translation() {
        let cfg = IndexConfig::default();
        assert_eq!(displacement_index(&rotation_map(0.12), &circle(1.0, 64), &cfg).unwrap(), 1);
        let t = translation_map(Point::new(0.3, -0.2));
        assert_eq!(displacement_index(&t, &circle(1.0, 64), &cfg).unwrap(), 0);
        // A reflection-like linear map has det(A - I) < 0.
        let saddle =
            CertifiedMap::new(MapExpr::Affine { linear: [[0.1, 0.0], [0.0, -0.1]], offset: Point::ORIGIN }).unwrap();
        assert_eq!(displacement_index(&saddle, &circle(1.0, 64), &cfg).unwrap(), -1);
    }

    #[test]
    fn fixed_point_on_curve() {
        let cfg = IndexConfig::default();
        let r = displacement_index(&rotation_map(0.12), &circle(1.0, 4).shifted(Point::new(1.0, 0.0)), &cfg);
        assert!(matches!(r, Err(OrbitError::FixedPointOnCurve { .. })));
    }

    impl PolyLoop {
        fn shifted(&self, d: Point) -> PolyLoop {
            PolyLoop::new(self.vertices.iter().map(|&v| v + d).collect())
        }
    }
}
