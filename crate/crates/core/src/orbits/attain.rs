//! Sampled group orbits and the sets `A_G`, `eps_G`, `B_G` built from them.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{fixed_point_candidates, refine_fixed_point, OrbitError, Result, EVAL_TOL};
use crate::geom::{point_segment_dist, BoxRegion, Point};
use crate::lipcalc::CertifiedMap;

/// Points closer than this are merged when sampling group orbits.
const MERGE_TOL: f64 = 1e-9;

/// Breadth-first sample of the orbit of `p` under the maps and their
/// inverses, keeping up to `budget` distinct points in discovery order.
pub fn sample_group_orbit(maps: &[CertifiedMap], p: Point, budget: usize, escape_radius: f64) -> Result<Vec<Point>> {
    let mut gens = Vec::with_capacity(2 * maps.len());
    for m in maps {
        gens.push(m.clone());
        gens.push(m.inverse()?);
    }
    let key = |z: Point| ((z.x / MERGE_TOL).floor() as i64, (z.y / MERGE_TOL).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut points = vec![p];
    grid.entry(key(p)).or_default().push(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        if points.len() >= budget {
            break;
        }
        let z = points[k];
        for g in &gens {
            let w = g.evaluate(z, EVAL_TOL)?;
            if !w.is_finite() || w.norm() >= escape_radius {
                return Err(OrbitError::UnboundedOrbit { step: points.len(), radius: w.norm() });
            }
            let (i, j) = key(w);
            let dup = (-1..=1).any(|di| {
                (-1..=1).any(|dj| {
                    grid.get(&(i + di, j + dj))
                        .map(|v| v.iter().any(|&m| points[m].dist(w) <= MERGE_TOL))
                        .unwrap_or(false)
                })
            });
            if !dup {
                grid.entry((i, j)).or_default().push(points.len());
                queue.push_back(points.len());
                points.push(w);
                if points.len() >= budget {
                    break;
                }
            }
        }
    }
    Ok(points)
}

/// A square raster over `region` with `res x res` cells, row-major by `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub region: BoxRegion,
    pub res: usize,
    pub cells: Vec<bool>,
}

impl Raster {
    fn new(region: BoxRegion, res: usize) -> Self {
        Self { region, res, cells: vec![false; res * res] }
    }

    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        if !self.region.contains(p) {
            return None;
        }
        let fx = (p.x - self.region.min.x) / self.region.width();
        let fy = (p.y - self.region.min.y) / self.region.height();
        let i = ((fx * self.res as f64) as usize).min(self.res - 1);
        let j = ((fy * self.res as f64) as usize).min(self.res - 1);
        Some((i, j))
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.res + i]
    }

    pub fn contains(&self, p: Point) -> bool {
        self.cell_of(p).map(|(i, j)| self.get(i, j)).unwrap_or(false)
    }

    pub fn cell_diag(&self) -> f64 {
        self.region.diag() / self.res as f64
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.region.min.x + (i as f64 + 0.5) * self.region.width() / self.res as f64,
            self.region.min.y + (j as f64 + 0.5) * self.region.height() / self.res as f64,
        )
    }

    fn mark_segment(&mut self, a: Point, b: Point) {
        let step = self.region.width().min(self.region.height()) / self.res as f64 / 4.0;
        let n = ((a.dist(b) / step).ceil() as usize).max(1);
        for s in 0..=n {
            if let Some((i, j)) = self.cell_of(a + (b - a) * (s as f64 / n as f64)) {
                self.cells[j * self.res + i] = true;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttainmentSets {
    /// Segments `[y, f(y)]` over the sampled orbit points `y`.
    pub segments: Vec<(Point, Point)>,
    /// Approximate fixed points of `f` used for `eps_g`.
    pub fix: Vec<Point>,
    /// Distance from the segments to `fix`; infinite when `fix` is empty.
    pub eps_g: f64,
    pub fix_empty: bool,
    /// Segment cells together with every cell not reachable from the border.
    pub b_mask: Raster,
    /// One raster cell diagonal.
    pub resolution_error: f64,
}

/// Builds `A_G(p, f)`, `eps_G(p, f)` and a raster of `B_G(p, f)` from a
/// breadth-first orbit sample of `word_budget` points.
pub fn attainment_sets(
    maps: &[CertifiedMap],
    f: &CertifiedMap,
    p: Point,
    word_budget: usize,
    grid_res: usize,
) -> Result<AttainmentSets> {
    if grid_res < 2 {
        return Err(OrbitError::DegenerateInput("raster needs at least 2 cells per side".into()));
    }
    let ys = sample_group_orbit(maps, p, word_budget, 1e6)?;
    let mut segments = Vec::with_capacity(ys.len());
    let mut fixed_sample = false;
    for &y in &ys {
        let fy = f.evaluate(y, EVAL_TOL)?;
        fixed_sample |= fy.dist(y) <= 1e-9;
        segments.push((y, fy));
    }
    let ends: Vec<Point> = segments.iter().flat_map(|&(a, b)| [a, b]).collect();
    let bbox = BoxRegion::bounding(&ends).expect("at least the base point");
    let span = bbox.width().max(bbox.height()).max(1e-9);

    // A fixed sample point sits on its own degenerate segment.
    let fix = if fixed_sample {
        ys.iter().copied().filter(|&y| f.displacement(y, EVAL_TOL).map(|d| d.norm() <= 1e-9).unwrap_or(false)).collect()
    } else {
        let coarse = span / 512.0;
        let mut fix = Vec::new();
        for c in fixed_point_candidates(f, &bbox.expand(0.5 * span), 40, coarse)? {
            let cell = BoxRegion::around(c, coarse);
            fix.push(refine_fixed_point(f, &cell, span * 1e-9, 8)?.unwrap_or(c));
        }
        fix
    };
    let eps_g = fix
        .iter()
        .flat_map(|&q| segments.iter().map(move |&(a, b)| point_segment_dist(q, a, b)))
        .fold(f64::INFINITY, f64::min);

    let cell = span / grid_res as f64;
    let region = BoxRegion::new(
        Point::new(bbox.min.x - 2.0 * cell, bbox.min.y - 2.0 * cell),
        Point::new(bbox.min.x + span + 2.0 * cell, bbox.min.y + span + 2.0 * cell),
    );
    let res = grid_res + 4;
    let mut marks = Raster::new(region, res);
    for &(a, b) in &segments {
        marks.mark_segment(a, b);
    }
    let mut outside = vec![false; res * res];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for k in 0..res {
        for (i, j) in [(k, 0), (k, res - 1), (0, k), (res - 1, k)] {
            if !marks.get(i, j) && !outside[j * res + i] {
                outside[j * res + i] = true;
                stack.push((i, j));
            }
        }
    }
    while let Some((i, j)) = stack.pop() {
        let nb = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
        for (a, b) in nb {
            if a < res && b < res && !marks.get(a, b) && !outside[b * res + a] {
                outside[b * res + a] = true;
                stack.push((a, b));
            }
        }
    }
    let mut b_mask = Raster::new(region, res);
    for (c, o) in b_mask.cells.iter_mut().zip(&outside) {
        *c = !o;
    }
    let resolution_error = b_mask.cell_diag();
    Ok(AttainmentSets { segments, fix_empty: fix.is_empty(), fix, eps_g, b_mask, resolution_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipcalc::rotation_map;

    #[test]
    fn rotation_chords() {
        let theta: f64 = 0.12;
        let f = rotation_map(theta);
        let a = attainment_sets(std::slice::from_ref(&f), &f, Point::new(1.0, 0.0), 200, 128).unwrap();
        let want = (theta / 2.0).cos();
        assert!((a.eps_g - want).abs() < 1e-3, "{} vs {}", a.eps_g, want);
        assert!(a.b_mask.contains(Point::ORIGIN));
        assert!(!a.b_mask.contains(Point::new(1.1, 1.1)));
    }

    #[test]
    fn identity_segments_are_points() {
        let id = CertifiedMap::identity();
        let a = attainment_sets(&[rotation_map(0.5)], &id, Point::new(1.0, 0.0), 30, 32).unwrap();
        assert!(a.segments.iter().all(|(x, y)| x == y));
        assert_eq!(a.eps_g, 0.0);
    }
}
