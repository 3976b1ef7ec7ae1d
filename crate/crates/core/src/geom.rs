//! Planar points, boxes and exact segment predicates.

use std::ops::{Add, Mul, Neg, Sub};

use robust::Coord;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unsigned angle in `[0, pi]` between two nonzero vectors.
    pub fn angle_to(self, o: Point) -> f64 {
        self.cross(o).abs().atan2(self.dot(o))
    }

    /// Signed angle in `(-pi, pi]` turning `self` onto `o`.
    pub fn signed_angle_to(self, o: Point) -> f64 {
        self.cross(o).atan2(self.dot(o))
    }

    fn coord(self) -> Coord<f64> {
        Coord { x: self.x, y: self.y }
    }
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Axis-aligned box `[min.x, max.x] x [min.y, max.y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub min: Point,
    pub max: Point,
}

impl BoxRegion {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    /// The square `[-r, r]^2`.
    pub fn centered(r: f64) -> Self {
        Self::new(Point::new(-r, -r), Point::new(r, r))
    }

    pub fn around(c: Point, half: f64) -> Self {
        Self::new(Point::new(c.x - half, c.y - half), Point::new(c.x + half, c.y + half))
    }

    pub fn bounding(points: &[Point]) -> Option<Self> {
        let first = *points.first()?;
        let mut b = Self::new(first, first);
        for p in points {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diag(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        Point::new((self.min.x + self.max.x) / 2.0, (self.min.y + self.max.y) / 2.0)
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > 0.0 && self.height() > 0.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn expand(&self, m: f64) -> Self {
        Self::new(Point::new(self.min.x - m, self.min.y - m), Point::new(self.max.x + m, self.max.y + m))
    }

    /// Sub-box `(i, j)` of an `n x n` split.
    pub fn cell(&self, n: usize, i: usize, j: usize) -> Self {
        let w = self.width() / n as f64;
        let h = self.height() / n as f64;
        let min = Point::new(self.min.x + i as f64 * w, self.min.y + j as f64 * h);
        Self::new(min, Point::new(min.x + w, min.y + h))
    }

    /// Counter-clockwise corners starting at `min`.
    pub fn corners(&self) -> [Point; 4] {
        [self.min, Point::new(self.max.x, self.min.y), self.max, Point::new(self.min.x, self.max.y)]
    }
}

/// Exact sign of the orientation of `(a, b, c)`: positive when counter-clockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    robust::orient2d(a.coord(), b.coord(), c.coord())
}

fn orient_sign(a: Point, b: Point, c: Point) -> i8 {
    let o = orient(a, b, c);
    if o > 0.0 {
        1
    } else if o < 0.0 {
        -1
    } else {
        0
    }
}

fn on_segment_collinear(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Exact closed-segment intersection test.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient_sign(a, b, c);
    let o2 = orient_sign(a, b, d);
    let o3 = orient_sign(c, d, a);
    let o4 = orient_sign(c, d, b);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    if o1 == 0 && on_segment_collinear(a, b, c) {
        return true;
    }
    if o2 == 0 && on_segment_collinear(a, b, d) {
        return true;
    }
    if o3 == 0 && on_segment_collinear(c, d, a) {
        return true;
    }
    if o4 == 0 && on_segment_collinear(c, d, b) {
        return true;
    }
    false
}

/// Parameter `t` along `[a, b]` of the first point shared with `[c, d]`.
///
/// Only meaningful when [`segments_intersect`] holds. Collinear overlaps return
/// the overlap point closest to `a`.
pub fn intersection_param(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    if denom != 0.0 {
        return ((c - a).cross(s) / denom).clamp(0.0, 1.0);
    }
    let rr = r.dot(r);
    if rr == 0.0 {
        return 0.0;
    }
    let tc = (c - a).dot(r) / rr;
    let td = (d - a).dot(r) / rr;
    let lo = tc.min(td).max(0.0);
    lo.min(1.0)
}

pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

pub fn segment_segment_dist(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_and_touching_segments() {
        let p = Point::new;
        assert!(segments_intersect(p(0., 0.), p(2., 2.), p(0., 2.), p(2., 0.)));
        assert!(segments_intersect(p(0., 0.), p(1., 0.), p(1., 0.), p(2., 5.)));
        assert!(!segments_intersect(p(0., 0.), p(1., 0.), p(2., 0.), p(3., 0.)));
        assert!(segments_intersect(p(0., 0.), p(2., 0.), p(1., 0.), p(3., 0.)));
        assert!(!segments_intersect(p(0., 0.), p(1., 1.), p(0., 1.), p(0.4, 0.6)));
    }

    #[test]
    fn intersection_parameter() {
        let p = Point::new;
        let t = intersection_param(p(0., 0.), p(2., 0.), p(1., -1.), p(1., 1.));
        assert!((t - 0.5).abs() < 1e-15);
        let t = intersection_param(p(0., 0.), p(4., 0.), p(1., 0.), p(3., 0.));
        assert!((t - 0.25).abs() < 1e-15);
    }

    #[test]
    fn distances() {
        let p = Point::new;
        assert_eq!(point_segment_dist(p(0., 1.), p(-1., 0.), p(1., 0.)), 1.0);
        assert_eq!(segment_segment_dist(p(0., 0.), p(1., 0.), p(0., 2.), p(1., 3.)), 2.0);
        assert_eq!(segment_segment_dist(p(0., 0.), p(2., 2.), p(0., 2.), p(2., 0.)), 0.0);
    }
}
