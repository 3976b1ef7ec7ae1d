//! Maps of the plane that are Lipschitz-close to the identity.
//!
//! A [`CertifiedMap`] is an expression over primitive maps together with an
//! upper bound on `Lip(f - Id)`. Bounds of composite expressions are obtained
//! by the propagation rules in [`rules`]; evaluation solves inverse nodes by
//! the contraction `z <- y - (f - Id)(z)`.

mod checks;
pub mod rules;
pub mod sample;

pub use checks::{
    displacement_angle_check, displacement_floor_check, estimate_lip_identity, max_ball_angle, segment_image_checks,
    AngleReport, ConeSpec, SegmentReport,
};
pub use rules::{epsilon_sigma, LipClassTable};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flows::{FlowError, FlowLeaf};
use crate::geom::{BoxRegion, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LipError {
    #[error("bound diverges: child bound {bound} is not below 1")]
    BoundDiverges { bound: f64 },
    #[error("inverse iteration did not converge after {iterations} steps")]
    NonConvergence { iterations: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

pub type Result<T, E = LipError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// The bound is the exact analytic value for a primitive map.
    Analytic,
    /// The bound follows from the propagation rules over analytic leaves.
    Propagated,
    /// Some leaf carries a sampled estimate; not a certificate.
    Estimated,
}

/// `x + (ax sin(wx . x + phx), ay sin(wy . x + phy))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigMap {
    pub ax: f64,
    pub wx: Point,
    #[serde(default)]
    pub phx: f64,
    pub ay: f64,
    pub wy: Point,
    #[serde(default)]
    pub phy: f64,
}

impl TrigMap {
    /// Shear `(x + a sin(w y), y)`.
    pub fn shear(a: f64, w: f64) -> Self {
        Self { ax: a, wx: Point::new(0.0, w), phx: 0.0, ay: 0.0, wy: Point::ORIGIN, phy: 0.0 }
    }

    fn displacement(&self, p: Point) -> Point {
        Point::new(self.ax * (self.wx.dot(p) + self.phx).sin(), self.ay * (self.wy.dot(p) + self.phy).sin())
    }

    /// Frobenius norm bound of the displacement Jacobian; exact for shears.
    fn bound(&self) -> f64 {
        (self.ax * self.wx.norm()).hypot(self.ay * self.wy.norm())
    }
}

/// Expression tree over primitive maps. Serialised with a `kind` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapExpr {
    Identity,
    /// Rotation by `theta` about `center`.
    Rotation {
        theta: f64,
        #[serde(default)]
        center: Point,
    },
    Translation {
        offset: Point,
    },
    /// `x + M x + offset`, rows of `M` in `linear`.
    Affine {
        linear: [[f64; 2]; 2],
        #[serde(default)]
        offset: Point,
    },
    Trig(TrigMap),
    Flow(FlowLeaf),
    /// `outer o inner`.
    Compose {
        outer: Box<MapExpr>,
        inner: Box<MapExpr>,
    },
    Inverse {
        map: Box<MapExpr>,
    },
    /// `a b a^-1 b^-1`.
    Commutator {
        a: Box<MapExpr>,
        b: Box<MapExpr>,
    },
    /// `t f + (1 - t) Id`.
    Isotopy {
        t: f64,
        map: Box<MapExpr>,
    },
}

impl MapExpr {
    pub fn compose(outer: MapExpr, inner: MapExpr) -> Self {
        MapExpr::Compose { outer: Box::new(outer), inner: Box::new(inner) }
    }

    pub fn inverse(map: MapExpr) -> Self {
        MapExpr::Inverse { map: Box::new(map) }
    }

    pub fn commutator(a: MapExpr, b: MapExpr) -> Self {
        MapExpr::Commutator { a: Box::new(a), b: Box::new(b) }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(
            self,
            MapExpr::Compose { .. } | MapExpr::Inverse { .. } | MapExpr::Commutator { .. } | MapExpr::Isotopy { .. }
        )
    }

    fn has_estimated_leaf(&self) -> bool {
        match self {
            MapExpr::Flow(_) => true,
            MapExpr::Compose { outer: a, inner: b } | MapExpr::Commutator { a, b } => {
                a.has_estimated_leaf() || b.has_estimated_leaf()
            }
            MapExpr::Inverse { map } | MapExpr::Isotopy { map, .. } => map.has_estimated_leaf(),
            _ => false,
        }
    }

    /// Sound upper bound on `Lip(expr - Id)` from the leaf bounds.
    pub fn propagate_bound(&self) -> Result<f64> {
        Ok(match self {
            MapExpr::Identity | MapExpr::Translation { .. } => 0.0,
            MapExpr::Rotation { theta, .. } => rotation_bound(*theta),
            MapExpr::Affine { linear, .. } => spectral_norm(linear),
            MapExpr::Trig(t) => t.bound(),
            MapExpr::Flow(f) => f.eps(),
            MapExpr::Compose { outer, inner } => {
                rules::compose_bound(outer.propagate_bound()?, inner.propagate_bound()?)
            }
            MapExpr::Inverse { map } => rules::inverse_bound(map.propagate_bound()?)?,
            MapExpr::Commutator { a, b } => rules::commutator_bound(a.propagate_bound()?, b.propagate_bound()?)?,
            MapExpr::Isotopy { t, map } => t * map.propagate_bound()?,
        })
    }

    pub fn eval(&self, x: Point, cfg: &EvalConfig) -> Result<Point> {
        match self {
            MapExpr::Identity => Ok(x),
            MapExpr::Rotation { theta, center } => {
                let (s, c) = theta.sin_cos();
                let d = x - *center;
                Ok(*center + Point::new(c * d.x - s * d.y, s * d.x + c * d.y))
            }
            MapExpr::Translation { offset } => Ok(x + *offset),
            MapExpr::Affine { linear: m, offset } => Ok(Point::new(
                x.x + m[0][0] * x.x + m[0][1] * x.y + offset.x,
                x.y + m[1][0] * x.x + m[1][1] * x.y + offset.y,
            )),
            MapExpr::Trig(t) => Ok(x + t.displacement(x)),
            MapExpr::Flow(f) => Ok(f.apply(x)?),
            MapExpr::Compose { outer, inner } => {
                let half = cfg.with_tol(cfg.tol / 2.0);
                outer.eval(inner.eval(x, &half)?, &half)
            }
            MapExpr::Inverse { map } => match &**map {
                // Flows are inverted by running time backward.
                MapExpr::Flow(f) => Ok(f.apply_inverse(x)?),
                other => solve_inverse(other, other.propagate_bound()?, x, cfg),
            },
            MapExpr::Commutator { a, b } => {
                let (ea, eb) = (a.propagate_bound()?, b.propagate_bound()?);
                let q = cfg.with_tol(cfg.tol / 4.0);
                let z = solve_inverse(b, eb, x, &q)?;
                let z = solve_inverse(a, ea, z, &q)?;
                let z = b.eval(z, &q)?;
                a.eval(z, &q)
            }
            MapExpr::Isotopy { t, map } => {
                let fx = map.eval(x, cfg)?;
                Ok(fx * *t + x * (1.0 - t))
            }
        }
    }
}

/// `2 sin(|theta| / 2)`, the operator norm of `R_theta - I`.
pub fn rotation_bound(theta: f64) -> f64 {
    2.0 * (theta.abs() / 2.0).sin()
}

fn spectral_norm(m: &[[f64; 2]; 2]) -> f64 {
    let fro2 = m.iter().flatten().map(|v| v * v).sum::<f64>();
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
    ((fro2 + disc.sqrt()) / 2.0).sqrt()
}

/// Solves `f(z) = y` by `z <- y - (f - Id)(z)`, a contraction of rate `a`.
fn solve_inverse(map: &MapExpr, a: f64, y: Point, cfg: &EvalConfig) -> Result<Point> {
    if a >= 1.0 {
        return Err(LipError::BoundDiverges { bound: a });
    }
    // Tolerances below a few ulps of the coordinates cannot be met.
    let floor = 64.0 * f64::EPSILON * (1.0 + y.norm());
    let stop = (cfg.tol * (1.0 - a)).max(floor);
    let inner = cfg.with_tol(stop / 4.0);
    let mut z = y;
    for _ in 0..cfg.max_iter {
        let fz = map.eval(z, &inner)?;
        let next = y - (fz - z);
        let step = next.dist(z);
        z = next;
        if step <= stop {
            return Ok(z);
        }
    }
    Err(LipError::NonConvergence { iterations: cfg.max_iter })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl EvalConfig {
    pub fn new(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn with_tol(&self, tol: f64) -> Self {
        Self { tol, max_iter: self.max_iter }
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10_000 }
    }
}

/// A map together with a bound on `Lip(f - Id)` and where that bound came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedMap {
    pub expr: MapExpr,
    pub eps: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_hint: Option<BoxRegion>,
}

impl CertifiedMap {
    pub fn new(expr: MapExpr) -> Result<Self> {
        let eps = expr.propagate_bound()?;
        let provenance = if expr.has_estimated_leaf() {
            Provenance::Estimated
        } else if expr.is_leaf() {
            Provenance::Analytic
        } else {
            Provenance::Propagated
        };
        let domain_hint = match &expr {
            MapExpr::Flow(f) => Some(f.region()),
            _ => None,
        };
        Ok(Self { expr, eps, provenance, domain_hint })
    }

    pub fn identity() -> Self {
        Self::new(MapExpr::Identity).expect("identity has bound 0")
    }

    pub fn is_certified(&self) -> bool {
        self.provenance != Provenance::Estimated
    }

    pub fn compose(&self, inner: &CertifiedMap) -> Result<Self> {
        Self::new(MapExpr::compose(self.expr.clone(), inner.expr.clone()))
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::new(MapExpr::inverse(self.expr.clone()))
    }

    pub fn commutator(&self, other: &CertifiedMap) -> Result<Self> {
        Self::new(MapExpr::commutator(self.expr.clone(), other.expr.clone()))
    }

    pub fn evaluate(&self, x: Point, tol: f64) -> Result<Point> {
        self.expr.eval(x, &EvalConfig::new(tol))
    }

    pub fn evaluate_with(&self, x: Point, cfg: &EvalConfig) -> Result<Point> {
        self.expr.eval(x, cfg)
    }

    /// `f(x) - x`.
    pub fn displacement(&self, x: Point, tol: f64) -> Result<Point> {
        Ok(self.evaluate(x, tol)? - x)
    }
}

pub fn rotation_map(theta: f64) -> CertifiedMap {
    CertifiedMap::new(MapExpr::Rotation { theta, center: Point::ORIGIN }).expect("rotation bound is finite")
}

pub fn rotation_about(theta: f64, center: Point) -> CertifiedMap {
    CertifiedMap::new(MapExpr::Rotation { theta, center }).expect("rotation bound is finite")
}

pub fn translation_map(offset: Point) -> CertifiedMap {
    CertifiedMap::new(MapExpr::Translation { offset }).expect("translation bound is 0")
}

/// `F_t = t f + (1 - t) Id`, whose bound is `t` times the bound of `f`.
pub fn isotopy_stage(map: &CertifiedMap, t: f64) -> Result<CertifiedMap> {
    if !(0.0..=1.0).contains(&t) {
        return Err(LipError::PreconditionViolated(format!("isotopy time {t} outside [0, 1]")));
    }
    let mut out = CertifiedMap::new(MapExpr::Isotopy { t, map: Box::new(map.expr.clone()) })?;
    out.domain_hint = map.domain_hint;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_bounds() {
        assert_eq!(rotation_map(0.0).eps, 0.0);
        let th = 2.0 * (1.0f64 / 16.0).asin();
        assert!((rotation_map(th).eps - 0.125).abs() < 1e-15);
        assert!((rotation_map(0.12).eps - 0.119_928_0).abs() < 1e-6);
        assert_eq!(rotation_map(0.12).provenance, Provenance::Analytic);
    }

    #[test]
    fn identity_evaluates_to_input() {
        let id = CertifiedMap::identity();
        assert_eq!(id.evaluate(Point::new(3.0, 4.0), 1e-10).unwrap(), Point::new(3.0, 4.0));
    }

    #[test]
    fn rotation_inverse_roundtrip() {
        let r = rotation_map(0.3);
        let inv = r.inverse().unwrap();
        assert_eq!(inv.provenance, Provenance::Propagated);
        let x = Point::new(1.0, 0.0);
        let back = r.compose(&inv).unwrap().evaluate(x, 1e-12).unwrap();
        assert!(back.dist(x) < 1e-11);
        let direct = inv.evaluate(x, 1e-12).unwrap();
        let want = Point::new(0.3f64.cos(), -0.3f64.sin());
        assert!(direct.dist(want) < 1e-11);
    }

    #[test]
    fn shear_inverse_residual() {
        let f = CertifiedMap::new(MapExpr::Trig(TrigMap::shear(0.1, 1.0))).unwrap();
        assert!((f.eps - 0.1).abs() < 1e-15);
        let inv = f.inverse().unwrap();
        let tol = 1e-10;
        for y in [Point::new(1.0, 0.1 * 1f64.sin() + 1.0), Point::new(-4.0, 2.5), Point::new(0.0, 0.0)] {
            let z = inv.evaluate(y, tol).unwrap();
            assert!(f.evaluate(z, tol).unwrap().dist(y) <= tol);
        }
    }

    #[test]
    fn inverse_of_expanding_map_diverges() {
        let big =
            CertifiedMap::new(MapExpr::Affine { linear: [[1.5, 0.0], [0.0, 0.0]], offset: Point::ORIGIN }).unwrap();
        assert!(matches!(big.inverse(), Err(LipError::BoundDiverges { .. })));
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let f = rotation_map(0.9);
        let inv = f.inverse().unwrap();
        let cfg = EvalConfig { tol: 1e-14, max_iter: 3 };
        assert_eq!(inv.evaluate_with(Point::new(1.0, 0.0), &cfg), Err(LipError::NonConvergence { iterations: 3 }));
    }

    #[test]
    fn isotopy_half_rotation() {
        let f = rotation_map(0.12);
        let half = isotopy_stage(&f, 0.5).unwrap();
        assert!((half.eps - (0.06f64).sin()).abs() < 1e-15);
        let v = half.evaluate(Point::new(1.0, 0.0), 1e-12).unwrap();
        let want = Point::new((1.0 + 0.12f64.cos()) / 2.0, 0.12f64.sin() / 2.0);
        assert!(v.dist(want) < 1e-15);
        let zero = isotopy_stage(&f, 0.0).unwrap();
        assert_eq!(zero.eps, 0.0);
        assert_eq!(zero.evaluate(Point::new(2.0, -1.0), 1e-12).unwrap(), Point::new(2.0, -1.0));
        let one = isotopy_stage(&f, 1.0).unwrap();
        assert_eq!(one.eps, f.eps);
        assert!(isotopy_stage(&f, 1.5).is_err());
    }

    #[test]
    fn isotopy_keeps_fixed_points() {
        let f = rotation_about(0.1, Point::new(2.0, -1.0));
        for t in [0.25, 0.5, 0.75] {
            let ft = isotopy_stage(&f, t).unwrap();
            let c = ft.evaluate(Point::new(2.0, -1.0), 1e-12).unwrap();
            assert!(c.dist(Point::new(2.0, -1.0)) < 1e-15);
        }
    }

    #[test]
    fn affine_spectral_norm() {
        assert!((spectral_norm(&[[0.0, 0.1], [0.0, 0.0]]) - 0.1).abs() < 1e-15);
        assert!((spectral_norm(&[[0.05, 0.0], [0.0, -0.07]]) - 0.07).abs() < 1e-15);
    }

    #[test]
    fn map_json_roundtrip() {
        let e = MapExpr::commutator(
            MapExpr::Rotation { theta: 0.1, center: Point::new(1.0, 2.0) },
            MapExpr::inverse(MapExpr::Trig(TrigMap::shear(0.05, 2.0))),
        );
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.starts_with(r#"{"kind":"commutator","a":{"kind":"rotation","theta":0.1,"center":[1.0,2.0]}"#));
        let back: MapExpr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }
}
