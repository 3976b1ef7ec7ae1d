//! Adaptive fourth-order Runge-Kutta flows and flow-map leaves.

use serde::{Deserialize, Serialize};

use super::{alpha_fn, x1_field, y1_field, FloatVF, FlowError, PolyVF};
use crate::geom::{BoxRegion, Point};
use crate::lipcalc::{estimate_lip_identity, CertifiedMap, MapExpr};
use crate::report::CheckRecord;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    /// Global absolute error target over the whole time interval.
    pub atol: f64,
    pub max_steps: usize,
    /// Trajectories leaving the disc of this radius fail with `RegionEscape`.
    pub escape_radius: f64,
    /// Region sampled when estimating `Lip(flow - Id)`.
    pub sample_region: BoxRegion,
    pub sample_pairs: usize,
    pub seed: u64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            max_steps: 1_000_000,
            escape_radius: 1e3,
            sample_region: BoxRegion::centered(1.0),
            sample_pairs: 2000,
            seed: 0,
        }
    }
}

fn rk4(f: &FloatVF, z: Point, h: f64) -> Point {
    let k1 = f.eval(z);
    let k2 = f.eval(z + k1 * (h / 2.0));
    let k3 = f.eval(z + k2 * (h / 2.0));
    let k4 = f.eval(z + k3 * h);
    z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Time-`t` flow of `field` from `z0`, by RK4 with step doubling.
///
/// A step of length `h` is accepted when the doubling error estimate is at
/// most `atol * |h| / |t|`, so the accumulated error stays near `atol`.
pub fn integrate(field: &FloatVF, z0: Point, t: f64, cfg: &IntegratorConfig) -> Result<Point, FlowError> {
    if t == 0.0 {
        return Ok(z0);
    }
    let total = t.abs();
    let dir = t.signum();
    let mut z = z0;
    let mut done = 0.0f64;
    let mut h = total.min(0.05);
    let min_h = total * 1e-14;
    for _ in 0..cfg.max_steps {
        if done >= total {
            return Ok(z);
        }
        let last = h >= total - done;
        let step = if last { total - done } else { h };
        let full = rk4(field, z, dir * step);
        let half = rk4(field, rk4(field, z, dir * step / 2.0), dir * step / 2.0);
        let err = full.dist(half) / 15.0;
        let allowed = cfg.atol * step / total;
        if !(err.is_finite() && half.is_finite()) {
            h = step / 4.0;
        } else if err <= allowed {
            z = half + (half - full) * (1.0 / 15.0);
            if z.norm() > cfg.escape_radius {
                return Err(FlowError::RegionEscape { point: z });
            }
            done = if last { total } else { done + step };
            let grow = if err == 0.0 { 4.0 } else { 0.9 * (allowed / err).powf(0.2) };
            h = step * grow.clamp(0.2, 4.0);
        } else {
            h = step * (0.9 * (allowed / err).powf(0.2)).clamp(0.1, 0.9);
        }
        if h < min_h {
            return Err(FlowError::StepFailure { time: dir * done, point: z });
        }
    }
    if done >= total {
        return Ok(z);
    }
    Err(FlowError::StepFailure { time: dir * done, point: z })
}

#[derive(Serialize, Deserialize)]
struct FlowLeafSpec {
    field: PolyVF,
    t: f64,
    #[serde(default)]
    config: IntegratorConfig,
    #[serde(default)]
    eps: Option<f64>,
}

/// The time-`t` map of a polynomial field, carrying a sampled bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "FlowLeafSpec", into = "FlowLeafSpec")]
pub struct FlowLeaf {
    field: PolyVF,
    t: f64,
    config: IntegratorConfig,
    eps: f64,
    float: FloatVF,
}

impl PartialEq for FlowLeaf {
    fn eq(&self, o: &Self) -> bool {
        self.field == o.field && self.t == o.t && self.config == o.config && self.eps == o.eps
    }
}

impl From<FlowLeaf> for FlowLeafSpec {
    fn from(f: FlowLeaf) -> Self {
        Self { field: f.field, t: f.t, config: f.config, eps: Some(f.eps) }
    }
}

impl TryFrom<FlowLeafSpec> for FlowLeaf {
    type Error = FlowError;

    fn try_from(s: FlowLeafSpec) -> Result<Self, FlowError> {
        match s.eps {
            Some(eps) => Ok(FlowLeaf::with_eps(s.field, s.t, s.config, eps)),
            None => FlowLeaf::estimated(s.field, s.t, s.config),
        }
    }
}

impl FlowLeaf {
    /// A flow leaf with an externally supplied bound.
    pub fn with_eps(field: PolyVF, t: f64, config: IntegratorConfig, eps: f64) -> Self {
        let float = field.to_float();
        Self { field, t, config, eps, float }
    }

    /// A flow leaf whose bound is the sampled maximum quotient plus 10%.
    pub fn estimated(field: PolyVF, t: f64, config: IntegratorConfig) -> Result<Self, FlowError> {
        let mut leaf = Self::with_eps(field, t, config, 0.0);
        if t == 0.0 {
            return Ok(leaf);
        }
        let probe = CertifiedMap::new(MapExpr::Flow(leaf.clone())).map_err(|e| FlowError::Estimation(Box::new(e)))?;
        let est = estimate_lip_identity(&probe, &config.sample_region, config.sample_pairs, config.seed)
            .map_err(|e| FlowError::Estimation(Box::new(e)))?;
        leaf.eps = 1.1 * est;
        Ok(leaf)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn field(&self) -> &PolyVF {
        &self.field
    }

    pub fn region(&self) -> BoxRegion {
        self.config.sample_region
    }

    pub fn apply(&self, z: Point) -> Result<Point, FlowError> {
        integrate(&self.float, z, self.t, &self.config)
    }

    /// The inverse map, integrated backward in time.
    pub fn apply_inverse(&self, z: Point) -> Result<Point, FlowError> {
        integrate(&self.float, z, -self.t, &self.config)
    }
}

/// `exp(t A)` as a map with an estimated bound.
pub fn flow_map(field: &PolyVF, t: f64, config: &IntegratorConfig) -> Result<CertifiedMap, FlowError> {
    let leaf = FlowLeaf::estimated(field.clone(), t, *config)?;
    CertifiedMap::new(MapExpr::Flow(leaf)).map_err(|e| FlowError::Estimation(Box::new(e)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub t: f64,
    pub seeds: Vec<Point>,
    /// `|alpha(exp(t Y1) z) - alpha(z) - t|` per seed.
    pub y_drift: Vec<f64>,
    /// `|alpha(exp(t X1) z) - alpha(z)|` per seed.
    pub x_drift: Vec<f64>,
    pub y_tol: f64,
    pub x_tol: f64,
}

impl TransportReport {
    pub fn max_y_drift(&self) -> f64 {
        self.y_drift.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_x_drift(&self) -> f64 {
        self.x_drift.iter().cloned().fold(0.0, f64::max)
    }

    pub fn pass(&self) -> bool {
        self.max_y_drift() <= self.y_tol && self.max_x_drift() <= self.x_tol
    }

    pub fn records(&self) -> Vec<CheckRecord> {
        let inputs = serde_json::json!({"t": self.t, "seeds": self.seeds.len()});
        vec![
            CheckRecord::new(
                "alpha_transport_y1",
                inputs.clone(),
                self.max_y_drift(),
                self.y_tol,
                self.max_y_drift() <= self.y_tol,
            ),
            CheckRecord::new(
                "alpha_invariance_x1",
                inputs,
                self.max_x_drift(),
                self.x_tol,
                self.max_x_drift() <= self.x_tol,
            ),
        ]
    }
}

/// Checks that `exp(t Y1)` shifts `alpha` by `t` and `exp(t X1)` preserves it.
pub fn integral_transport_check(
    k: u32,
    p: u32,
    t: f64,
    seeds: &[Point],
    config: &IntegratorConfig,
) -> Result<TransportReport, FlowError> {
    let x1 = x1_field(k, p).to_float();
    let y1 = y1_field(k, p).to_float();
    let alpha = alpha_fn(k);
    let mut y_drift = Vec::with_capacity(seeds.len());
    let mut x_drift = Vec::with_capacity(seeds.len());
    for &z in seeds {
        let a0 = alpha.eval_f64(z.x, z.y);
        let zy = integrate(&y1, z, t, config)?;
        y_drift.push((alpha.eval_f64(zy.x, zy.y) - a0 - t).abs());
        let zx = integrate(&x1, z, t, config)?;
        x_drift.push((alpha.eval_f64(zx.x, zx.y) - a0).abs());
    }
    Ok(TransportReport { t, seeds: seeds.to_vec(), y_drift, x_drift, y_tol: 1e-6, x_tol: 1e-8 })
}
