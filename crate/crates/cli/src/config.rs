//! Experiment configs and their per-kind parameter blocks.

use std::path::{Path, PathBuf};

use nilfix::flows::IntegratorConfig;
use nilfix::geom::Point;
use nilfix::groups::DEFAULT_SIZE_CAP;
use nilfix::lipcalc::MapExpr;
use nilfix::orbits::{GlobalConfig, IndexConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Calc,
    Orbit,
    Locate,
    Flows,
    Jets,
    Groups,
}

impl Kind {
    pub const ALL: [Kind; 6] = [Kind::Calc, Kind::Orbit, Kind::Locate, Kind::Flows, Kind::Jets, Kind::Groups];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Calc => "calc",
            Kind::Orbit => "orbit",
            Kind::Locate => "locate",
            Kind::Flows => "flows",
            Kind::Jets => "jets",
            Kind::Groups => "groups",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Required whenever the parameters ask for random sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub params: Value,
}

fn parse_at<T: DeserializeOwned>(v: &Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        CliError::invalid(path, e.into_inner().to_string())
    })
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            CliError::invalid(if path == "." { "$".to_string() } else { path }, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Parses the parameter block for this kind and checks it.
    pub fn validate(&self) -> Result<Params, CliError> {
        let v = if self.params.is_null() { Value::Object(Default::default()) } else { self.params.clone() };
        let params = match self.kind {
            Kind::Calc => Params::Calc(parse_at(&v, "params")?),
            Kind::Orbit => Params::Orbit(parse_at(&v, "params")?),
            Kind::Locate => Params::Locate(parse_at(&v, "params")?),
            Kind::Flows => Params::Flows(parse_at(&v, "params")?),
            Kind::Jets => Params::Jets(parse_at(&v, "params")?),
            Kind::Groups => Params::Groups(parse_at(&v, "params")?),
        };
        params.check()?;
        if params.needs_seed() && self.seed.is_none() {
            return Err(CliError::invalid("seed", "this experiment samples randomly and needs a seed"));
        }
        Ok(params)
    }

    /// A complete example config for `kind`, used by `nilfix schema`.
    pub fn example(kind: Kind) -> Self {
        let params = match kind {
            Kind::Calc => serde_json::to_value(CalcParams::example()),
            Kind::Orbit => serde_json::to_value(OrbitParams::example()),
            Kind::Locate => serde_json::to_value(LocateParams::example()),
            Kind::Flows => serde_json::to_value(FlowsParams::default()),
            Kind::Jets => serde_json::to_value(JetsParams::example()),
            Kind::Groups => serde_json::to_value(GroupsParams::default()),
        }
        .expect("parameters serialise");
        Self { kind, seed: Some(7), output_dir: PathBuf::from(format!("out/{}", kind.name())), params }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    Calc(CalcParams),
    Orbit(OrbitParams),
    Locate(LocateParams),
    Flows(FlowsParams),
    Jets(JetsParams),
    Groups(GroupsParams),
}

impl Params {
    fn needs_seed(&self) -> bool {
        match self {
            Params::Calc(p) => p.random.is_some() || p.soundness.is_some() || p.angles.is_some(),
            Params::Orbit(_) | Params::Groups(_) => false,
            Params::Locate(p) => !p.example_flows.is_empty(),
            Params::Flows(p) => p.seeds.is_empty() && p.seed_count > 0,
            Params::Jets(p) => p.random.is_some(),
        }
    }

    fn check(&self) -> Result<(), CliError> {
        let positive = |path: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::invalid(path, format!("must be positive and finite, got {v}")))
            }
        };
        match self {
            Params::Calc(p) => {
                if let Some(s) = &p.soundness {
                    positive("params.soundness.half_width", s.half_width)?;
                }
                if let Some(r) = &p.random {
                    positive("params.random.max_bound", r.max_bound)?;
                    if r.max_bound >= 1.0 {
                        return Err(CliError::invalid("params.random.max_bound", "must be below 1"));
                    }
                }
                if (p.exclusion.is_some() || p.angles.is_some()) && p.base_points.is_empty() {
                    return Err(CliError::invalid("params.base_points", "needed by exclusion and angle checks"));
                }
            }
            Params::Orbit(p) => {
                if p.n == 0 {
                    return Err(CliError::invalid("params.n", "orbit length must be at least 1"));
                }
                positive("params.recurrence_tol", p.recurrence_tol)?;
                if let Some(m) = p.windings.iter().chain(p.simple_loop.iter()).find(|&&m| m > p.n) {
                    return Err(CliError::invalid("params.windings", format!("m = {m} exceeds n = {}", p.n)));
                }
            }
            Params::Locate(p) => {
                if p.maps.is_empty() && p.example_flows.is_empty() {
                    return Err(CliError::invalid("params.maps", "at least one map is required"));
                }
                if let Some(e) = &p.expect {
                    positive("params.expect.tol", e.tol)?;
                }
            }
            Params::Flows(p) => {
                if p.k == 0 || p.p == 0 {
                    return Err(CliError::invalid("params", "k and p must be at least 1"));
                }
            }
            Params::Jets(p) => {
                for (i, f) in p.families.iter().enumerate() {
                    if nilfix::poly::parse_rational(&f.tau).is_none() {
                        return Err(CliError::invalid(format!("params.families[{i}].tau"), "expected \"num/den\""));
                    }
                }
                if p.k_min > p.k_max {
                    return Err(CliError::invalid("params.k_min", "must not exceed k_max"));
                }
            }
            Params::Groups(p) => {
                if let Some(n) = p.n_values.iter().find(|&&n| n < 2) {
                    return Err(CliError::invalid("params.n_values", format!("N_{n} needs n >= 2")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomMaps {
    pub count: usize,
    pub depth: u32,
    /// Size of each leaf: rotation angle, translation length, matrix norm.
    pub scale: f64,
    /// Expressions are redrawn until their propagated bound is at most this.
    pub max_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Soundness {
    pub pairs: usize,
    /// Pairs are drawn from `[-half_width, half_width]^2`.
    pub half_width: f64,
    #[serde(default = "default_slack")]
    pub slack: f64,
}

fn default_slack() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclusion {
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Angles {
    pub pairs: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalcParams {
    /// Rows `0..=max_sigma` of the class-constant table.
    pub epsilon_table: Option<u32>,
    pub maps: Vec<MapExpr>,
    pub random: Option<RandomMaps>,
    pub soundness: Option<Soundness>,
    /// Run on every map whose bound is at most `1/8`.
    pub exclusion: Option<Exclusion>,
    pub angles: Option<Angles>,
    pub base_points: Vec<Point>,
}

impl CalcParams {
    fn example() -> Self {
        Self {
            epsilon_table: Some(5),
            maps: vec![MapExpr::Rotation { theta: 0.12, center: Point::ORIGIN }],
            random: Some(RandomMaps { count: 10, depth: 3, scale: 0.12, max_bound: 0.9 }),
            soundness: Some(Soundness { pairs: 10_000, half_width: 10.0, slack: 1e-9 }),
            exclusion: Some(Exclusion { grid: 200 }),
            angles: Some(Angles { pairs: 1000 }),
            base_points: vec![Point::new(1.0, 0.0)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitParams {
    pub map: MapExpr,
    pub base: Point,
    pub n: usize,
    #[serde(default = "default_escape")]
    pub escape_radius: f64,
    pub recurrence_tol: f64,
    /// Return times `m` at which `Ind_q(Gamma_(p, m))` is computed.
    #[serde(default)]
    pub windings: Vec<usize>,
    #[serde(default)]
    pub q: Point,
    #[serde(default = "default_guard")]
    pub guard: f64,
    /// Extract a simple loop from `Gamma_(p, m)` for this `m` and take the
    /// displacement index along it.
    #[serde(default)]
    pub simple_loop: Option<usize>,
    #[serde(default)]
    pub index: IndexConfig,
    #[serde(default)]
    pub expect: OrbitExpect,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitExpect {
    pub first_recurrence: Option<usize>,
    /// Expected winding number for every entry of `windings`; otherwise
    /// the check asks for a nonzero value.
    pub winding: Option<i64>,
    pub index: Option<i64>,
}

fn default_escape() -> f64 {
    1e3
}

fn default_guard() -> f64 {
    1e-9
}

impl OrbitParams {
    fn example() -> Self {
        Self {
            map: MapExpr::Rotation { theta: 0.12, center: Point::ORIGIN },
            base: Point::new(1.0, 0.0),
            n: 200,
            escape_radius: 1e3,
            recurrence_tol: 0.05,
            windings: vec![52],
            q: Point::ORIGIN,
            guard: 1e-9,
            simple_loop: Some(105),
            index: IndexConfig::default(),
            expect: OrbitExpect { first_recurrence: Some(52), winding: Some(1), index: Some(1) },
        }
    }
}

/// The time-`t` flow of one of the example fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExampleFlow {
    /// `alpha^j X1`; `j = 0` is `X1` itself.
    AlphaX1 {
        k: u32,
        p: u32,
        j: u32,
        t: f64,
    },
    Y1 {
        k: u32,
        p: u32,
        t: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocateExpect {
    pub point: Option<Point>,
    /// Expect `q` on the vertical line `x = line_x`.
    pub line_x: Option<f64>,
    pub tol: f64,
    /// Expected certificate kind, `closure` or `enclosed`.
    pub certificate: Option<String>,
}

impl Default for LocateExpect {
    fn default() -> Self {
        Self { point: None, line_x: None, tol: 1e-6, certificate: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocateParams {
    #[serde(default)]
    pub maps: Vec<MapExpr>,
    /// Appended after `maps`.
    #[serde(default)]
    pub example_flows: Vec<ExampleFlow>,
    /// Integration settings for `example_flows`; the run seed replaces `seed`.
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub base: Point,
    /// Used whole for several maps; only `locate` is used for a single map.
    #[serde(default)]
    pub config: GlobalConfig,
    #[serde(default)]
    pub expect: Option<LocateExpect>,
}

impl LocateParams {
    fn example() -> Self {
        Self {
            maps: vec![MapExpr::Rotation { theta: 0.12, center: Point::ORIGIN }],
            example_flows: Vec::new(),
            integrator: IntegratorConfig::default(),
            base: Point::new(1.0, 0.0),
            config: GlobalConfig::default(),
            expect: Some(LocateExpect {
                point: Some(Point::ORIGIN),
                line_x: None,
                tol: 1e-6,
                certificate: Some("enclosed".into()),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowsParams {
    /// `(k, p)` pairs for the exact identities.
    pub identities: Vec<(u32, u32)>,
    pub k: u32,
    pub p: u32,
    pub t: f64,
    /// Explicit seeds; when empty, `seed_count` seeds are drawn in the
    /// annulus `0.5 <= |z| <= 1.5`.
    pub seeds: Vec<Point>,
    pub seed_count: usize,
    pub integrator: IntegratorConfig,
}

impl Default for FlowsParams {
    fn default() -> Self {
        Self {
            identities: vec![(1, 1), (1, 2), (2, 3)],
            k: 1,
            p: 2,
            t: 0.1,
            seeds: Vec::new(),
            seed_count: 20,
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetFamily {
    pub k: u32,
    pub p: u32,
    pub l: u32,
    /// Flow time of the generators as `"num/den"`.
    #[serde(default = "default_tau")]
    pub tau: String,
    /// Truncation degree for the Lie algebra series; defaults to `2 l + 5`.
    #[serde(default)]
    pub lcs_degree: Option<u32>,
}

fn default_tau() -> String {
    "1/1".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomJets {
    pub roundtrip_count: usize,
    pub roundtrip_degree: u32,
    pub bch_count: usize,
    pub bch_degree: u32,
    pub nu_count: usize,
    pub nu_degree: u32,
}

impl Default for RandomJets {
    fn default() -> Self {
        Self { roundtrip_count: 50, roundtrip_degree: 6, bch_count: 20, bch_degree: 5, nu_count: 1000, nu_degree: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JetsParams {
    pub families: Vec<JetFamily>,
    pub k_min: u32,
    pub k_max: u32,
    pub depth_cap: usize,
    pub random: Option<RandomJets>,
}

impl Default for JetsParams {
    fn default() -> Self {
        Self { families: Vec::new(), k_min: 3, k_max: 12, depth_cap: 6, random: None }
    }
}

impl JetsParams {
    fn example() -> Self {
        Self {
            families: vec![
                JetFamily { k: 1, p: 2, l: 2, tau: default_tau(), lcs_degree: None },
                JetFamily { k: 1, p: 3, l: 3, tau: default_tau(), lcs_degree: None },
            ],
            random: Some(RandomJets::default()),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupsParams {
    pub n_values: Vec<usize>,
    pub depth_cap: usize,
    pub size_cap: usize,
    /// Emit the generator ordering of `N_n` with `sigma` layers.
    pub central_series: Option<(usize, usize)>,
}

impl Default for GroupsParams {
    fn default() -> Self {
        Self { n_values: vec![2, 3, 4, 5], depth_cap: 8, size_cap: DEFAULT_SIZE_CAP, central_series: Some((3, 2)) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_validate() {
        for k in Kind::ALL {
            let cfg = ExperimentConfig::example(k);
            let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
            back.validate().unwrap();
        }
    }

    #[test]
    fn error_paths() {
        let e = ExperimentConfig::from_json(r#"{"kind": "orbit", "output_dir": "x", "bogus": 1}"#).unwrap_err();
        assert!(matches!(e, CliError::ConfigInvalid { .. }));
        let cfg = ExperimentConfig::from_json(
            r#"{"kind": "orbit", "output_dir": "x", "params": {"map": {"kind": "identity"}, "base": [0, 0], "n": "ten", "recurrence_tol": 0.1}}"#,
        )
        .unwrap();
        match cfg.validate().unwrap_err() {
            CliError::ConfigInvalid { path, .. } => assert_eq!(path, "params.n"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn sampling_needs_seed() {
        let mut cfg = ExperimentConfig::example(Kind::Calc);
        cfg.seed = None;
        match cfg.validate().unwrap_err() {
            CliError::ConfigInvalid { path, .. } => assert_eq!(path, "seed"),
            e => panic!("{e}"),
        }
    }
}
