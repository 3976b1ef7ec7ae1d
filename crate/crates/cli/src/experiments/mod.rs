mod calc;
mod flows;
mod groups;
mod jets;
mod locate;
mod orbit;

use nilfix::geom::Point;
use nilfix::report::CheckRecord;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::artifacts::{Artifacts, CsvTable};
use crate::config::{ExperimentConfig, Params};
use crate::CliError;

/// What one experiment contributes before it is wrapped into [`Artifacts`].
#[derive(Default)]
pub(crate) struct Section {
    pub checks: Vec<CheckRecord>,
    pub data: Map<String, Value>,
    pub tables: Vec<CsvTable>,
}

impl Section {
    fn put(&mut self, key: &str, v: impl Serialize) {
        self.data.insert(key.to_string(), serde_json::to_value(v).expect("data serialises"));
    }
}

/// Plain decimal, the shortest form that reads back to the same `f64`.
pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}

pub(crate) fn point_json(p: Point) -> Value {
    serde_json::json!([p.x, p.y])
}

pub(crate) fn run(cfg: &ExperimentConfig, params: Params) -> Result<Artifacts, CliError> {
    let seed = cfg.seed;
    let (section, echo) = match &params {
        Params::Calc(p) => (calc::run(p, seed)?, serde_json::to_value(p)),
        Params::Orbit(p) => (orbit::run(p)?, serde_json::to_value(p)),
        Params::Locate(p) => (locate::run(p, seed)?, serde_json::to_value(p)),
        Params::Flows(p) => (flows::run(p, seed)?, serde_json::to_value(p)),
        Params::Jets(p) => (jets::run(p, seed)?, serde_json::to_value(p)),
        Params::Groups(p) => (groups::run(p)?, serde_json::to_value(p)),
    };
    Ok(Artifacts {
        kind: cfg.kind.name().to_string(),
        seed,
        params: echo.expect("parameters serialise"),
        checks: section.checks,
        data: Value::Object(section.data),
        tables: section.tables,
    })
}
