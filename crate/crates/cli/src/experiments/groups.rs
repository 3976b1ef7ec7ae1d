//! Nilpotency classes of unitriangular groups and central-series orderings.

use nilfix::groups::{central_series, nilpotency_class, UniTriModel};
use nilfix::report::CheckRecord;
use serde_json::json;

use super::Section;
use crate::artifacts::CsvTable;
use crate::config::GroupsParams;
use crate::CliError;

fn joined(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub(super) fn run(p: &GroupsParams) -> Result<Section, CliError> {
    let mut s = Section::default();
    let mut t = CsvTable::new("classes", "groups/classes", &["n", "class", "layer_sizes", "nontrivial"]);
    for &n in &p.n_values {
        let m = UniTriModel::new(n);
        let r = nilpotency_class(&m, &m.etas(), p.depth_cap, p.size_cap)
            .map_err(|e| CliError::module(format!("class of N_{n}"), e))?;
        let class = r.result.class();
        t.push(vec![
            n.to_string(),
            class.map(|c| c.to_string()).unwrap_or_else(|| "unknown".into()),
            joined(&r.layer_sizes),
            joined(&r.nontrivial),
        ]);
        s.checks.push(CheckRecord::new(
            "nilpotency_class",
            json!({"group": format!("N_{n}"), "depth_cap": p.depth_cap}),
            class.map(serde_json::Value::from).unwrap_or(serde_json::Value::Null),
            n - 1,
            class == Some(n - 1),
        ));
    }
    s.tables.push(t);
    if let Some((n, sigma)) = p.central_series {
        let cs = central_series(n, sigma, p.size_cap).map_err(|e| CliError::module("central series", e))?;
        s.put("central_series", &cs);
    }
    Ok(s)
}
