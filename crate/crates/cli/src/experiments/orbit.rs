//! Orbit recurrence, winding numbers and the displacement index.

use nilfix::lipcalc::CertifiedMap;
use nilfix::orbits::{
    detect_recurrence, displacement_index, extract_simple_loop, gamma_from_orbit, iterate_orbit, winding_number,
    OrbitError,
};
use nilfix::report::CheckRecord;
use serde_json::{json, Value};

use super::{num, point_json, Section};
use crate::artifacts::CsvTable;
use crate::config::OrbitParams;
use crate::CliError;

fn expected(v: Option<i64>) -> (Value, Box<dyn Fn(i64) -> bool>) {
    match v {
        Some(e) => (e.into(), Box::new(move |w| w == e)),
        None => ("nonzero".into(), Box::new(|w| w != 0)),
    }
}

pub(super) fn run(p: &OrbitParams) -> Result<Section, CliError> {
    let err = |ctx: &str| {
        let ctx = ctx.to_string();
        move |e: OrbitError| CliError::module(ctx, e)
    };
    let f = CertifiedMap::new(p.map.clone()).map_err(|e| CliError::module("params.map", e))?;
    let orbit = iterate_orbit(&f, p.base, p.n, p.escape_radius).map_err(err("iterating"))?;
    let mut s = Section::default();
    let mut t = CsvTable::new("orbit", "orbit/iterates", &["n", "x", "y"]);
    for (i, z) in orbit.iterates.iter().enumerate() {
        t.push(vec![i.to_string(), num(z.x), num(z.y)]);
    }
    s.tables.push(t);
    s.put("map_id", &orbit.map_id);
    s.put("escaped", orbit.escaped);

    let rec = detect_recurrence(&orbit, p.recurrence_tol).map_err(err("recurrence"))?;
    s.put("recurrences", &rec);
    if let Some(want) = p.expect.first_recurrence {
        let got = rec.first().map(|r| r.n);
        s.checks.push(CheckRecord::new(
            "first_recurrence",
            json!({"tol": p.recurrence_tol}),
            got.map(Value::from).unwrap_or(Value::Null),
            want,
            got == Some(want),
        ));
    }

    let (bound, ok) = expected(p.expect.winding);
    let mut windings = Vec::new();
    for &m in &p.windings {
        let g = gamma_from_orbit(&orbit, m).map_err(err("building the loop"))?;
        let w = winding_number(&g, p.q, p.guard).map_err(err("winding number"))?;
        windings.push(json!({"m": m, "winding": w}));
        s.checks.push(CheckRecord::new(
            "winding_number",
            json!({"m": m, "q": point_json(p.q)}),
            w,
            bound.clone(),
            ok(w),
        ));
    }
    s.put("windings", windings);

    if let Some(m) = p.simple_loop {
        let g = gamma_from_orbit(&orbit, m).map_err(err("building the loop"))?;
        let (lp, info) = match extract_simple_loop(&g) {
            Ok(sl) => {
                let info = json!({
                    "m": m,
                    "cut": [sl.cut.0, sl.cut.1],
                    "vertices": &sl.lp.vertices,
                    "max_turn": sl.max_turn,
                    "angle_condition": sl.angle_condition,
                });
                (sl.lp, info)
            }
            Err(OrbitError::AlreadySimple) => {
                let info = json!({"m": m, "cut": Value::Null, "vertices": &g.vertices});
                (g, info)
            }
            Err(e) => return Err(err("extracting a simple loop")(e)),
        };
        s.checks.push(CheckRecord::new("simple_loop", json!({"m": m}), lp.is_simple(), true, lp.is_simple()));
        let idx = displacement_index(&f, &lp, &p.index).map_err(err("displacement index"))?;
        let (bound, ok) = expected(p.expect.index);
        s.checks.push(CheckRecord::new("displacement_index", json!({"m": m}), idx, bound, ok(idx)));
        s.put("simple_loop", info);
    }
    Ok(s)
}
