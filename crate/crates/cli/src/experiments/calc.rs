//! Class constants, bound soundness, displacement floors and angles.

use nilfix::geom::BoxRegion;
use nilfix::lipcalc::sample::random_expression;
use nilfix::lipcalc::{displacement_floor_check, estimate_lip_identity, max_ball_angle, CertifiedMap, LipClassTable};
use nilfix::orbits::map_id;
use nilfix::poly::format_rational;
use nilfix::report::CheckRecord;
use serde_json::json;

use super::{num, point_json, Section};
use crate::artifacts::CsvTable;
use crate::config::CalcParams;
use crate::CliError;

fn tag(mut r: CheckRecord, label: &str) -> CheckRecord {
    if let Some(o) = r.inputs.as_object_mut() {
        o.insert("map".into(), label.into());
    } else {
        r.inputs = json!({"map": label, "detail": r.inputs});
    }
    r
}

pub(super) fn run(p: &CalcParams, seed: Option<u64>) -> Result<Section, CliError> {
    let mut s = Section::default();
    if let Some(max) = p.epsilon_table {
        let rows = LipClassTable::rows(max);
        let mut t = CsvTable::new("eps_table", "calc/eps_table", &["sigma", "eps_sigma", "delta_sigma"]);
        for r in &rows {
            t.push(vec![r.sigma.to_string(), format_rational(&r.eps_sigma), format_rational(&r.delta_sigma)]);
        }
        s.tables.push(t);
        s.put("epsilon_table", &rows);
    }

    let mut maps: Vec<(String, CertifiedMap)> = Vec::new();
    for (i, e) in p.maps.iter().enumerate() {
        let m = CertifiedMap::new(e.clone()).map_err(|e| CliError::module(format!("params.maps[{i}]"), e))?;
        maps.push((format!("maps[{i}]"), m));
    }
    let seed = seed.unwrap_or(0);
    if let Some(r) = &p.random {
        for i in 0..r.count {
            let e = random_expression(seed.wrapping_add(i as u64), r.depth, r.scale, r.max_bound);
            let m = CertifiedMap::new(e).map_err(|e| CliError::module("random expression", e))?;
            maps.push((format!("random[{i}]"), m));
        }
    }
    if maps.is_empty() {
        return Ok(s);
    }

    let mut table = CsvTable::new("maps", "calc/maps", &["map", "map_id", "provenance", "bound", "estimate"]);
    for (i, (label, m)) in maps.iter().enumerate() {
        let mut est = String::new();
        if let Some(sd) = &p.soundness {
            let e =
                estimate_lip_identity(m, &BoxRegion::centered(sd.half_width), sd.pairs, seed.wrapping_add(i as u64))
                    .map_err(|e| CliError::module(format!("estimating {label}"), e))?;
            est = num(e);
            s.checks.push(CheckRecord::new(
                "lip_soundness",
                json!({"map": label, "pairs": sd.pairs, "half_width": sd.half_width}),
                e,
                m.eps + sd.slack,
                e <= m.eps + sd.slack,
            ));
        }
        let prov = serde_json::to_value(m.provenance).expect("serialises");
        table.push(vec![label.clone(), map_id(m), prov.as_str().unwrap_or_default().to_string(), num(m.eps), est]);
    }
    s.tables.push(table);
    s.put("maps", maps.iter().map(|(l, m)| json!({"map": l, "map_id": map_id(m), "expr": m.expr})).collect::<Vec<_>>());

    let in_u: Vec<&(String, CertifiedMap)> = maps.iter().filter(|(_, m)| m.eps <= 0.125).collect();
    if let Some(ex) = &p.exclusion {
        for (label, m) in &in_u {
            for &b in &p.base_points {
                let r = displacement_floor_check(m, b, ex.grid)
                    .map_err(|e| CliError::module(format!("floor check for {label}"), e))?;
                s.checks.push(tag(r, label));
            }
        }
    }
    if let Some(an) = &p.angles {
        for (i, (label, m)) in in_u.iter().enumerate() {
            for &b in &p.base_points {
                let r = max_ball_angle(m, b, an.pairs, seed.wrapping_add(i as u64))
                    .map_err(|e| CliError::module(format!("angle check for {label}"), e))?;
                s.checks.push(r.record(json!({"map": label, "p": point_json(b), "pairs": an.pairs})));
            }
        }
    }
    if p.exclusion.is_some() || p.angles.is_some() {
        s.put("maps_in_u", in_u.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
    }
    Ok(s)
}
