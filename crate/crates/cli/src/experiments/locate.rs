//! Fixed points of single maps and common fixed points of several.

use nilfix::flows::{alpha_power_x1, y1_field, FlowLeaf};
use nilfix::geom::Point;
use nilfix::lipcalc::{CertifiedMap, MapExpr};
use nilfix::orbits::{locate_fixed_point, locate_global_fixed_point, Certificate, OrbitError, EVAL_TOL};
use nilfix::report::CheckRecord;
use serde_json::json;

use super::{num, point_json, Section};
use crate::artifacts::CsvTable;
use crate::config::{ExampleFlow, LocateExpect, LocateParams};
use crate::CliError;

fn build_maps(p: &LocateParams, seed: Option<u64>) -> Result<Vec<CertifiedMap>, CliError> {
    let mut maps = Vec::new();
    for (i, e) in p.maps.iter().enumerate() {
        maps.push(CertifiedMap::new(e.clone()).map_err(|e| CliError::module(format!("params.maps[{i}]"), e))?);
    }
    let mut integ = p.integrator;
    if let Some(s) = seed {
        integ.seed = s;
    }
    for (i, fl) in p.example_flows.iter().enumerate() {
        let ctx = format!("params.example_flows[{i}]");
        let (field, t) = match *fl {
            ExampleFlow::AlphaX1 { k, p, j, t } => (alpha_power_x1(k, p, j).map_err(|e| CliError::module(&ctx, e))?, t),
            ExampleFlow::Y1 { k, p, t } => (y1_field(k, p), t),
        };
        let leaf = FlowLeaf::estimated(field, t, integ).map_err(|e| CliError::module(&ctx, e))?;
        maps.push(CertifiedMap::new(MapExpr::Flow(leaf)).map_err(|e| CliError::module(&ctx, e))?);
    }
    Ok(maps)
}

fn certificate_kind(c: &Certificate) -> &'static str {
    match c {
        Certificate::Closure { .. } => "closure",
        Certificate::Enclosed { .. } => "enclosed",
    }
}

fn expect_checks(s: &mut Section, ex: &LocateExpect, q: Point, cert: Option<&Certificate>) {
    if let Some(want) = ex.point {
        let d = q.dist(want);
        s.checks.push(CheckRecord::new(
            "fixed_point_position",
            json!({"expected": point_json(want)}),
            d,
            ex.tol,
            d <= ex.tol,
        ));
    }
    if let Some(x) = ex.line_x {
        let d = (q.x - x).abs();
        s.checks.push(CheckRecord::new("fixed_point_line", json!({"line_x": x}), d, ex.tol, d <= ex.tol));
    }
    if let (Some(want), Some(c)) = (&ex.certificate, cert) {
        let got = certificate_kind(c);
        s.checks.push(CheckRecord::new("certificate_kind", json!({}), got, want.as_str(), got == want));
    }
}

/// Failures of the search itself are reported as a failed check rather than
/// an execution error.
fn search_failure(e: &OrbitError) -> bool {
    matches!(e, OrbitError::SearchFailed(_) | OrbitError::StageFailed { .. })
}

pub(super) fn run(p: &LocateParams, seed: Option<u64>) -> Result<Section, CliError> {
    let maps = build_maps(p, seed)?;
    let mut s = Section::default();
    s.put("bounds", maps.iter().map(|m| json!({"eps": m.eps, "provenance": m.provenance})).collect::<Vec<_>>());

    if maps.len() == 1 {
        let f = &maps[0];
        let cfg = &p.config.locate;
        let loc = match locate_fixed_point(f, p.base, cfg) {
            Ok(l) => l,
            Err(e) if search_failure(&e) => {
                s.checks.push(CheckRecord::new("fixed_point_found", json!({}), e.to_string(), "a fixed point", false));
                s.put("error", e.to_string());
                return Ok(s);
            }
            Err(e) => return Err(CliError::module("locating", e)),
        };
        let bound = (1.0 + f.eps) * cfg.tol;
        s.checks.push(CheckRecord::new(
            "fixed_point_found",
            json!({"tol": cfg.tol}),
            loc.displacement,
            bound,
            loc.displacement <= bound,
        ));
        if let Certificate::Enclosed { capital, .. } = &loc.certificate {
            let idx: Vec<_> = capital.indices.iter().map(|&(n, w)| json!([n, w])).collect();
            s.checks.push(CheckRecord::new(
                "capital_point",
                json!({"q": point_json(loc.q)}),
                idx,
                "nonzero",
                capital.capital,
            ));
        }
        if let Some(ex) = &p.expect {
            expect_checks(&mut s, ex, loc.q, Some(&loc.certificate));
        }
        s.put("located", &loc);
        return Ok(s);
    }

    let gl = match locate_global_fixed_point(&maps, p.base, &p.config) {
        Ok(g) => g,
        Err(e) if search_failure(&e) => {
            s.checks.push(CheckRecord::new("global_fixed_point", json!({}), e.to_string(), "all stages", false));
            s.put("error", e.to_string());
            return Ok(s);
        }
        Err(e) => return Err(CliError::module("locating", e)),
    };
    let mut t = CsvTable::new(
        "stages",
        "locate/stages",
        &["stage", "qx", "qy", "max_displacement", "certificate", "inclusion_excess", "inclusion_pass"],
    );
    for st in &gl.stages {
        let worst = st.displacements.iter().cloned().fold(0.0, f64::max);
        t.push(vec![
            st.stage.to_string(),
            num(st.q.x),
            num(st.q.y),
            num(worst),
            certificate_kind(&st.certificate).to_string(),
            num(st.inclusion_excess),
            st.inclusion_pass.to_string(),
        ]);
        s.checks.push(CheckRecord::new(
            "stage_inclusion",
            json!({"stage": st.stage}),
            st.inclusion_excess,
            p.config.inclusion_tol,
            st.inclusion_pass,
        ));
    }
    s.tables.push(t);
    let mut worst = 0.0f64;
    for (i, m) in maps.iter().enumerate() {
        let d = m.displacement(gl.q, EVAL_TOL).map_err(|e| CliError::module(format!("evaluating map {i}"), e))?;
        worst = worst.max(d.norm());
    }
    let bound = p.config.fix_tol.max(p.config.locate.tol);
    s.checks.push(CheckRecord::new("common_fixed_point", json!({"q": point_json(gl.q)}), worst, bound, worst <= bound));
    if let Some(ex) = &p.expect {
        expect_checks(&mut s, ex, gl.q, None);
    }
    s.put("global", &gl);
    Ok(s)
}
