//! Exact identities of the example fields and transport of the first integral.

use nilfix::flows::{integral_transport_check, symbolic_identities};
use nilfix::geom::Point;
use nilfix::report::CheckRecord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{num, Section};
use crate::artifacts::CsvTable;
use crate::config::FlowsParams;
use crate::CliError;

pub(super) fn run(p: &FlowsParams, seed: Option<u64>) -> Result<Section, CliError> {
    let mut s = Section::default();
    let mut t = CsvTable::new("identities", "flows/identities", &["k", "p", "identity", "holds"]);
    for &(k, pp) in &p.identities {
        for (name, holds) in symbolic_identities(k, pp) {
            t.push(vec![k.to_string(), pp.to_string(), name.to_string(), holds.to_string()]);
            s.checks.push(CheckRecord::new(
                "symbolic_identity",
                json!({"k": k, "p": pp, "identity": name}),
                holds,
                true,
                holds,
            ));
        }
    }
    s.tables.push(t);

    let seeds: Vec<Point> = if p.seeds.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
        (0..p.seed_count)
            .map(|_| {
                let r = rng.gen_range(0.5..=1.5);
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                Point::new(r * f64::cos(a), r * f64::sin(a))
            })
            .collect()
    } else {
        p.seeds.clone()
    };
    if seeds.is_empty() {
        return Ok(s);
    }
    let rep = integral_transport_check(p.k, p.p, p.t, &seeds, &p.integrator)
        .map_err(|e| CliError::module("integrating", e))?;
    let mut t = CsvTable::new("transport", "flows/transport", &["x", "y", "y1_drift", "x1_drift"]);
    for (i, z) in seeds.iter().enumerate() {
        t.push(vec![num(z.x), num(z.y), num(rep.y_drift[i]), num(rep.x_drift[i])]);
    }
    s.tables.push(t);
    s.checks.extend(rep.records());
    Ok(s)
}
