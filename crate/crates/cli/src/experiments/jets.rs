//! Classes of jet groups, Lie algebra series and exact jet identities.

use nilfix::jets::{
    algebra_lcs, bch, bch_dynkin, example_basis, example_generators, group_class_stabilized, jet_commutator, jet_exp,
    jet_log, span_contains, JetError, JetVF,
};
use nilfix::poly::{parse_rational, rat, Poly};
use nilfix::report::CheckRecord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::Section;
use crate::artifacts::CsvTable;
use crate::config::{JetFamily, JetsParams, RandomJets};
use crate::CliError;

/// A few monomials of degree `min_deg..=k` with small rational coefficients.
fn random_poly(rng: &mut ChaCha8Rng, k: u32, min_deg: u32) -> Poly {
    let terms = rng.gen_range(1..=4);
    Poly::from_terms((0..terms).map(|_| {
        let d = rng.gen_range(min_deg..=k);
        let i = rng.gen_range(0..=d);
        ((i, d - i), rat(rng.gen_range(-3..=3), rng.gen_range(1..=3)))
    }))
}

fn random_field(rng: &mut ChaCha8Rng, k: u32, min_deg: u32) -> JetVF {
    loop {
        let z = JetVF::new(k, random_poly(rng, k, min_deg), random_poly(rng, k, min_deg)).expect("degrees start at 2");
        if !z.is_zero() {
            return z;
        }
    }
}

fn expected_dims(l: u32) -> Vec<usize> {
    let mut d = vec![l as usize + 1];
    d.extend((0..l as usize).rev());
    d
}

fn family(
    s: &mut Section,
    f: &JetFamily,
    p: &JetsParams,
    classes: &mut CsvTable,
    lcs_t: &mut CsvTable,
) -> Result<(), CliError> {
    let label = format!("k={} p={} l={}", f.k, f.p, f.l);
    let tau = parse_rational(&f.tau).expect("checked during validation");
    let ctx = |what: &str| format!("{what} for {label}");
    nilfix::flows::make_example_fields(f.k, f.p, f.l).map_err(|e| CliError::module(ctx("fields"), e))?;
    let make =
        |k: u32| -> Result<_, JetError> { Ok(example_generators(f.k, f.p, f.l, &tau, k).expect("parameters checked")) };
    let st =
        group_class_stabilized(make, p.k_min, p.k_max, p.depth_cap).map_err(|e| CliError::module(ctx("class"), e))?;
    for (k, c) in &st.per_k {
        classes.push(vec![
            f.k.to_string(),
            f.p.to_string(),
            f.l.to_string(),
            k.to_string(),
            c.map(|c| c.to_string()).unwrap_or_else(|| "unknown".into()),
        ]);
    }
    s.checks.push(CheckRecord::new(
        "group_class",
        json!({"family": label, "stable_k": st.stable_k}),
        st.class.map(Value::from).unwrap_or(Value::Null),
        f.l,
        st.class == Some(f.l as usize),
    ));

    let deg = f.lcs_degree.unwrap_or(2 * f.l + 5);
    let basis = example_basis(f.k, f.p, f.l, deg).map_err(|e| CliError::module(ctx("basis"), e))?;
    let lcs = algebra_lcs(&basis, f.l as usize + 4).map_err(|e| CliError::module(ctx("series"), e))?;
    for (j, d) in lcs.dims.iter().enumerate() {
        lcs_t.push(vec![f.k.to_string(), f.p.to_string(), f.l.to_string(), j.to_string(), d.to_string()]);
    }
    let want = expected_dims(f.l);
    s.checks.push(CheckRecord::new(
        "algebra_lcs_dims",
        json!({"family": label, "degree": deg}),
        json!(lcs.dims),
        json!(want),
        lcs.dims == want,
    ));
    // Layer j (j >= 1) should be spanned by X1, alpha X1, ..., alpha^(l-1-j) X1.
    let l = f.l as usize;
    let spans_ok = lcs
        .layers
        .iter()
        .enumerate()
        .skip(1)
        .all(|(j, layer)| j < l && layer.len() == l - j && (0..l - j).all(|i| span_contains(layer, &basis[i])));
    s.checks.push(CheckRecord::new(
        "algebra_lcs_spans",
        json!({"family": label, "degree": deg}),
        spans_ok,
        true,
        spans_ok,
    ));
    s.data.insert(format!("family {label}"), json!({"per_k": st.per_k, "stable_k": st.stable_k, "lcs_dims": lcs.dims}));
    Ok(())
}

fn random_checks(s: &mut Section, r: &RandomJets, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let err = |e: JetError| CliError::module("random jets", e);

    let mut bad = 0usize;
    for _ in 0..r.roundtrip_count {
        let z = random_field(&mut rng, r.roundtrip_degree, 2);
        if jet_log(&jet_exp(&z).map_err(err)?).map_err(err)? != z {
            bad += 1;
        }
    }
    s.checks.push(CheckRecord::new(
        "exp_log_roundtrip",
        json!({"count": r.roundtrip_count, "degree": r.roundtrip_degree}),
        bad,
        0,
        bad == 0,
    ));

    let mut bad = 0usize;
    for _ in 0..r.bch_count {
        let z = random_field(&mut rng, r.bch_degree, 2);
        let w = random_field(&mut rng, r.bch_degree, 2);
        if bch_dynkin(&z, &w).map_err(err)? != bch(&z, &w, false).map_err(err)? {
            bad += 1;
        }
    }
    s.checks.push(CheckRecord::new(
        "bch_dynkin_agreement",
        json!({"count": r.bch_count, "degree": r.bch_degree}),
        bad,
        0,
        bad == 0,
    ));

    let mut bad = 0usize;
    for _ in 0..r.nu_count {
        let k = r.nu_degree;
        let (da, db) = (rng.gen_range(2..=k), rng.gen_range(2..=k));
        let a = jet_exp(&random_field(&mut rng, k, da)).map_err(err)?;
        let b = jet_exp(&random_field(&mut rng, k, db)).map_err(err)?;
        let c = jet_commutator(&a, &b).map_err(err)?;
        if c.nu_order().value() <= a.nu_order().value().max(b.nu_order().value()) {
            bad += 1;
        }
    }
    s.checks.push(CheckRecord::new(
        "nu_commutator_increase",
        json!({"count": r.nu_count, "degree": r.nu_degree}),
        bad,
        0,
        bad == 0,
    ));
    Ok(())
}

pub(super) fn run(p: &JetsParams, seed: Option<u64>) -> Result<Section, CliError> {
    let mut s = Section::default();
    let mut classes = CsvTable::new("class_table", "jets/class_table", &["k", "p", "l", "K", "class"]);
    let mut lcs = CsvTable::new("lcs", "jets/lcs", &["k", "p", "l", "j", "dim"]);
    for f in &p.families {
        family(&mut s, f, p, &mut classes, &mut lcs)?;
    }
    if !p.families.is_empty() {
        s.tables.push(classes);
        s.tables.push(lcs);
    }
    if let Some(r) = &p.random {
        random_checks(&mut s, r, seed.unwrap_or(0))?;
    }
    Ok(s)
}
