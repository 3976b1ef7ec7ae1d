//! Exact ranks of jet fields, the lower central series of the Lie algebra they
//! span, and nilpotency classes of jet groups.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{Jet2, JetError, JetVF, Result};
use crate::groups::{nilpotency_class, ClassReport, GroupModel, DEFAULT_SIZE_CAP};

/// Integer row echelon form built incrementally with content-reduced,
/// fraction-free elimination.
#[derive(Default)]
struct Echelon {
    keys: BTreeMap<(u8, u32, u32), usize>,
    /// Each row is stored with its pivot column; entries are integers.
    rows: Vec<(usize, BTreeMap<usize, BigInt>)>,
}

impl Echelon {
    fn integer_row(&mut self, v: &JetVF) -> BTreeMap<usize, BigInt> {
        let coeffs = v.coefficients();
        let lcm = coeffs.iter().fold(BigInt::from(1), |acc, (_, c)| acc.lcm(c.denom()));
        let mut row = BTreeMap::new();
        for (key, c) in coeffs {
            let n = self.keys.len();
            let col = *self.keys.entry(key).or_insert(n);
            row.insert(col, c.numer() * (&lcm / c.denom()));
        }
        row
    }

    /// Inserts `v`; returns whether it was independent of the rows so far.
    fn insert(&mut self, v: &JetVF) -> bool {
        let mut row = self.integer_row(v);
        for (pc, prow) in &self.rows {
            let Some(a) = row.get(pc).cloned() else { continue };
            let p = &prow[pc];
            // row <- p * row - a * prow, which clears column pc.
            let mut next: BTreeMap<usize, BigInt> = BTreeMap::new();
            for (c, x) in &row {
                next.insert(*c, p * x);
            }
            for (c, y) in prow {
                let e = next.entry(*c).or_insert_with(BigInt::zero);
                *e -= &a * y;
            }
            next.retain(|_, x| !x.is_zero());
            let g = next.values().fold(BigInt::zero(), |acc, x| acc.gcd(x));
            if !g.is_zero() {
                for x in next.values_mut() {
                    *x /= &g;
                }
            }
            row = next;
        }
        match row.iter().next() {
            None => false,
            Some((&pc, lead)) => {
                if lead.is_negative() {
                    for x in row.values_mut() {
                        *x = -x.clone();
                    }
                }
                self.rows.push((pc, row));
                true
            }
        }
    }
}

/// Rank of the span of `vs` over the rationals.
pub fn exact_rank(vs: &[JetVF]) -> usize {
    let mut e = Echelon::default();
    vs.iter().filter(|v| e.insert(v)).count()
}

/// Whether `v` lies in the span of `span`.
pub fn span_contains(span: &[JetVF], v: &JetVF) -> bool {
    let mut all = span.to_vec();
    all.push(v.clone());
    exact_rank(&all) == exact_rank(span)
}

fn independent_subset(vs: Vec<JetVF>) -> Vec<JetVF> {
    let mut e = Echelon::default();
    vs.into_iter().filter(|v| e.insert(v)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcsReport {
    /// `dim g_(j)` for `j = 0, 1, ...`, ending with the first zero.
    pub dims: Vec<usize>,
    /// A basis of each nonzero layer.
    pub layers: Vec<Vec<JetVF>>,
}

impl LcsReport {
    /// Number of nonzero layers, the nilpotency step of the algebra.
    pub fn step(&self) -> usize {
        self.layers.len()
    }
}

/// `g_(0) = span(basis)`, `g_(j+1) = span [basis, g_(j)]`, until a layer is zero.
pub fn algebra_lcs(basis: &[JetVF], cap: usize) -> Result<LcsReport> {
    for b in basis {
        if let Some(o) = b.vanishing_order() {
            if o < 2 {
                return Err(JetError::OrderTooLow { order: o });
            }
        }
    }
    let mut layer = independent_subset(basis.to_vec());
    let mut dims = vec![layer.len()];
    let mut layers = Vec::new();
    while !layer.is_empty() {
        if layers.len() >= cap {
            return Err(JetError::SizeCap { cap });
        }
        let mut brackets = Vec::with_capacity(basis.len() * layer.len());
        for b in basis {
            for v in &layer {
                brackets.push(b.bracket(v)?);
            }
        }
        layers.push(std::mem::replace(&mut layer, independent_subset(brackets)));
        dims.push(layer.len());
    }
    Ok(LcsReport { dims, layers })
}

/// Jets of degree `k` under composition, with exact equality.
#[derive(Clone, Copy, Debug)]
pub struct JetModel {
    pub k: u32,
}

impl GroupModel for JetModel {
    type Elem = Jet2;

    fn identity(&self) -> Jet2 {
        Jet2::identity(self.k)
    }

    fn mul(&self, a: &Jet2, b: &Jet2) -> crate::groups::Result<Jet2> {
        a.compose(b).map_err(|e| crate::groups::GroupError::Model(e.to_string()))
    }

    fn inv(&self, a: &Jet2) -> crate::groups::Result<Jet2> {
        Ok(a.inverse())
    }

    fn is_identity(&self, a: &Jet2) -> crate::groups::Result<bool> {
        Ok(a.is_identity())
    }

    fn exact(&self) -> bool {
        true
    }
}

/// Nilpotency class of the group generated by `gens` at their truncation degree.
pub fn group_class_check(gens: &[Jet2], depth_cap: usize) -> Result<ClassReport> {
    let k = gens.first().map(|g| g.k).unwrap_or(1);
    if let Some(g) = gens.iter().find(|g| g.k != k) {
        return Err(JetError::DegreeMismatch(k, g.k));
    }
    for g in gens {
        let (a, b) = g.displacement();
        if [a.min_degree(), b.min_degree()].iter().flatten().any(|&d| d < 2) {
            return Err(JetError::NotTangentToIdentity);
        }
    }
    Ok(nilpotency_class(&JetModel { k }, gens, depth_cap, DEFAULT_SIZE_CAP)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizedClass {
    /// `(K, class at K)`; `None` means the depth cap was reached.
    pub per_k: Vec<(u32, Option<usize>)>,
    /// Smallest `K` whose class agrees with the class at `K + 2`.
    pub stable_k: Option<u32>,
    pub class: Option<usize>,
}

/// Computes the class for `K = k_min, ..., k_max` and reports the first `K`
/// where it agrees with `K + 2`. Truncation can only hide commutators, so the
/// class is nondecreasing in `K`.
pub fn group_class_stabilized<F>(make_gens: F, k_min: u32, k_max: u32, depth_cap: usize) -> Result<StabilizedClass>
where
    F: Fn(u32) -> Result<Vec<Jet2>>,
{
    let mut per_k: Vec<(u32, Option<usize>)> = Vec::new();
    for k in k_min..=k_max {
        let c = group_class_check(&make_gens(k)?, depth_cap)?.result.class();
        per_k.push((k, c));
        if per_k.len() >= 3 {
            let (k0, c0) = per_k[per_k.len() - 3];
            if c0.is_some() && c0 == c {
                return Ok(StabilizedClass { per_k, stable_k: Some(k0), class: c0 });
            }
        }
    }
    Ok(StabilizedClass { per_k, stable_k: None, class: None })
}
