//! Truncated jets of plane diffeomorphisms tangent to the identity at the
//! origin, and jets of vector fields vanishing to order two.
//!
//! All arithmetic is exact. A jet of a vector field `Z` acts on polynomials as
//! the derivation `g -> Z(g)`; a jet `phi` acts by `g -> g o phi`. The two are
//! related by `g o exp(Z) = sum_j Z^j(g) / j!`, which gives the exponential
//! directly and the logarithm as the operator series of `log(T)`.

mod bch;
mod lcs;

pub use bch::{bch, bch_dynkin, dynkin_coefficients};
pub use lcs::{
    algebra_lcs, exact_rank, group_class_check, group_class_stabilized, span_contains, JetModel, LcsReport,
    StabilizedClass,
};

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flows::PolyVF;
use crate::poly::{rat, Poly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("truncation degrees differ: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("jet is not tangent to the identity")]
    NotTangentToIdentity,
    #[error("vanishing order {order} is below 2")]
    OrderTooLow { order: u32 },
    #[error("Dynkin series disagrees with log(exp Z o exp W)")]
    DynkinMismatch,
    #[error("lower central series did not terminate within {cap} steps")]
    SizeCap { cap: usize },
    #[error(transparent)]
    Group(#[from] crate::groups::GroupError),
}

pub type Result<T, E = JetError> = std::result::Result<T, E>;

/// Order of contact with the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum NuOrder {
    Exact(u32),
    /// No difference from the identity up to the truncation degree.
    AtLeast(u32),
}

impl NuOrder {
    /// A lower bound usable in comparisons.
    pub fn value(self) -> u32 {
        match self {
            NuOrder::Exact(v) | NuOrder::AtLeast(v) => v,
        }
    }
}

/// `(u, v)` with `u = x + ...`, `v = y + ...`, truncated at total degree `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Jet2 {
    pub k: u32,
    pub u: Poly,
    pub v: Poly,
}

/// `p d/dx + q d/dy` truncated at total degree `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetVF {
    pub k: u32,
    pub p: Poly,
    pub q: Poly,
}

fn lowest_degree(a: &Poly, b: &Poly) -> Option<u32> {
    match (a.min_degree(), b.min_degree()) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

impl Jet2 {
    pub fn identity(k: u32) -> Self {
        Self { k, u: Poly::x(), v: Poly::y() }
    }

    /// Truncates `(u, v)` at degree `k` and checks tangency to the identity.
    pub fn new(k: u32, u: Poly, v: Poly) -> Result<Self> {
        let j = Self { k, u: u.truncate(k), v: v.truncate(k) };
        let (du, dv) = j.displacement();
        match lowest_degree(&du, &dv) {
            Some(d) if d < 2 => Err(JetError::NotTangentToIdentity),
            _ => Ok(j),
        }
    }

    /// `phi - Id`.
    pub fn displacement(&self) -> (Poly, Poly) {
        (&self.u - &Poly::x(), &self.v - &Poly::y())
    }

    pub fn is_identity(&self) -> bool {
        let (a, b) = self.displacement();
        a.is_zero() && b.is_zero()
    }

    pub fn nu_order(&self) -> NuOrder {
        let (a, b) = self.displacement();
        match lowest_degree(&a, &b) {
            Some(d) => NuOrder::Exact(d),
            None => NuOrder::AtLeast(self.k + 1),
        }
    }

    /// `g o self`, truncated.
    pub fn pull_back(&self, g: &Poly) -> Poly {
        g.compose_trunc(&self.u, &self.v, Some(self.k))
    }

    /// `self o other`.
    pub fn compose(&self, other: &Jet2) -> Result<Jet2> {
        if self.k != other.k {
            return Err(JetError::DegreeMismatch(self.k, other.k));
        }
        Ok(Jet2 { k: self.k, u: other.pull_back(&self.u), v: other.pull_back(&self.v) })
    }

    /// Solves `self o psi = Id` by `psi <- Id - (self - Id) o psi`; each pass
    /// fixes one more degree.
    pub fn inverse(&self) -> Jet2 {
        let (du, dv) = self.displacement();
        let mut psi = Jet2::identity(self.k);
        for _ in 0..self.k {
            let u = &Poly::x() - &psi.pull_back(&du);
            let v = &Poly::y() - &psi.pull_back(&dv);
            psi = Jet2 { k: self.k, u, v };
        }
        psi
    }

    /// `self o other o self^-1 o other^-1`.
    pub fn commutator(&self, other: &Jet2) -> Result<Jet2> {
        self.compose(other)?.compose(&self.inverse())?.compose(&other.inverse())
    }

    pub fn pow(&self, n: i32) -> Jet2 {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Jet2::identity(self.k);
        for _ in 0..n.unsigned_abs() {
            acc = acc.compose(&base).expect("same degree");
        }
        acc
    }
}

impl fmt::Display for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) mod deg {}", self.u, self.v, self.k + 1)
    }
}

impl JetVF {
    pub fn zero(k: u32) -> Self {
        Self { k, p: Poly::zero(), q: Poly::zero() }
    }

    /// Truncates and checks the vanishing order.
    pub fn new(k: u32, p: Poly, q: Poly) -> Result<Self> {
        let z = Self { k, p: p.truncate(k), q: q.truncate(k) };
        match z.vanishing_order() {
            Some(o) if o < 2 => Err(JetError::OrderTooLow { order: o }),
            _ => Ok(z),
        }
    }

    pub fn from_field(a: &PolyVF, k: u32) -> Result<Self> {
        if let Some(o) = a.vanishing_order() {
            if o < 2 {
                return Err(JetError::OrderTooLow { order: o });
            }
        }
        Self::new(k, a.p.clone(), a.q.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn vanishing_order(&self) -> Option<u32> {
        lowest_degree(&self.p, &self.q)
    }

    /// `Z(g) = p g_x + q g_y`, truncated.
    pub fn apply(&self, g: &Poly) -> Poly {
        &self.p.mul_trunc(&g.dx(), Some(self.k)) + &self.q.mul_trunc(&g.dy(), Some(self.k))
    }

    pub fn add(&self, o: &JetVF) -> JetVF {
        JetVF { k: self.k, p: &self.p + &o.p, q: &self.q + &o.q }
    }

    pub fn sub(&self, o: &JetVF) -> JetVF {
        JetVF { k: self.k, p: &self.p - &o.p, q: &self.q - &o.q }
    }

    pub fn scale(&self, c: &BigRational) -> JetVF {
        JetVF { k: self.k, p: self.p.scale(c), q: self.q.scale(c) }
    }

    /// Lie bracket of vector fields `[A, B] = A(B) - B(A)` componentwise.
    pub fn bracket(&self, o: &JetVF) -> Result<JetVF> {
        if self.k != o.k {
            return Err(JetError::DegreeMismatch(self.k, o.k));
        }
        Ok(JetVF { k: self.k, p: &self.apply(&o.p) - &o.apply(&self.p), q: &self.apply(&o.q) - &o.apply(&self.q) })
    }

    /// Coefficient vector over the keys `(component, i, j)`.
    pub fn coefficients(&self) -> Vec<((u8, u32, u32), BigRational)> {
        let mut out: Vec<_> = self.p.terms().map(|(&(i, j), c)| ((0u8, i, j), c.clone())).collect();
        out.extend(self.q.terms().map(|(&(i, j), c)| ((1u8, i, j), c.clone())));
        out
    }
}

impl fmt::Display for JetVF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) d/dx + ({}) d/dy mod deg {}", self.p, self.q, self.k + 1)
    }
}

pub fn jet_compose(phi: &Jet2, psi: &Jet2) -> Result<Jet2> {
    phi.compose(psi)
}

pub fn jet_inverse(phi: &Jet2) -> Result<Jet2> {
    let (a, b) = phi.displacement();
    if matches!(lowest_degree(&a, &b), Some(d) if d < 2) {
        return Err(JetError::NotTangentToIdentity);
    }
    Ok(phi.inverse())
}

pub fn jet_commutator(phi: &Jet2, psi: &Jet2) -> Result<Jet2> {
    phi.commutator(psi)
}

pub fn nu_order(phi: &Jet2) -> NuOrder {
    phi.nu_order()
}

/// `sum_j Z^j(g) / j!`, which terminates since `Z` raises degrees.
fn exp_series(z: &JetVF, g: &Poly) -> Poly {
    let mut sum = g.truncate(z.k);
    let mut term = sum.clone();
    let mut j = 1i64;
    loop {
        term = z.apply(&term).scale(&rat(1, j));
        if term.is_zero() {
            return sum;
        }
        sum = &sum + &term;
        j += 1;
    }
}

/// `exp(Z) = (exp(Z) x, exp(Z) y)` by the Taylor series of the flow.
pub fn jet_exp(z: &JetVF) -> Result<Jet2> {
    if let Some(o) = z.vanishing_order() {
        if o < 2 {
            return Err(JetError::OrderTooLow { order: o });
        }
    }
    Ok(Jet2 { k: z.k, u: exp_series(z, &Poly::x()), v: exp_series(z, &Poly::y()) })
}

/// `log(T) g = sum_n (-1)^(n+1) (T - I)^n g / n` with `T g = g o phi`.
fn log_series(phi: &Jet2, g: &Poly) -> Poly {
    let mut sum = Poly::zero();
    let mut term = g.clone();
    let mut n = 1i64;
    loop {
        term = &phi.pull_back(&term) - &term;
        if term.is_zero() {
            return sum;
        }
        let c = rat(if n % 2 == 1 { 1 } else { -1 }, n);
        sum = &sum + &term.scale(&c);
        n += 1;
    }
}

/// The unique `Z` with `exp(Z) = phi` at degree `k`.
pub fn jet_log(phi: &Jet2) -> Result<JetVF> {
    let (a, b) = phi.displacement();
    if matches!(lowest_degree(&a, &b), Some(d) if d < 2) {
        return Err(JetError::NotTangentToIdentity);
    }
    Ok(JetVF { k: phi.k, p: log_series(phi, &Poly::x()), q: log_series(phi, &Poly::y()) })
}

/// Rescales a jet field by `tau`.
pub fn scaled(z: &JetVF, tau: &BigRational) -> JetVF {
    if tau.is_one() {
        z.clone()
    } else if tau.is_zero() {
        JetVF::zero(z.k)
    } else {
        z.scale(tau)
    }
}

/// Jets of the basis `X1, alpha X1, ..., alpha^(l-1) X1, Y1` at degree `k`.
pub fn example_basis(kk: u32, p: u32, l: u32, k: u32) -> std::result::Result<Vec<JetVF>, crate::flows::FlowError> {
    let ex = crate::flows::make_example_fields(kk, p, l)?;
    ex.basis().iter().map(|f| crate::flows::jet_of_vf(f, k)).collect()
}

/// `exp(tau Z)` for every `Z` in [`example_basis`].
pub fn example_generators(
    kk: u32,
    p: u32,
    l: u32,
    tau: &BigRational,
    k: u32,
) -> std::result::Result<Vec<Jet2>, crate::flows::FlowError> {
    Ok(example_basis(kk, p, l, k)?
        .iter()
        .map(|z| jet_exp(&scaled(z, tau)).expect("order checked when taking the jet"))
        .collect())
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    fn mono(i: u32, j: u32) -> Poly {
        Poly::monomial(i, j, BigRational::one())
    }

    fn shear_y(k: u32) -> Jet2 {
        Jet2 { k, u: Poly::x(), v: &Poly::y() + &mono(2, 0) }
    }

    #[test]
    fn composition_examples() {
        let s = shear_y(4);
        assert_eq!(s.compose(&Jet2::identity(4)).unwrap(), s);
        let ss = s.compose(&s).unwrap();
        assert_eq!(ss.v, &Poly::y() + &mono(2, 0).scale(&rat(2, 1)));
        let t = Jet2 { k: 4, u: &Poly::x() + &mono(0, 2), v: Poly::y() };
        let c = t.compose(&s).unwrap();
        // (y + x^2)^2 = y^2 + 2 x^2 y + x^4
        let want_u =
            Poly::from_terms([((1, 0), rat(1, 1)), ((0, 2), rat(1, 1)), ((2, 1), rat(2, 1)), ((4, 0), rat(1, 1))]);
        assert_eq!(c.u, want_u);
        assert!(matches!(s.compose(&Jet2::identity(5)), Err(JetError::DegreeMismatch(4, 5))));
    }

    #[test]
    fn inverse_and_nu() {
        let s = shear_y(4);
        assert_eq!(s.inverse().v, &Poly::y() - &mono(2, 0));
        assert_eq!(Jet2::identity(4).inverse(), Jet2::identity(4));
        assert_eq!(Jet2::identity(4).nu_order(), NuOrder::AtLeast(5));
        assert_eq!(s.nu_order(), NuOrder::Exact(2));
        let bad = Jet2 { k: 3, u: &Poly::x() + &Poly::y(), v: Poly::y() };
        assert!(matches!(jet_inverse(&bad), Err(JetError::NotTangentToIdentity)));
    }

    #[test]
    fn exp_log_examples() {
        let z = JetVF { k: 5, p: Poly::zero(), q: mono(2, 0) };
        assert_eq!(jet_exp(&z).unwrap(), shear_y(5));
        assert_eq!(jet_log(&shear_y(5)).unwrap(), z);
        assert_eq!(jet_exp(&JetVF::zero(5)).unwrap(), Jet2::identity(5));
        assert!(jet_log(&Jet2::identity(5)).unwrap().is_zero());
        let low = JetVF { k: 3, p: Poly::y(), q: Poly::zero() };
        assert!(matches!(jet_exp(&low), Err(JetError::OrderTooLow { order: 1 })));
    }

    #[test]
    fn exp_matches_nonlinear_flow() {
        // Z = x^2 d/dx has flow x / (1 - t x); at t = 1 the series is x + x^2 + x^3 + ...
        let z = JetVF { k: 6, p: mono(2, 0), q: Poly::zero() };
        let e = jet_exp(&z).unwrap();
        let want = Poly::from_terms((1..=6).map(|d| ((d, 0), rat(1, 1))));
        assert_eq!(e.u, want);
    }

    #[test]
    fn commutator_examples() {
        let a = shear_y(5);
        let b = Jet2 { k: 5, u: &Poly::x() + &mono(0, 2), v: Poly::y() };
        assert!(a.commutator(&a).unwrap().is_identity());
        assert!(a.commutator(&Jet2::identity(5)).unwrap().is_identity());
        let c = a.commutator(&b).unwrap();
        assert!(!c.is_identity());
        assert!(c.nu_order().value() >= 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn inverse_roundtrip(phi in jet_strategy(4, 2)) {
            prop_assert!(phi.compose(&phi.inverse()).unwrap().is_identity());
            prop_assert!(phi.inverse().compose(&phi).unwrap().is_identity());
        }

        #[test]
        fn compose_associative(a in jet_strategy(4, 2), b in jet_strategy(4, 2), c in jet_strategy(4, 2)) {
            prop_assert_eq!(a.compose(&b).unwrap().compose(&c).unwrap(), a.compose(&b.compose(&c).unwrap()).unwrap());
        }

        #[test]
        fn exp_log_roundtrip(z in jet_vf_strategy(6)) {
            let phi = jet_exp(&z).unwrap();
            prop_assert_eq!(jet_log(&phi).unwrap(), z);
            prop_assert_eq!(jet_exp(&jet_log(&phi).unwrap()).unwrap(), phi);
        }

        #[test]
        fn nu_strictly_increases(a in jet_strategy(5, 2), b in jet_strategy(5, 2)) {
            let c = a.commutator(&b).unwrap();
            let m = a.nu_order().value().max(b.nu_order().value());
            prop_assert!(c.is_identity() || c.nu_order().value() > m);
        }

        #[test]
        fn nu_stable_under_powers(a in jet_strategy(5, 2)) {
            prop_assume!(!a.is_identity());
            for n in [2, 3, -1] {
                prop_assert_eq!(a.pow(n).nu_order(), a.nu_order());
            }
        }
    }
}
