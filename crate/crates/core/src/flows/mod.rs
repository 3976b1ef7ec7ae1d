//! Polynomial vector fields with exact coefficients, the commuting family
//! `X1, alpha X1, ..., Y1` and their time-`t` flows.

mod integrate;

pub use integrate::{flow_map, integral_transport_check, integrate, FlowLeaf, IntegratorConfig, TransportReport};

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;
use crate::lipcalc::LipError;
use crate::poly::{rat, FloatPoly, Poly, RationalFn};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("alpha^{j} X1 is not polynomial: p - 1 = {lhs} < k (l - 1) = {rhs}")]
    PolynomialityViolated { j: u32, lhs: i64, rhs: i64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("vector field vanishes to order {order} < 2 at the origin")]
    OrderTooLow { order: u32 },
    #[error("adaptive step control failed near time {time} at {point:?}")]
    StepFailure { time: f64, point: Point },
    #[error("trajectory left the region at {point:?}")]
    RegionEscape { point: Point },
    #[error("Lipschitz estimate failed: {0}")]
    Estimation(Box<LipError>),
}

/// `P d/dx + Q d/dy` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyVF {
    pub p: Poly,
    pub q: Poly,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<FieldParams>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldParams {
    pub k: u32,
    pub p: u32,
}

impl PolyVF {
    pub fn new(p: Poly, q: Poly) -> Self {
        Self { p, q, params: None }
    }

    pub fn zero() -> Self {
        Self::new(Poly::zero(), Poly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self { p: self.p.scale(c), q: self.q.scale(c), params: self.params }
    }

    pub fn add(&self, o: &PolyVF) -> Self {
        Self::new(&self.p + &o.p, &self.q + &o.q)
    }

    pub fn sub(&self, o: &PolyVF) -> Self {
        Self::new(&self.p - &o.p, &self.q - &o.q)
    }

    /// Multiplies both components by the polynomial `m`.
    pub fn mul_poly(&self, m: &Poly) -> Self {
        Self::new(&self.p * m, &self.q * m)
    }

    /// Lowest total degree present in either component.
    pub fn vanishing_order(&self) -> Option<u32> {
        match (self.p.min_degree(), self.q.min_degree()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// The field acting as a derivation on a polynomial, truncated at `k` when given.
    pub fn apply(&self, g: &Poly, k: Option<u32>) -> Poly {
        &self.p.mul_trunc(&g.dx(), k) + &self.q.mul_trunc(&g.dy(), k)
    }

    pub fn to_float(&self) -> FloatVF {
        FloatVF { p: self.p.to_float(), q: self.q.to_float() }
    }
}

impl fmt::Display for PolyVF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) d/dx + ({}) d/dy", self.p, self.q)
    }
}

/// Floating evaluation handle of a [`PolyVF`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FloatVF {
    p: FloatPoly,
    q: FloatPoly,
}

impl FloatVF {
    pub fn eval(&self, z: Point) -> Point {
        Point::new(self.p.eval(z.x, z.y), self.q.eval(z.x, z.y))
    }
}

/// `[A, B] = (A . grad) B - (B . grad) A`.
pub fn lie_bracket(a: &PolyVF, b: &PolyVF) -> PolyVF {
    PolyVF::new(&a.apply(&b.p, None) - &b.apply(&a.p, None), &a.apply(&b.q, None) - &b.apply(&a.q, None))
}

/// `A(g) = P dg/dx + Q dg/dy`.
pub fn directional_derivative(a: &PolyVF, g: &RationalFn) -> RationalFn {
    g.derivation(&a.p, &a.q)
}

/// Truncation of `a` at degree `k` as a jet field; `a` must vanish to order 2.
pub fn jet_of_vf(a: &PolyVF, k: u32) -> Result<crate::jets::JetVF, FlowError> {
    crate::jets::JetVF::from_field(a, k).map_err(|e| match e {
        crate::jets::JetError::OrderTooLow { order } => FlowError::OrderTooLow { order },
        other => FlowError::InvalidParameters(other.to_string()),
    })
}

/// The example family for parameters `(k, p, l)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExampleFields {
    pub k: u32,
    pub p: u32,
    pub l: u32,
    pub x1: PolyVF,
    pub y1: PolyVF,
    /// `1 / (x^2 + y^2)^k`.
    #[serde(skip)]
    pub alpha: RationalFn,
    /// `y / (x (x^2 + y^2)^p)`.
    #[serde(skip)]
    pub beta: RationalFn,
    /// `alpha^j X1` for `j = 0..l`.
    pub alpha_x: Vec<PolyVF>,
}

impl ExampleFields {
    /// Basis `X1, alpha X1, ..., alpha^(l-1) X1, Y1` of the nilpotent Lie algebra.
    pub fn basis(&self) -> Vec<PolyVF> {
        let mut b = self.alpha_x.clone();
        b.push(self.y1.clone());
        b
    }
}

pub fn x1_field(k: u32, p: u32) -> PolyVF {
    let r2 = Poly::radius_sq();
    let m = &Poly::monomial(2, 0, BigRational::one()) * &r2.pow(p - 1);
    let mut f = PolyVF::new(&m * &(-&Poly::y()), &m * &Poly::x());
    f.params = Some(FieldParams { k, p });
    f
}

pub fn y1_field(k: u32, p: u32) -> PolyVF {
    let r2 = Poly::radius_sq();
    let c = rat(-1, 2 * k as i64);
    let pre = r2.pow(k - 1).scale(&c);
    let one_minus = rat(1 - 2 * p as i64, 1);
    let one_plus = rat(1 + 2 * p as i64, 1);
    let u = Poly::from_terms([((3, 0), BigRational::one()), ((1, 2), one_minus)]);
    let v = Poly::from_terms([((2, 1), one_plus), ((0, 3), BigRational::one())]);
    let mut f = PolyVF::new(&pre * &u, &pre * &v);
    f.params = Some(FieldParams { k, p });
    f
}

pub fn alpha_fn(k: u32) -> RationalFn {
    RationalFn::new(Poly::one(), vec![(Poly::radius_sq(), k)]).expect("nonzero denominator")
}

pub fn beta_fn(p: u32) -> RationalFn {
    RationalFn::new(Poly::y(), vec![(Poly::x(), 1), (Poly::radius_sq(), p)]).expect("nonzero denominator")
}

/// `alpha^j X1`, exact when `p - 1 >= k j`.
pub fn alpha_power_x1(k: u32, p: u32, j: u32) -> Result<PolyVF, FlowError> {
    if (p as i64 - 1) < (k * j) as i64 {
        return Err(FlowError::PolynomialityViolated { j, lhs: p as i64 - 1, rhs: (k * j) as i64 });
    }
    let x1 = x1_field(k, p);
    let d = Poly::radius_sq().pow(k * j);
    let div = |c: &Poly| c.div_exact(&d).expect("divisible under the degree condition");
    let mut f = PolyVF::new(div(&x1.p), div(&x1.q));
    f.params = x1.params;
    Ok(f)
}

pub fn make_example_fields(k: u32, p: u32, l: u32) -> Result<ExampleFields, FlowError> {
    if k == 0 || p == 0 || l == 0 {
        return Err(FlowError::InvalidParameters(format!("need k, p, l >= 1, got k={k} p={p} l={l}")));
    }
    if (p as i64 - 1) < (k * (l - 1)) as i64 {
        return Err(FlowError::PolynomialityViolated { j: l - 1, lhs: p as i64 - 1, rhs: (k * (l - 1)) as i64 });
    }
    let alpha_x = (0..l).map(|j| alpha_power_x1(k, p, j)).collect::<Result<_, _>>()?;
    Ok(ExampleFields { k, p, l, x1: x1_field(k, p), y1: y1_field(k, p), alpha: alpha_fn(k), beta: beta_fn(p), alpha_x })
}

/// The four defining identities and the vanishing bracket, as `(name, holds)`.
pub fn symbolic_identities(k: u32, p: u32) -> Vec<(&'static str, bool)> {
    let x1 = x1_field(k, p);
    let y1 = y1_field(k, p);
    let a = alpha_fn(k);
    let b = beta_fn(p);
    let zero = BigRational::zero();
    let one = BigRational::one();
    vec![
        ("X1(alpha) = 0", directional_derivative(&x1, &a).is_identically(&zero)),
        ("Y1(alpha) = 1", directional_derivative(&y1, &a).is_identically(&one)),
        ("X1(beta) = 1", directional_derivative(&x1, &b).is_identically(&one)),
        ("Y1(beta) = 0", directional_derivative(&y1, &b).is_identically(&zero)),
        ("[X1, Y1] = 0", lie_bracket(&x1, &y1).is_zero()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &[((u32, u32), i64, i64)]) -> Poly {
        Poly::from_terms(s.iter().map(|&(e, n, d)| (e, rat(n, d))))
    }

    #[test]
    fn fields_for_k1_p1() {
        let x1 = x1_field(1, 1);
        assert_eq!(x1.p, p(&[((2, 1), -1, 1)]));
        assert_eq!(x1.q, p(&[((3, 0), 1, 1)]));
        let y1 = y1_field(1, 1);
        assert_eq!(y1.p, p(&[((3, 0), -1, 2), ((1, 2), 1, 2)]));
        assert_eq!(y1.q, p(&[((2, 1), -3, 2), ((0, 3), -1, 2)]));
    }

    #[test]
    fn alpha_x1_division() {
        let f = alpha_power_x1(1, 2, 1).unwrap();
        assert_eq!(f.p, x1_field(1, 1).p);
        assert_eq!(f.q, x1_field(1, 1).q);
        assert!(matches!(make_example_fields(1, 1, 3), Err(FlowError::PolynomialityViolated { lhs: 0, rhs: 2, .. })));
    }

    #[test]
    fn identities_hold() {
        for (k, pp) in [(1, 1), (1, 2), (2, 3)] {
            for (name, ok) in symbolic_identities(k, pp) {
                assert!(ok, "{name} fails for k={k} p={pp}");
            }
        }
    }

    #[test]
    fn wrong_sign_breaks_identity() {
        // Negating Y1 must break Y1(alpha) = 1, guarding against a vacuous check.
        let y1 = y1_field(1, 2).scale(&rat(-1, 1));
        assert!(!directional_derivative(&y1, &alpha_fn(1)).is_identically(&BigRational::one()));
    }

    #[test]
    fn bracket_structure() {
        let ex = make_example_fields(1, 3, 3).unwrap();
        assert!(lie_bracket(&ex.x1, &ex.x1).is_zero());
        for a in &ex.alpha_x {
            for b in &ex.alpha_x {
                assert!(lie_bracket(a, b).is_zero());
            }
        }
        // [Y, alpha^j X] = j alpha^(j-1) X since Y(alpha) = 1 and [Y, X] = 0.
        for j in 1..3usize {
            let br = lie_bracket(&ex.y1, &ex.alpha_x[j]);
            let want = ex.alpha_x[j - 1].scale(&rat(j as i64, 1));
            assert_eq!((br.p, br.q), (want.p, want.q));
        }
    }

    #[test]
    fn serde_roundtrip() {
        let f = y1_field(1, 2);
        let s = serde_json::to_string(&f).unwrap();
        let back: PolyVF = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
