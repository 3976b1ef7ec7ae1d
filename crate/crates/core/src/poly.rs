//! Exact bivariate polynomials and rational functions over `BigRational`.
//!
//! Monomials are keyed by their exponent pair `(i, j)` for `x^i y^j`. The map
//! never stores zero coefficients, so structural equality is polynomial
//! equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Builds the exact rational `num/den`.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Renders a rational as `num/den`, or as a bare integer when `den == 1`.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"3"`, `"-1/2"` or a plain decimal such as `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let q = BigRational::new(n, d);
        return Some(if neg { -q } else { q });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: fall back to a scaled division.
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).ok_or_else(|| serde::de::Error::custom(format!("invalid rational `{raw}`")))
    }
}

/// Exponent pair of the monomial `x^i y^j`.
pub type Exp = (u32, u32);

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Exp, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term((i, j), c);
        p
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, BigRational::one())
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, BigRational::one())
    }

    /// `x^2 + y^2`.
    pub fn radius_sq() -> Self {
        &Self::monomial(2, 0, BigRational::one()) + &Self::monomial(0, 2, BigRational::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (Exp, BigRational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, e: Exp, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigRational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    /// Lowest total degree present; `None` for the zero polynomial.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).min()
    }

    /// Drops every monomial of total degree `> k`.
    pub fn truncate(&self, k: u32) -> Self {
        Self { terms: self.terms.iter().filter(|((i, j), _)| i + j <= k).map(|(e, c)| (*e, c.clone())).collect() }
    }

    /// Terms of exactly total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Self { terms: self.terms.iter().filter(|((i, j), _)| i + j == d).map(|(e, c)| (*e, c.clone())).collect() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect() }
    }

    /// Product with every monomial of degree `> k` discarded (`k = None` keeps all).
    pub fn mul_trunc(&self, other: &Poly, k: Option<u32>) -> Self {
        let mut out = Self::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &other.terms {
                let e = (i1 + i2, j1 + j2);
                if let Some(k) = k {
                    if e.0 + e.1 > k {
                        continue;
                    }
                }
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn dx(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((i, _), _)| *i > 0)
                .map(|((i, j), c)| ((i - 1, *j), c * BigRational::from_integer(BigInt::from(*i)))),
        )
    }

    pub fn dy(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((_, j), _)| *j > 0)
                .map(|((i, j), c)| ((*i, j - 1), c * BigRational::from_integer(BigInt::from(*j)))),
        )
    }

    /// Substitutes `x -> u`, `y -> v`, truncating at total degree `k` when given.
    ///
    /// Horner in `u` over coefficient polynomials in `v`, so the cost is about
    /// `2 * deg` truncated products instead of one product per monomial.
    pub fn compose_trunc(&self, u: &Poly, v: &Poly, k: Option<u32>) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let max_i = self.terms.keys().map(|e| e.0).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|e| e.1).max().unwrap_or(0);
        let mut v_pows = Vec::with_capacity(max_j as usize + 1);
        v_pows.push(Self::one());
        for j in 1..=max_j as usize {
            let next = v_pows[j - 1].mul_trunc(v, k);
            v_pows.push(next);
        }
        let mut acc = Self::zero();
        for i in (0..=max_i).rev() {
            acc = acc.mul_trunc(u, k);
            for ((ei, ej), c) in self.terms.range((i, 0)..=(i, u32::MAX)) {
                debug_assert_eq!(*ei, i);
                for (e, vc) in v_pows[*ej as usize].terms() {
                    acc.add_term(*e, vc * c);
                }
            }
        }
        acc
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    ///
    /// Division by a single polynomial in lex order: the leading term of a
    /// multiple of `d` is always divisible by the leading term of `d`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (&(di, dj), dc) = d.terms.iter().next_back()?;
        let mut rem = self.clone();
        let mut quo = Self::zero();
        while let Some((&(ri, rj), rc)) = rem.terms.iter().next_back() {
            if ri < di || rj < dj {
                return None;
            }
            let t = Poly::monomial(ri - di, rj - dj, rc / dc);
            rem = &rem - &(&t * d);
            quo = &quo + &t;
        }
        Some(quo)
    }

    pub fn eval(&self, x: &BigRational, y: &BigRational) -> BigRational {
        let mut s = BigRational::zero();
        for ((i, j), c) in &self.terms {
            s += c * num_traits::pow(x.clone(), *i as usize) * num_traits::pow(y.clone(), *j as usize);
        }
        s
    }

    pub fn to_float(&self) -> FloatPoly {
        FloatPoly { terms: self.terms.iter().map(|((i, j), c)| (*i, *j, rational_to_f64(c))).collect() }
    }

    /// Largest exponent of `x` dividing every term.
    pub fn x_valuation(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.0).min()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.mul_trunc(rhs, None)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Highest degree first, then by power of x.
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by_key(|&(i, j)| std::cmp::Reverse((i + j, i)));
        for (n, e) in keys.iter().enumerate() {
            let c = &self.terms[e];
            let neg = c.is_negative();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let a = c.abs();
            let mono = match *e {
                (0, 0) => String::new(),
                (i, 0) => pow_str("x", i),
                (0, j) => pow_str("y", j),
                (i, j) => format!("{}*{}", pow_str("x", i), pow_str("y", j)),
            };
            if mono.is_empty() {
                write!(f, "{}", format_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", format_rational(&a))?;
            }
        }
        Ok(())
    }
}

fn pow_str(v: &str, n: u32) -> String {
    if n == 1 {
        v.to_string()
    } else {
        format!("{v}^{n}")
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: [u32; 2],
    #[serde(with = "rational_str")]
    coef: BigRational,
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<TermRepr> =
            self.terms.iter().map(|((i, j), c)| TermRepr { exp: [*i, *j], coef: c.clone() }).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<TermRepr>::deserialize(d)?;
        Ok(Poly::from_terms(v.into_iter().map(|t| ((t.exp[0], t.exp[1]), t.coef))))
    }
}

/// Floating copy of a [`Poly`] for fast evaluation.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FloatPoly {
    terms: Vec<(u32, u32, f64)>,
}

impl FloatPoly {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|&(i, j, c)| c * x.powi(i as i32) * y.powi(j as i32)).sum()
    }
}

/// Quotient of polynomials whose denominator is kept as a product of named factors.
///
/// Keeping the factorisation is what makes simplification exact and cheap: a
/// factor is cancelled whenever it divides the numerator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn {
    pub num: Poly,
    /// `(factor, exponent)` pairs; the denominator is their product.
    pub den: Vec<(Poly, u32)>,
}

impl RationalFn {
    pub fn from_poly(p: Poly) -> Self {
        Self { num: p, den: Vec::new() }
    }

    /// `num / prod(f^e)`; zero factors are rejected.
    pub fn new(num: Poly, den: Vec<(Poly, u32)>) -> Option<Self> {
        if den.iter().any(|(f, _)| f.is_zero()) {
            return None;
        }
        let mut r = Self { num, den };
        r.reduce();
        Some(r)
    }

    pub fn denominator(&self) -> Poly {
        self.den.iter().fold(Poly::one(), |acc, (f, e)| &acc * &f.pow(*e))
    }

    /// Cancels denominator factors that divide the numerator.
    pub fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        for (f, e) in self.den.iter_mut() {
            while *e > 0 {
                match self.num.div_exact(f) {
                    Some(q) => {
                        self.num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        for (f, e) in &self.den {
            if *e > 0 && f.degree() == Some(0) {
                let c = f.coeff(0, 0);
                self.num = self.num.scale(&num_traits::pow(c.recip(), *e as usize));
            }
        }
        self.den.retain(|(f, e)| *e > 0 && f.degree() != Some(0));
    }

    /// Numerator of the partial derivative over the denominator with every
    /// exponent raised by one.
    fn partial_numerator(&self, wrt_x: bool) -> Poly {
        let d = |p: &Poly| if wrt_x { p.dx() } else { p.dy() };
        // d(n / prod f_i^e_i) = (n' prod f_i - n sum e_i f_i' prod_{j != i} f_j) / prod f_i^{e_i+1}
        let all: Poly = self.den.iter().fold(Poly::one(), |acc, (f, _)| &acc * f);
        let mut numer = &d(&self.num) * &all;
        for (i, (f, e)) in self.den.iter().enumerate() {
            let others =
                self.den.iter().enumerate().filter(|(j, _)| *j != i).fold(Poly::one(), |acc, (_, (g, _))| &acc * g);
            let term = (&(&self.num * &d(f)) * &others).scale(&BigRational::from_integer(BigInt::from(*e)));
            numer = &numer - &term;
        }
        numer
    }

    fn raised_denominator(&self) -> Vec<(Poly, u32)> {
        self.den.iter().map(|(f, e)| (f.clone(), e + 1)).collect()
    }

    pub fn partial(&self, wrt_x: bool) -> RationalFn {
        let mut r = RationalFn { num: self.partial_numerator(wrt_x), den: self.raised_denominator() };
        r.reduce();
        r
    }

    /// `p * d/dx + q * d/dy` applied to `self`, simplified.
    pub fn derivation(&self, p: &Poly, q: &Poly) -> RationalFn {
        let num = &(p * &self.partial_numerator(true)) + &(q * &self.partial_numerator(false));
        let mut r = RationalFn { num, den: self.raised_denominator() };
        r.reduce();
        r
    }

    /// True when the function equals the constant `c` off its singular locus.
    pub fn is_identically(&self, c: &BigRational) -> bool {
        (&self.num - &self.denominator().scale(c)).is_zero()
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let n = self.num.to_float().eval(x, y);
        let d: f64 = self.den.iter().map(|(f, e)| f.to_float().eval(x, y).powi(*e as i32)).product();
        n / d
    }

    /// Factors vanishing somewhere: the singular locus is their zero set.
    pub fn singular_factors(&self) -> Vec<String> {
        self.den.iter().map(|(f, _)| f.to_string()).collect()
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({}) / ", self.num)?;
        for (n, (g, e)) in self.den.iter().enumerate() {
            if n > 0 {
                write!(f, "*")?;
            }
            write!(f, "({g})^{e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[((u32, u32), i64, i64)]) -> Poly {
        Poly::from_terms(terms.iter().map(|&(e, n, d)| (e, rat(n, d))))
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("-1/2"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("-0.5"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("7"), Some(rat(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
        assert_eq!(format_rational(&rat(-4, 2)), "-2");
    }

    #[test]
    fn exact_division_by_radius() {
        // x^2 (x^2 + y^2) / (x^2 + y^2) = x^2
        let x2 = Poly::monomial(2, 0, rat(1, 1));
        let prod = &x2 * &Poly::radius_sq();
        assert_eq!(prod.div_exact(&Poly::radius_sq()), Some(x2.clone()));
        assert_eq!(x2.div_exact(&Poly::radius_sq()), None);
        assert_eq!(Poly::zero().div_exact(&Poly::x()), Some(Poly::zero()));
    }

    #[test]
    fn composition_matches_substitution() {
        // (x + y^2) o (x, y + x^2) = x + y^2 + 2 x^2 y + x^4
        let f = p(&[((1, 0), 1, 1), ((0, 2), 1, 1)]);
        let u = Poly::x();
        let v = p(&[((0, 1), 1, 1), ((2, 0), 1, 1)]);
        let full = f.compose_trunc(&u, &v, None);
        let want = p(&[((1, 0), 1, 1), ((0, 2), 1, 1), ((2, 1), 2, 1), ((4, 0), 1, 1)]);
        assert_eq!(full, want);
        assert_eq!(f.compose_trunc(&u, &v, Some(3)), want.truncate(3));
    }

    #[test]
    fn derivatives() {
        let f = p(&[((3, 2), 2, 1), ((0, 1), 5, 1)]);
        assert_eq!(f.dx(), p(&[((2, 2), 6, 1)]));
        assert_eq!(f.dy(), p(&[((3, 1), 4, 1), ((0, 0), 5, 1)]));
    }

    #[test]
    fn rational_fn_derivative_of_inverse_radius() {
        // d/dx (x^2+y^2)^-1 = -2x / (x^2+y^2)^2
        let a = RationalFn::new(Poly::one(), vec![(Poly::radius_sq(), 1)]).unwrap();
        let ax = a.partial(true);
        let want = RationalFn::new(p(&[((1, 0), -2, 1)]), vec![(Poly::radius_sq(), 2)]).unwrap();
        assert_eq!(ax, want);
        assert!((ax.eval_f64(1.0, 0.0) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn serde_roundtrip() {
        let f = p(&[((3, 2), -1, 3), ((0, 1), 5, 1)]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"[{"exp":[0,1],"coef":"5"},{"exp":[3,2],"coef":"-1/3"}]"#);
        let g: Poly = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn display() {
        let f = p(&[((3, 0), -1, 2), ((1, 2), 3, 2), ((0, 0), 1, 1)]);
        assert_eq!(f.to_string(), "-1/2*x^3 + 3/2*x*y^2 + 1");
    }
}
