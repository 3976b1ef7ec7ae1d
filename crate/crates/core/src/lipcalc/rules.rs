//! Propagation rules for `Lip(f - Id)` and the class constants `eps_sigma`.
//!
//! Every rule exists twice: over `f64` for evaluating expression trees and
//! over exact rationals for reproducing the constants without rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{LipError, Result};
use crate::poly::{rat, rational_str};

/// Bound for `f o g` from bounds `a`, `b` of its factors.
pub fn compose_bound(a: f64, b: f64) -> f64 {
    a + b + a * b
}

pub fn inverse_bound(a: f64) -> Result<f64> {
    if a >= 1.0 {
        return Err(LipError::BoundDiverges { bound: a });
    }
    Ok(a / (1.0 - a))
}

/// Bound for `[f, g]`. The closed form `2(ab + a + b) / ((1 - a)(1 - b))`
/// is always valid for `a, b < 1`; below `1/9` the simpler `6 max(a, b)`
/// also holds and the smaller of the two is returned.
pub fn commutator_bound(a: f64, b: f64) -> Result<f64> {
    for v in [a, b] {
        if v >= 1.0 {
            return Err(LipError::BoundDiverges { bound: v });
        }
    }
    let tight = 2.0 * (a * b + a + b) / ((1.0 - a) * (1.0 - b));
    if a <= 1.0 / 9.0 && b <= 1.0 / 9.0 {
        Ok(tight.min(6.0 * a.max(b)))
    } else {
        Ok(tight)
    }
}

pub fn compose_bound_exact(a: &BigRational, b: &BigRational) -> BigRational {
    a + b + a * b
}

pub fn inverse_bound_exact(a: &BigRational) -> Option<BigRational> {
    let one = BigRational::one();
    (a < &one).then(|| a / (one - a))
}

pub fn commutator_bound_exact(a: &BigRational, b: &BigRational) -> Option<BigRational> {
    let one = BigRational::one();
    if a >= &one || b >= &one {
        return None;
    }
    let two = rat(2, 1);
    let tight = two * (a * b + a + b) / ((&one - a) * (&one - b));
    let ninth = rat(1, 9);
    if a <= &ninth && b <= &ninth {
        let six_max = rat(6, 1) * a.max(b);
        Some(tight.min(six_max))
    } else {
        Some(tight)
    }
}

/// `(eps_sigma, delta_sigma)` with `eps_0 = 1/8`,
/// `eps_sigma = 1 / (9 * 6^((sigma - 1) sigma / 2))` for `sigma >= 1`, and
/// `delta_sigma = eps_(sigma + 1)`.
pub fn epsilon_sigma(sigma: u32) -> (BigRational, BigRational) {
    (eps_only(sigma), eps_only(sigma + 1))
}

fn eps_only(sigma: u32) -> BigRational {
    if sigma == 0 {
        return rat(1, 8);
    }
    let exp = (sigma as u64 - 1) * sigma as u64 / 2;
    let den = BigInt::from(9) * num_traits::pow(BigInt::from(6), exp as usize);
    BigRational::new(BigInt::one(), den)
}

/// One row of the class-constant table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LipClassTable {
    pub sigma: u32,
    #[serde(with = "rational_str")]
    pub eps_sigma: BigRational,
    #[serde(with = "rational_str")]
    pub delta_sigma: BigRational,
}

impl LipClassTable {
    pub fn row(sigma: u32) -> Self {
        let (eps_sigma, delta_sigma) = epsilon_sigma(sigma);
        Self { sigma, eps_sigma, delta_sigma }
    }

    pub fn rows(max_sigma: u32) -> Vec<Self> {
        (0..=max_sigma).map(Self::row).collect()
    }

    /// Whether a map with bound `eps` lies in `V_sigma`.
    pub fn admits(&self, eps: f64) -> bool {
        let e = crate::poly::rational_to_f64(&self.eps_sigma);
        eps >= 0.0 && eps <= e
    }
}

/// Largest `sigma <= max_sigma` with `eps` in `V_sigma`.
pub fn deepest_class(eps: f64, max_sigma: u32) -> Option<u32> {
    (0..=max_sigma).rev().find(|&s| LipClassTable::row(s).admits(eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::format_rational;

    #[test]
    fn epsilon_table() {
        let want = ["1/8", "1/9", "1/54", "1/1944", "1/419904"];
        for (s, w) in want.iter().enumerate() {
            assert_eq!(format_rational(&epsilon_sigma(s as u32).0), *w);
        }
        // 9 * 6^10 computed independently by repeated multiplication.
        let mut d: u64 = 9;
        for _ in 0..10 {
            d *= 6;
        }
        assert_eq!(epsilon_sigma(5).0, BigRational::new(1.into(), d.into()));
        assert_eq!(epsilon_sigma(2).1, epsilon_sigma(3).0);
    }

    #[test]
    fn epsilon_strictly_decreasing() {
        for s in 0..12 {
            assert!(epsilon_sigma(s).0 > epsilon_sigma(s + 1).0);
        }
    }

    #[test]
    fn exact_rule_examples() {
        assert_eq!(compose_bound_exact(&rat(0, 1), &rat(0, 1)), rat(0, 1));
        assert_eq!(inverse_bound_exact(&rat(1, 9)), Some(rat(1, 8)));
        assert_eq!(inverse_bound_exact(&rat(1, 1)), None);
        // 2(1/81 + 2/9) / (64/81) = 2 * 19/81 * 81/64
        assert_eq!(commutator_bound_exact(&rat(1, 9), &rat(1, 9)), Some(rat(19, 32)));
    }

    #[test]
    fn float_rules_match_exact() {
        assert!((commutator_bound(1.0 / 9.0, 1.0 / 9.0).unwrap() - 19.0 / 32.0).abs() < 1e-15);
        assert!((inverse_bound(1.0 / 9.0).unwrap() - 0.125).abs() < 1e-15);
        assert!(commutator_bound(1.0, 0.0).is_err());
        assert!(inverse_bound(1.0).is_err());
    }

    #[test]
    fn iterated_commutators_descend_classes() {
        // Nested commutators of up to sigma + 1 maps from V_(sigma+1) stay in V_sigma.
        for s in 1..7u32 {
            let e_next = epsilon_sigma(s + 1).0;
            let mut b = e_next.clone();
            for depth in 1..=s {
                b = commutator_bound_exact(&e_next, &b).unwrap();
                assert!(b <= epsilon_sigma(s).0, "sigma {s} depth {depth}");
            }
        }
    }

    #[test]
    fn membership() {
        assert!(LipClassTable::row(0).admits(0.125));
        assert!(!LipClassTable::row(1).admits(0.125));
        assert_eq!(deepest_class(0.11, 5), Some(1));
        assert_eq!(deepest_class(0.2, 5), None);
    }

    #[test]
    fn table_serializes_rationals() {
        let s = serde_json::to_string(&LipClassTable::row(2)).unwrap();
        assert_eq!(s, r#"{"sigma":2,"eps_sigma":"1/54","delta_sigma":"1/1944"}"#);
    }
}
