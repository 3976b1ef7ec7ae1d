//! Baker-Campbell-Hausdorff products of jet fields.
//!
//! The pull-back operators satisfy `T_(phi o psi) = T_psi T_phi`, so
//! `log(exp Z o exp W)` is the classical series `BCH(W, Z)` for the Lie
//! bracket of vector fields. Equivalently it is `BCH(Z, W)` for the opposite
//! bracket `{A, B} = [B, A]`, which is the bracket used in the Dynkin sum below.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{jet_exp, jet_log, JetError, JetVF, Result};

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Coefficients of right-nested bracket words over `{0 = X, 1 = Y}` of length
/// at most `max_len` in Dynkin's series for `log(e^X e^Y)`.
///
/// A block sequence `X^r1 Y^s1 ... X^rn Y^sn` contributes
/// `(-1)^(n-1) / (n (r1 + s1 + ... + sn) r1! s1! ... rn! sn!)` to its word.
pub fn dynkin_coefficients(max_len: usize) -> BTreeMap<Vec<u8>, BigRational> {
    let mut table = BTreeMap::new();
    for m in 1..=max_len {
        let mut blocks = Vec::new();
        enumerate_blocks(m, &mut blocks, &mut |bs| {
            let n = bs.len();
            let mut denom = BigInt::from(n) * BigInt::from(m);
            let mut word = Vec::with_capacity(m);
            for &(r, s) in bs {
                denom *= factorial(r) * factorial(s);
                word.extend(std::iter::repeat_n(0u8, r));
                word.extend(std::iter::repeat_n(1u8, s));
            }
            let sign = if n % 2 == 1 { BigInt::one() } else { -BigInt::one() };
            let c = BigRational::new(sign, denom);
            *table.entry(word).or_insert_with(BigRational::zero) += c;
        });
    }
    table.retain(|w, c| !c.is_zero() && nested_nonvanishing(w));
    table
}

/// Right-nested brackets ending in a repeated letter vanish identically.
fn nested_nonvanishing(w: &[u8]) -> bool {
    w.len() < 2 || w[w.len() - 1] != w[w.len() - 2]
}

type Blocks = [(usize, usize)];

fn enumerate_blocks(remaining: usize, acc: &mut Vec<(usize, usize)>, visit: &mut dyn FnMut(&Blocks)) {
    if remaining == 0 {
        visit(acc);
        return;
    }
    for total in 1..=remaining {
        for r in 0..=total {
            acc.push((r, total - r));
            enumerate_blocks(remaining - total, acc, visit);
            acc.pop();
        }
    }
}

/// Truncated Dynkin sum for `log(exp Z o exp W)`.
///
/// A bracket of `m` fields of order at least two has order at least `m + 1`,
/// so words longer than `k - 1` vanish at truncation degree `k`.
pub fn bch_dynkin(z: &JetVF, w: &JetVF) -> Result<JetVF> {
    if z.k != w.k {
        return Err(JetError::DegreeMismatch(z.k, w.k));
    }
    let k = z.k;
    let max_len = (k as usize).saturating_sub(1).max(1);
    let letters = [z, w];
    let mut total = JetVF::zero(k);
    for (word, c) in dynkin_coefficients(max_len) {
        let mut acc = letters[*word.last().unwrap() as usize].clone();
        for &l in word[..word.len() - 1].iter().rev() {
            // {A, acc} = [acc, A]
            acc = acc.bracket(letters[l as usize])?;
            if acc.is_zero() {
                break;
            }
        }
        if !acc.is_zero() {
            total = total.add(&acc.scale(&c));
        }
    }
    Ok(total)
}

/// `log(exp Z o exp W)`. With `verify`, the Dynkin sum is evaluated as well
/// and any disagreement is reported as `DynkinMismatch`.
pub fn bch(z: &JetVF, w: &JetVF, verify: bool) -> Result<JetVF> {
    if z.k != w.k {
        return Err(JetError::DegreeMismatch(z.k, w.k));
    }
    for f in [z, w] {
        if let Some(o) = f.vanishing_order() {
            if o < 2 {
                return Err(JetError::OrderTooLow { order: o });
            }
        }
    }
    let out = jet_log(&jet_exp(z)?.compose(&jet_exp(w)?)?)?;
    if verify && bch_dynkin(z, w)? != out {
        return Err(JetError::DynkinMismatch);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::jet_vf_strategy;
    use super::*;
    use crate::poly::{rat, Poly};
    use proptest::prelude::*;

    #[test]
    fn low_order_coefficients() {
        let t = dynkin_coefficients(3);
        assert_eq!(t[&vec![0]], rat(1, 1));
        assert_eq!(t[&vec![1]], rat(1, 1));
        // 1/4 [X, Y] - 1/4 [Y, X] = 1/2 [X, Y]
        assert_eq!(t[&vec![0, 1]], rat(1, 4));
        assert_eq!(t[&vec![1, 0]], rat(-1, 4));
        // Words ending in a repeated letter are dropped.
        assert!(t.keys().all(|w| w.len() < 2 || w[w.len() - 1] != w[w.len() - 2]));
    }

    #[test]
    fn bch_examples() {
        let mono = |i, j| Poly::monomial(i, j, rat(1, 1));
        let z = JetVF { k: 5, p: Poly::zero(), q: mono(2, 0) };
        let w = JetVF { k: 5, p: mono(0, 2), q: Poly::zero() };
        let b = bch(&z, &w, true).unwrap();
        assert_ne!(b, z.add(&w));
        assert_eq!(bch(&z, &JetVF::zero(5), true).unwrap(), z);
        let w2 = z.scale(&rat(2, 1));
        assert_eq!(bch(&z, &w2, true).unwrap(), z.scale(&rat(3, 1)));
    }

    #[test]
    fn second_order_term_sign() {
        // log(exp Z o exp W) = Z + W + 1/2 [W, Z] + (brackets of order >= 4 at these degrees).
        let mono = |i, j| Poly::monomial(i, j, rat(1, 1));
        let z = JetVF { k: 3, p: Poly::zero(), q: mono(2, 0) };
        let w = JetVF { k: 3, p: mono(0, 2), q: Poly::zero() };
        let want = z.add(&w).add(&w.bracket(&z).unwrap().scale(&rat(1, 2)));
        assert_eq!(bch(&z, &w, false).unwrap(), want);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn dynkin_agrees(z in jet_vf_strategy(5), w in jet_vf_strategy(5)) {
            prop_assert_eq!(bch_dynkin(&z, &w).unwrap(), bch(&z, &w, false).unwrap());
        }
    }
}
