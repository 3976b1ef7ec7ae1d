//! Lower unitriangular integer matrices `N_n`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::{GroupError, GroupModel, Result};

/// An `n x n` lower triangular integer matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniTriMatrix {
    n: usize,
    /// Row-major entries.
    a: Vec<BigInt>,
}

impl UniTriMatrix {
    pub fn identity(n: usize) -> Self {
        let mut a = vec![BigInt::zero(); n * n];
        for i in 0..n {
            a[i * n + i] = BigInt::one();
        }
        Self { n, a }
    }

    /// Builds a matrix from rows; fails unless lower unitriangular.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::identity(n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(GroupError::Model("matrix is not square".into()));
            }
            for (j, &v) in r.iter().enumerate() {
                let ok = (i == j && v == 1) || (j > i && v == 0) || j < i;
                if !ok {
                    return Err(GroupError::Model(format!("entry ({i}, {j}) = {v} breaks unitriangularity")));
                }
                m.a[i * n + j] = BigInt::from(v);
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at 1-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> &BigInt {
        &self.a[(row - 1) * self.n + (col - 1)]
    }

    pub fn set(&mut self, row: usize, col: usize, v: BigInt) {
        self.a[(row - 1) * self.n + (col - 1)] = v;
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut a = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = BigInt::zero();
                for k in j..=i {
                    let l = &self.a[i * n + k];
                    let r = &o.a[k * n + j];
                    if !l.is_zero() && !r.is_zero() {
                        s += l * r;
                    }
                }
                a[i * n + j] = s;
            }
        }
        Self { n, a }
    }

    /// Inverse by forward substitution on `M X = I`.
    pub fn inv(&self) -> Self {
        let n = self.n;
        let mut x = Self::identity(n);
        for j in 0..n {
            for i in (j + 1)..n {
                let mut s = BigInt::zero();
                for k in j..i {
                    s += &self.a[i * n + k] * &x.a[k * n + j];
                }
                x.a[i * n + j] = -s;
            }
        }
        x
    }

    /// Number of leading subdiagonals that are entirely zero.
    pub fn zero_subdiagonals(&self) -> usize {
        let n = self.n;
        (1..n).take_while(|&d| (d..n).all(|i| self.a[i * n + i - d].is_zero())).count()
    }
}

/// Serialised as rows of decimal integer strings.
impl Serialize for UniTriMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> =
            (0..self.n).map(|i| (0..self.n).map(|j| self.a[i * self.n + j].to_string()).collect()).collect();
        rows.serialize(s)
    }
}

impl fmt::Display for UniTriMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n)
            .map(|i| {
                let r: Vec<String> = (0..self.n).map(|j| self.a[i * self.n + j].to_string()).collect();
                format!("[{}]", r.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// The group `N_n` with generators `eta_i = I + E_(i+1, i)`.
#[derive(Clone, Copy, Debug)]
pub struct UniTriModel {
    pub n: usize,
}

impl UniTriModel {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "N_n needs n >= 2");
        Self { n }
    }

    /// `eta_i` for `1 <= i <= n - 1`.
    pub fn eta(&self, i: usize) -> UniTriMatrix {
        assert!((1..self.n).contains(&i), "eta index out of range");
        let mut m = UniTriMatrix::identity(self.n);
        m.set(i + 1, i, BigInt::one());
        m
    }

    pub fn etas(&self) -> Vec<UniTriMatrix> {
        (1..self.n).map(|i| self.eta(i)).collect()
    }

    /// `I + E_(r, c)` for `r > c`.
    pub fn elementary(&self, r: usize, c: usize) -> UniTriMatrix {
        let mut m = UniTriMatrix::identity(self.n);
        m.set(r, c, BigInt::one());
        m
    }
}

impl GroupModel for UniTriModel {
    type Elem = UniTriMatrix;

    fn identity(&self) -> UniTriMatrix {
        UniTriMatrix::identity(self.n)
    }

    fn mul(&self, a: &UniTriMatrix, b: &UniTriMatrix) -> Result<UniTriMatrix> {
        Ok(a.mul(b))
    }

    fn inv(&self, a: &UniTriMatrix) -> Result<UniTriMatrix> {
        Ok(a.inv())
    }

    fn is_identity(&self, a: &UniTriMatrix) -> Result<bool> {
        Ok(a.is_identity())
    }

    fn exact(&self) -> bool {
        true
    }
}
