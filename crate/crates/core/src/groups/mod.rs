//! Finitely generated groups: iterated commutator sets `S_(j)`, central series
//! orderings and nilpotency class detection through an identity oracle.
//!
//! When a group is nilpotent, `G_(j)` is generated by `S_(j), S_(j+1), ...`,
//! so `G_(j)` is trivial exactly when every element of `S_(j)` is. The class
//! is therefore the index of the first layer whose elements all evaluate to
//! the identity.

mod expr;
mod maps;
mod unitri;

pub use expr::{free_reduce, CommutatorExpr};
pub use maps::MapModel;
pub use unitri::{UniTriMatrix, UniTriModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("commutator layer {layer} would hold {size} expressions, above the cap {cap}")]
    SizeCap { layer: usize, size: usize, cap: usize },
    #[error("generator g{index} is not defined ({available} available)")]
    UnknownGenerator { index: usize, available: usize },
    #[error("duplicate generator label `{0}`")]
    DuplicateLabel(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("model error: {0}")]
    Model(String),
}

pub type Result<T, E = GroupError> = std::result::Result<T, E>;

pub const DEFAULT_SIZE_CAP: usize = 100_000;

/// A concrete group in which expressions are evaluated.
pub trait GroupModel: Sync {
    type Elem: Clone + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    fn is_identity(&self, a: &Self::Elem) -> Result<bool>;
    /// Whether `is_identity` decides exactly, as opposed to within a tolerance.
    fn exact(&self) -> bool;

    /// `a b a^-1 b^-1` given both elements and their inverses.
    fn commutator_with_inverses(
        &self,
        a: &Self::Elem,
        a_inv: &Self::Elem,
        b: &Self::Elem,
        b_inv: &Self::Elem,
    ) -> Result<Self::Elem> {
        let ab = self.mul(a, b)?;
        let aba = self.mul(&ab, a_inv)?;
        self.mul(&aba, b_inv)
    }

    fn commutator(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        self.commutator_with_inverses(a, &self.inv(a)?, b, &self.inv(b)?)
    }
}

/// Labelled generators of a group.
#[derive(Clone, Debug)]
pub struct GeneratorSet<T> {
    labels: Vec<String>,
    elems: Vec<T>,
}

impl<T> GeneratorSet<T> {
    pub fn new(labels: Vec<String>, elems: Vec<T>) -> Result<Self> {
        assert_eq!(labels.len(), elems.len(), "one label per generator");
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(GroupError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels, elems })
    }

    /// Generators labelled `g1, g2, ...`.
    pub fn numbered(elems: Vec<T>) -> Self {
        let labels = (1..=elems.len()).map(|i| format!("g{i}")).collect();
        Self { labels, elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elems(&self) -> &[T] {
        &self.elems
    }
}

/// Evaluates `expr` with generator `g(i+1)` mapped to `gens[i]`.
pub fn evaluate<M: GroupModel>(model: &M, gens: &[M::Elem], expr: &CommutatorExpr) -> Result<M::Elem> {
    let inverses = gens.iter().map(|g| model.inv(g)).collect::<Result<Vec<_>>>()?;
    evaluate_word(model, gens, &inverses, &expr.letters())
}

fn evaluate_word<M: GroupModel>(model: &M, gens: &[M::Elem], inverses: &[M::Elem], word: &[i32]) -> Result<M::Elem> {
    let mut acc = model.identity();
    for &l in word {
        let idx = l.unsigned_abs() as usize - 1;
        let g = if l > 0 { gens.get(idx) } else { inverses.get(idx) }
            .ok_or(GroupError::UnknownGenerator { index: idx + 1, available: gens.len() })?;
        acc = model.mul(&acc, g)?;
    }
    Ok(acc)
}

/// `S_(0), ..., S_(depth)` for `n` generators, where
/// `S_(i+1) = { [a, b] : a in S_(0), b in S_(i) }` enumerated with `a` outermost.
pub fn commutator_sets(n: usize, depth: usize, cap: usize) -> Result<Vec<Vec<CommutatorExpr>>> {
    let base: Vec<CommutatorExpr> = (0..n).map(CommutatorExpr::gen).collect();
    let mut layers = vec![base.clone()];
    for layer in 1..=depth {
        let prev = layers.last().unwrap();
        let size = base.len() * prev.len();
        if size > cap {
            return Err(GroupError::SizeCap { layer, size, cap });
        }
        let next =
            base.iter().flat_map(|a| prev.iter().map(move |b| CommutatorExpr::comm(a.clone(), b.clone()))).collect();
        layers.push(next);
    }
    Ok(layers)
}

/// Generators ordered `S_(sigma-1), ..., S_(0)`, with each layer kept in
/// construction order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralSeries {
    pub sigma: usize,
    /// `(j, S_(j))` from the deepest layer to `S_(0)`.
    pub layers: Vec<(usize, Vec<CommutatorExpr>)>,
    pub order: String,
}

impl CentralSeries {
    pub fn ordered(&self) -> Vec<CommutatorExpr> {
        self.layers.iter().flat_map(|(_, l)| l.iter().cloned()).collect()
    }
}

pub fn central_series(n: usize, sigma: usize, cap: usize) -> Result<CentralSeries> {
    let sigma = sigma.max(1);
    let mut sets = commutator_sets(n, sigma - 1, cap)?;
    let mut layers = Vec::with_capacity(sigma);
    for j in (0..sigma).rev() {
        layers.push((j, std::mem::take(&mut sets[j])));
    }
    Ok(CentralSeries {
        sigma,
        layers,
        order: "deepest layer first; within a layer [a, b] ordered by a, then by b".into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "value")]
pub enum ClassResult {
    Class(usize),
    /// `S_(depth_cap)` still has a nontrivial element.
    Unknown,
}

impl ClassResult {
    pub fn class(self) -> Option<usize> {
        match self {
            ClassResult::Class(c) => Some(c),
            ClassResult::Unknown => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub result: ClassResult,
    /// Number of expressions in each examined layer `|S_(j)|`.
    pub layer_sizes: Vec<usize>,
    /// Number of nontrivial evaluated elements per examined layer.
    pub nontrivial: Vec<usize>,
    /// True when the identity oracle is tolerance based; a false "identity"
    /// can then understate the class.
    pub approximate: bool,
}

/// Smallest `c <= depth_cap` such that every element of `S_(c)` evaluates to
/// the identity, or `Unknown`.
///
/// Layers are evaluated incrementally from the previous layer's values, and
/// commutators with an identity element are skipped since they are trivial.
pub fn nilpotency_class<M: GroupModel>(
    model: &M,
    gens: &[M::Elem],
    depth_cap: usize,
    cap: usize,
) -> Result<ClassReport> {
    use rayon::prelude::*;

    let base: Vec<(M::Elem, M::Elem)> = gens.iter().map(|g| Ok((g.clone(), model.inv(g)?))).collect::<Result<_>>()?;
    let mut layer_sizes = vec![gens.len()];
    let mut nontrivial_counts = Vec::new();
    // Nontrivial elements of the current layer with their inverses.
    let mut current: Vec<(M::Elem, M::Elem)> = Vec::new();
    for (g, gi) in &base {
        if !model.is_identity(g)? {
            current.push((g.clone(), gi.clone()));
        }
    }
    let mut layer = 0;
    loop {
        nontrivial_counts.push(current.len());
        if current.is_empty() {
            return Ok(ClassReport {
                result: ClassResult::Class(layer),
                layer_sizes,
                nontrivial: nontrivial_counts,
                approximate: !model.exact(),
            });
        }
        if layer == depth_cap {
            return Ok(ClassReport {
                result: ClassResult::Unknown,
                layer_sizes,
                nontrivial: nontrivial_counts,
                approximate: !model.exact(),
            });
        }
        let size = gens.len() * layer_sizes[layer];
        if size > cap {
            return Err(GroupError::SizeCap { layer: layer + 1, size, cap });
        }
        layer_sizes.push(size);
        let pairs: Vec<(usize, usize)> =
            (0..base.len()).flat_map(|a| (0..current.len()).map(move |b| (a, b))).collect();
        let next: Vec<Option<(M::Elem, M::Elem)>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let (x, xi) = &base[a];
                let (y, yi) = &current[b];
                let c = model.commutator_with_inverses(x, xi, y, yi)?;
                if model.is_identity(&c)? {
                    return Ok(None);
                }
                // [x, y]^-1 = y x y^-1 x^-1
                let ci = model.commutator_with_inverses(y, yi, x, xi)?;
                Ok(Some((c, ci)))
            })
            .collect::<Result<_>>()?;
        current = next.into_iter().flatten().collect();
        layer += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_counts() {
        let s = commutator_sets(2, 2, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(s.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 4, 8]);
        assert_eq!(s[1][1].to_sexpr(), "(comm g1 g2)");
        assert!(matches!(commutator_sets(10, 5, 1000), Err(GroupError::SizeCap { layer: 3, .. })));
    }

    #[test]
    fn single_generator_layers_are_trivial() {
        let m = UniTriModel::new(3);
        let s = commutator_sets(1, 3, DEFAULT_SIZE_CAP).unwrap();
        let g = vec![m.eta(1)];
        for layer in &s[1..] {
            for e in layer {
                assert!(m.is_identity(&evaluate(&m, &g, e).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn central_series_layout() {
        let cs = central_series(3, 3, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(cs.layers.iter().map(|(j, l)| (*j, l.len())).collect::<Vec<_>>(), vec![(2, 27), (1, 9), (0, 3)]);
        let ab = central_series(2, 1, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(ab.ordered(), vec![CommutatorExpr::gen(0), CommutatorExpr::gen(1)]);
    }

    #[test]
    fn unitriangular_classes() {
        for n in 2..=5 {
            let m = UniTriModel::new(n);
            let gens: Vec<_> = (1..n).map(|i| m.eta(i)).collect();
            let r = nilpotency_class(&m, &gens, 8, DEFAULT_SIZE_CAP).unwrap();
            assert_eq!(r.result, ClassResult::Class(n - 1), "N_{n}");
            assert!(!r.approximate);
        }
        let m = UniTriModel::new(4);
        let r = nilpotency_class(&m, &[m.eta(1)], 5, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(r.result, ClassResult::Class(1));
        let gens: Vec<_> = (1..4).map(|i| m.eta(i)).collect();
        let r = nilpotency_class(&m, &gens, 2, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(r.result, ClassResult::Unknown);
        let r = nilpotency_class(&m, &[m.identity()], 2, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(r.result, ClassResult::Class(0));
    }
}
