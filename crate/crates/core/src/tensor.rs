//! Multi-factor tensor coordinates and the canonical factor permutation.
//!
//! All re-orderings of tensor legs in the crate (the flip used for tensor
//! products of random quantum maps, moving parameter legs around) go through
//! [`permute_factors`].

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::maps::{LinearMap, MapKind};
use crate::linalg::{CMatrix, ONE};

/// Coordinate bookkeeping for `X₁ ⊗ ⋯ ⊗ X_k`.
#[derive(Clone, Debug)]
pub struct TensorLayout {
    factors: Vec<Algebra>,
    // prefixes[i] = X₁ ⊗ ⋯ ⊗ X_{i+1}
    prefixes: Vec<Algebra>,
}

impl TensorLayout {
    pub fn new(factors: &[Algebra]) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::InvalidSpec("tensor product of no factors".into()))?;
        let mut prefixes = vec![first.clone()];
        for f in &factors[1..] {
            let next = prefixes.last().expect("nonempty").tensor(f);
            prefixes.push(next);
        }
        Ok(Self {
            factors: factors.to_vec(),
            prefixes,
        })
    }

    pub fn factors(&self) -> &[Algebra] {
        &self.factors
    }

    pub fn product(&self) -> &Algebra {
        self.prefixes.last().expect("nonempty")
    }

    /// Coordinate of `e_{c₁} ⊗ ⋯ ⊗ e_{c_k}`.
    pub fn join(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.factors.len());
        let mut c = coords[0];
        for (i, &x) in coords.iter().enumerate().skip(1) {
            c = self.prefixes[i - 1].tensor_coord(&self.factors[i], c, x);
        }
        c
    }

    /// Inverse of [`TensorLayout::join`].
    pub fn split(&self, coord: usize) -> Vec<usize> {
        let k = self.factors.len();
        let mut out = vec![0; k];
        let mut c = coord;
        for i in (1..k).rev() {
            let (head, tail) = self.prefixes[i - 1].split_tensor_coord(&self.factors[i], c);
            out[i] = tail;
            c = head;
        }
        out[0] = c;
        out
    }
}

/// The *-isomorphism `X₁⊗⋯⊗X_k → X_{σ(1)}⊗⋯⊗X_{σ(k)}` with
/// `e_{c₁}⊗⋯⊗e_{c_k} ↦ e_{c_{σ(1)}}⊗⋯⊗e_{c_{σ(k)}}`, where `order = σ`.
pub fn permute_factors(factors: &[Algebra], order: &[usize]) -> Result<LinearMap> {
    let k = factors.len();
    let mut seen = vec![false; k];
    if order.len() != k || order.iter().any(|&i| i >= k || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::InvalidSpec(format!("{order:?} is not a permutation of {k} factors")));
    }
    let src = TensorLayout::new(factors)?;
    let permuted: Vec<Algebra> = order.iter().map(|&i| factors[i].clone()).collect();
    let dst = TensorLayout::new(&permuted)?;
    let dim = src.product().dim();
    let mut matrix = CMatrix::zeros(dim, dim);
    let mut moved = vec![0; k];
    for col in 0..dim {
        let parts = src.split(col);
        for (t, &i) in order.iter().enumerate() {
            moved[t] = parts[i];
        }
        matrix[(dst.join(&moved), col)] = ONE;
    }
    Ok(LinearMap::from_matrix(src.product(), dst.product(), matrix)?.assume_kind(MapKind::Morphism))
}
