//! Quantum families of maps and random quantum maps.
//!
//! A [`Qfm`] from `B` to `A` with parameter algebra `C` is a unital
//! *-morphism `φ: B → A ⊗ C`. Equipping it with a state `ν` on `C` gives an
//! [`Rqm`], which induces the unital CP map `b ↦ (id ⊗ ν)φ(b)` and, dually,
//! the transition `ρ ↦ (ρ ⊗ ν)φ`.

use crate::algebra::{Algebra, Element, State, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, ONE};
use crate::maps::{self, coord_table, LinearMap, MapKind, Transition};

/// A quantum family of maps `φ: B → A ⊗ C`.
#[derive(Clone, Debug, PartialEq)]
pub struct Qfm {
    target: Algebra,
    parameter: Algebra,
    phi: LinearMap,
}

impl Qfm {
    /// Checks that `phi` lands in `target ⊗ parameter` and is a morphism
    /// (validating it if it is not tagged as one yet).
    pub fn new(target: &Algebra, parameter: &Algebra, phi: LinearMap, tol: f64) -> Result<Self> {
        let expected = target.tensor(parameter);
        if phi.codomain() != &expected {
            return Err(Error::Dimension(format!(
                "family codomain {:?} differs from {:?} ⊗ {:?} = {:?}",
                phi.codomain(),
                target,
                parameter,
                expected
            )));
        }
        let phi = if phi.kind() == MapKind::Morphism {
            phi
        } else {
            phi.validate_morphism(tol)?
        };
        Ok(Self {
            target: target.clone(),
            parameter: parameter.clone(),
            phi,
        })
    }

    /// `(ℂ, id)`: the family containing only the identity of `algebra`.
    pub fn trivial(algebra: &Algebra) -> Self {
        Self {
            target: algebra.clone(),
            parameter: Algebra::scalars(),
            phi: LinearMap::identity(algebra),
        }
    }

    /// `B`.
    pub fn source(&self) -> &Algebra {
        self.phi.domain()
    }

    /// `A`.
    pub fn target(&self) -> &Algebra {
        &self.target
    }

    /// `C`.
    pub fn parameter(&self) -> &Algebra {
        &self.parameter
    }

    pub fn phi(&self) -> &LinearMap {
        &self.phi
    }

    /// `self ◇ inner: a₃ ↦ (φ₁ ⊗ id)φ₂(a₃)`, from `inner.source()` to
    /// `self.target()` with parameter algebra `C₁ ⊗ C₂`.
    ///
    /// The result naturally lands in `(A₁⊗C₁)⊗C₂`; under the crate's tensor
    /// convention that algebra is coordinate-identical to `A₁⊗(C₁⊗C₂)`.
    pub fn diamond(&self, inner: &Qfm) -> Result<Qfm> {
        if inner.target() != self.source() {
            return Err(Error::Dimension(format!(
                "diamond: inner family targets {:?} but outer family starts at {:?}",
                inner.target(),
                self.source()
            )));
        }
        let lifted = self.phi.tensor(&LinearMap::identity(inner.parameter()));
        let phi = lifted.compose(&inner.phi)?;
        Ok(Qfm {
            target: self.target.clone(),
            parameter: self.parameter.tensor(inner.parameter()),
            phi,
        })
    }
}

/// A random quantum map `(C, φ, ν)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rqm {
    qfm: Qfm,
    nu: State,
}

impl Rqm {
    pub fn new(qfm: Qfm, nu: State) -> Result<Self> {
        if nu.algebra() != qfm.parameter() {
            return Err(Error::Dimension(format!(
                "parameter state lives on {:?}, family parameter algebra is {:?}",
                nu.algebra(),
                qfm.parameter()
            )));
        }
        Ok(Self { qfm, nu })
    }

    pub fn from_parts(target: &Algebra, parameter: &Algebra, phi: LinearMap, nu: State) -> Result<Self> {
        Self::new(Qfm::new(target, parameter, phi, DEFAULT_TOL)?, nu)
    }

    /// `(ℂ, id, 1)` on `algebra`.
    pub fn trivial(algebra: &Algebra) -> Self {
        Self {
            qfm: Qfm::trivial(algebra),
            nu: State::scalar_unit(),
        }
    }

    pub fn qfm(&self) -> &Qfm {
        &self.qfm
    }

    pub fn source(&self) -> &Algebra {
        self.qfm.source()
    }

    pub fn target(&self) -> &Algebra {
        self.qfm.target()
    }

    pub fn parameter(&self) -> &Algebra {
        self.qfm.parameter()
    }

    pub fn phi(&self) -> &LinearMap {
        self.qfm.phi()
    }

    pub fn nu(&self) -> &State {
        &self.nu
    }

    /// True when the map goes from an algebra to itself.
    pub fn is_endomorphic(&self) -> bool {
        self.source() == self.target()
    }

    /// `b ↦ (id ⊗ ν)φ(b)`.
    pub fn induced_nfmo(&self) -> Result<LinearMap> {
        slice_map(self.target(), &self.nu).compose(self.phi())
    }

    /// The adjoint of [`Rqm::induced_nfmo`].
    pub fn induced_transition(&self) -> Result<Transition> {
        maps::adjoint_transition(&self.induced_nfmo()?)
    }

    /// `(ρ ⊗ ν)φ`, computed by pulling the product functional back along `φ`
    /// without forming the induced map.
    pub fn transition_apply(&self, rho: &State) -> Result<State> {
        if rho.algebra() != self.target() {
            return Err(Error::Dimension(format!(
                "state on {:?} given to a transition on states of {:?}",
                rho.algebra(),
                self.target()
            )));
        }
        let product = rho.tensor(&self.nu);
        let w: CVector = product.functional();
        let pulled: CVector = self.phi().matrix().transpose() * w;
        let dens = maps::densities_of_functional(self.source(), &pulled);
        Ok(State::new_unchecked(self.source(), dens))
    }
}

/// The slice map `id ⊗ ν: A ⊗ C → A`, `a ⊗ c ↦ ν(c)·a`.
pub fn slice_map(left: &Algebra, nu: &State) -> LinearMap {
    let right = nu.algebra();
    let table = coord_table(left, right);
    let w = nu.functional();
    let mut m = CMatrix::zeros(left.dim(), left.dim() * right.dim());
    for a in 0..left.dim() {
        for c in 0..right.dim() {
            m[(a, table[a * right.dim() + c])] = w[c];
        }
    }
    LinearMap::from_matrix(&left.tensor(right), left, m)
        .expect("shape by construction")
        .assume_kind(MapKind::CpUnital)
}

/// `c ↦ c ⊗ 1_D`.
pub fn amplify_right(c: &Algebra, d: &Algebra) -> LinearMap {
    LinearMap::from_fn(c, &c.tensor(d), |e| Ok(e.tensor(&d.unit())))
        .expect("shape by construction")
        .assume_kind(MapKind::Morphism)
}

/// `d ↦ 1_C ⊗ d`.
pub fn amplify_left(c: &Algebra, d: &Algebra) -> LinearMap {
    LinearMap::from_fn(d, &c.tensor(d), |e| Ok(c.unit().tensor(e)))
        .expect("shape by construction")
        .assume_kind(MapKind::Morphism)
}

/// The non-unital inclusions `A → A ⊕ B`, `a ↦ (a, 0)` and `B → A ⊕ B`, `b ↦ (0, b)`.
pub fn summand_embeddings(a: &Algebra, b: &Algebra) -> (LinearMap, LinearMap) {
    let sum = a.direct_sum(b);
    let mut left = CMatrix::zeros(sum.dim(), a.dim());
    for i in 0..a.dim() {
        left[(i, i)] = ONE;
    }
    let mut right = CMatrix::zeros(sum.dim(), b.dim());
    for i in 0..b.dim() {
        right[(a.dim() + i, i)] = ONE;
    }
    (
        LinearMap::from_matrix(a, &sum, left).expect("shape"),
        LinearMap::from_matrix(b, &sum, right).expect("shape"),
    )
}

/// Value of `(id ⊗ ν)` on a single element, for callers that do not need the map.
pub fn slice(x: &Element, left: &Algebra, nu: &State) -> Result<Element> {
    slice_map(left, nu).apply(x)
}
