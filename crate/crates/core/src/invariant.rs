//! Invariant states of a random quantum map on `A` and the skew product.
//!
//! The transition `ρ ↦ (ρ ⊗ ν)φ` is linearized in real coordinates with
//! respect to an orthonormal Hermitian basis of `⊕ M_{nᵢ}` (generalized
//! Gell-Mann matrices per block plus normalized block identities).

use nalgebra::DMatrix;

use crate::algebra::{Algebra, Element, State};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::maps::{densities_of_functional, LinearMap};
use crate::rqm::Rqm;

/// Singular values of `M − I` below this count toward the fixed subspace.
pub const FIXED_SPACE_TOL: f64 = 1e-8;
/// Bound on `‖T(σ) − σ‖₁` for the canonical invariant state.
pub const INVARIANT_TOL: f64 = 1e-9;
/// Iteration cap for the fallback Cesàro averaging.
pub const CESARO_CAP: usize = 100_000;

/// One element of the Hermitian basis: block index and matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianBasisElement {
    pub block: usize,
    pub matrix: CMatrix,
}

/// Orthonormal (Hilbert–Schmidt) Hermitian basis of `A`, block by block:
/// symmetric and antisymmetric off-diagonal matrices for `p < q`, the
/// traceless diagonal matrices, and finally `I/√n`.
pub fn hermitian_basis(a: &Algebra) -> Vec<HermitianBasisElement> {
    let mut out = Vec::with_capacity(a.dim());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (block, &n) in a.blocks().iter().enumerate() {
        for p in 0..n {
            for q in p + 1..n {
                let mut sym = CMatrix::zeros(n, n);
                sym[(p, q)] = c(s, 0.0);
                sym[(q, p)] = c(s, 0.0);
                out.push(HermitianBasisElement { block, matrix: sym });
                let mut anti = CMatrix::zeros(n, n);
                anti[(p, q)] = c(0.0, -s);
                anti[(q, p)] = c(0.0, s);
                out.push(HermitianBasisElement { block, matrix: anti });
            }
        }
        for l in 1..n {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut d = CMatrix::zeros(n, n);
            for k in 0..l {
                d[(k, k)] = c(norm, 0.0);
            }
            d[(l, l)] = c(-(l as f64) * norm, 0.0);
            out.push(HermitianBasisElement { block, matrix: d });
        }
        let id = CMatrix::identity(n, n) * c(1.0 / (n as f64).sqrt(), 0.0);
        out.push(HermitianBasisElement { block, matrix: id });
    }
    out
}

/// Real coordinates `tr(H_k ρ)` of Hermitian density blocks.
pub fn hermitian_coords(basis: &[HermitianBasisElement], densities: &[CMatrix]) -> Vec<f64> {
    basis
        .iter()
        .map(|h| (&h.matrix * &densities[h.block]).trace().re)
        .collect()
}

/// Density blocks `Σ x_k H_k`.
pub fn from_hermitian_coords(a: &Algebra, basis: &[HermitianBasisElement], x: &[f64]) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = a.blocks().iter().map(|&n| CMatrix::zeros(n, n)).collect();
    for (h, &v) in basis.iter().zip(x) {
        out[h.block] += &h.matrix * c(v, 0.0);
    }
    out
}

fn check_endomorphic(r: &Rqm) -> Result<()> {
    if !r.is_endomorphic() {
        return Err(Error::Dimension(format!(
            "random quantum map from {:?} to {:?} has no dynamics on one algebra",
            r.source(),
            r.target()
        )));
    }
    Ok(())
}

/// Matrix of `ρ ↦ ρ ∘ F_{φ,ν}` in the Hermitian basis of [`hermitian_basis`].
pub fn transition_matrix(r: &Rqm) -> Result<DMatrix<f64>> {
    check_endomorphic(r)?;
    let a = r.target();
    let t = r.induced_transition()?;
    let basis = hermitian_basis(a);
    let d = basis.len();
    let mut m = DMatrix::<f64>::zeros(d, d);
    for (l, h) in basis.iter().enumerate() {
        let mut dens: Vec<CMatrix> = a.blocks().iter().map(|&n| CMatrix::zeros(n, n)).collect();
        dens[h.block] = h.matrix.clone();
        let image = t.apply_densities(&dens)?;
        let col = hermitian_coords(&basis, &image);
        m.set_column(l, &nalgebra::DVector::from_vec(col));
    }
    Ok(m)
}

#[derive(Clone, Debug)]
pub struct InvariantReport {
    /// Dimension of the fixed subspace of the linearized transition.
    pub fixed_dim: usize,
    /// The Cesàro limit of `Tᵏ` started at the maximally mixed state.
    pub canonical: State,
    /// `‖T(canonical) − canonical‖₁`.
    pub residual: f64,
    /// How the Cesàro limit was obtained.
    pub method: CesaroMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CesaroMethod {
    /// Closed form through the spectral projection onto `ker(M − I)` along `ran(M − I)`.
    ErgodicProjection,
    /// Explicit averaging, with the number of terms used.
    Averaging(usize),
}

/// `‖T(σ) − σ‖₁` (trace norm of the density difference).
pub fn verify_invariant(r: &Rqm, sigma: &State) -> Result<f64> {
    check_endomorphic(r)?;
    let image = r.transition_apply(sigma)?;
    image.trace_distance(sigma)
}

/// `(1/k) Σ_{i<k} Tⁱ(ρ₀)`.
pub fn cesaro_average(r: &Rqm, start: &State, k: usize) -> Result<State> {
    check_endomorphic(r)?;
    let a = r.target();
    let k = k.max(1);
    let mut cur = start.clone();
    let mut acc: Vec<CMatrix> = a.blocks().iter().map(|&n| CMatrix::zeros(n, n)).collect();
    for i in 0..k {
        for (s, d) in acc.iter_mut().zip(cur.densities()) {
            *s += d;
        }
        if i + 1 < k {
            cur = r.transition_apply(&cur)?;
        }
    }
    let scale = c(1.0 / k as f64, 0.0);
    Ok(State::new_unchecked(a, acc.into_iter().map(|m| m * scale).collect()))
}

/// Fixed-subspace dimension and the canonical invariant state of `r`.
pub fn invariant_states(r: &Rqm) -> Result<InvariantReport> {
    check_endomorphic(r)?;
    let a = r.target().clone();
    let basis = hermitian_basis(&a);
    let m = transition_matrix(r)?;
    let d = m.nrows();
    let shifted = &m - DMatrix::<f64>::identity(d, d);
    let right = linalg::real_null_space(&shifted, FIXED_SPACE_TOL);
    let left = linalg::real_null_space(&shifted.transpose(), FIXED_SPACE_TOL);
    let fixed_dim = right.ncols();

    let start = State::maximally_mixed(&a);
    let x0 = nalgebra::DVector::from_vec(hermitian_coords(&basis, start.densities()));
    let projected = if fixed_dim > 0 && left.ncols() == fixed_dim {
        // P = X (YᵀX)⁻¹ Yᵀ
        (left.transpose() * &right)
            .try_inverse()
            .map(|inv| &right * inv * left.transpose() * &x0)
    } else {
        None
    };

    let (canonical, method) = match projected {
        Some(x) => (finish_state(&a, &basis, x.as_slice()), CesaroMethod::ErgodicProjection),
        None => cesaro_until_converged(r, &start)?,
    };
    let canonical = canonical?;
    let residual = verify_invariant(r, &canonical)?;
    if residual > INVARIANT_TOL {
        let (fallback, steps) = cesaro_until_converged(r, &start)?;
        let fallback = fallback?;
        let res = verify_invariant(r, &fallback)?;
        if res > INVARIANT_TOL {
            return Err(Error::NumericalFailure(format!(
                "no invariant state within {INVARIANT_TOL:e}: projection residual {residual:.3e}, \
                 averaging residual {res:.3e} after {steps:?}"
            )));
        }
        return Ok(InvariantReport {
            fixed_dim: fixed_dim.max(1),
            canonical: fallback,
            residual: res,
            method: steps,
        });
    }
    Ok(InvariantReport {
        fixed_dim,
        canonical,
        residual,
        method,
    })
}

fn finish_state(a: &Algebra, basis: &[HermitianBasisElement], x: &[f64]) -> Result<State> {
    let dens = from_hermitian_coords(a, basis, x);
    let dens: Vec<CMatrix> = dens.iter().map(linalg::hermitian_part).collect();
    let tr: f64 = dens.iter().map(|m| m.trace().re).sum();
    let dens = dens.into_iter().map(|m| m * c(1.0 / tr, 0.0)).collect();
    State::new(a, dens, INVARIANT_TOL)
}

fn cesaro_until_converged(r: &Rqm, start: &State) -> Result<(Result<State>, CesaroMethod)> {
    let a = r.target();
    let mut cur = start.clone();
    let mut acc: Vec<CMatrix> = a.blocks().iter().map(|&n| CMatrix::zeros(n, n)).collect();
    let mut avg = start.clone();
    for k in 1..=CESARO_CAP {
        for (s, d) in acc.iter_mut().zip(cur.densities()) {
            *s += d;
        }
        if k % 64 == 0 || k == CESARO_CAP {
            let scale = c(1.0 / k as f64, 0.0);
            avg = State::new_unchecked(a, acc.iter().map(|m| m * scale).collect());
            if verify_invariant(r, &avg)? <= INVARIANT_TOL {
                return Ok((State::new(a, avg.densities().to_vec(), INVARIANT_TOL), CesaroMethod::Averaging(k)));
            }
        }
        cur = r.transition_apply(&cur)?;
    }
    let res = verify_invariant(r, &avg)?;
    Err(Error::NumericalFailure(format!(
        "Cesàro averaging did not converge in {CESARO_CAP} steps (residual {res:.3e})"
    )))
}

/// `C^{⊗n}` (with `C^{⊗0} = ℂ`).
pub fn tensor_power(c: &Algebra, n: usize) -> Algebra {
    (0..n).fold(Algebra::scalars(), |acc, _| acc.tensor(c))
}

/// The skew product at level `n`: `A ⊗ C^{⊗n} → A ⊗ C^{⊗(n+1)}`,
/// `a ⊗ c₁ ⊗ ⋯ ⊗ cₙ ↦ φ(a) ⊗ c₁ ⊗ ⋯ ⊗ cₙ`, so the new leg comes first
/// among the parameter legs.
pub fn skew_map(r: &Rqm, level: usize, dim_cap: usize) -> Result<LinearMap> {
    check_endomorphic(r)?;
    let required = r
        .target()
        .dim()
        .saturating_mul(r.parameter().dim().saturating_pow(level as u32 + 1));
    if required > dim_cap {
        return Err(Error::DimensionCap {
            required,
            allowed: dim_cap,
        });
    }
    let legs = tensor_power(r.parameter(), level);
    Ok(r.phi().tensor(&LinearMap::identity(&legs)))
}

pub fn skew_apply(r: &Rqm, level: usize, x: &Element, dim_cap: usize) -> Result<Element> {
    skew_map(r, level, dim_cap)?.apply(x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewReport {
    pub depth: usize,
    /// `sup_{‖x‖ ≤ 1} |μ_N(φ†x) − μ_{N−1}(x)|`, the trace norm of the difference.
    pub invariance_violation: f64,
    /// The same difference, maximized over matrix units of level `N − 1`.
    pub basis_violation: f64,
    /// `max |μ_N(φ†x) − ((Tσ) ⊗ ν^{⊗(N−1)})(x)|` over matrix units; zero for every `σ`.
    pub identity_residual: f64,
    /// `‖T(σ) − σ‖₁`.
    pub transition_residual: f64,
    pub tolerance: f64,
}

impl SkewReport {
    pub fn passed(&self) -> bool {
        self.invariance_violation <= self.tolerance
    }
}

/// Compare `μ_N ∘ φ†` with `μ_{N−1}` on level `N − 1`, where
/// `μ_n = σ ⊗ ν^{⊗n}`.
pub fn verify_skew_invariance(r: &Rqm, sigma: &State, depth: usize, tol: f64, dim_cap: usize) -> Result<SkewReport> {
    if depth == 0 {
        return Err(Error::InsufficientDepth("skew invariance needs depth at least 1".into()));
    }
    let skew = skew_map(r, depth - 1, dim_cap)?;
    let nu = r.nu();
    let power = |s: &State, n: usize| (0..n).fold(s.clone(), |acc, _| acc.tensor(nu));
    let mu_top = power(sigma, depth);
    let mu_prev = power(sigma, depth - 1);
    let pulled: CVector = skew.matrix().transpose() * mu_top.functional();
    let w_prev = mu_prev.functional();
    let t_sigma = r.transition_apply(sigma)?;
    let w_identity = power(&t_sigma, depth - 1).functional();

    let level = skew.domain();
    let diff: CVector = &pulled - &w_prev;
    let basis_violation = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let identity_residual = (&pulled - &w_identity).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dens = densities_of_functional(level, &diff);
    let invariance_violation = dens
        .iter()
        .map(|m| linalg::hermitian_eigen(m).0.iter().map(|v| v.abs()).sum::<f64>())
        .sum();
    Ok(SkewReport {
        depth,
        invariance_violation,
        basis_violation,
        identity_residual,
        transition_residual: t_sigma.trace_distance(sigma)?,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DEFAULT_TOL;
    use crate::random::Fixtures;
    use crate::rqm::{amplify_left, Qfm};

    fn constant_rqm() -> Rqm {
        let a = Algebra::full(2);
        let qfm = Qfm::new(&a, &a, amplify_left(&a, &a), DEFAULT_TOL).unwrap();
        Rqm::new(qfm, State::maximally_mixed(&a)).unwrap()
    }

    #[test]
    fn basis_is_orthonormal() {
        let a = Algebra::new(vec![1, 3, 2]).unwrap();
        let b = hermitian_basis(&a);
        assert_eq!(b.len(), a.dim());
        for (i, x) in b.iter().enumerate() {
            assert!(linalg::hermitian_defect(&x.matrix) < 1e-15);
            for (j, y) in b.iter().enumerate() {
                let ip = if x.block == y.block {
                    (x.matrix.adjoint() * &y.matrix).trace().re
                } else {
                    0.0
                };
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let a = Algebra::new(vec![2, 1]).unwrap();
        let rho = Fixtures::new(1).random_state(&a);
        let b = hermitian_basis(&a);
        let x = hermitian_coords(&b, rho.densities());
        let back = from_hermitian_coords(&a, &b, &x);
        for (u, v) in back.iter().zip(rho.densities()) {
            assert!(linalg::frobenius(&(u - v)) < 1e-14);
        }
    }

    #[test]
    fn trivial_rqm_has_identity_matrix() {
        let a = Algebra::full(2);
        let m = transition_matrix(&Rqm::trivial(&a)).unwrap();
        assert!((m - DMatrix::<f64>::identity(4, 4)).norm() < 1e-14);
        let rep = invariant_states(&Rqm::trivial(&a)).unwrap();
        assert_eq!(rep.fixed_dim, 4);
        assert!(rep.canonical.distance(&State::maximally_mixed(&a)).unwrap() < 1e-14);
    }

    #[test]
    fn constant_transition() {
        let r = constant_rqm();
        let m = transition_matrix(&r).unwrap();
        // only the I/√2 direction survives
        let mut want = DMatrix::<f64>::zeros(4, 4);
        want[(3, 3)] = 1.0;
        assert!((m - want).norm() < 1e-14);
        let rep = invariant_states(&r).unwrap();
        assert_eq!(rep.fixed_dim, 1);
        let half = State::maximally_mixed(&Algebra::full(2));
        assert!(rep.canonical.distance(&half).unwrap() < 1e-12);
        let mut xi = CVector::zeros(2);
        xi[0] = linalg::ONE;
        let e11 = State::vector_state(&Algebra::full(2), 0, &xi).unwrap();
        assert!((verify_invariant(&r, &e11).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_path_matches_direct_path() {
        let mut fx = Fixtures::new(9);
        let a = Algebra::new(vec![1, 2]).unwrap();
        let r = fx.random_rqm(&a, &a, &Algebra::commutative(2)).unwrap();
        let m = transition_matrix(&r).unwrap();
        let b = hermitian_basis(&a);
        for _ in 0..5 {
            let rho = fx.random_state(&a);
            let x = nalgebra::DVector::from_vec(hermitian_coords(&b, rho.densities()));
            let y = &m * x;
            let via_matrix = from_hermitian_coords(&a, &b, y.as_slice());
            let direct = r.transition_apply(&rho).unwrap();
            for (u, v) in via_matrix.iter().zip(direct.densities()) {
                assert!(linalg::frobenius(&(u - v)) < 1e-12);
            }
        }
    }

    #[test]
    fn projection_agrees_with_averaging() {
        let mut fx = Fixtures::new(10);
        let a = Algebra::full(2);
        let r = fx.random_rqm(&a, &a, &Algebra::commutative(2)).unwrap();
        let rep = invariant_states(&r).unwrap();
        let avg = cesaro_average(&r, &State::maximally_mixed(&a), 2000).unwrap();
        assert!(avg.trace_distance(&rep.canonical).unwrap() < 1e-2);
        assert!(rep.residual <= INVARIANT_TOL);
    }

    #[test]
    fn skew_level_zero_is_phi() {
        let mut fx = Fixtures::new(11);
        let a = Algebra::full(2);
        let r = fx.random_rqm(&a, &a, &Algebra::full(2)).unwrap();
        let x = fx.random_element(&a);
        let got = skew_apply(&r, 0, &x, usize::MAX).unwrap();
        assert!(got.distance(&r.phi().apply(&x).unwrap()).unwrap() < 1e-14);
        skew_map(&r, 1, usize::MAX).unwrap().validate_morphism(1e-10).unwrap();
        assert!(matches!(skew_map(&r, 3, 100), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn skew_invariance_constant_transition() {
        let r = constant_rqm();
        let a = Algebra::full(2);
        let ok = verify_skew_invariance(&r, &State::maximally_mixed(&a), 3, 1e-9, usize::MAX).unwrap();
        assert!(ok.passed() && ok.identity_residual < 1e-12);
        let mut xi = CVector::zeros(2);
        xi[0] = linalg::ONE;
        let e11 = State::vector_state(&a, 0, &xi).unwrap();
        let bad = verify_skew_invariance(&r, &e11, 3, 1e-9, usize::MAX).unwrap();
        assert!(!bad.passed());
        assert!((bad.invariance_violation - bad.transition_residual).abs() < 1e-12);
        assert!(bad.identity_residual < 1e-12);
    }
}
