//! Constructions of random quantum maps implementing a given unital CP map.
//!
//! Each `implement_*` function returns an [`Rqm`] whose induced map equals the
//! target: states, morphisms, compositions, direct sums, tensor products,
//! convex combinations, finitely parameterized families of morphisms, and
//! maps into a full matrix algebra via their Stinespring dilation.

use crate::algebra::{check_probability_vector, Algebra, State, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::maps::{representation, unital_multiplicities, LinearMap, MapKind};
use crate::rqm::{amplify_left, amplify_right, summand_embeddings, Qfm, Rqm};
use crate::stinespring::{stinespring_dilate, StinespringDilation};
use crate::tensor::{permute_factors, TensorLayout};

/// `(A, id: A → ℂ⊗A, σ)` implements the state `σ` as a map `A → ℂ`.
pub fn implement_state(sigma: &State) -> Rqm {
    let a = sigma.algebra();
    let qfm = Qfm::new(&Algebra::scalars(), a, LinearMap::identity(a), DEFAULT_TOL).expect("ℂ⊗A = A");
    Rqm::new(qfm, sigma.clone()).expect("state on the parameter algebra")
}

/// `(ℂ, φ: B → A⊗ℂ, 1)` implements a morphism `φ: B → A`.
pub fn implement_morphism(phi: &LinearMap) -> Result<Rqm> {
    let target = phi.codomain().clone();
    let qfm = Qfm::new(&target, &Algebra::scalars(), phi.clone(), DEFAULT_TOL)?;
    Rqm::new(qfm, State::scalar_unit())
}

/// `(C₁⊗C₂, φ₁◇φ₂, ν₁⊗ν₂)` implements `F₁F₂`.
pub fn implement_compose(outer: &Rqm, inner: &Rqm) -> Result<Rqm> {
    let qfm = outer.qfm().diamond(inner.qfm())?;
    Rqm::new(qfm, outer.nu().tensor(inner.nu()))
}

/// Implements `F₁ ⊕ F₂: B₁⊕B₂ → A₁⊕A₂` with parameter `C₁⊗C₂` through
/// `(a₁⊗c₁, a₂⊗c₂) ↦ (a₁,0)⊗(c₁⊗1) + (0,a₂)⊗(1⊗c₂)`.
pub fn implement_direct_sum(r1: &Rqm, r2: &Rqm) -> Result<Rqm> {
    let (a1, a2) = (r1.target(), r2.target());
    let (c1, c2) = (r1.parameter(), r2.parameter());
    let (emb1, emb2) = summand_embeddings(a1, a2);
    let j1 = emb1.tensor(&amplify_right(c1, c2)).compose(r1.phi())?;
    let j2 = emb2.tensor(&amplify_left(c1, c2)).compose(r2.phi())?;
    let (d1, d2) = (j1.domain().dim(), j2.domain().dim());
    let rows = j1.codomain().dim();
    let mut m = CMatrix::zeros(rows, d1 + d2);
    m.view_mut((0, 0), (rows, d1)).copy_from(j1.matrix());
    m.view_mut((0, d1), (rows, d2)).copy_from(j2.matrix());
    let domain = r1.source().direct_sum(r2.source());
    let target = a1.direct_sum(a2);
    let parameter = c1.tensor(c2);
    let phi = LinearMap::from_matrix(&domain, &target.tensor(&parameter), m)?;
    let qfm = Qfm::new(&target, &parameter, phi, DEFAULT_TOL)?;
    Rqm::new(qfm, r1.nu().tensor(r2.nu()))
}

/// Implements `F₁ ⊗ F₂: B₁⊗B₂ → A₁⊗A₂` via `φ₁⊗φ₂` followed by the flip
/// `(A₁⊗C₁)⊗(A₂⊗C₂) → (A₁⊗A₂)⊗(C₁⊗C₂)`.
pub fn implement_tensor(r1: &Rqm, r2: &Rqm) -> Result<Rqm> {
    let factors = [
        r1.target().clone(),
        r1.parameter().clone(),
        r2.target().clone(),
        r2.parameter().clone(),
    ];
    let flip = permute_factors(&factors, &[0, 2, 1, 3])?;
    let phi = flip.compose(&r1.phi().tensor(r2.phi()))?;
    let target = r1.target().tensor(r2.target());
    let parameter = r1.parameter().tensor(r2.parameter());
    let qfm = Qfm::new(&target, &parameter, phi, DEFAULT_TOL)?;
    Rqm::new(qfm, r1.nu().tensor(r2.nu()))
}

/// Implements `Σ tᵢ Fᵢ` with parameter algebra `ℂⁿ ⊗ C` and state `σ ⊗ ν`,
/// where `(C, φ, ν)` implements `⊕ᵢ Fᵢ`, `σ(eᵢ) = tᵢ` and the family is
/// `b ↦ (b,…,b) ↦ φ(b,…,b)` re-indexed by `(a₁,…,aₙ)⊗c ↦ Σ aᵢ⊗(eᵢ⊗c)`.
pub fn implement_convex_sum(weights: &[f64], rqms: &[Rqm], tol: f64) -> Result<Rqm> {
    check_probability_vector(weights, tol)?;
    if weights.len() != rqms.len() {
        return Err(Error::Dimension(format!(
            "{} weights for {} random quantum maps",
            weights.len(),
            rqms.len()
        )));
    }
    let b = rqms[0].source().clone();
    let a = rqms[0].target().clone();
    if let Some(i) = rqms.iter().position(|r| r.source() != &b || r.target() != &a) {
        return Err(Error::Dimension(format!("map {i} does not go from {b:?} to {a:?}")));
    }
    let n = rqms.len();
    let mut sum = rqms[0].clone();
    for r in &rqms[1..] {
        sum = implement_direct_sum(&sum, r)?;
    }
    let c = sum.parameter().clone();

    // b ↦ (b, …, b)
    let mut diag = CMatrix::zeros(b.dim() * n, b.dim());
    for i in 0..n {
        for k in 0..b.dim() {
            diag[(i * b.dim() + k, k)] = linalg::ONE;
        }
    }
    let diag = LinearMap::from_matrix(&b, sum.source(), diag)?.assume_kind(MapKind::Morphism);

    // (a₁,…,aₙ) ⊗ c ↦ Σ aᵢ ⊗ (eᵢ ⊗ c)
    let cn = Algebra::commutative(n);
    let summed = sum.target();
    let out_layout = TensorLayout::new(&[a.clone(), cn.clone(), c.clone()])?;
    let src_dim = summed.dim() * c.dim();
    let mut reindex = CMatrix::zeros(out_layout.product().dim(), src_dim);
    for x in 0..src_dim {
        let (s, cc) = summed.split_tensor_coord(&c, x);
        let (i, ai) = (s / a.dim(), s % a.dim());
        reindex[(out_layout.join(&[ai, i, cc]), x)] = linalg::ONE;
    }
    let reindex = LinearMap::from_matrix(&summed.tensor(&c), out_layout.product(), reindex)?;

    let phi = reindex.compose(sum.phi())?.compose(&diag)?;
    let parameter = cn.tensor(&c);
    let qfm = Qfm::new(&a, &parameter, phi, DEFAULT_TOL)?;
    let sigma = State::from_probabilities(weights, tol)?;
    Rqm::new(qfm, sigma.tensor(sum.nu()))
}

/// `(ℂᵏ, φ, σ)` with `φ(b) = Σₓ f(x,b) ⊗ δₓ` implements `b ↦ Σₓ σ(x) f(x,b)`
/// for morphisms `f(x,·): B → A` indexed by a finite set.
pub fn implement_finite_family(morphisms: &[LinearMap], weights: &[f64], tol: f64) -> Result<Rqm> {
    check_probability_vector(weights, tol)?;
    let k = morphisms.len();
    if k != weights.len() {
        return Err(Error::Dimension(format!("{} weights for {k} morphisms", weights.len())));
    }
    let b = morphisms[0].domain().clone();
    let a = morphisms[0].codomain().clone();
    let mut checked = Vec::with_capacity(k);
    for (x, f) in morphisms.iter().enumerate() {
        if f.domain() != &b || f.codomain() != &a {
            return Err(Error::Dimension(format!("f({x}, ·) does not go from {b:?} to {a:?}")));
        }
        checked.push(if f.kind() == MapKind::Morphism {
            f.clone()
        } else {
            f.clone().validate_morphism(tol)?
        });
    }
    let points = Algebra::commutative(k);
    let layout = TensorLayout::new(&[a.clone(), points.clone()])?;
    let mut m = CMatrix::zeros(layout.product().dim(), b.dim());
    for (x, f) in checked.iter().enumerate() {
        for col in 0..b.dim() {
            for row in 0..a.dim() {
                m[(layout.join(&[row, x]), col)] += f.matrix()[(row, col)];
            }
        }
    }
    let phi = LinearMap::from_matrix(&b, layout.product(), m)?;
    let qfm = Qfm::new(&a, &points, phi, tol)?;
    Rqm::new(qfm, State::from_probabilities(weights, tol)?)
}

/// Bounds for the padding search in [`implement_from_stinespring`].
#[derive(Clone, Copy, Debug)]
pub struct PaddingSearch {
    /// How many copy counts `n` to try, starting from the smallest with `n·h ≥ K`.
    pub attempts: usize,
}

impl Default for PaddingSearch {
    fn default() -> Self {
        Self { attempts: 16 }
    }
}

/// A verified implementation obtained from a Stinespring dilation.
#[derive(Clone, Debug)]
pub struct StinespringWitness {
    pub rqm: Rqm,
    pub dilation: StinespringDilation,
    /// `n`: the parameter algebra is `M_n`.
    pub copies: usize,
    /// Size of the extra representation appended to `K`.
    pub padding: usize,
    /// Multiplicities of the domain blocks in the padding representation.
    pub padding_multiplicities: Vec<usize>,
    /// `max_b ‖F_{φ,ν}(b) − F(b)‖`.
    pub residual: f64,
}

/// Why no witness was produced.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplementabilityFailure {
    pub k_dim: usize,
    pub h: usize,
    /// `(n, n·h − K)` for every copy count tried.
    pub tried: Vec<(usize, usize)>,
    /// The first padding size no unital representation of the domain reaches.
    pub unreachable_dimension: usize,
}

#[derive(Clone, Debug)]
pub enum StinespringOutcome {
    Implemented(Box<StinespringWitness>),
    Failed(ImplementabilityFailure),
}

/// Implement a unital CP map `F: B → M_h` by `(M_n, φ, m ↦ m₁₁)`.
///
/// The dilation space `K` is padded by a unital representation of `B` up to
/// `n·h` dimensions (none is needed when `h` divides `dim K`) and identified
/// with `H ⊗ ℂⁿ` so that `V(H)` becomes `H ⊗ e₁`.
pub fn implement_from_stinespring(f: &LinearMap, search: PaddingSearch, tol: f64) -> Result<StinespringOutcome> {
    let dil = stinespring_dilate(f, tol)?;
    let b = f.domain();
    let h = f.codomain().block(0);
    let k = dil.k_dim();
    let n_min = k.div_ceil(h);
    let mut tried = Vec::new();
    let mut found = None;
    for n in n_min..n_min + search.attempts.max(1) {
        let pad = n * h - k;
        tried.push((n, pad));
        if pad == 0 {
            found = Some((n, pad, vec![0; b.num_blocks()]));
            break;
        }
        if let Some(mult) = unital_multiplicities(b, pad, 1).into_iter().next() {
            found = Some((n, pad, mult));
            break;
        }
    }
    let Some((n, pad, mult)) = found else {
        return Ok(StinespringOutcome::Failed(ImplementabilityFailure {
            k_dim: k,
            h,
            unreachable_dimension: tried[0].1,
            tried,
        }));
    };

    let total = n * h;
    let padded_pi = if pad == 0 {
        dil.pi().clone()
    } else {
        let extra = representation(b, std::slice::from_ref(&mult), None)?;
        // π ⊕ π' placed block-diagonally inside M_{K+pad}
        let full = Algebra::full(total);
        LinearMap::from_fn(b, &full, |e| {
            let mut m = CMatrix::zeros(total, total);
            m.view_mut((0, 0), (k, k)).copy_from(dil.pi().apply(e)?.block(0));
            m.view_mut((k, k), (pad, pad)).copy_from(extra.apply(e)?.block(0));
            crate::algebra::Element::new(&full, vec![m])
        })?
        .assume_kind(MapKind::Morphism)
    };
    let mut v = CMatrix::zeros(total, h);
    v.view_mut((0, 0), (k, h)).copy_from(dil.v());
    let u = linalg::complete_to_unitary(&v);
    // column (s, t) of H ⊗ ℂⁿ, index s·n + t: t = 0 ↦ V ε_s, the rest fill
    // the orthogonal complement
    let mut w = CMatrix::zeros(total, total);
    for s in 0..h {
        w.set_column(s * n, &u.column(s));
        for t in 1..n {
            w.set_column(s * n + t, &u.column(h + s * (n - 1) + (t - 1)));
        }
    }
    let target = f.codomain().clone();
    let parameter = Algebra::full(n);
    let joint = target.tensor(&parameter);
    let phi = LinearMap::from_fn(b, &joint, |e| {
        let x = padded_pi.apply(e)?;
        crate::algebra::Element::new(&joint, vec![w.adjoint() * x.block(0) * &w])
    })?;
    let qfm = Qfm::new(&target, &parameter, phi, tol)
        .map_err(|e| Error::NumericalFailure(format!("Stinespring family is not a morphism: {e}")))?;
    let mut e1 = CVector::zeros(n);
    e1[0] = linalg::ONE;
    let nu = State::vector_state(&parameter, 0, &e1)?;
    let rqm = Rqm::new(qfm, nu)?;
    let residual = rqm.induced_nfmo()?.max_deviation(f)?;
    Ok(StinespringOutcome::Implemented(Box::new(StinespringWitness {
        rqm,
        dilation: dil,
        copies: n,
        padding: pad,
        padding_multiplicities: mult,
        residual,
    })))
}
