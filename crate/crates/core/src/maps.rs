//! Linear maps between multi-matrix algebras: unital *-morphisms, unital
//! completely positive maps, their Choi certificates and adjoint transitions.
//!
//! A [`LinearMap`] stores the `dim(codomain) × dim(domain)` matrix of the map
//! in flattened matrix-unit coordinates, together with a [`MapKind`] tag that
//! records what has been verified about it.

use num_complex::Complex64;

use crate::algebra::{Algebra, Element, State, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};

/// What has been verified about a [`LinearMap`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapKind {
    Raw,
    /// Unital completely positive.
    CpUnital,
    /// Unital *-homomorphism.
    Morphism,
}

impl MapKind {
    /// The strongest property shared by both tags.
    pub fn meet(self, other: MapKind) -> MapKind {
        use MapKind::*;
        match (self, other) {
            (Morphism, Morphism) => Morphism,
            (Raw, _) | (_, Raw) => Raw,
            _ => CpUnital,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MapKind::Raw => "raw",
            MapKind::CpUnital => "cp_unital",
            MapKind::Morphism => "morphism",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    domain: Algebra,
    codomain: Algebra,
    matrix: CMatrix,
    kind: MapKind,
}

/// One Choi matrix `C_{ij} = Σ_{pq} F(e^{(j)}_{pq})_i ⊗ e_{pq}`.
#[derive(Clone, Debug)]
pub struct ChoiBlock {
    pub codomain_block: usize,
    pub domain_block: usize,
    pub matrix: CMatrix,
}

/// Largest violations of the three morphism identities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MorphismResiduals {
    pub multiplicative: f64,
    pub star: f64,
    pub unit: f64,
}

impl MorphismResiduals {
    pub fn max(&self) -> f64 {
        self.multiplicative.max(self.star).max(self.unit)
    }
}

impl LinearMap {
    pub fn from_matrix(domain: &Algebra, codomain: &Algebra, matrix: CMatrix) -> Result<Self> {
        if matrix.shape() != (codomain.dim(), domain.dim()) {
            return Err(Error::Dimension(format!(
                "map matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                codomain.dim(),
                domain.dim()
            )));
        }
        Ok(Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix,
            kind: MapKind::Raw,
        })
    }

    /// One image per matrix unit of the domain, in flattened-coordinate order.
    pub fn from_basis_images(domain: &Algebra, codomain: &Algebra, images: &[Element]) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::Dimension(format!(
                "{} basis images for a domain of dimension {}",
                images.len(),
                domain.dim()
            )));
        }
        let mut matrix = CMatrix::zeros(codomain.dim(), domain.dim());
        for (k, img) in images.iter().enumerate() {
            if img.algebra() != codomain {
                return Err(Error::Dimension(format!(
                    "image of basis element {k} lies in {:?}, expected {:?}",
                    img.algebra(),
                    codomain
                )));
            }
            matrix.set_column(k, &img.coords());
        }
        Self::from_matrix(domain, codomain, matrix)
    }

    /// Build from a function evaluated on every matrix unit of the domain.
    pub fn from_fn(
        domain: &Algebra,
        codomain: &Algebra,
        mut f: impl FnMut(&Element) -> Result<Element>,
    ) -> Result<Self> {
        let images = domain.basis().map(|e| f(&e)).collect::<Result<Vec<_>>>()?;
        Self::from_basis_images(domain, codomain, &images)
    }

    pub fn identity(algebra: &Algebra) -> Self {
        Self {
            domain: algebra.clone(),
            codomain: algebra.clone(),
            matrix: CMatrix::identity(algebra.dim(), algebra.dim()),
            kind: MapKind::Morphism,
        }
    }

    /// The state `ω` viewed as a unital CP map `A → ℂ`.
    pub fn from_state(state: &State) -> Self {
        let w = state.functional();
        Self {
            domain: state.algebra().clone(),
            codomain: Algebra::scalars(),
            matrix: CMatrix::from_fn(1, w.len(), |_, c| w[c]),
            kind: MapKind::CpUnital,
        }
    }

    pub fn domain(&self) -> &Algebra {
        &self.domain
    }

    pub fn codomain(&self) -> &Algebra {
        &self.codomain
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// Override the kind tag without verification.
    pub(crate) fn assume_kind(mut self, kind: MapKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        if x.algebra() != &self.domain {
            return Err(Error::Dimension(format!(
                "map with domain {:?} applied to element of {:?}",
                self.domain,
                x.algebra()
            )));
        }
        let out: CVector = &self.matrix * x.coords();
        Element::from_coords(&self.codomain, out.as_slice())
    }

    /// Image of the matrix unit with flattened coordinate `coord`.
    pub fn image(&self, coord: usize) -> Element {
        let col: Vec<Complex64> = self.matrix.column(coord).iter().copied().collect();
        Element::from_coords(&self.codomain, &col).expect("column has codomain dimension")
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        if inner.codomain != self.domain {
            return Err(Error::Dimension(format!(
                "cannot compose: inner codomain {:?} differs from outer domain {:?}",
                inner.codomain, self.domain
            )));
        }
        Ok(LinearMap {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix * &inner.matrix,
            kind: self.kind.meet(inner.kind),
        })
    }

    /// `F₁ ⊕ F₂: B₁ ⊕ B₂ → A₁ ⊕ A₂`, block diagonal in coordinates.
    pub fn direct_sum(&self, other: &LinearMap) -> LinearMap {
        let (r1, c1) = self.matrix.shape();
        let (r2, c2) = other.matrix.shape();
        let mut matrix = CMatrix::zeros(r1 + r2, c1 + c2);
        matrix.view_mut((0, 0), (r1, c1)).copy_from(&self.matrix);
        matrix.view_mut((r1, c1), (r2, c2)).copy_from(&other.matrix);
        LinearMap {
            domain: self.domain.direct_sum(&other.domain),
            codomain: self.codomain.direct_sum(&other.codomain),
            matrix,
            kind: self.kind.meet(other.kind),
        }
    }

    /// `F₁ ⊗ F₂: B₁ ⊗ B₂ → A₁ ⊗ A₂` under the global tensor convention.
    pub fn tensor(&self, other: &LinearMap) -> LinearMap {
        let domain = self.domain.tensor(&other.domain);
        let codomain = self.codomain.tensor(&other.codomain);
        let row_index = coord_table(&self.codomain, &other.codomain);
        let col_index = coord_table(&self.domain, &other.domain);
        let nz1 = nonzeros(&self.matrix);
        let nz2 = nonzeros(&other.matrix);
        let d2c = other.codomain.dim();
        let d2d = other.domain.dim();
        let mut matrix = CMatrix::zeros(codomain.dim(), domain.dim());
        for &(r1, c1, v1) in &nz1 {
            for &(r2, c2, v2) in &nz2 {
                let r = row_index[r1 * d2c + r2];
                let col = col_index[c1 * d2d + c2];
                matrix[(r, col)] += v1 * v2;
            }
        }
        LinearMap {
            domain,
            codomain,
            matrix,
            kind: self.kind.meet(other.kind),
        }
    }

    pub fn add(&self, other: &LinearMap) -> Result<LinearMap> {
        self.check_same_shape(other)?;
        Ok(LinearMap {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix + &other.matrix,
            kind: MapKind::Raw,
        })
    }

    pub fn scale(&self, s: Complex64) -> LinearMap {
        LinearMap {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix * s,
            kind: MapKind::Raw,
        }
    }

    /// Convex combination `Σ tᵢ Fᵢ`; CP-unital if every term is.
    pub fn convex_combination(weights: &[f64], maps: &[LinearMap], tol: f64) -> Result<LinearMap> {
        crate::algebra::check_probability_vector(weights, tol)?;
        if weights.len() != maps.len() {
            return Err(Error::Dimension("weights and maps differ in length".into()));
        }
        let mut acc = maps[0].scale(linalg::c(weights[0], 0.0));
        let mut kind = maps[0].kind.meet(MapKind::CpUnital);
        for (t, f) in weights.iter().zip(maps).skip(1) {
            acc = acc.add(&f.scale(linalg::c(*t, 0.0)))?;
            kind = kind.meet(f.kind);
        }
        Ok(acc.assume_kind(kind))
    }

    fn check_same_shape(&self, other: &LinearMap) -> Result<()> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::Dimension(format!(
                "maps {:?}→{:?} and {:?}→{:?} differ in shape",
                self.domain, self.codomain, other.domain, other.codomain
            )));
        }
        Ok(())
    }

    /// `max_b ‖F(b) − G(b)‖` over the matrix units `b` of the domain.
    pub fn max_deviation(&self, other: &LinearMap) -> Result<f64> {
        self.check_same_shape(other)?;
        let diff = &self.matrix - &other.matrix;
        Ok(diff
            .column_iter()
            .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max))
    }

    pub fn unit_residual(&self) -> f64 {
        self.apply(&self.domain.unit())
            .and_then(|u| u.distance(&self.codomain.unit()))
            .unwrap_or(f64::INFINITY)
    }

    /// Largest violations of `φ(e_{pq})φ(e_{rs}) = δ_{qr}φ(e_{ps})`,
    /// `φ(e_{pq})* = φ(e_{qp})` and `φ(1) = 1`, over all ordered basis pairs.
    pub fn morphism_residuals(&self) -> MorphismResiduals {
        let d = &self.domain;
        let images: Vec<Element> = (0..d.dim()).map(|k| self.image(k)).collect();
        let mut res = MorphismResiduals {
            unit: self.unit_residual(),
            ..Default::default()
        };
        for a in 0..d.dim() {
            let (j, p, q) = d.locate(a);
            let star = images[a].adjoint().distance(&images[d.coord(j, q, p)]).unwrap_or(f64::INFINITY);
            res.star = res.star.max(star);
            for b in 0..d.dim() {
                let (j2, r, s) = d.locate(b);
                let prod = images[a].mul(&images[b]).expect("same codomain");
                let dev = if j == j2 && q == r {
                    prod.distance(&images[d.coord(j, p, s)])
                } else {
                    Ok(prod.norm())
                }
                .unwrap_or(f64::INFINITY);
                res.multiplicative = res.multiplicative.max(dev);
            }
        }
        res
    }

    /// Verify the morphism identities and tag the map accordingly.
    pub fn validate_morphism(self, tol: f64) -> Result<LinearMap> {
        let res = self.morphism_residuals();
        if res.multiplicative > tol {
            return Err(Error::NotMorphism {
                identity: "multiplicativity φ(e_pq)φ(e_rs) = δ_qr φ(e_ps)".into(),
                residual: res.multiplicative,
            });
        }
        if res.star > tol {
            return Err(Error::NotMorphism {
                identity: "star preservation φ(e_pq)* = φ(e_qp)".into(),
                residual: res.star,
            });
        }
        if res.unit > tol {
            return Err(Error::NotMorphism {
                identity: "unitality φ(1) = 1".into(),
                residual: res.unit,
            });
        }
        Ok(self.assume_kind(MapKind::Morphism))
    }

    /// Choi matrices of every block component `F_{ij}: M_{mⱼ} → M_{nᵢ}`.
    pub fn choi_blocks(&self) -> Vec<ChoiBlock> {
        let mut out = Vec::with_capacity(self.domain.num_blocks() * self.codomain.num_blocks());
        for i in 0..self.codomain.num_blocks() {
            let n = self.codomain.block(i);
            for j in 0..self.domain.num_blocks() {
                let m = self.domain.block(j);
                let mut choi = CMatrix::zeros(n * m, n * m);
                for p in 0..m {
                    for q in 0..m {
                        let col = self.domain.coord(j, p, q);
                        for r in 0..n {
                            for s in 0..n {
                                let v = self.matrix[(self.codomain.coord(i, r, s), col)];
                                if v != ZERO {
                                    choi[(r * m + p, s * m + q)] = v;
                                }
                            }
                        }
                    }
                }
                out.push(ChoiBlock {
                    codomain_block: i,
                    domain_block: j,
                    matrix: choi,
                });
            }
        }
        out
    }

    /// The most negative Choi eigenvalue, with its block pair.
    pub fn min_choi_eigenvalue(&self) -> (f64, usize, usize) {
        self.choi_blocks()
            .into_iter()
            .map(|b| {
                let herm = linalg::hermitian_defect(&b.matrix);
                // a non-Hermitian Choi matrix cannot be PSD
                let ev = linalg::min_eigenvalue(&b.matrix) - herm;
                (ev, b.codomain_block, b.domain_block)
            })
            .fold((f64::INFINITY, 0, 0), |acc, x| if x.0 < acc.0 { x } else { acc })
    }

    /// Accept iff every Choi block is PSD and the unit is preserved.
    pub fn validate_cp_unital(self, tol: f64) -> Result<LinearMap> {
        let (ev, i, j) = self.min_choi_eigenvalue();
        if ev < -tol {
            return Err(Error::ChoiNegative {
                codomain_block: i,
                domain_block: j,
                eigenvalue: ev,
            });
        }
        let residual = self.unit_residual();
        if residual > tol {
            return Err(Error::NonUnital { residual });
        }
        let kind = if self.kind == MapKind::Morphism {
            MapKind::Morphism
        } else {
            MapKind::CpUnital
        };
        Ok(self.assume_kind(kind))
    }
}

/// `make_morphism`: build from basis images and validate.
pub fn make_morphism(domain: &Algebra, codomain: &Algebra, images: &[Element], tol: f64) -> Result<LinearMap> {
    LinearMap::from_basis_images(domain, codomain, images)?.validate_morphism(tol)
}

/// `table[a · dim(B) + b] = coordinate of e_a ⊗ e_b in A ⊗ B`.
pub(crate) fn coord_table(a: &Algebra, b: &Algebra) -> Vec<usize> {
    let mut t = Vec::with_capacity(a.dim() * b.dim());
    for i in 0..a.dim() {
        for j in 0..b.dim() {
            t.push(a.tensor_coord(b, i, j));
        }
    }
    t
}

fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != ZERO {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// The adjoint of an NFMO `F: B → A`, sending states of `A` to states of `B`
/// by `ρ ↦ ρ ∘ F`.
#[derive(Clone, Debug)]
pub struct Transition {
    nfmo: LinearMap,
}

impl Transition {
    pub fn map(&self) -> &LinearMap {
        &self.nfmo
    }

    /// Algebra whose states are consumed.
    pub fn source(&self) -> &Algebra {
        self.nfmo.codomain()
    }

    /// Algebra whose states are produced.
    pub fn target(&self) -> &Algebra {
        self.nfmo.domain()
    }

    /// Linear extension to arbitrary density blocks on the source.
    pub fn apply_densities(&self, densities: &[CMatrix]) -> Result<Vec<CMatrix>> {
        let src = self.source();
        let elem = Element::new(src, densities.to_vec())?;
        let w = functional_of_densities(&elem);
        let pulled: CVector = self.nfmo.matrix().transpose() * w;
        Ok(densities_of_functional(self.target(), &pulled))
    }

    pub fn apply(&self, state: &State) -> Result<State> {
        if state.algebra() != self.source() {
            return Err(Error::Dimension(format!(
                "transition on states of {:?} applied to a state of {:?}",
                self.source(),
                state.algebra()
            )));
        }
        let dens = self.apply_densities(state.densities())?;
        Ok(State::new_unchecked(self.target(), dens))
    }
}

/// `adjoint_transition`: requires a unital CP map (validated if still raw).
pub fn adjoint_transition(f: &LinearMap) -> Result<Transition> {
    let nfmo = match f.kind() {
        MapKind::Raw => f.clone().validate_cp_unital(DEFAULT_TOL)?,
        _ => f.clone(),
    };
    Ok(Transition { nfmo })
}

/// Coefficients `w` with `Σ_j tr(ρ_j x_j) = Σ_c w_c x_c`.
pub(crate) fn functional_of_densities(rho: &Element) -> CVector {
    let alg = rho.algebra();
    CVector::from_iterator(
        alg.dim(),
        (0..alg.dim()).map(|c| {
            let (j, p, q) = alg.locate(c);
            rho.block(j)[(q, p)]
        }),
    )
}

pub(crate) fn densities_of_functional(alg: &Algebra, w: &CVector) -> Vec<CMatrix> {
    alg.blocks()
        .iter()
        .enumerate()
        .map(|(j, &n)| CMatrix::from_fn(n, n, |q, p| w[alg.coord(j, p, q)]))
        .collect()
}

/// All multiplicity vectors `k` with `Σⱼ kⱼ·mⱼ = size` for the blocks `mⱼ` of
/// `domain`, i.e. the unital representations of `domain` on `ℂ^size` up to
/// unitary equivalence. Enumeration is bounded by `kⱼ ≤ size / mⱼ` and stops
/// after `limit` solutions.
pub fn unital_multiplicities(domain: &Algebra, size: usize, limit: usize) -> Vec<Vec<usize>> {
    fn rec(blocks: &[usize], j: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if j == blocks.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..=left / blocks[j] {
            cur.push(k);
            rec(blocks, j + 1, left - k * blocks[j], cur, out, limit);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(domain.blocks(), 0, size, &mut Vec::new(), &mut out, limit);
    out
}

/// The unital morphism `b ↦ U_i (⊕ⱼ I_{k_ij} ⊗ bⱼ) U_i*` into the algebra with
/// blocks `Σⱼ k_ij mⱼ`. `unitaries`, when given, supplies one `U_i` per block.
pub fn representation(
    domain: &Algebra,
    multiplicities: &[Vec<usize>],
    unitaries: Option<&[CMatrix]>,
) -> Result<LinearMap> {
    let mut sizes = Vec::with_capacity(multiplicities.len());
    for (i, k) in multiplicities.iter().enumerate() {
        if k.len() != domain.num_blocks() {
            return Err(Error::Dimension(format!(
                "multiplicity vector {i} has {} entries for {} domain blocks",
                k.len(),
                domain.num_blocks()
            )));
        }
        let size: usize = k.iter().zip(domain.blocks()).map(|(k, m)| k * m).sum();
        if size == 0 {
            return Err(Error::UnsupportedShape(format!("codomain block {i} would be empty")));
        }
        sizes.push(size);
    }
    let codomain = Algebra::new(sizes)?;
    if let Some(us) = unitaries {
        if us.len() != codomain.num_blocks()
            || us.iter().zip(codomain.blocks()).any(|(u, &n)| u.shape() != (n, n))
        {
            return Err(Error::Dimension("unitaries do not match the codomain blocks".into()));
        }
    }
    let map = LinearMap::from_fn(domain, &codomain, |e| {
        let mats = multiplicities
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let n = codomain.block(i);
                let mut m = CMatrix::zeros(n, n);
                let mut at = 0;
                for (j, &kj) in k.iter().enumerate() {
                    let bj = e.block(j);
                    let mj = domain.block(j);
                    for _ in 0..kj {
                        m.view_mut((at, at), (mj, mj)).copy_from(bj);
                        at += mj;
                    }
                }
                match unitaries {
                    Some(us) => &us[i] * m * us[i].adjoint(),
                    None => m,
                }
            })
            .collect();
        Element::new(&codomain, mats)
    })?;
    Ok(map.assume_kind(MapKind::Morphism))
}
