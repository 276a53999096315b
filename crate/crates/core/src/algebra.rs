//! Finite-dimensional C*-algebras `⊕ᵢ M_{nᵢ}`, their elements and states.
//!
//! Every algebra is stored in canonical multi-matrix form. Elements carry one
//! dense complex matrix per block; states carry one density matrix per block
//! and act through the trace pairing `ω(a) = Σᵢ tr(ρᵢ aᵢ)`.
//!
//! Flattened coordinates enumerate the matrix units `e^{(j)}_{pq}` block by
//! block, row-major inside each block. Tensor products order their blocks
//! lexicographically with the left factor outer, and place `e_{pq} ⊗ e_{p'q'}`
//! at row `p·m + p'`, column `q·m + q'` (the Kronecker convention). Under this
//! convention `(A⊗B)⊗C` and `A⊗(B⊗C)` have identical coordinates.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};

/// Default tolerance for positivity and equality checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A finite-dimensional C*-algebra `M_{n₁} ⊕ ⋯ ⊕ M_{n_k}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Algebra {
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
}

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Algebra{:?}", self.blocks)
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|n| format!("M{n}")).collect();
        write!(f, "{}", parts.join("⊕"))
    }
}

impl Algebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidSpec("block list is empty".into()));
        }
        if let Some(pos) = blocks.iter().position(|&n| n == 0) {
            return Err(Error::InvalidSpec(format!("block {pos} has size 0")));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for &n in &blocks {
            offsets.push(dim);
            dim += n * n;
        }
        Ok(Self {
            blocks,
            offsets,
            dim,
        })
    }

    /// The full matrix algebra `M_n`.
    pub fn full(n: usize) -> Self {
        Self::new(vec![n]).expect("n >= 1")
    }

    /// The commutative algebra `ℂ^k` of functions on `k` points.
    pub fn commutative(k: usize) -> Self {
        Self::new(vec![1; k]).expect("k >= 1")
    }

    /// The scalars `ℂ`.
    pub fn scalars() -> Self {
        Self::full(1)
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, j: usize) -> usize {
        self.blocks[j]
    }

    /// Complex dimension `Σ nᵢ²`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    /// Sum of the block sizes, i.e. the size of the defining representation.
    pub fn total_size(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn block_offset(&self, j: usize) -> usize {
        self.offsets[j]
    }

    /// Flattened coordinate of the matrix unit `e^{(j)}_{pq}`.
    pub fn coord(&self, j: usize, p: usize, q: usize) -> usize {
        let n = self.blocks[j];
        debug_assert!(p < n && q < n);
        self.offsets[j] + p * n + q
    }

    /// Inverse of [`Algebra::coord`].
    pub fn locate(&self, coord: usize) -> (usize, usize, usize) {
        debug_assert!(coord < self.dim);
        let j = match self.offsets.binary_search(&coord) {
            Ok(j) => j,
            Err(j) => j - 1,
        };
        let n = self.blocks[j];
        let local = coord - self.offsets[j];
        (j, local / n, local % n)
    }

    pub fn zero(&self) -> Element {
        Element {
            algebra: self.clone(),
            mats: self.blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect(),
        }
    }

    pub fn unit(&self) -> Element {
        Element {
            algebra: self.clone(),
            mats: self
                .blocks
                .iter()
                .map(|&n| CMatrix::identity(n, n))
                .collect(),
        }
    }

    /// The matrix unit with the given flattened coordinate.
    pub fn basis_element(&self, coord: usize) -> Element {
        let (j, p, q) = self.locate(coord);
        let mut e = self.zero();
        e.mats[j][(p, q)] = ONE;
        e
    }

    pub fn matrix_unit(&self, j: usize, p: usize, q: usize) -> Element {
        self.basis_element(self.coord(j, p, q))
    }

    pub fn basis(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.dim).map(|i| self.basis_element(i))
    }

    /// `A ⊗ B`: blocks `nᵢ·mⱼ`, lexicographic with the left index outer.
    pub fn tensor(&self, other: &Algebra) -> Algebra {
        let blocks = self
            .blocks
            .iter()
            .flat_map(|&n| other.blocks.iter().map(move |&m| n * m))
            .collect();
        Algebra::new(blocks).expect("nonempty")
    }

    /// `A ⊕ B`: block list concatenation.
    pub fn direct_sum(&self, other: &Algebra) -> Algebra {
        let mut blocks = self.blocks.clone();
        blocks.extend_from_slice(&other.blocks);
        Algebra::new(blocks).expect("nonempty")
    }

    /// Coordinate in `self ⊗ other` of `e_a ⊗ e_b`.
    pub fn tensor_coord(&self, other: &Algebra, a: usize, b: usize) -> usize {
        let (i, p, q) = self.locate(a);
        let (j, r, s) = other.locate(b);
        let m = other.blocks[j];
        let size = self.blocks[i] * m;
        // offset of the (i, j) block inside self ⊗ other
        let offset: usize = self.offsets[i] * other.dim + (0..j).map(|jj| {
            let v = self.blocks[i] * other.blocks[jj];
            v * v
        }).sum::<usize>();
        offset + (p * m + r) * size + (q * m + s)
    }

    /// Inverse of [`Algebra::tensor_coord`].
    pub fn split_tensor_coord(&self, other: &Algebra, coord: usize) -> (usize, usize) {
        // locate the A block by the cumulative n_i² · dim(B) offsets
        let mut i = self.num_blocks() - 1;
        for k in 1..self.num_blocks() {
            if self.offsets[k] * other.dim > coord {
                i = k - 1;
                break;
            }
        }
        let n = self.blocks[i];
        let mut rest = coord - self.offsets[i] * other.dim;
        let mut j = 0;
        loop {
            let v = n * other.blocks[j];
            if rest < v * v {
                break;
            }
            rest -= v * v;
            j += 1;
        }
        let m = other.blocks[j];
        let size = n * m;
        let (row, col) = (rest / size, rest % size);
        let (p, r) = (row / m, row % m);
        let (q, s) = (col / m, col % m);
        (self.coord(i, p, q), other.coord(j, r, s))
    }
}

/// An element of an [`Algebra`]: one square matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    algebra: Algebra,
    mats: Vec<CMatrix>,
}

impl Element {
    pub fn new(algebra: &Algebra, mats: Vec<CMatrix>) -> Result<Self> {
        if mats.len() != algebra.num_blocks() {
            return Err(Error::Dimension(format!(
                "{} matrices supplied for {} blocks",
                mats.len(),
                algebra.num_blocks()
            )));
        }
        for (j, (m, &n)) in mats.iter().zip(algebra.blocks()).enumerate() {
            if m.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "block {j}: expected {n}x{n}, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            mats,
        })
    }

    /// Element of a single-block algebra `M_n`.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Dimension("matrix must be square and nonempty".into()));
        }
        let alg = Algebra::full(m.nrows());
        Ok(Self {
            algebra: alg,
            mats: vec![m],
        })
    }

    /// Element of `ℂ^k` given by its values.
    pub fn from_function(values: &[Complex64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpec("empty function".into()));
        }
        let alg = Algebra::commutative(values.len());
        let mats = values
            .iter()
            .map(|&v| CMatrix::from_element(1, 1, v))
            .collect();
        Ok(Self {
            algebra: alg,
            mats,
        })
    }

    pub fn from_coords(algebra: &Algebra, coords: &[Complex64]) -> Result<Self> {
        if coords.len() != algebra.dim() {
            return Err(Error::Dimension(format!(
                "{} coordinates for an algebra of dimension {}",
                coords.len(),
                algebra.dim()
            )));
        }
        let mats = algebra
            .blocks()
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                let off = algebra.block_offset(j);
                CMatrix::from_row_slice(n, n, &coords[off..off + n * n])
            })
            .collect();
        Ok(Self {
            algebra: algebra.clone(),
            mats,
        })
    }

    pub fn coords(&self) -> CVector {
        let mut v = CVector::zeros(self.algebra.dim());
        for (j, m) in self.mats.iter().enumerate() {
            let n = m.nrows();
            let off = self.algebra.block_offset(j);
            for p in 0..n {
                for q in 0..n {
                    v[off + p * n + q] = m[(p, q)];
                }
            }
        }
        v
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn block(&self, j: usize) -> &CMatrix {
        &self.mats[j]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.mats
    }

    fn same_algebra(&self, other: &Element) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::Dimension(format!(
                "algebra mismatch: {:?} vs {:?}",
                self.algebra, other.algebra
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Element, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Element> {
        self.same_algebra(other)?;
        Ok(Element {
            algebra: self.algebra.clone(),
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Blockwise matrix product `self · other`.
    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a * b)
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a * b - b * a)
    }

    pub fn scale(&self, s: Complex64) -> Element {
        Element {
            algebra: self.algebra.clone(),
            mats: self.mats.iter().map(|m| m * s).collect(),
        }
    }

    pub fn adjoint(&self) -> Element {
        Element {
            algebra: self.algebra.clone(),
            mats: self.mats.iter().map(|m| m.adjoint()).collect(),
        }
    }

    /// Frobenius norm over all blocks.
    pub fn norm(&self) -> f64 {
        self.mats
            .iter()
            .map(|m| m.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn distance(&self, other: &Element) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.mats.iter().all(|m| linalg::hermitian_defect(m) <= tol)
    }

    /// Hermitian in every block with minimum eigenvalue `≥ −tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.mats.iter().all(|m| linalg::min_eigenvalue(m) >= -tol)
    }

    /// Kronecker product placed according to the tensor block convention.
    pub fn tensor(&self, other: &Element) -> Element {
        let algebra = self.algebra.tensor(&other.algebra);
        let mats = self
            .mats
            .iter()
            .flat_map(|a| other.mats.iter().map(move |b| a.kronecker(b)))
            .collect();
        Element { algebra, mats }
    }

    /// `(self, other)` in `A ⊕ B`.
    pub fn direct_sum(&self, other: &Element) -> Element {
        let algebra = self.algebra.direct_sum(&other.algebra);
        let mut mats = self.mats.clone();
        mats.extend(other.mats.iter().cloned());
        Element { algebra, mats }
    }
}

/// A state stored by its density blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    algebra: Algebra,
    densities: Vec<CMatrix>,
}

impl State {
    /// Validates shapes, Hermiticity, positivity and unit total trace.
    pub fn new(algebra: &Algebra, densities: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let as_elem = Element::new(algebra, densities).map_err(|e| Error::InvalidState(e.to_string()))?;
        for (j, m) in as_elem.mats.iter().enumerate() {
            let defect = linalg::hermitian_defect(m);
            if defect > tol {
                return Err(Error::InvalidState(format!(
                    "density block {j} is not Hermitian (defect {defect:.3e})"
                )));
            }
            let min = linalg::min_eigenvalue(m);
            if min < -tol {
                return Err(Error::InvalidState(format!(
                    "density block {j} has negative eigenvalue {min:.3e}"
                )));
            }
        }
        let trace: Complex64 = as_elem.mats.iter().map(|m| m.trace()).sum();
        if (trace - ONE).norm() > tol {
            return Err(Error::InvalidState(format!(
                "total trace is {:.12} + {:.3e}i, expected 1",
                trace.re, trace.im
            )));
        }
        Ok(Self {
            algebra: algebra.clone(),
            densities: as_elem.mats,
        })
    }

    pub(crate) fn new_unchecked(algebra: &Algebra, densities: Vec<CMatrix>) -> Self {
        Self {
            algebra: algebra.clone(),
            densities,
        }
    }

    /// The normalized trace `tr/Σnᵢ`, i.e. density `I/Σnᵢ` in every block.
    pub fn maximally_mixed(algebra: &Algebra) -> Self {
        let total = algebra.total_size() as f64;
        let densities = algebra
            .blocks()
            .iter()
            .map(|&n| CMatrix::identity(n, n) * linalg::c(1.0 / total, 0.0))
            .collect();
        Self::new_unchecked(algebra, densities)
    }

    /// The vector state `a ↦ ⟨ξ, a_j ξ⟩ / ‖ξ‖²` supported on block `j`.
    pub fn vector_state(algebra: &Algebra, block: usize, xi: &CVector) -> Result<Self> {
        if block >= algebra.num_blocks() || xi.len() != algebra.block(block) {
            return Err(Error::Dimension("vector does not fit the block".into()));
        }
        let norm2 = xi.norm_squared();
        if norm2 == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let mut densities: Vec<CMatrix> = algebra.blocks().iter().map(|&n| CMatrix::zeros(n, n)).collect();
        densities[block] = (xi * xi.adjoint()) / linalg::c(norm2, 0.0);
        Ok(Self::new_unchecked(algebra, densities))
    }

    /// Diagonal state on `ℂ^k` with `eᵢ ↦ pᵢ`.
    pub fn from_probabilities(probs: &[f64], tol: f64) -> Result<Self> {
        check_probability_vector(probs, tol)?;
        let alg = Algebra::commutative(probs.len());
        let densities = probs
            .iter()
            .map(|&p| CMatrix::from_element(1, 1, linalg::c(p, 0.0)))
            .collect();
        Ok(Self::new_unchecked(&alg, densities))
    }

    /// The unique state on `ℂ`.
    pub fn scalar_unit() -> Self {
        Self::new_unchecked(&Algebra::scalars(), vec![CMatrix::identity(1, 1)])
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn densities(&self) -> &[CMatrix] {
        &self.densities
    }

    /// `Σᵢ tr(ρᵢ aᵢ)`.
    pub fn evaluate(&self, a: &Element) -> Result<Complex64> {
        if a.algebra != self.algebra {
            return Err(Error::Dimension(format!(
                "state on {:?} evaluated on element of {:?}",
                self.algebra, a.algebra
            )));
        }
        Ok(self
            .densities
            .iter()
            .zip(a.blocks())
            .map(|(rho, x)| trace_of_product(rho, x))
            .sum())
    }

    /// Value on the matrix unit with flattened coordinate `coord`: `(ρ_j)_{qp}`.
    pub fn evaluate_basis(&self, coord: usize) -> Complex64 {
        let (j, p, q) = self.algebra.locate(coord);
        self.densities[j][(q, p)]
    }

    /// Linear functional coefficients `w` with `ω(x) = Σ_c w_c x_c`.
    pub fn functional(&self) -> CVector {
        CVector::from_iterator(self.algebra.dim(), (0..self.algebra.dim()).map(|c| self.evaluate_basis(c)))
    }

    /// `ω₁ ⊗ ω₂`: Kronecker densities in tensor block order.
    pub fn tensor(&self, other: &State) -> State {
        let algebra = self.algebra.tensor(&other.algebra);
        let densities = self
            .densities
            .iter()
            .flat_map(|a| other.densities.iter().map(move |b| a.kronecker(b)))
            .collect();
        State { algebra, densities }
    }

    /// The densities viewed as an element of the same algebra.
    pub fn density_element(&self) -> Element {
        Element {
            algebra: self.algebra.clone(),
            mats: self.densities.clone(),
        }
    }

    /// Frobenius distance between density blocks.
    pub fn distance(&self, other: &State) -> Result<f64> {
        self.density_element().distance(&other.density_element())
    }

    /// Trace-norm distance `Σⱼ ‖ρⱼ − ρ'ⱼ‖₁`.
    pub fn trace_distance(&self, other: &State) -> Result<f64> {
        let d = self.density_element().sub(&other.density_element())?;
        Ok(d
            .blocks()
            .iter()
            .map(|m| linalg::hermitian_eigen(m).0.iter().map(|v| v.abs()).sum::<f64>())
            .sum())
    }

    /// Re-validate against `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        State::new(&self.algebra, self.densities.clone(), tol).map(|_| ())
    }

    /// Convex combination `(1−t)·self + t·other`.
    pub fn mix(&self, other: &State, t: f64) -> Result<State> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidState(format!("mixing weight {t} outside [0,1]")));
        }
        let d = self
            .density_element()
            .scale(linalg::c(1.0 - t, 0.0))
            .add(&other.density_element().scale(linalg::c(t, 0.0)))?;
        Ok(State::new_unchecked(&self.algebra, d.mats))
    }
}

fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub(crate) fn check_probability_vector(probs: &[f64], tol: f64) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::NotProbability("empty weight vector".into()));
    }
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, &p)| p < -tol || !p.is_finite()) {
        return Err(Error::NotProbability(format!("entry {i} is {p}")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::NotProbability(format!("entries sum to {sum}")));
    }
    Ok(())
}
