//! Stinespring dilation of unital CP maps into a single matrix block.
//!
//! For `F: B → M_h` the space `B ⊗ ℂ^h` carries the semi-inner product
//! `⟨x⊗ξ, y⊗η⟩ = ⟨ξ, F(x*y)η⟩`. Quotienting its null space gives `K`, on
//! which `B` acts by left multiplication (`π`), and `V ξ = [1 ⊗ ξ]` is an
//! isometry with `F(b) = V* π(b) V`.

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::maps::{LinearMap, MapKind};

/// Gram eigenvalues at or below this are treated as null directions.
pub const GRAM_CUTOFF: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct StinespringDilation {
    k_dim: usize,
    v: CMatrix,
    pi: LinearMap,
}

impl StinespringDilation {
    pub fn k_dim(&self) -> usize {
        self.k_dim
    }

    /// The isometry `V: H → K` as a `K_dim × h` matrix.
    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    /// The representation `π: B → M_{K_dim}`.
    pub fn pi(&self) -> &LinearMap {
        &self.pi
    }

    /// `‖V*V − I‖_F`.
    pub fn isometry_residual(&self) -> f64 {
        let h = self.v.ncols();
        linalg::frobenius(&(self.v.adjoint() * &self.v - CMatrix::identity(h, h)))
    }

    /// `V* π(b) V` for a domain element `b`.
    pub fn compress(&self, b: &Element) -> Result<CMatrix> {
        let pb = self.pi.apply(b)?;
        Ok(self.v.adjoint() * pb.block(0) * &self.v)
    }

    /// `max_b ‖V*π(b)V − F(b)‖` over the matrix units of the domain.
    pub fn reconstruction_residual(&self, f: &LinearMap) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..f.domain().dim() {
            let e = f.domain().basis_element(k);
            let got = self.compress(&e)?;
            let want = f.image(k);
            worst = worst.max(linalg::frobenius(&(got - want.block(0))));
        }
        Ok(worst)
    }
}

/// Minimal Stinespring dilation of a unital CP map into `M_h`.
pub fn stinespring_dilate(f: &LinearMap, tol: f64) -> Result<StinespringDilation> {
    let cod = f.codomain();
    if cod.num_blocks() != 1 {
        return Err(Error::UnsupportedShape(format!(
            "Stinespring dilation needs a single-block codomain, got {:?}",
            cod
        )));
    }
    let f = if f.kind() == MapKind::Raw {
        f.clone().validate_cp_unital(tol)?
    } else {
        f.clone()
    };
    let b = f.domain().clone();
    let h = cod.block(0);
    let d = b.dim();
    let n = d * h;
    let images: Vec<CMatrix> = (0..d).map(|k| f.image(k).block(0).clone()).collect();

    // G[(x,s),(y,t)] = F(x* y)_{st}; for x = e_{pq}, y = e_{rs'} in the same
    // block, x* y = δ_{pr} e_{q s'}
    let mut gram = CMatrix::zeros(n, n);
    for x in 0..d {
        let (j, p, q) = b.locate(x);
        let m = b.block(j);
        for s2 in 0..m {
            let y = b.coord(j, p, s2);
            let img = &images[b.coord(j, q, s2)];
            for s in 0..h {
                for t in 0..h {
                    gram[(x * h + s, y * h + t)] = img[(s, t)];
                }
            }
        }
    }
    let (values, vectors) = linalg::hermitian_eigen(&gram);
    let keep: Vec<usize> = (0..n).filter(|&i| values[i] > GRAM_CUTOFF).collect();
    let k_dim = keep.len();
    if k_dim == 0 {
        return Err(Error::NumericalFailure("Gram matrix of the dilation vanishes".into()));
    }
    // R = Λ^{1/2} W*  (K × N),  R⁺ = W Λ^{-1/2}  (N × K)
    let mut r = CMatrix::zeros(k_dim, n);
    let mut r_plus = CMatrix::zeros(n, k_dim);
    for (row, &i) in keep.iter().enumerate() {
        let sq = values[i].sqrt();
        for col in 0..n {
            let w = vectors[(col, i)];
            r[(row, col)] = w.conj() * sq;
            r_plus[(col, row)] = w / sq;
        }
    }

    let mut v = CMatrix::zeros(k_dim, h);
    for j in 0..b.num_blocks() {
        for p in 0..b.block(j) {
            let x = b.coord(j, p, p);
            for s in 0..h {
                let col = r.column(x * h + s).into_owned();
                let mut dst = v.column_mut(s);
                dst += col;
            }
        }
    }

    // π(e_{pq}) = Σ_{s',s} R[:, (e_{ps'}, s)] R⁺[(e_{qs'}, s), :]
    let target = Algebra::full(k_dim);
    let pi = LinearMap::from_fn(&b, &target, |e| {
        let mut out = CMatrix::zeros(k_dim, k_dim);
        for x in 0..d {
            let (j, p, q) = b.locate(x);
            let coef = e.block(j)[(p, q)];
            if coef == ZERO {
                continue;
            }
            for s2 in 0..b.block(j) {
                let left = b.coord(j, p, s2);
                let right = b.coord(j, q, s2);
                let rl = r.columns(left * h, h);
                let rr = r_plus.rows(right * h, h);
                out += (rl * rr) * coef;
            }
        }
        Element::new(&target, vec![out])
    })?;
    let pi = pi.validate_morphism(tol).map_err(|e| {
        Error::NumericalFailure(format!("dilation representation is not a morphism: {e}"))
    })?;
    Ok(StinespringDilation { k_dim, v, pi })
}
