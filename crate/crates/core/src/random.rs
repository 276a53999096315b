//! Seeded pseudorandom fixtures: elements, states, unitaries, morphisms,
//! random quantum maps and unital CP maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::algebra::{Algebra, Element, State, DEFAULT_TOL};
use crate::classical::ClassicalRandomMap;
use crate::linalg::{self, c, CMatrix};
use crate::maps::{representation, unital_multiplicities, LinearMap};
use crate::rqm::{Qfm, Rqm};

/// Reproducible source of random test objects.
#[derive(Clone, Debug)]
pub struct Fixtures {
    rng: ChaCha8Rng,
}

impl Fixtures {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Complex Ginibre matrix with `E|z|² = 1`.
    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_fn(rows, cols, |_, _| {
            let re: f64 = StandardNormal.sample(&mut self.rng);
            let im: f64 = StandardNormal.sample(&mut self.rng);
            c(re * s, im * s)
        })
    }

    pub fn random_element(&mut self, algebra: &Algebra) -> Element {
        let mats = algebra.blocks().iter().map(|&n| self.gaussian_matrix(n, n)).collect();
        Element::new(algebra, mats).expect("shapes match")
    }

    /// Normalized `G G*` per block.
    pub fn random_state(&mut self, algebra: &Algebra) -> State {
        let mats: Vec<CMatrix> = algebra
            .blocks()
            .iter()
            .map(|&n| {
                let g = self.gaussian_matrix(n, n);
                &g * g.adjoint()
            })
            .collect();
        let total: f64 = mats.iter().map(|m| m.trace().re).sum();
        let mats = mats.into_iter().map(|m| m / c(total, 0.0)).collect();
        State::new(algebra, mats, DEFAULT_TOL).expect("G G* is a valid density")
    }

    /// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
    pub fn random_unitary(&mut self, n: usize) -> CMatrix {
        let qr = self.gaussian_matrix(n, n).qr();
        let (mut q, r) = qr.unpack();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
            let mut col = q.column_mut(j);
            col *= phase;
        }
        q
    }

    /// Probability vector drawn from the flat Dirichlet distribution.
    pub fn random_probability(&mut self, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut self.rng)).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / s).collect()
    }

    pub fn random_stochastic(&mut self, rows: usize, cols: usize) -> Vec<Vec<f64>> {
        (0..rows).map(|_| self.random_probability(cols)).collect()
    }

    /// A random unital morphism `domain → codomain`, or `None` when no unital
    /// representation of `domain` fits some codomain block.
    pub fn random_morphism(&mut self, domain: &Algebra, codomain: &Algebra) -> Option<LinearMap> {
        let mut mults = Vec::with_capacity(codomain.num_blocks());
        for &n in codomain.blocks() {
            let options = unital_multiplicities(domain, n, 64);
            if options.is_empty() {
                return None;
            }
            mults.push(options[self.index(options.len())].clone());
        }
        let us: Vec<CMatrix> = codomain.blocks().iter().map(|&n| self.random_unitary(n)).collect();
        Some(representation(domain, &mults, Some(&us)).expect("shapes by construction"))
    }

    pub fn random_qfm(&mut self, source: &Algebra, target: &Algebra, parameter: &Algebra) -> Option<Qfm> {
        let phi = self.random_morphism(source, &target.tensor(parameter))?;
        Some(Qfm::new(target, parameter, phi, DEFAULT_TOL).expect("random morphism is valid"))
    }

    pub fn random_rqm(&mut self, source: &Algebra, target: &Algebra, parameter: &Algebra) -> Option<Rqm> {
        let qfm = self.random_qfm(source, target, parameter)?;
        let nu = self.random_state(parameter);
        Some(Rqm::new(qfm, nu).expect("state on the parameter algebra"))
    }

    /// A classical random map `X × Z → Y` with uniform table entries and a
    /// Dirichlet `ν`.
    pub fn random_classical_map(&mut self, x: usize, y: usize, z: usize) -> ClassicalRandomMap {
        let table = (0..x).map(|_| (0..z).map(|_| self.index(y)).collect()).collect();
        let nu = self.random_probability(z);
        ClassicalRandomMap::new(y, table, nu, DEFAULT_TOL).expect("valid by construction")
    }

    /// A random unital CP map `F(b)ᵢ = Σ_{j,l} K*_{ijl} bⱼ K_{ijl}` with
    /// `kraus` operators per block pair.
    pub fn random_cp_unital(&mut self, domain: &Algebra, codomain: &Algebra, kraus: usize) -> LinearMap {
        let kraus = kraus.max(1);
        let mut ops: Vec<Vec<Vec<CMatrix>>> = Vec::new();
        for &n in codomain.blocks() {
            let mut per_block: Vec<Vec<CMatrix>> = domain
                .blocks()
                .iter()
                .map(|&m| (0..kraus).map(|_| self.gaussian_matrix(m, n)).collect())
                .collect();
            let mut s = CMatrix::zeros(n, n);
            for k in per_block.iter().flatten() {
                s += k.adjoint() * k;
            }
            let inv = linalg::inverse_sqrt(&s, 1e-12).expect("Gaussian Kraus sum is invertible");
            for k in per_block.iter_mut().flatten() {
                *k = &*k * &inv;
            }
            ops.push(per_block);
        }
        LinearMap::from_fn(domain, codomain, |e| {
            let mats = ops
                .iter()
                .zip(codomain.blocks())
                .map(|(per_block, &n)| {
                    let mut out = CMatrix::zeros(n, n);
                    for (j, ks) in per_block.iter().enumerate() {
                        for k in ks {
                            out += k.adjoint() * e.block(j) * k;
                        }
                    }
                    out
                })
                .collect();
            Element::new(codomain, mats)
        })
        .expect("shapes by construction")
        .validate_cp_unital(1e-8)
        .expect("Kraus form is unital CP")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let a = Algebra::full(2);
        let s1 = Fixtures::new(0).random_state(&a);
        let s2 = Fixtures::new(0).random_state(&a);
        assert_eq!(s1, s2);
    }

    #[test]
    fn random_states_are_valid() {
        let mut fx = Fixtures::new(1);
        for blocks in [vec![2], vec![1, 1, 1], vec![1, 3]] {
            let a = Algebra::new(blocks).unwrap();
            fx.random_state(&a).validate(DEFAULT_TOL).unwrap();
        }
    }

    #[test]
    fn adjoint_square_is_positive() {
        let mut fx = Fixtures::new(2);
        let a = Algebra::new(vec![2, 3]).unwrap();
        for _ in 0..10 {
            let x = fx.random_element(&a);
            assert!(x.adjoint().mul(&x).unwrap().is_positive(DEFAULT_TOL));
        }
    }

    #[test]
    fn unitary_is_unitary() {
        let u = Fixtures::new(3).random_unitary(4);
        assert!(linalg::frobenius(&(u.adjoint() * &u - CMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn random_morphisms_validate() {
        let mut fx = Fixtures::new(4);
        let b = Algebra::new(vec![1, 2]).unwrap();
        let a = Algebra::new(vec![3, 2, 4]).unwrap();
        let phi = fx.random_morphism(&b, &a).unwrap();
        phi.validate_morphism(1e-10).unwrap();
        assert!(fx.random_morphism(&Algebra::full(2), &Algebra::full(3)).is_none());
    }
}
